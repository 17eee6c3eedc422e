"""Build maximal basis sets, check them, and price their measurements.

Run: python3 demos/01_build_bases.py
"""
import numpy as np

from mubqpt import (
    complexity_totals,
    default_complexity,
    factorizability,
    generate_mub,
    n_projectors,
    verify_mub,
)

for dim in (2, 3, 4, 5, 7, 8):
    mub_set = generate_mub(dim)
    report = verify_mub(mub_set)
    print(
        f"D={dim}: {dim + 1} bases, {n_projectors(dim)} projectors, "
        f"orthonormality off by {report.max_orthonormality_violation:.1e}, "
        f"unbiasedness off by {report.max_unbiasedness_violation:.1e} "
        f"-> {'ok' if report.passed else 'BROKEN'}"
    )

# Cross-basis overlaps: every |<m|n>|^2 between different bases is 1/D.
mub_set = generate_mub(3)
v = mub_set.vectors()
gram = np.abs(v.conj() @ v.T) ** 2
off_block = gram[:3, 3:]
print(f"\nD=3 cross overlaps: min {off_block.min():.6f}, max {off_block.max():.6f}"
      f" (expect 1/3 = {1 / 3:.6f})")

# The two-qubit set splits into product bases and entangled ones;
# only the entangled bases need a two-qubit gate to measure.
mub_set = generate_mub(4)
print("\nD=4 per-basis structure:")
for gamma in range(5):
    product = factorizability(mub_set.bases[gamma], (2, 2))
    print(f"  basis {gamma}: {'product' if product else 'entangled'}")

model = default_complexity(mub_set)
totals = complexity_totals(model, 4)
print(f"per-basis gate costs {model.c_alpha}, total C={totals['C']}, "
      f"full reconstruction uses D*C^2 = {totals['qpt_gates']} two-qubit gates")
