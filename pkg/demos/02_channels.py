"""The channel zoo: local noise, tensor lifting, and the CNOT gate.

Run: python3 demos/02_channels.py
"""
import numpy as np

from mubqpt import (
    apply_channel,
    channel_checks,
    concurrence,
    make_cnot,
    make_local_channel,
    parse_channel_spec,
    tensor_lift,
)

excited = np.diag([0.0, 1.0]).astype(complex)
for gamma in (0.0, 0.4, 1.0):
    ch = make_local_channel("amplitude_damping", gamma)
    out = apply_channel(ch, excited)
    print(f"amplitude damping g={gamma}: |1><1| decays to ground with "
          f"p={out[0, 0].real:.2f}")

print()
for spec in ("dep:0.1", "ad:0.4", "bpf:0.3"):
    ch = parse_channel_spec(spec, 4)  # lifted to both qubits
    checks = channel_checks(ch)
    print(f"{spec} on two qubits: {len(ch.operators)} operators, "
          f"trace-preserving={checks.trace_preserving}, unital={checks.unital}")

# CNOT flips the target exactly when the control is |1>.
cnot = make_cnot()
print("\nCNOT truth table:")
for k, label in enumerate(("00", "01", "10", "11")):
    ket = np.zeros(4); ket[k] = 1.0
    out = apply_channel(cnot, np.outer(ket, ket))
    result = format(int(np.argmax(np.diag(out.real))), "02b")
    print(f"  |{label}> -> |{result}>")

# Acting on a superposition control it entangles; local noise then
# degrades that entanglement.
plus0 = np.kron([1, 1], [1, 0]) / np.sqrt(2)
bell = apply_channel(cnot, np.outer(plus0, plus0))
print(f"\nconcurrence of CNOT(|+0>): {concurrence(bell):.4f}")
dep = make_local_channel("depolarizing", 0.2)
noisy = apply_channel(tensor_lift(dep, dep), bell)
print(f"after depolarizing p=0.2 on both qubits: {concurrence(noisy):.4f}")
