"""Bundled example circuits and circuit families."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .ir import Circuit, Gate1Q, Gate2Q, GateOp, Operation, custom_gate, named_gate

BELL_STAGES = ("before", "middle", "after")

# smallest N each parameterized circuit accepts
MIN_STEPS = {"bell-disentangle": 4, "identity": 1}

_T_DAGGER = custom_gate(named_gate("T").matrix.conj().T)


class FamilySizeError(ValueError):
    """Raised when a parameterized circuit is asked for too few steps."""

    def __init__(self, name: str, num_steps: int) -> None:
        self.minimum = MIN_STEPS[name]
        super().__init__(f"{name} needs at least {self.minimum} steps, got {num_steps}")


def deutsch_jozsa_example(f: tuple[int, int] = (0, 0)) -> Circuit:
    """Single-qubit Deutsch-Jozsa: H, oracle diag((-1)^f(0), (-1)^f(1)), H.

    Constant f leaves |0> (up to sign); balanced f sends it to |1>.
    """
    f0, f1 = (int(bool(v)) for v in f)
    return Circuit(
        num_qubits=1,
        steps=((_op(0, "H"),), (GateOp(0, _oracle_gate(f0, f1)),), (_op(0, "H"),)),
        name=f"deutsch-jozsa-f{f0}{f1}",
    )


def bell_disentangle(num_steps: int, stage: str = "middle") -> Circuit:
    """Two-qubit family: entangle into a Bell pair, then disentangle.

    Layers are H(0), CNOT(0,1), CNOT(0,1), H(0) with a string of
    ``num_steps - 4`` single-qubit layers at ``stage``. The string alternates
    H x H and T x T^dagger; both leave the Bell pair invariant, so the
    ``middle`` variant still returns |00>.
    """
    if num_steps < MIN_STEPS["bell-disentangle"]:
        raise FamilySizeError("bell-disentangle", num_steps)
    if stage not in BELL_STAGES:
        raise ValueError(f"unknown stage '{stage}' (valid: {', '.join(BELL_STAGES)})")

    string: list[tuple[Operation, ...]] = []
    for k in range(num_steps - 4):
        if k % 2 == 0:
            string.append((_op(0, "H"), _op(1, "H")))
        else:
            string.append((_op(0, "T"), GateOp(1, _T_DAGGER)))

    entangle = [(_op(0, "H"), _op(1, "I")), (Gate2Q(0, 1),)]
    disentangle = [(Gate2Q(0, 1),), (_op(0, "H"), _op(1, "I"))]

    if stage == "before":
        steps = string + entangle + disentangle
    elif stage == "middle":
        steps = entangle + string + disentangle
    else:
        steps = entangle + disentangle + string
    return Circuit(num_qubits=2, steps=tuple(steps), name=f"bell-disentangle-{stage}-{num_steps}")


def identity_chain(num_steps: int) -> Circuit:
    if num_steps < MIN_STEPS["identity"]:
        raise FamilySizeError("identity", num_steps)
    return Circuit(
        num_qubits=1,
        steps=tuple((_op(0, "I"),) for _ in range(num_steps)),
        name=f"identity-{num_steps}",
    )


def random_circuit(
    num_qubits: int,
    num_steps: int,
    seed: int = 0,
    cnot_probability: float = 0.3,
) -> Circuit:
    """Random layered circuit with Haar-random 1Q gates and random CNOT pairs."""
    rng = np.random.default_rng(seed)
    steps: list[tuple[Operation, ...]] = []
    for _ in range(num_steps):
        order = [int(q) for q in rng.permutation(num_qubits)]
        ops: list[Operation] = []
        while order:
            q = order.pop()
            if order and rng.random() < cnot_probability:
                ops.append(Gate2Q(control=q, target=order.pop()))
            else:
                ops.append(GateOp(q, custom_gate(unitary_group.rvs(2, random_state=rng))))
        steps.append(tuple(sorted(ops, key=_first_qubit)))
    return Circuit(num_qubits=num_qubits, steps=tuple(steps), name=f"random-{num_qubits}x{num_steps}-{seed}")


BUNDLED: dict[str, str] = {
    "deutsch-jozsa": "single-qubit Deutsch-Jozsa, f(0)=f(1)=0",
    "deutsch-jozsa-balanced": "single-qubit Deutsch-Jozsa, f(0)=0, f(1)=1",
    "bell-disentangle": "two-qubit Bell entangle/disentangle family (--steps, --stage)",
    "identity": "single-qubit identity chain (--steps)",
}


def bundled(name: str, num_steps: int = 6, stage: str = "middle") -> Circuit:
    if name == "deutsch-jozsa":
        return deutsch_jozsa_example((0, 0))
    if name == "deutsch-jozsa-balanced":
        return deutsch_jozsa_example((0, 1))
    if name == "bell-disentangle":
        return bell_disentangle(num_steps, stage)
    if name == "identity":
        return identity_chain(num_steps)
    raise KeyError(f"unknown example '{name}' (available: {', '.join(BUNDLED)})")


FAMILIES = ("bell-disentangle", "identity")


def family(name: str, stage: str = "middle"):
    """Return N -> Circuit for the families usable in sweeps."""
    if name == "bell-disentangle":
        return lambda n: bell_disentangle(n, stage)
    if name == "identity":
        return identity_chain
    raise KeyError(f"unknown family '{name}' (available: {', '.join(FAMILIES)})")


def _op(qubit: int, label: str) -> GateOp:
    return GateOp(qubit, named_gate(label))


def _oracle_gate(f0: int, f1: int) -> Gate1Q:
    if (f0, f1) == (0, 0):
        return named_gate("I")
    if (f0, f1) == (0, 1):
        return named_gate("Z")
    return custom_gate(np.diag([(-1.0) ** f0, (-1.0) ** f1]))


def _first_qubit(op: Operation) -> int:
    return op.control if isinstance(op, Gate2Q) else op.qubit
