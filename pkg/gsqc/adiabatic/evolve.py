"""Time-dependent Schrodinger integration of H(lambda(t / T)).

hbar = 1; times are in units of hbar / energy scale. Each step applies the
fourth-order commutator-free exponential scheme

    psi <- exp(-i h (a1 H(t1) + a2 H(t2))) exp(-i h (a2 H(t1) + a1 H(t2))) psi

with Gauss nodes t1, t2. Both factors are exact exponentials of Hermitian
matrices, so each step is unitary up to the accuracy of the exponential.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import expm_multiply

from ..circuit.ir import Circuit
from ..compiler.basis import BasisIndex, ground_state, initial_state
from ..compiler.hamiltonian import HamiltonianFamily, OperatorMatrix
from .schedule import Schedule

logger = logging.getLogger(__name__)

DT_SAFETY = 0.1
MIN_STEPS = 200
DEFAULT_SAMPLES = 201
DRIFT_ABORT = 1e-6

# below this dimension a dense expm beats expm_multiply
_EXPM_SPARSE_MIN_DIM = 64

_SQRT3 = math.sqrt(3.0)
_NODES = (0.5 - _SQRT3 / 6, 0.5 + _SQRT3 / 6)
_A1 = (3 - 2 * _SQRT3) / 12
_A2 = (3 + 2 * _SQRT3) / 12


class TimeStepError(ValueError):
    """Raised before stepping when dt exceeds the stability limit."""

    def __init__(self, dt: float, suggested: float) -> None:
        self.dt = dt
        self.suggested = suggested
        super().__init__(f"dt={dt:.6g} exceeds 0.1/||H|| bound; use dt <= {suggested:.6g}")


class IntegratorError(RuntimeError):
    """Raised when the state norm drifts beyond DRIFT_ABORT."""

    def __init__(self, step: int, dt: float, drift: float) -> None:
        self.step = step
        self.dt = dt
        self.drift = drift
        super().__init__(f"norm drift {drift:.3g} at step {step} (dt={dt:.6g})")


@dataclass
class EvolutionTrace:
    times: np.ndarray
    s: np.ndarray
    lam: np.ndarray
    fidelity: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    final_fidelity: float
    total_time: float
    dt: float
    num_steps: int
    schedule_kind: str
    max_norm_drift: float


def max_stable_dt(family: HamiltonianFamily) -> float:
    bound = family.norm_bound()
    return DT_SAFETY / bound if bound > 0 else math.inf


def evolve(
    circuit: Circuit,
    schedule: Schedule,
    dt: float | None = None,
    samples: int = DEFAULT_SAMPLES,
    family: HamiltonianFamily | None = None,
    input_bits: tuple[int, ...] | None = None,
) -> EvolutionTrace:
    """Run the adiabatic protocol from the lambda=0 ground state.

    ``dt=None`` picks the largest stable step, DT_SAFETY over the Gershgorin
    bound of the family. That bound depends on the gate entries, so two
    circuits with identical spectra can get different default steps; pass
    an explicit ``dt`` to run them on a common time grid. The number of
    steps is at least MIN_STEPS so the trace always resolves ``samples``
    points.
    """
    basis = BasisIndex.for_circuit(circuit)
    family = family or HamiltonianFamily.from_circuit(circuit, basis)
    limit = max_stable_dt(family)
    if dt is not None and not 0 < dt <= limit:
        raise TimeStepError(dt, limit)

    total = schedule.total_time
    step_dt = limit if dt is None else dt
    n_steps = 0 if total == 0 else max(math.ceil(total / step_dt), MIN_STEPS)
    h = total / n_steps if n_steps else 0.0
    samples = max(2, samples)
    targets = np.round(np.linspace(0, n_steps, samples)).astype(int)
    s_values = targets / n_steps if n_steps else np.linspace(0.0, 1.0, samples)

    psi = initial_state(basis, input_bits).amplitudes.copy()
    dense = basis.dimension < _EXPM_SPARSE_MIN_DIM
    rows: list[tuple[float, float, float, float, float, float]] = []
    max_drift = 0.0
    k = 0

    def record(t: float, s: float) -> None:
        lam = schedule.lam(s)
        ref = ground_state(circuit, lam, basis, input_bits).amplitudes
        h_now = family.at(lam).matrix
        nrm = float(np.linalg.norm(psi))
        fid = float(abs(np.vdot(ref, psi)) ** 2 / nrm**2)
        energy = float(np.vdot(psi, h_now @ psi).real / nrm**2)
        rows.append((t, s, lam, fid, energy, nrm))

    for step in range(n_steps + 1):
        while k < samples and targets[k] == step:
            record(step * h, float(s_values[k]))
            k += 1
        if step == n_steps:
            break
        t = step * h
        psi = _cf4_step(family, schedule, psi, t, h, total, dense)
        drift = abs(float(np.linalg.norm(psi)) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > DRIFT_ABORT:
            raise IntegratorError(step + 1, h, drift)

    times, s_arr, lam_arr, fid, energy, norm = (np.array(col) for col in zip(*rows))
    final_ref = ground_state(circuit, schedule.lam(1.0), basis, input_bits).amplitudes
    final_fidelity = float(abs(np.vdot(final_ref, psi)) ** 2 / np.vdot(psi, psi).real)
    logger.debug("evolve T=%.4g steps=%d final fidelity %.6g", total, n_steps, final_fidelity)
    return EvolutionTrace(
        times=times,
        s=s_arr,
        lam=lam_arr,
        fidelity=fid,
        energy=energy,
        norm=norm,
        final_fidelity=final_fidelity,
        total_time=total,
        dt=h,
        num_steps=n_steps,
        schedule_kind=schedule.kind.value,
        max_norm_drift=max_drift,
    )


def propagate(
    op: OperatorMatrix,
    psi: np.ndarray,
    duration: float,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Evolve under a fixed H; return (final state, energy after each step)."""
    n = max(1, math.ceil(duration / dt))
    h = duration / n
    matrix = op.matrix
    dense = matrix.shape[0] < _EXPM_SPARSE_MIN_DIM
    propagator = la.expm(-1j * h * matrix.toarray()) if dense else None
    energies = np.empty(n)
    for i in range(n):
        psi = propagator @ psi if dense else expm_multiply(-1j * h * matrix, psi)
        energies[i] = np.vdot(psi, matrix @ psi).real / np.vdot(psi, psi).real
    return psi, energies


def _cf4_step(
    family: HamiltonianFamily,
    schedule: Schedule,
    psi: np.ndarray,
    t: float,
    h: float,
    total: float,
    dense: bool,
) -> np.ndarray:
    lam1 = schedule.lam((t + _NODES[0] * h) / total)
    lam2 = schedule.lam((t + _NODES[1] * h) / total)
    for a, b in ((_A2, _A1), (_A1, _A2)):
        coeffs = {p: a * lam1**p + b * lam2**p for p in family.exponents}
        if dense:
            psi = la.expm(-1j * h * family.combine_dense(coeffs)) @ psi
        else:
            psi = expm_multiply(-1j * h * family.combine(coeffs), psi)
    return psi
