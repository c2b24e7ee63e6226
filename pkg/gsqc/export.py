"""File formats: state vectors, operators, and plot-ready CSV/JSON tables."""
from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.io import mmread, mmwrite

from .adiabatic.evolve import EvolutionTrace
from .adiabatic.scaling import ScalingResult
from .compiler.basis import BasisIndex, StateVector
from .compiler.hamiltonian import OperatorMatrix
from .spectral.gaps import FamilySweep, GapProfile

STATE_MAGIC = b"GSQCSV01"
_STATE_HEADER = struct.Struct("<8sIIB15x")

SCHEMA_VERSION = "0.1"


class FormatError(ValueError):
    """Raised when a file does not match the expected layout."""


# --- state vectors ---

def write_state(path: Path, state: StateVector, metadata: dict[str, Any] | None = None) -> Path:
    """Binary amplitudes (32-byte header + little-endian complex128) and a JSON sidecar."""
    path = Path(path)
    basis = state.basis
    header = _STATE_HEADER.pack(STATE_MAGIC, basis.num_qubits, basis.num_steps, int(state.normalized))
    path.write_bytes(header + state.amplitudes.astype("<c16").tobytes())
    sidecar = {
        "num_qubits": basis.num_qubits,
        "num_steps": basis.num_steps,
        "dimension": basis.dimension,
        "normalized": state.normalized,
        "norm_constant": state.norm_constant,
        **(metadata or {}),
    }
    write_json(_sidecar(path), sidecar)
    return path


def read_state(path: Path) -> StateVector:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _STATE_HEADER.size:
        raise FormatError(f"{path}: too short for a state header")
    magic, m, n, normalized = _STATE_HEADER.unpack_from(data)
    if magic != STATE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    basis = BasisIndex(m, n)
    amps = np.frombuffer(data, dtype="<c16", offset=_STATE_HEADER.size)
    if amps.size != basis.dimension:
        raise FormatError(f"{path}: expected {basis.dimension} amplitudes, found {amps.size}")
    norm_constant = 1.0
    sidecar = _sidecar(path)
    if sidecar.exists():
        norm_constant = float(json.loads(sidecar.read_text()).get("norm_constant", 1.0))
    return StateVector(amps.astype(complex), basis, bool(normalized), norm_constant)


# --- operators ---

def write_operator(path: Path, op: OperatorMatrix, header: dict[str, Any]) -> Path:
    """Matrix Market coordinate file (complex, both triangles) plus JSON header."""
    path = Path(path)
    mmwrite(str(path), op.matrix.tocoo(), field="complex", precision=17, symmetry="general")
    write_json(_sidecar(path), {
        "dimension": op.dimension,
        "nnz": op.nnz,
        "lambda": op.lam,
        "energy_scale": op.energy_scale,
        **header,
    })
    return path


def read_operator(path: Path) -> tuple[OperatorMatrix, dict[str, Any]]:
    path = Path(path)
    try:
        matrix = sp.csr_matrix(mmread(str(path)), dtype=complex)
    except (ValueError, IndexError, RuntimeError) as exc:
        raise FormatError(f"{path}: not a Matrix Market file ({exc})") from exc
    if matrix.shape[0] != matrix.shape[1]:
        raise FormatError(f"{path}: operator is not square {matrix.shape}")
    header: dict[str, Any] = {}
    sidecar = _sidecar(path)
    if sidecar.exists():
        header = json.loads(sidecar.read_text())
    op = OperatorMatrix(
        matrix,
        header.get("lambda"),
        header.get("label", path.stem),
        float(header.get("energy_scale", 1.0)),
    )
    return op, header


# --- gap profiles and sweeps ---

GAP_COLUMNS = ("s", "lambda", "E0", "E1", "gap", "method", "refined")
FAMILY_COLUMNS = ("N", "inv_N2", "min_gap", "lambda_star")
TRACE_COLUMNS = ("t", "s", "lambda", "fidelity", "energy", "norm")
SCALING_COLUMNS = ("N", "T_required", "final_fidelity", "min_gap")


def write_gap_profile(out_dir: Path, profile: GapProfile, meta: dict[str, Any]) -> tuple[Path, Path]:
    rows = [
        (x.s, x.lam, x.e0, x.e1, x.gap, profile.method, int(x.refined))
        for x in profile.samples
    ]
    csv_path = _write_csv(Path(out_dir) / "gap_profile.csv", GAP_COLUMNS, rows)
    json_path = write_json(Path(out_dir) / "gap_profile.json", {
        "meta": meta,
        "summary": gap_profile_summary(profile),
    })
    return csv_path, json_path


def gap_profile_summary(profile: GapProfile) -> dict[str, Any]:
    return {
        "circuit": profile.circuit_name,
        "method": profile.method,
        "samples": len(profile.samples),
        "min_gap": profile.min_gap,
        "lambda_star": profile.lambda_star,
        "s_star": profile.s_star,
        "refined": profile.refined,
        "lipschitz_constant": profile.lipschitz_constant(),
        "warnings": list(profile.warnings),
    }


def write_family_sweep(out_dir: Path, sweep: FamilySweep, meta: dict[str, Any]) -> tuple[Path, Path]:
    rows = [(r.num_steps, r.inv_n2, r.min_gap, r.lambda_star) for r in sweep.rows]
    csv_path = _write_csv(Path(out_dir) / "gap_family.csv", FAMILY_COLUMNS, rows)
    json_path = write_json(Path(out_dir) / "gap_family.json", {
        "meta": meta,
        "fit": {
            "slope": _finite(sweep.slope),
            "intercept": _finite(sweep.intercept),
            "r_squared": _finite(sweep.r_squared),
        },
        "rows": [dict(zip(FAMILY_COLUMNS, row)) for row in rows],
        "warnings": list(sweep.warnings),
    })
    return csv_path, json_path


# --- evolution traces ---

def write_trace(out_dir: Path, trace: EvolutionTrace, meta: dict[str, Any]) -> tuple[Path, Path]:
    rows = list(zip(trace.times, trace.s, trace.lam, trace.fidelity, trace.energy, trace.norm))
    csv_path = _write_csv(Path(out_dir) / "trace.csv", TRACE_COLUMNS, rows)
    json_path = write_json(Path(out_dir) / "trace.json", {"meta": meta, "summary": trace_summary(trace)})
    return csv_path, json_path


def trace_summary(trace: EvolutionTrace) -> dict[str, Any]:
    return {
        "T": trace.total_time,
        "final_fidelity": trace.final_fidelity,
        "schedule": trace.schedule_kind,
        "dt": trace.dt,
        "num_steps": trace.num_steps,
        "samples": int(trace.times.size),
        "max_norm_drift": trace.max_norm_drift,
    }


def write_scaling(out_dir: Path, result: ScalingResult, meta: dict[str, Any]) -> tuple[Path, Path]:
    rows = [(r.num_steps, r.required_time, r.final_fidelity, r.min_gap) for r in result.rows]
    csv_path = _write_csv(Path(out_dir) / "scaling.csv", SCALING_COLUMNS, rows)
    json_path = write_json(Path(out_dir) / "scaling.json", {
        "meta": meta,
        "fit": {
            "exponent": _finite(result.exponent),
            "prefactor": _finite(result.prefactor),
            "r_squared": _finite(result.r_squared),
        },
        "rows": [dict(zip(SCALING_COLUMNS, row)) for row in rows],
    })
    return csv_path, json_path


def write_json(path: Path, data: dict[str, Any]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _write_csv(path: Path, columns: tuple[str, ...], rows: list[tuple]) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")
