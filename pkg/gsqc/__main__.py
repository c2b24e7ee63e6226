"""Entry point: python -m gsqc [--config PATH] [--json] <command> [flags]

Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any

from . import __version__
from .adiabatic.evolve import IntegratorError, TimeStepError, evolve
from .adiabatic.scaling import BisectionError, running_time_scaling
from .adiabatic.schedule import ScheduleError, ScheduleKind, make_schedule
from .circuit import library
from .circuit.ir import Circuit, CircuitValidationError, require_valid
from .circuit.parser import CircuitSyntaxError, circuit_hash, parse_circuit, render_circuit
from .compiler.basis import (
    BasisMismatchError,
    EmptyFinalRowError,
    LambdaRangeError,
    QubitRangeError,
    ground_state,
)
from .compiler.hamiltonian import TermIndexError, build_hamiltonian
from .config import ConfigError, ConfigLocator, RunConfig, require_valid as require_valid_config
from .core.engine import DEFAULT_CHECKS, CheckEngine, CheckLoadError, EvalResult
from .core.models import Fact
from .export import (
    SCHEMA_VERSION,
    FormatError,
    gap_profile_summary,
    trace_summary,
    write_family_sweep,
    write_gap_profile,
    write_json,
    write_operator,
    write_scaling,
    write_state,
    write_trace,
)
from .scanners.gap import GapScanner
from .scanners.readout import ReadoutScanner
from .scanners.residual import ResidualScanner
from .spectral.bounds import BoundPreconditionError, z_subspace_bound
from .spectral.eigensolve import DENSE_MAX_DIM, DenseLimitError, EigensolverError
from .spectral.gaps import GapScanError, GridError, gap_family_sweep, gap_scan

logger = logging.getLogger("gsqc")

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_INPUT_ERRORS = (
    ConfigError,
    CircuitSyntaxError,
    CircuitValidationError,
    LambdaRangeError,
    BasisMismatchError,
    QubitRangeError,
    TermIndexError,
    FormatError,
    CheckLoadError,
    ScheduleError,
    DenseLimitError,
    GridError,
    library.FamilySizeError,
    OSError,
)
_NUMERICAL_ERRORS = (
    TimeStepError,
    IntegratorError,
    EigensolverError,
    GapScanError,
    BisectionError,
    EmptyFinalRowError,
)


def main() -> int:
    parser = _build_parser()
    args = parser.parse_args()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    overrides = {
        k: v for k, v in vars(args).items()
        if k not in ("config", "json_output", "verbose")
    }
    try:
        base = ConfigLocator(args.config).load()
        config = require_valid_config(base.merged(overrides))
    except ConfigError as e:
        for violation in e.violations:
            print(f"error: {violation}", file=sys.stderr)
        return EXIT_INPUT

    handler = _HANDLERS[config.command]
    try:
        return handler(config, args.json_output)
    except TimeStepError as e:
        print(f"error: {e}", file=sys.stderr)
        print(f"  suggested: --dt {e.suggested:.6g}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _NUMERICAL_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as e:
        for violation in e.violations:
            print(f"error: {violation}", file=sys.stderr)
        return EXIT_INPUT
    except CircuitValidationError as e:
        print("error: invalid circuit:", file=sys.stderr)
        for violation in e.violations:
            print(f"  - {violation}", file=sys.stderr)
        return EXIT_INPUT
    except DenseLimitError as e:
        print(f"error: {e}; use --method lanczos", file=sys.stderr)
        return EXIT_INPUT
    except _INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsqc",
        description="Compile circuits into ground-state quantum computation Hamiltonians, "
                    "scan spectral gaps and simulate the adiabatic protocol",
    )
    parser.add_argument("--version", action="version", version=f"gsqc {__version__}")
    parser.add_argument("--config", type=Path, help="Run configuration YAML (default: $GSQC_CONFIG, ./gsqc.yaml)")
    parser.add_argument("--json", action="store_true", dest="json_output", help="Print the summary as JSON")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")

    # flags default to SUPPRESS so only those given on the command line override the file
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--circuit", help="Circuit text file")
    common.add_argument("--example", help=f"Bundled circuit instead of --circuit ({', '.join(library.BUNDLED)})")
    common.add_argument("--steps", type=int, help="N for parameterized bundled circuits")
    common.add_argument("--stage", help="Gate-string stage for bell-disentangle (before|middle|after)")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--method", help="Eigensolver: dense|lanczos")
    common.add_argument("--seed", type=int, help="Lanczos start-vector seed")
    common.add_argument("--workers", type=int, help="Worker threads for sweeps")

    grid = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    grid.add_argument("--grid", help="Lambda grid start:stop:count")
    grid.add_argument("--no-refine", action="store_false", dest="refine", help="Skip minimum refinement")
    grid.add_argument("--family", help="Circuit family for an N sweep (bell-disentangle|identity)")
    grid.add_argument("--n-range", dest="n_range", help="N values: a:b, a:b:step or 3,5,7")

    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", parents=[common], help="Write H(lambda) as a Matrix Market file")
    build.add_argument("--lambda", dest="lam", type=float, default=argparse.SUPPRESS, help="Lambda in [0, 1]")

    sub.add_parser("gap-scan", parents=[common, grid], help="E0, E1 and gap over a lambda grid")

    ev = sub.add_parser("evolve", parents=[common, grid], help="Simulate the adiabatic protocol")
    ev.add_argument("--schedule", default=argparse.SUPPRESS, help="linear|gap-adapted")
    ev.add_argument("--T", dest="T", type=float, default=argparse.SUPPRESS, help="Total time")
    ev.add_argument("--dt", type=float, default=argparse.SUPPRESS, help="Time step (default: largest stable)")
    ev.add_argument("--target-fidelity", dest="target_fidelity", type=float, default=argparse.SUPPRESS,
                    help="Fidelity target for --family running-time sweeps")

    verify = sub.add_parser("verify", parents=[common], help="Check residual, readout and gap")
    verify.add_argument("--operator", default=argparse.SUPPRESS, help="Check a stored operator file")
    verify.add_argument("--checks", default=argparse.SUPPRESS, help="Custom check YAML")

    example = sub.add_parser("example", parents=[common], help="Print a bundled circuit")
    example.add_argument("example", nargs="?", default=argparse.SUPPRESS, metavar="NAME", help="Bundled circuit name")
    return parser


# --- commands ---

def _cmd_build(config: RunConfig, json_output: bool) -> int:
    circuit = _load_circuit(config)
    out = _out_dir(config)
    op = build_hamiltonian(circuit, config.lam)
    header = _circuit_meta(circuit)
    path = write_operator(out / "operator.mtx", op, header)
    state = ground_state(circuit, config.lam)
    write_state(out / "ground_state.bin", state, {"lambda": config.lam, **header})

    summary = {
        "dimension": op.dimension,
        "nnz": op.nnz,
        "num_qubits": circuit.num_qubits,
        "num_steps": circuit.num_steps,
        "lambda": config.lam,
        "operator": str(path),
    }
    if json_output:
        _print_json({"meta": _meta(config, circuit), "summary": summary})
    else:
        print(f"D={op.dimension} nnz={op.nnz} M={circuit.num_qubits} N={circuit.num_steps} "
              f"lambda={config.lam:g}")
        print(f"  wrote {path}")
    return EXIT_OK


def _cmd_gap_scan(config: RunConfig, json_output: bool) -> int:
    out = _out_dir(config)
    if config.family:
        n_values = _require_n_values(config)
        sweep = gap_family_sweep(
            library.family(config.family, config.stage), n_values, config.lambdas,
            refine=config.refine, method=config.method, workers=config.workers, seed=config.seed,
        )
        _print_warnings(sweep.warnings)
        meta = _meta(config)
        csv_path, _ = write_family_sweep(out, sweep, meta)
        if json_output:
            _print_json({"meta": meta, "rows": [asdict(r) for r in sweep.rows],
                         "fit": {"slope": sweep.slope, "intercept": sweep.intercept,
                                 "r_squared": sweep.r_squared}})
        else:
            for row in sweep.rows:
                print(f"N={row.num_steps:<3d} 1/N^2={row.inv_n2:.6f} min_gap={row.min_gap:.8g} "
                      f"lambda*={row.lambda_star:.6f}")
            print(f"fit: slope={sweep.slope:.6g} intercept={sweep.intercept:.6g} R^2={sweep.r_squared:.4f}")
            print(f"  wrote {csv_path}")
        return EXIT_OK

    circuit = _load_circuit(config)
    profile = gap_scan(circuit, config.lambdas, refine=config.refine, method=config.method,
                       workers=config.workers, seed=config.seed)
    _print_warnings(profile.warnings)
    meta = _meta(config, circuit)
    if circuit.cnots and (2 * (circuit.num_steps + 1)) ** circuit.num_qubits <= DENSE_MAX_DIM:
        try:
            meta["z_bound"] = asdict(z_subspace_bound(circuit, profile.lambda_star))
        except BoundPreconditionError as e:
            meta["z_bound"] = None
            meta["z_bound_skipped"] = str(e)
            _print_warnings([f"gap bound skipped: {e}"])
    csv_path, _ = write_gap_profile(out, profile, meta)
    if json_output:
        _print_json({"meta": meta, "summary": gap_profile_summary(profile)})
    else:
        flag = " (refined)" if profile.refined else ""
        print(f"min gap {profile.min_gap:.10g} at lambda {profile.lambda_star:.6f}{flag}")
        if meta.get("z_bound"):
            zb = meta["z_bound"]
            print(f"  bound: {zb['lower_bound']:.6g} <= gap <= {zb['upper_estimate']:.6g}")
        print(f"  wrote {csv_path}")
    return EXIT_OK


def _cmd_evolve(config: RunConfig, json_output: bool) -> int:
    out = _out_dir(config)
    kind = ScheduleKind.parse(config.schedule)
    if config.family:
        n_values = _require_n_values(config)
        result = running_time_scaling(
            library.family(config.family, config.stage), n_values, config.target_fidelity,
            schedule=kind, dt=config.dt, workers=config.workers,
        )
        meta = _meta(config)
        csv_path, _ = write_scaling(out, result, meta)
        if json_output:
            _print_json({"meta": meta, "rows": [asdict(r) for r in result.rows],
                         "fit": {"exponent": result.exponent, "prefactor": result.prefactor,
                                 "r_squared": result.r_squared}})
        else:
            for row in result.rows:
                print(f"N={row.num_steps:<3d} T={row.required_time:.6g} fidelity={row.final_fidelity:.6f}")
            print(f"fit: T ~ {result.prefactor:.4g} N^{result.exponent:.3f} (R^2={result.r_squared:.4f})")
            print(f"  wrote {csv_path}")
        return EXIT_OK

    circuit = _load_circuit(config)
    profile = None
    if kind is ScheduleKind.GAP_ADAPTED:
        profile = gap_scan(circuit, config.lambdas, refine=config.refine, method=config.method,
                           workers=config.workers, seed=config.seed)
        _print_warnings(profile.warnings)
    schedule = make_schedule(kind, config.T, gap_profile=profile)
    trace = evolve(circuit, schedule, dt=config.dt)
    meta = _meta(config, circuit)
    csv_path, _ = write_trace(out, trace, meta)
    if json_output:
        _print_json({"meta": meta, "summary": trace_summary(trace)})
    else:
        print(f"final fidelity {trace.final_fidelity:.8f} (T={trace.total_time:g}, "
              f"{trace.num_steps} steps, dt={trace.dt:.4g}, {trace.schedule_kind})")
        print(f"  wrote {csv_path}")
    return EXIT_OK


def _cmd_verify(config: RunConfig, json_output: bool) -> int:
    circuit = _load_circuit(config)
    engine = CheckEngine(Path(config.checks) if config.checks else DEFAULT_CHECKS)
    scanners = [
        ResidualScanner(Path(config.operator) if config.operator else None),
        ReadoutScanner(method=config.method, seed=config.seed),
        GapScanner(method=config.method, workers=config.workers, seed=config.seed),
    ]
    facts: list[Fact] = []
    warnings: list[str] = []
    for scanner in scanners:
        logger.debug("running scanner %s", scanner.name)
        scanner_facts, scanner_warnings = scanner.scan(circuit)
        facts.extend(scanner_facts)
        warnings.extend(scanner_warnings)

    result = engine.evaluate(facts)
    all_warnings = warnings + result.warnings
    _print_warnings(all_warnings)

    report = _verify_report(config, circuit, engine, facts, result, all_warnings)
    out = _out_dir(config)
    write_json(out / "verify.json", report)

    if json_output:
        _print_json(report)
    elif result.passed:
        print(f"Verification passed: {', '.join(engine.check_ids)}")
        for fact in facts:
            print(f"  - {fact.key} = {_fmt_fact(fact.value)}  ({fact.source})")
    else:
        for finding in result.findings:
            print(f"[{finding.severity.upper()}] {finding.check_id}: {finding.title}")
            for ev in finding.evidence:
                print(f"  - {ev.key} = {_fmt_fact(ev.value)}  ({ev.source})")
            if finding.hint:
                print(f"  hint: {finding.hint}")
            print()
    return EXIT_OK if result.passed else EXIT_FINDINGS


def _cmd_example(config: RunConfig, json_output: bool) -> int:
    name = config.example
    if name is None:
        if json_output:
            _print_json({"examples": library.BUNDLED})
        else:
            for key, description in library.BUNDLED.items():
                print(f"{key:<24s} {description}")
        return EXIT_OK
    circuit = _load_circuit(config)
    text = render_circuit(circuit)
    if json_output:
        _print_json({"name": circuit.name, "hash": circuit_hash(circuit), "text": text})
    else:
        sys.stdout.write(text)
    return EXIT_OK


_HANDLERS = {
    "build": _cmd_build,
    "gap-scan": _cmd_gap_scan,
    "evolve": _cmd_evolve,
    "verify": _cmd_verify,
    "example": _cmd_example,
}


# --- helpers ---

def _load_circuit(config: RunConfig) -> Circuit:
    if config.circuit:
        path = Path(config.circuit)
        if not path.is_file():
            raise ConfigError([f"circuit file not found: {path}"])
        circuit = parse_circuit(path.read_text(encoding="utf-8"), name=path.stem)
    elif config.example:
        if config.example not in library.BUNDLED:
            raise ConfigError([f"unknown example '{config.example}' (available: {', '.join(library.BUNDLED)})"])
        circuit = library.bundled(config.example, config.steps, config.stage)
    else:
        raise ConfigError(["no circuit given; use --circuit PATH or --example NAME"])
    require_valid(circuit)
    return circuit


def _require_n_values(config: RunConfig) -> list[int]:
    if not config.n_values:
        raise ConfigError(["--family needs --n-range"])
    return config.n_values


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _circuit_meta(circuit: Circuit) -> dict[str, Any]:
    return {
        "circuit": circuit.name,
        "circuit_hash": circuit_hash(circuit),
        "num_qubits": circuit.num_qubits,
        "num_steps": circuit.num_steps,
    }


def _meta(config: RunConfig, circuit: Circuit | None = None) -> dict[str, Any]:
    meta: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": config.command,
        "config": asdict(config),
    }
    if circuit is not None:
        meta.update(_circuit_meta(circuit))
    return meta


def _verify_report(
    config: RunConfig,
    circuit: Circuit,
    engine: CheckEngine,
    facts: list[Fact],
    result: EvalResult,
    warnings: list[str],
) -> dict[str, Any]:
    meta = _meta(config, circuit)
    meta["checks_path"] = str(engine.path)
    if warnings:
        meta["warnings"] = warnings
    failed = {f.check_id for f in result.findings}
    return {
        "meta": meta,
        "passed": result.passed,
        "checks": {check_id: check_id not in failed for check_id in engine.check_ids},
        "facts": [asdict(f) for f in facts],
        "findings": [asdict(f) for f in result.findings],
    }


def _print_warnings(warnings: list[str]) -> None:
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)


def _print_json(data: dict[str, Any]) -> None:
    print(json.dumps(data, indent=2, sort_keys=True, default=str))


def _fmt_fact(value: Any) -> str:
    return f"{value:.3e}" if isinstance(value, float) else str(value)


if __name__ == "__main__":
    sys.exit(main())
