"""Command-line front end: single-point reports, sweeps, and validation.

Subcommands
    point        solve one parameter point and print a JSON report
    sweep-random random parameter sweep to CSV
    sweep-valve  B2 grid scan with heat-flow combination labels
    sweep-boost  refrigerator-window scan with normalized performance
    validate     run the invariant suite over a random sweep

Configs are flat JSON objects whose keys mirror the dataclass fields of
ModelParams, SweepConfig, and GridScanConfig. --set KEY=VALUE overrides a
key in place; unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from enum import Enum

import numpy as np

from .errors import DomainError, TriqubitError
from .model import PAIRS, ModelParams
from .sweeps import (
    BOOST_COLUMNS,
    VALVE_COLUMNS,
    GridScanConfig,
    SweepConfig,
    boost_scan,
    evaluate_point,
    random_sweep,
    valve_sweep,
    write_records,
)
from .thermo import DEFAULT_EPSILON, continuity_residuals

_POINT_KEYS = frozenset({"bath_model", "B", "J", "Delta", "T", "gamma", "epsilon"})
_SWEEP_KEYS = frozenset(f.name for f in fields(SweepConfig))
_GRID_KEYS = frozenset(f.name for f in fields(GridScanConfig))

_DEFAULT_T = (1.0, 2.0, 3.0)


def _load_config(path: str, allowed: frozenset) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"config {path!r} must hold a JSON object")
    for key in data:
        if key not in allowed:
            raise DomainError(f"unknown config key {key!r} in {path!r}")
    return data


def _apply_overrides(data: dict, pairs, allowed: frozenset) -> None:
    for item in pairs or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise DomainError(f"--set expects KEY=VALUE, got {item!r}")
        if key not in allowed:
            raise DomainError(f"unknown config key {key!r} in --set")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings like bath_model=harmonic
        data[key] = value


def _jsonify(value):
    """Recursively coerce report structures into JSON-serializable form."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {_jsonify_key(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _jsonify_key(key):
    if isinstance(key, tuple):
        return "".join(str(k) for k in key)
    return str(key)


def _cmd_point(args) -> int:
    data = _load_config(args.config, _POINT_KEYS)
    _apply_overrides(data, args.set, _POINT_KEYS)
    epsilon = float(data.pop("epsilon", DEFAULT_EPSILON))
    data.setdefault("T", _DEFAULT_T)
    params = ModelParams(**data)
    ev = evaluate_point(params, epsilon=epsilon)
    payload = {
        "config": {**_jsonify(asdict(params)), "epsilon": epsilon},
        "thermo": _jsonify(asdict(ev.thermo)) if ev.thermo is not None else None,
        "correlations": (
            _jsonify(asdict(ev.correlations)) if ev.correlations is not None else None
        ),
        "nullspace_residual": ev.residual,
        "flags": list(ev.flags),
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise DomainError(f"cannot write {args.out!r}: {exc}") from exc
    print(text)
    return 0 if ev.thermo is not None else 1


def _report_failures(records) -> int:
    failed = [
        r.index for r in records if any(f.startswith("error:") for f in r.flags)
    ]
    if failed:
        shown = ", ".join(str(i) for i in failed[:10])
        more = "" if len(failed) <= 10 else f" (+{len(failed) - 10} more)"
        print(f"solver failures at sample_index {shown}{more}", file=sys.stderr)
    return len(failed)


def _cmd_sweep_random(args) -> int:
    data = _load_config(args.config, _SWEEP_KEYS)
    _apply_overrides(data, args.set, _SWEEP_KEYS)
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.samples is not None:
        data["n_samples"] = args.samples
    cfg = SweepConfig(**data)
    records = random_sweep(cfg, workers=args.workers)
    write_records(records, args.out, "random", cfg)
    failures = _report_failures(records)
    print(f"wrote {len(records)} records to {args.out}")
    return 1 if failures else 0


def _cmd_sweep_valve(args) -> int:
    data = _load_config(args.config, _GRID_KEYS)
    _apply_overrides(data, args.set, _GRID_KEYS)
    cfg = GridScanConfig(**data)
    records = valve_sweep(cfg, workers=args.workers)
    write_records(records, args.out, "valve", cfg, extra_columns=VALVE_COLUMNS)
    failures = _report_failures(records)
    print(f"wrote {len(records)} records to {args.out}")
    return 1 if failures else 0


def _cmd_sweep_boost(args) -> int:
    data = _load_config(args.config, _GRID_KEYS)
    _apply_overrides(data, args.set, _GRID_KEYS)
    cfg = GridScanConfig(**data)
    records = boost_scan(cfg, workers=args.workers)
    write_records(records, args.out, "boost", cfg, extra_columns=BOOST_COLUMNS)
    if not records:
        print(f"empty refrigerator window; wrote header-only {args.out}")
        return 0
    failures = _report_failures(records)
    print(f"wrote {len(records)} records to {args.out}")
    return 1 if failures else 0


def _check_rows(records, local: bool):
    """Yield (name, passed, total) for each invariant over the records."""
    first = second = constraint = cont = mi = 0
    total = len(records)
    for rec in records:
        th, co = rec.thermo, rec.correlations
        if th is None or co is None:
            continue  # failed rows count against every check
        scale = max(*(abs(q) for q in th.Q), abs(th.W), 1e-300)
        if th.first_law_residual <= 1e-10 * scale:
            first += 1
        if th.S_dot >= -1e-12:
            second += 1
        if local:
            cs = th.currents
            scale_q = max(*(abs(v) for v in cs.q), 1e-300)
            if th.magnetization_residual <= 1e-10 * scale_q:
                constraint += 1
            scale_c = max(scale_q, *(abs(v) for v in cs.C.values()))
            if max(abs(r) for r in continuity_residuals(cs)) <= 1e-9 * scale_c:
                cont += 1
        if all(co.I[pair] >= co.mi_bound[pair] - 1e-10 for pair in PAIRS):
            mi += 1
    yield "First Law", first, total
    yield "Second Law", second, total
    if local:
        yield "current-constraint", constraint, total
        yield "continuity", cont, total
    yield "MI-bound", mi, total


def _cmd_validate(args) -> int:
    data = _load_config(args.config, _SWEEP_KEYS)
    _apply_overrides(data, args.set, _SWEEP_KEYS)
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.samples is not None:
        data["n_samples"] = args.samples
    cfg = SweepConfig(**data)
    records = random_sweep(cfg, workers=args.workers)
    local = cfg.bath_model == "repeated_interaction"
    all_pass = True
    for name, passed, total in _check_rows(records, local):
        status = "pass" if passed == total else "FAIL"
        print(f"{name:<20} {passed}/{total} {status}")
        all_pass = all_pass and passed == total
    failures = sum(
        1 for r in records if any(f.startswith("error:") for f in r.flags)
    )
    discarded = sum(1 for r in records if "discarded" in r.flags)
    print(f"{'solver failures':<20} {failures}/{len(records)}")
    print(f"{'discarded':<20} {discarded}/{len(records)}")
    print(f"result: {'PASS' if all_pass else 'FAIL'}")
    return 0 if all_pass else 1


def _add_common(sub, out_required: bool):
    sub.add_argument("--config", required=True, help="path to a JSON config")
    sub.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    if out_required:
        sub.add_argument("--out", required=True, help="output CSV path")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triqubit",
        description="Steady-state analysis of a three-qubit thermal machine",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("point", help="solve one parameter point, print JSON")
    _add_common(p, out_required=False)
    p.add_argument("--out", help="also write the JSON report to this path")
    p.set_defaults(handler=_cmd_point)

    p = subs.add_parser("sweep-random", help="random parameter sweep to CSV")
    _add_common(p, out_required=True)
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--samples", type=int, help="override n_samples")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=_cmd_sweep_random)

    p = subs.add_parser("sweep-valve", help="B2 grid scan with flow labels")
    _add_common(p, out_required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=_cmd_sweep_valve)

    p = subs.add_parser("sweep-boost", help="refrigerator window scan")
    _add_common(p, out_required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=_cmd_sweep_boost)

    p = subs.add_parser("validate", help="run the invariant suite on a config")
    _add_common(p, out_required=False)
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--samples", type=int, help="override n_samples")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TriqubitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
