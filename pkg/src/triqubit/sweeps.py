"""Seed-deterministic batch experiments over the three-qubit machine.

Three drivers cover the standard studies: ``random_sweep`` scatters points
over field/rate ranges, ``valve_sweep`` walks a B2 grid at fixed everything
else, and ``boost_scan`` walks a B2 grid inside the absorption-refrigerator
window and locates its zero-work edge. All of them share one record shape
and one CSV layout.

Reproducibility contract: every sample index gets its own tiny generator
seeded from (master_seed XOR index), so the drawn parameters depend only on
the config, never on execution order. Point evaluations are pure, which
makes the output byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .correlations import CorrelationReport, correlation_report
from .errors import DomainError, TriqubitError
from .model import (
    BATH_HARMONIC,
    BATH_REPEATED_INTERACTION,
    PAIRS,
    ModelParams,
)
from .steady_state import solve_point
from .thermo import DEFAULT_EPSILON, Regime, ThermoReport, thermo_report

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# rejection sampling must terminate even on a misconfigured range
_MAX_REDRAWS = 1000


class SplitMix64:
    """Minimal 64-bit mixing generator for per-index parameter draws.

    Chosen over a library generator because the whole algorithm fits in a
    dozen lines and is trivially portable, so the determinism contract does
    not hang on any external implementation detail.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, low: float, high: float) -> float:
        # 53-bit draw in [0, 1); degenerate ranges return low exactly
        x = (self.next_uint64() >> 11) * 2.0**-53
        return low + (high - low) * x


def _as_triple(value, name: str) -> tuple:
    if value is None:
        raise DomainError(f"{name} must be given")
    if np.isscalar(value):
        v = float(value)
        triple = (v, v, v)
    else:
        triple = tuple(float(x) for x in value)
        if len(triple) != 3:
            raise DomainError(f"{name} must be a scalar or a length-3 sequence")
    if not all(np.isfinite(triple)):
        raise DomainError(f"{name} must be finite")
    return triple


def _as_range(value, name: str) -> tuple:
    pair = tuple(float(x) for x in value)
    if len(pair) != 2:
        raise DomainError(f"{name} must be a (low, high) pair")
    if not all(np.isfinite(pair)) or pair[0] > pair[1]:
        raise DomainError(f"{name} must satisfy low <= high with finite bounds")
    return pair


@dataclass(frozen=True)
class SweepConfig:
    """Configuration of a random-parameter sweep.

    Fields and dissipation rates are either fixed (``B``, ``gamma``) or
    sampled uniformly from a range (``B_range``, ``gamma_range``); exactly
    one of each pair must be given. Sampled fields below ``min_field`` are
    redrawn, and points with min(B) < discard_rule * max(gamma) are flagged
    "discarded" but still evaluated. A discard_rule of None means 100 for
    the harmonic-bath model and off for the repeated-interaction model.
    """

    bath_model: str
    J: tuple
    Delta: tuple
    T: tuple = (1.0, 2.0, 3.0)
    B: Optional[tuple] = None
    B_range: Optional[tuple] = None
    gamma: Optional[tuple] = None
    gamma_range: Optional[tuple] = None
    n_samples: int = 1
    master_seed: int = 0
    discard_rule: Optional[float] = None
    min_field: float = 1e-3
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.bath_model not in (BATH_HARMONIC, BATH_REPEATED_INTERACTION):
            raise DomainError(f"unknown bath_model {self.bath_model!r}")
        object.__setattr__(self, "J", _as_triple(self.J, "J"))
        object.__setattr__(self, "Delta", _as_triple(self.Delta, "Delta"))
        object.__setattr__(self, "T", _as_triple(self.T, "T"))
        if (self.B is None) == (self.B_range is None):
            raise DomainError("exactly one of B and B_range must be given")
        if (self.gamma is None) == (self.gamma_range is None):
            raise DomainError("exactly one of gamma and gamma_range must be given")
        if self.B is not None:
            object.__setattr__(self, "B", _as_triple(self.B, "B"))
        else:
            object.__setattr__(self, "B_range", _as_range(self.B_range, "B_range"))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", _as_triple(self.gamma, "gamma"))
        else:
            object.__setattr__(
                self, "gamma_range", _as_range(self.gamma_range, "gamma_range")
            )
            if self.gamma_range[1] <= 0.0:
                raise DomainError("gamma_range must reach positive rates")
        if not isinstance(self.n_samples, int) or self.n_samples < 1:
            raise DomainError("n_samples must be a positive integer")
        if not isinstance(self.master_seed, int):
            raise DomainError("master_seed must be an integer")
        if not (np.isfinite(self.min_field) and self.min_field > 0.0):
            raise DomainError("min_field must be positive")
        if self.B_range is not None and self.B_range[1] < self.min_field:
            raise DomainError("B_range lies entirely below min_field")
        if self.discard_rule is not None:
            ratio = float(self.discard_rule)
            if not np.isfinite(ratio) or ratio < 0.0:
                raise DomainError("discard_rule must be a nonnegative ratio")
            object.__setattr__(self, "discard_rule", ratio)
        if not (np.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise DomainError("epsilon must be positive")

    @property
    def effective_discard_rule(self) -> float:
        if self.discard_rule is not None:
            return self.discard_rule
        return 100.0 if self.bath_model == BATH_HARMONIC else 0.0


@dataclass(frozen=True)
class GridScanConfig:
    """Configuration of a B2 grid scan with all other parameters fixed."""

    bath_model: str
    J: tuple
    Delta: tuple
    B1: float
    B3: float
    B2_min: float
    B2_max: float
    n_points: int
    gamma: tuple
    T: tuple = (1.0, 2.0, 3.0)
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.bath_model not in (BATH_HARMONIC, BATH_REPEATED_INTERACTION):
            raise DomainError(f"unknown bath_model {self.bath_model!r}")
        for name in ("J", "Delta", "T", "gamma"):
            object.__setattr__(self, name, _as_triple(getattr(self, name), name))
        for name in ("B1", "B3", "B2_min", "B2_max"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.B2_min > self.B2_max:
            raise DomainError("B2_min must not exceed B2_max")
        if not isinstance(self.n_points, int) or self.n_points < 1:
            raise DomainError("n_points must be a positive integer")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise DomainError("epsilon must be positive")


def _draw_above(rng: SplitMix64, low: float, high: float, floor: float) -> float:
    value = rng.uniform(low, high)
    for _ in range(_MAX_REDRAWS):
        if value >= floor:
            return value
        value = rng.uniform(low, high)
    raise DomainError(f"could not draw a field >= {floor} from [{low}, {high}]")


def _draw_positive(rng: SplitMix64, low: float, high: float) -> float:
    value = rng.uniform(low, high)
    for _ in range(_MAX_REDRAWS):
        if value > 0.0:
            return value
        value = rng.uniform(low, high)
    raise DomainError(f"could not draw a positive rate from [{low}, {high}]")


def draw_params(cfg: SweepConfig, index: int) -> ModelParams:
    """Draw the parameter point for one sample index.

    Draw order is fixed (B1, B2, B3, then gamma1..3) so that the mapping
    index -> point is part of the determinism contract.
    """
    rng = SplitMix64((cfg.master_seed ^ index) & _MASK64)
    if cfg.B is not None:
        B = cfg.B
    else:
        lo, hi = cfg.B_range
        B = tuple(_draw_above(rng, lo, hi, cfg.min_field) for _ in range(3))
    if cfg.gamma is not None:
        gamma = cfg.gamma
    else:
        lo, hi = cfg.gamma_range
        gamma = tuple(_draw_positive(rng, lo, hi) for _ in range(3))
    return ModelParams(
        bath_model=cfg.bath_model, B=B, J=cfg.J, Delta=cfg.Delta, T=cfg.T, gamma=gamma
    )


@dataclass(frozen=True)
class PointEvaluation:
    """Everything one solved point contributes to a sweep record."""

    params: ModelParams
    thermo: Optional[ThermoReport]
    correlations: Optional[CorrelationReport]
    residual: Optional[float]
    flags: tuple


@dataclass(frozen=True)
class SweepRecord:
    index: int
    params: ModelParams
    thermo: Optional[ThermoReport]
    correlations: Optional[CorrelationReport]
    residual: Optional[float]
    flags: tuple
    extra: Mapping[str, object] = field(default_factory=dict)


def evaluate_point(params: ModelParams, epsilon: float = DEFAULT_EPSILON) -> PointEvaluation:
    """Solve one point and build both reports, never letting failures escape.

    Solver and consistency failures become "error:<Name>" flags with empty
    reports; warnings become "warn:<Name>" flags on an otherwise complete
    record. A sweep therefore always yields one record per index.
    """
    flags: list = []
    thermo = correlations = residual = None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            sol = solve_point(params)
            thermo = thermo_report(sol, epsilon=epsilon)
            correlations = correlation_report(sol.rho, params)
            residual = sol.residual
        except (TriqubitError, np.linalg.LinAlgError) as exc:
            flags.append(f"error:{type(exc).__name__}")
    for entry in caught:
        name = f"warn:{entry.category.__name__}"
        if name not in flags:
            flags.append(name)
    return PointEvaluation(params, thermo, correlations, residual, tuple(flags))


def _evaluate_task(task):
    index, params, epsilon = task
    return index, evaluate_point(params, epsilon=epsilon)


def _evaluate_many(tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [_evaluate_task(task) for task in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_task, tasks, chunksize=chunk))


def random_sweep(cfg: SweepConfig, workers: int = 1) -> list:
    """Evaluate n_samples independently drawn points, in index order."""
    tasks = [(k, draw_params(cfg, k), cfg.epsilon) for k in range(cfg.n_samples)]
    ratio = cfg.effective_discard_rule
    records = []
    for (index, ev), (_, params, _) in zip(_evaluate_many(tasks, workers), tasks):
        flags = ev.flags
        if ratio > 0.0 and min(params.B) < ratio * max(params.gamma):
            flags = flags + ("discarded",)
        records.append(
            SweepRecord(index, params, ev.thermo, ev.correlations, ev.residual, flags)
        )
    return records


def _grid(cfg: GridScanConfig) -> np.ndarray:
    return np.linspace(cfg.B2_min, cfg.B2_max, cfg.n_points)


def _grid_params(cfg: GridScanConfig, b2: float) -> ModelParams:
    return ModelParams(
        bath_model=cfg.bath_model,
        B=(cfg.B1, float(b2), cfg.B3),
        J=cfg.J,
        Delta=cfg.Delta,
        T=cfg.T,
        gamma=cfg.gamma,
    )


COMBINATION_INDETERMINATE = "indeterminate"


def _combination_label(thermo: Optional[ThermoReport], epsilon: float) -> str:
    if thermo is None:
        return ""
    q1, _, q3 = thermo.Q
    scale = max(abs(q1), abs(q3))
    if scale == 0.0 or abs(q1) <= epsilon * scale or abs(q3) <= epsilon * scale:
        return COMBINATION_INDETERMINATE
    return "Q1{}0,Q3{}0".format(">" if q1 > 0 else "<", ">" if q3 > 0 else "<")


def valve_sweep(cfg: GridScanConfig, workers: int = 1) -> list:
    """Scan B2 and label each point by the signs of the outer heat currents."""
    tasks = [(k, _grid_params(cfg, b2), cfg.epsilon) for k, b2 in enumerate(_grid(cfg))]
    records = []
    for (index, ev), (_, params, _) in zip(_evaluate_many(tasks, workers), tasks):
        extra = {"combination": _combination_label(ev.thermo, cfg.epsilon)}
        records.append(
            SweepRecord(
                index, params, ev.thermo, ev.correlations, ev.residual, ev.flags, extra
            )
        )
    return records


def _boost_extras(thermo: Optional[ThermoReport]) -> dict:
    extras = {"cop_norm": None, "cop_w_norm": None, "cop_otto_norm": None}
    if thermo is None or thermo.regime is not Regime.IV:
        return extras
    if thermo.cop_max is None or thermo.cop_max == 0.0:
        return extras
    for key, value in (
        ("cop_norm", thermo.cop),
        ("cop_w_norm", thermo.cop_w),
        ("cop_otto_norm", thermo.cop_otto),
    ):
        if value is not None:
            extras[key] = value / thermo.cop_max
    return extras


def _work_at(cfg: GridScanConfig, b2: float) -> float:
    ev = evaluate_point(_grid_params(cfg, b2), epsilon=cfg.epsilon)
    if ev.thermo is None:
        raise DomainError(
            f"steady-state solve failed at B2={b2!r} while locating the zero-work edge"
        )
    return ev.thermo.W


def _locate_edge(cfg: GridScanConfig, grid: np.ndarray, records: list) -> Optional[float]:
    """Return the B2 where the work power crosses zero above the window.

    Starts from the last nonpositive-work grid point and brackets the sign
    change, extending past the grid end if the scan stops inside the window.
    """
    works = [
        (float(b2), rec.thermo.W)
        for b2, rec in zip(grid, records)
        if rec.thermo is not None
    ]
    below = [item for item in works if item[1] <= 0.0]
    if not below:
        return None
    a, wa = below[-1]
    if wa == 0.0:
        return a
    for b2, w in works:
        if b2 > a and w > 0.0:
            return float(brentq(lambda x: _work_at(cfg, x), a, b2, xtol=1e-12))
    step = (cfg.B2_max - cfg.B2_min) / max(cfg.n_points - 1, 1)
    if step <= 0.0:
        step = max(0.05 * (1.0 + abs(a)), 1e-3)
    b = a
    for _ in range(50):
        b += step
        if _work_at(cfg, b) > 0.0:
            return float(brentq(lambda x: _work_at(cfg, x), a, b, xtol=1e-12))
    return None


def boost_scan(cfg: GridScanConfig, workers: int = 1) -> list:
    """Scan the refrigerator window and append its zero-work edge point.

    Returns an empty list when no grid point is an absorption refrigerator
    (the window is empty for the given fields).
    """
    grid = _grid(cfg)
    tasks = [(k, _grid_params(cfg, b2), cfg.epsilon) for k, b2 in enumerate(grid)]
    records = []
    for (index, ev), (_, params, _) in zip(_evaluate_many(tasks, workers), tasks):
        records.append(
            SweepRecord(
                index,
                params,
                ev.thermo,
                ev.correlations,
                ev.residual,
                ev.flags,
                _boost_extras(ev.thermo),
            )
        )
    if not any(
        rec.thermo is not None and rec.thermo.regime is Regime.IV for rec in records
    ):
        return []
    edge = _locate_edge(cfg, grid, records)
    if edge is not None:
        ev = evaluate_point(_grid_params(cfg, edge), epsilon=cfg.epsilon)
        records.append(
            SweepRecord(
                len(records),
                ev.params,
                ev.thermo,
                ev.correlations,
                ev.residual,
                ev.flags + ("edge",),
                _boost_extras(ev.thermo),
            )
        )
    return records


BASE_COLUMNS = (
    "sample_index",
    "bath_model",
    "B1", "B2", "B3",
    "J12", "J13", "J23",
    "D12", "D13", "D23",
    "T1", "T2", "T3",
    "g1", "g2", "g3",
    "Q1", "Q2", "Q3",
    "W", "Sdot",
    "q1", "q2", "q3",
    "C21", "C31", "C32",
    "regime",
    "cop", "cop_w", "cop_max", "cop_otto",
    "inside_trapezoid",
    "I12", "I13", "I23",
    "mibound12", "mibound13", "mibound23",
    "xres12", "xres13", "xres23",
    "ppt1", "ppt2", "ppt3",
    "nullspace_residual",
    "flags",
)

VALVE_COLUMNS = ("combination",)
BOOST_COLUMNS = ("cop_norm", "cop_w_norm", "cop_otto_norm")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Regime):
        return value.value
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _record_row(rec: SweepRecord, extra_columns: Sequence) -> list:
    p = rec.params
    th = rec.thermo
    co = rec.correlations
    cells = [str(rec.index), p.bath_model]
    cells += [_fmt(v) for v in (*p.B, *p.J, *p.Delta, *p.T, *p.gamma)]
    if th is None:
        cells += [""] * 17
    else:
        cells += [_fmt(v) for v in (*th.Q, th.W, th.S_dot)]
        if th.currents is None:
            cells += [""] * 6
        else:
            c = th.currents.C
            cells += [_fmt(v) for v in (*th.currents.q, c[(2, 1)], c[(3, 1)], c[(3, 2)])]
        cells.append(th.regime.value)
        cells += [_fmt(v) for v in (th.cop, th.cop_w, th.cop_max, th.cop_otto)]
        cells.append(_fmt(th.inside_trapezoid))
    if co is None:
        cells += [""] * 12
    else:
        cells += [_fmt(co.I[pair]) for pair in PAIRS]
        cells += [_fmt(co.mi_bound[pair]) for pair in PAIRS]
        cells += [_fmt(co.x_form_residual[pair]) for pair in PAIRS]
        cells += [_fmt(v) for v in co.ppt_min_eigenvalues]
    cells.append(_fmt(rec.residual))
    cells.append(";".join(rec.flags))
    for name in extra_columns:
        cells.append(_fmt(rec.extra.get(name)))
    return cells


def config_echo(scan_name: str, config) -> str:
    """One-line comment embedding the exact configuration of a scan."""
    payload = json.dumps(asdict(config), sort_keys=True, separators=(",", ":"))
    return f"# scan={scan_name} config={payload}"


def write_records(records, path, scan_name: str, config, extra_columns: Sequence = ()) -> None:
    """Write records as CSV behind a config-echo comment line.

    Column order is fixed; floats carry 17 significant digits so parsing
    the file back reproduces every value bit for bit.
    """
    columns = BASE_COLUMNS + tuple(extra_columns)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(config_echo(scan_name, config) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for rec in records:
                writer.writerow(_record_row(rec, extra_columns))
    except OSError as exc:
        raise DomainError(f"cannot write records to {path!r}: {exc}") from exc
