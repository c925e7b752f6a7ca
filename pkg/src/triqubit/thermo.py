"""Steady-state thermodynamics: operating regimes, figures of merit, submachines.

Sign conventions. Q[i] > 0 means heat flows out of bath i into the machine;
W > 0 means work is injected into the machine (negative W is work extracted).
At steady state the repeated-interaction model satisfies W = -sum(Q), the
harmonic model satisfies sum(Q) = 0 and exchanges no work at all.

The two-reservoir decomposition uses the opposite orientation, which is what
makes its bookkeeping algebraic: Q_ij > 0 is heat dumped INTO bath i by the
pair device (i,j), and W_ij > 0 is work produced by it, so that
W_12 + W_13 + W_23 + W = 0 and W_ij = -Q_ij - Q_ji hold identically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ImpossibleCurrentsError, NumericalConsistencyError
from .global_me import global_heat_current
from .local_me import CurrentSet, local_current_set
from .model import BATH_HARMONIC, PAIRS, ModelParams
from .steady_state import PointSolution

DEFAULT_EPSILON = 1e-6  # relative zero band for sign classification


class Regime(enum.Enum):
    """Operating regimes named by the sign pattern of (Q1, Q2, Q3, W).

    The roman-numeral labels are part of the CLI/CSV vocabulary. IV is the
    absorption refrigerator: heat out of the coldest bath, driven by the
    hottest bath, with no work input.
    """

    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"
    VII = "VII"
    VIII = "VIII"
    IX = "IX"
    X = "X"
    UNCLASSIFIED = "Unclassified"


# sign pattern of (Q1, Q2, Q3) -> (regime for W > 0, regime for W <= 0)
_SIGN_TABLE = {
    (1, -1, -1): (Regime.I, None),
    (1, 1, -1): (Regime.II, None),
    (1, -1, 1): (Regime.III, Regime.IV),
    (-1, 1, -1): (Regime.V, Regime.VI),
    (-1, 1, 1): (Regime.VII, Regime.VIII),
    (-1, -1, 1): (Regime.IX, Regime.X),
}

HARMONIC_REGIMES = frozenset({Regime.IV, Regime.VI, Regime.VIII, Regime.X})


def classify_regime(Q, W: float, epsilon: float = DEFAULT_EPSILON) -> Regime:
    """Classify a steady state by the signs of its heat currents and work.

    Values within epsilon * max(|Q|, |W|) of zero are treated as zero: a
    near-zero heat current makes the point Unclassified, a near-zero W falls
    into the workless branch of the table.
    """
    if epsilon <= 0.0:
        raise DomainError("classification threshold epsilon must be positive")
    q1, q2, q3 = (float(q) for q in Q)
    w = float(W)
    scale = max(abs(q1), abs(q2), abs(q3), abs(w))
    if scale == 0.0:
        return Regime.UNCLASSIFIED
    band = epsilon * scale
    if min(abs(q1), abs(q2), abs(q3)) <= band:
        return Regime.UNCLASSIFIED
    signs = tuple(1 if q > 0.0 else -1 for q in (q1, q2, q3))
    if signs == (1, 1, 1) or signs == (-1, -1, -1):
        raise ImpossibleCurrentsError(
            "heat currents cannot all share one sign: magnetization exchanged "
            "with the baths must balance at steady state"
        )
    with_work, without_work = _SIGN_TABLE[signs]
    regime = with_work if w > band else without_work
    return regime if regime is not None else Regime.UNCLASSIFIED


def entropy_production(Q, T) -> float:
    """Total entropy production rate -sum_i Q_i / T_i."""
    if any(t <= 0.0 for t in T):
        raise DomainError("bath temperatures must be positive")
    return -math.fsum(float(q) / float(t) for q, t in zip(Q, T))


@dataclass(frozen=True)
class CopMetrics:
    cop: Optional[float]
    cop_w: Optional[float]
    cop_max: Optional[float]
    cop_otto: Optional[float]


def cop_metrics(Q, W: float, T, B) -> CopMetrics:
    """Refrigeration figures of merit; metrics with vanishing denominators are None.

    cop_w credits the work the machine itself produces (W < 0) back to the
    driving heat. cop_max depends only on temperature ratios and bounds cop
    for any absorption refrigerator; cop_otto plays the same role in terms of
    field ratios when the produced work drives an auxiliary two-level chiller
    between baths 1 and 2.
    """
    q1, _, q3 = (float(q) for q in Q)
    w = float(W)
    t1, t2, t3 = (float(t) for t in T)
    b1, b2, b3 = (float(b) for b in B)

    cop = q1 / q3 if q3 != 0.0 else None
    denom_w = q3 + w
    cop_w = q1 / denom_w if denom_w != 0.0 else None
    cop_max = t1 * (t3 - t2) / (t3 * (t2 - t1)) if (t2 != t1 and t3 != 0.0) else None
    cop_otto = b1 * (b3 - b2) / (b3 * (b2 - b1)) if (b2 != b1 and b3 != 0.0) else None
    return CopMetrics(cop=cop, cop_w=cop_w, cop_max=cop_max, cop_otto=cop_otto)


@dataclass(frozen=True)
class BoundaryLine:
    slope: float
    intercept: float

    def y(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class RegimeBoundaries:
    """Straight lines separating regimes in the (Q1/Q3, Q2/Q3) plane.

    zero_work is the locus W = 0, i.e. Q1 + Q2 + Q3 = 0; zero_entropy is the
    reversibility locus sum_i Q_i/T_i = 0. Together with the two coordinate
    axes Q1 = 0 and Q2 = 0 they partition the plane into the regime wedges.
    intersection_x is the abscissa where the two lines cross; it equals the
    maximal coefficient of performance and is absent for equal T1, T2.
    """

    zero_work: BoundaryLine
    zero_entropy: BoundaryLine
    intersection_x: Optional[float]
    axes: tuple = ("Q1/Q3 = 0", "Q2/Q3 = 0")


def regime_boundaries(T) -> RegimeBoundaries:
    if any(t <= 0.0 for t in T):
        raise DomainError("bath temperatures must be positive")
    t1, t2, t3 = (float(t) for t in T)
    zero_work = BoundaryLine(slope=-1.0, intercept=-1.0)
    zero_entropy = BoundaryLine(slope=-t2 / t1, intercept=-t2 / t3)
    if t2 == t1:
        ix = None  # parallel lines
    else:
        ix = t1 * (t3 - t2) / (t3 * (t2 - t1))
    return RegimeBoundaries(zero_work=zero_work, zero_entropy=zero_entropy, intersection_x=ix)


class Role(enum.Enum):
    ENGINE = "engine"
    REFRIGERATOR = "refrigerator"
    ACCELERATOR = "accelerator"
    IDLE = "idle"


@dataclass(frozen=True)
class SubmachineFigures:
    """Two-reservoir device carried by one coupled pair.

    Q_ij is the heat the device dumps into bath i, Q_ji into bath j; W_ij is
    the work it produces. W_ij = -Q_ij - Q_ji holds bitwise because W_ij is
    stored as that very combination.
    """

    pair: tuple
    C_ij: float
    W_ij: float
    Q_ij: float
    Q_ji: float
    role: Role
    efficiency_or_cop: Optional[float]


def _pair_current(currents: CurrentSet, i: int, j: int) -> float:
    # stored keys are (source, destination) with destination < source
    return -currents.C[(j, i)]


def continuity_residuals(currents: CurrentSet) -> tuple:
    """Per-site imbalance between the bath current and the pair currents.

    Vanishes at a steady state: whatever magnetization a bath pushes into
    a site must leave through the two couplings.
    """
    c21 = currents.C[(2, 1)]
    c31 = currents.C[(3, 1)]
    c32 = currents.C[(3, 2)]
    q1, q2, q3 = currents.q
    return (q1 + c21 + c31, q2 - c21 + c32, q3 - c31 - c32)


def submachine_report(
    currents: CurrentSet, B, T, epsilon: float = DEFAULT_EPSILON,
    residual_floor: float = 0.0,
) -> tuple:
    """Decompose a repeated-interaction steady state into pair devices.

    Roles follow the signs: a device producing work is an engine; one
    consuming work is a refrigerator when it drains heat from the colder
    bath of its pair and an accelerator when it pushes heat into it. A
    device whose work is inside the zero band idles with efficiency 0.

    residual_floor absorbs the absolute roundoff of current sets whose
    members are all numerically zero.
    """
    scale_c = max(
        max(abs(v) for v in currents.q), max(abs(v) for v in currents.C.values()), 1e-300
    )
    tol = max(1e-8 * scale_c, residual_floor)
    if max(abs(r) for r in continuity_residuals(currents)) > tol:
        raise DomainError("magnetization currents do not balance: not a steady state")

    figures = []
    for i, j in PAIRS:
        bi, bj = float(B[i - 1]), float(B[j - 1])
        c_ij = _pair_current(currents, i, j)
        q_ij = -bi * c_ij
        q_ji = bj * c_ij  # = -bj * C_ji by antisymmetry
        w_ij = -q_ij - q_ji
        b_lo, b_hi = min(bi, bj), max(bi, bj)
        cold_q = q_ij if float(T[i - 1]) <= float(T[j - 1]) else q_ji

        scale = max(abs(q_ij), abs(q_ji), abs(w_ij))
        if scale == 0.0 or abs(w_ij) <= epsilon * scale:
            role, figure = Role.IDLE, 0.0
        elif w_ij > 0.0:
            role, figure = Role.ENGINE, 1.0 - b_lo / b_hi
        elif cold_q < 0.0:
            role, figure = Role.REFRIGERATOR, b_lo / (b_hi - b_lo)
        else:
            role, figure = Role.ACCELERATOR, None
        figures.append(
            SubmachineFigures(
                pair=(i, j), C_ij=c_ij, W_ij=w_ij, Q_ij=q_ij, Q_ji=q_ji,
                role=role, efficiency_or_cop=figure,
            )
        )
    return tuple(figures)


@dataclass(frozen=True)
class OttoWindows:
    """Field-ratio predictions for each pair device, plus the trapezoid test.

    For a pair (i, j) with T_i < T_j, an ideal two-level machine cycling
    between the fields refrigerates for B_i/B_j below T_i/T_j, works as an
    engine between that ratio and 1, and accelerates above 1. The trapezoid
    combines the refrigerator window of (2,3) with the engine window of
    (1,2): a necessary condition for the three-qubit absorption refrigerator.
    """

    pair_roles: dict
    inside_trapezoid: bool


def otto_conditions_and_trapezoid(B, T) -> OttoWindows:
    if any(b <= 0.0 for b in B) or any(t <= 0.0 for t in T):
        raise DomainError("fields and temperatures must be positive")
    roles = {}
    for i, j in PAIRS:
        r = float(B[i - 1]) / float(B[j - 1])
        rt = float(T[i - 1]) / float(T[j - 1])
        if r < rt:
            roles[(i, j)] = Role.REFRIGERATOR
        elif rt < r < 1.0:
            roles[(i, j)] = Role.ENGINE
        elif r > 1.0:
            roles[(i, j)] = Role.ACCELERATOR
        else:
            roles[(i, j)] = Role.IDLE  # exactly on a window edge
    x1 = float(B[0]) / float(B[2])
    x2 = float(B[1]) / float(B[2])
    inside = (x2 > (float(T[1]) / float(T[0])) * x1) and (float(T[1]) / float(T[2]) < x2 < 1.0)
    return OttoWindows(pair_roles=roles, inside_trapezoid=inside)


@dataclass(frozen=True)
class ThermoReport:
    """Complete thermodynamic account of one solved steady state."""

    Q: tuple
    W: float
    S_dot: float
    regime: Regime
    cop: Optional[float]
    cop_w: Optional[float]
    cop_max: Optional[float]
    cop_otto: Optional[float]
    currents: Optional[CurrentSet]
    submachines: Optional[tuple]
    inside_trapezoid: bool
    first_law_residual: float
    magnetization_residual: Optional[float]


def _harmonic_heat_currents(sol: PointSolution):
    if sol.populations is not None:
        e = sol.spectrum.energies.astype(np.longdouble)
        p = sol.populations.astype(np.longdouble)
        return tuple(float(e @ (m.astype(np.longdouble) @ p)) for m in sol.rate_matrices)
    gen = sol.generators
    return tuple(global_heat_current(sol.rho, gen.H, d) for d in gen.dissipators)


def thermo_report(sol: PointSolution, epsilon: float = DEFAULT_EPSILON) -> ThermoReport:
    p = sol.params
    if p.bath_model == BATH_HARMONIC:
        Q = _harmonic_heat_currents(sol)
        W = 0.0  # the harmonic generator exchanges no work by construction
        currents = None
        submachines = None
        first_law = abs(math.fsum(Q))
        mag_residual = None
    else:
        currents = local_current_set(sol.rho, p)
        Q = currents.Q
        W = currents.W
        floor = 1e-12 * max(p.gamma) * (1.0 + max(p.B))
        submachines = submachine_report(currents, p.B, p.T, epsilon, residual_floor=floor)
        first_law = abs(W + math.fsum(Q))
        mag_residual = abs(math.fsum(currents.q))

    s_dot = entropy_production(Q, p.T)
    # a genuine second-law violation would be of the order of the currents
    if s_dot < -1e-9 * max(1.0, max(abs(q) for q in Q)):
        raise NumericalConsistencyError(f"entropy production {s_dot:.3e} is negative")
    metrics = cop_metrics(Q, W, p.T, p.B)
    if all(b > 0.0 for b in p.B):
        inside = otto_conditions_and_trapezoid(p.B, p.T).inside_trapezoid
    else:
        inside = False  # a switched-off field is outside every window
    return ThermoReport(
        Q=tuple(float(q) for q in Q),
        W=float(W),
        S_dot=s_dot,
        regime=classify_regime(Q, W, epsilon),
        cop=metrics.cop,
        cop_w=metrics.cop_w,
        cop_max=metrics.cop_max,
        cop_otto=metrics.cop_otto,
        currents=currents,
        submachines=submachines,
        inside_trapezoid=inside,
        first_law_residual=first_law,
        magnetization_residual=mag_residual,
    )
