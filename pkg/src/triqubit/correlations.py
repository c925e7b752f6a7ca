"""Pairwise information measures and entanglement flags for 3-qubit states.

All entropies and bounds are in nats. The X-form residual measures how far a
pair reduction deviates from the pattern with support only on the diagonal
and the inner (2,3) anti-diagonal pair; corner (1,4) coherences count toward
the residual, they are not part of the pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import herm, partial_trace, partial_transpose
from .errors import DomainError
from .model import N_SITES, PAIRS, ModelParams

_EIG_FLOOR = -1e-10  # eigenvalues below this are treated as corrupt input


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy -Tr(rho ln rho) with the 0 ln 0 = 0 convention."""
    lam = np.linalg.eigvalsh(rho)
    if float(lam.min()) < _EIG_FLOOR:
        raise DomainError(f"state has negative eigenvalue {float(lam.min()):.3e}")
    lam = lam[lam > 0.0]
    return float(-(lam * np.log(lam)).sum())


def mutual_information(rho: np.ndarray, i: int, j: int) -> float:
    """Quantum mutual information S_i + S_j - S_ij of qubits i and j (nats)."""
    if i == j:
        raise DomainError("mutual information needs two distinct sites")
    s_i = von_neumann_entropy(partial_trace(rho, (i,)))
    s_j = von_neumann_entropy(partial_trace(rho, (j,)))
    s_ij = von_neumann_entropy(partial_trace(rho, (min(i, j), max(i, j))))
    return s_i + s_j - s_ij


# 4x4 boolean mask of the X pattern: diagonal plus the (2,3)/(3,2) pair
_X_PATTERN = np.zeros((4, 4), dtype=bool)
_X_PATTERN[np.arange(4), np.arange(4)] = True
_X_PATTERN[1, 2] = _X_PATTERN[2, 1] = True


@dataclass(frozen=True)
class XStateAnalysis:
    residual: float
    eigenvalues: tuple
    r23_modulus: float


def x_state_analysis(rho_pair: np.ndarray) -> XStateAnalysis:
    """Closed-form spectrum of a two-qubit state assuming the X pattern.

    residual is the Frobenius norm of every entry outside the pattern; the
    closed-form eigenvalues are only meaningful when it is small.
    """
    if rho_pair.shape != (4, 4):
        raise DomainError(f"expected a 4x4 two-qubit state, got shape {rho_pair.shape}")
    scale = max(float(np.linalg.norm(rho_pair, "fro")), 1e-300)
    if float(np.linalg.norm(rho_pair - rho_pair.conj().T, "fro")) > 1e-10 * scale:
        raise DomainError("two-qubit state is not Hermitian")
    residual = float(np.linalg.norm(rho_pair[~_X_PATTERN]))
    r11, r22, r33, r44 = (float(rho_pair[m, m].real) for m in range(4))
    r23 = complex(rho_pair[1, 2])
    disc = math.sqrt((r22 - r33) ** 2 + 4.0 * abs(r23) ** 2)
    eigenvalues = (r11, 0.5 * (r22 + r33 + disc), 0.5 * (r22 + r33 - disc), r44)
    return XStateAnalysis(residual=residual, eigenvalues=eigenvalues, r23_modulus=abs(r23))


def mi_lower_bound(C_ij: float, J_ij: float) -> float:
    """Least mutual information compatible with an interqubit current C_ij.

    Evaluated on the minimizing equal-population X state, whose inner
    coherence satisfies |r23| = |C|/(8J): the bound is
    (xi+ ln xi+ + xi- ln xi-)/4 with xi = 1 +/- |C|/(2J).
    """
    if J_ij <= 0.0:
        raise DomainError("coupling J must be positive for the current bound")
    x = abs(float(C_ij)) / (2.0 * float(J_ij))
    if x > 1.0 + 1e-12:
        raise DomainError(f"|C|/(2J) = {x:.6f} exceeds 1: inconsistent current/coupling pair")
    x = min(x, 1.0)
    xi_plus = 1.0 + x
    xi_minus = 1.0 - x
    total = xi_plus * math.log(xi_plus)
    if xi_minus > 0.0:
        total += xi_minus * math.log(xi_minus)
    return 0.25 * total


@dataclass(frozen=True)
class PptCheck:
    min_eigenvalue: float
    is_negative: bool


def ppt_check(rho: np.ndarray, site: int) -> PptCheck:
    """Partial-transpose test on one site against the other two.

    A negative eigenvalue of the partial transpose certifies entanglement
    across that cut; min_eigenvalue within -1e-10 of zero counts as positive.
    """
    lam_min = float(np.linalg.eigvalsh(partial_transpose(rho, site)).min())
    return PptCheck(min_eigenvalue=lam_min, is_negative=lam_min < -1e-10)


@dataclass(frozen=True)
class CorrelationReport:
    """Pairwise information metrics of one 3-qubit state."""

    I: dict
    x_form_residual: dict
    mi_bound: dict
    r23: dict
    ppt_negative: tuple
    ppt_min_eigenvalues: tuple


def correlation_report(rho: np.ndarray, params: ModelParams) -> CorrelationReport:
    """Assemble every pairwise metric; bounds use the current implied by r23.

    The bound's current is reconstructed from the state itself as
    C = 8 J Im(r23), so the report stays meaningful for both bath models.
    Pairs with J = 0 carry no current and get a zero bound.
    """
    mi = {}
    residuals = {}
    bounds = {}
    r23s = {}
    for i, j in PAIRS:
        reduced = herm(partial_trace(rho, (i, j)))
        analysis = x_state_analysis(reduced)
        residuals[(i, j)] = analysis.residual
        r23s[(i, j)] = complex(reduced[1, 2])
        mi[(i, j)] = mutual_information(rho, i, j)
        J = params.pair_value("J", i, j)
        if J > 0.0:
            implied_current = 8.0 * J * float(reduced[1, 2].imag)
            bounds[(i, j)] = mi_lower_bound(implied_current, J)
        else:
            bounds[(i, j)] = 0.0
    checks = [ppt_check(rho, site) for site in range(1, N_SITES + 1)]
    return CorrelationReport(
        I=mi,
        x_form_residual=residuals,
        mi_bound=bounds,
        r23=r23s,
        ppt_negative=tuple(c.is_negative for c in checks),
        ppt_min_eigenvalues=tuple(c.min_eigenvalue for c in checks),
    )
