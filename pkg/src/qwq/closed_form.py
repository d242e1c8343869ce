"""
Closed-form walker amplitudes on the line.

After tau steps from x = 0 the amplitudes are

    Psi_pm(tau) = sum_{N+=0}^{tau-1} <pm| R_{N+} |phi0> |2 N+ - tau + 1 pm 1>

where R_{N+} sums every product ``U P_{k_{tau-1}} U ... U P_{k_1} U`` with
exactly N+ of the inner projectors equal to P0 = |+><+|. Grouping the
products into alternating runs turns each sum into a terminating Gauss
hypergeometric series in ``z = U01 U10 / (U00 U11)``.

This is an independent route to the same state as
:func:`qwq.engine.evolve_pure`, used to cross-check it.
"""

from __future__ import annotations

from math import comb

import numpy as np
from numpy.typing import NDArray

from qwq.coin import CoinOperator, CoinState
from qwq.engine import PureWalkState
from qwq.errors import InvalidC, NonPureCoin, NonTerminating, ParameterOutOfRange, SingularCoin

__all__ = [
    "SINGULAR_THRESHOLD",
    "closed_form_state",
    "composition_count",
    "hyp2f1_terminating",
    "r_matrix",
]

SINGULAR_THRESHOLD = 1e-10


def hyp2f1_terminating(a: int, b: int, c: int, z: complex) -> complex:
    """Gauss 2F1(a, b; c; z) for a non-positive integer ``a`` or ``b``.

    Summed term by term; each term follows from the previous one by
    ``t_{j+1} = t_j (a + j)(b + j) z / ((c + j)(j + 1))``.

    Raises
    ------
    NonTerminating
        If neither ``a`` nor ``b`` is a non-positive integer.
    InvalidC
        If ``c < 1``.
    """
    if c < 1:
        raise InvalidC(f"c must be a positive integer, got {c}")
    if a > 0 and b > 0:
        raise NonTerminating(f"2F1({a}, {b}; {c}; z) does not terminate")
    n_terms = -a if a <= 0 else -b
    if b <= 0:
        n_terms = min(n_terms, -b)
    total = 1.0 + 0j
    term = 1.0 + 0j
    for j in range(n_terms):
        term *= (a + j) * (b + j) / ((c + j) * (j + 1)) * z
        total += term
    return total


def composition_count(n_balls: int, n_boxes: int) -> int:
    """Ways to put ``n_balls`` identical balls in ``n_boxes`` boxes, none empty."""
    if n_boxes < 1 or n_balls < n_boxes:
        return 0
    return comb(n_balls - 1, n_boxes - 1)


def r_matrix(c: CoinOperator, tau: int, n_plus: int) -> NDArray[np.complex128]:
    """The 2x2 path-sum matrix R_{N+} for ``tau`` steps.

    Raises
    ------
    SingularCoin
        In the generic branch (1 <= N+ <= tau-2) when ``|U00 U11|`` or
        ``|U01 U10|`` is below 1e-10.
    """
    if tau < 2:
        raise ParameterOutOfRange("r_matrix needs tau >= 2")
    if not 0 <= n_plus <= tau - 1:
        raise ParameterOutOfRange(f"n_plus={n_plus} outside 0..{tau - 1}")
    U = np.asarray(c.matrix)
    n_minus = tau - 1 - n_plus
    if n_plus == 0:
        return np.outer(U[:, 1], U[1, :]) * U[1, 1] ** (tau - 2)
    if n_minus == 0:
        return np.outer(U[:, 0], U[0, :]) * U[0, 0] ** (tau - 2)

    u00, u01, u10, u11 = U[0, 0], U[0, 1], U[1, 0], U[1, 1]
    if abs(u00 * u11) < SINGULAR_THRESHOLD:
        raise SingularCoin(f"|U00 U11| = {abs(u00 * u11):.3e} is below {SINGULAR_THRESHOLD}")
    # z = 0 leaves only the pure-run terms; treat as degenerate too
    if abs(u01 * u10) < SINGULAR_THRESHOLD:
        raise SingularCoin(f"|U01 U10| = {abs(u01 * u10):.3e}: z is degenerate")
    z = u01 * u10 / (u00 * u11)

    # every term written with non-negative powers only
    base = u00 ** (n_plus - 1) * u11 ** (n_minus - 1)
    f11 = hyp2f1_terminating(1 - n_plus, 1 - n_minus, 1, z)
    # runs starting with P0 and ending with P1, and the reverse
    out = f11 * base * u01 * np.outer(U[:, 0], U[1, :])
    out = out + f11 * base * u10 * np.outer(U[:, 1], U[0, :])
    # runs that start and end on the same projector
    if n_plus >= 2:
        w = (n_plus - 1) * u01 * u10 * u00 ** (n_plus - 2) * u11 ** (n_minus - 1)
        w *= hyp2f1_terminating(2 - n_plus, 1 - n_minus, 2, z)
        out = out + w * np.outer(U[:, 0], U[0, :])
    if n_minus >= 2:
        w = (n_minus - 1) * u01 * u10 * u00 ** (n_plus - 1) * u11 ** (n_minus - 2)
        w *= hyp2f1_terminating(1 - n_plus, 2 - n_minus, 2, z)
        out = out + w * np.outer(U[:, 1], U[1, :])
    return out


def closed_form_state(c: CoinOperator, s0: CoinState, tau: int) -> PureWalkState:
    """Walker amplitudes from the R_{N+} matrices, on positions -tau..tau.

    ``tau`` of 0 and 1 are handled directly.

    Raises
    ------
    SingularCoin
        Propagated from :func:`r_matrix`; fall back to ``evolve_pure``.
    """
    if not s0.is_pure:
        raise NonPureCoin("closed_form_state needs a pure initial coin state")
    if tau < 0:
        raise ParameterOutOfRange("tau must be non-negative")
    phi = np.asarray(s0.amplitudes)
    positions = np.arange(-tau, tau + 1)
    plus = np.zeros(2 * tau + 1, dtype=np.complex128)
    minus = np.zeros(2 * tau + 1, dtype=np.complex128)
    if tau == 0:
        plus[0], minus[0] = phi
        return PureWalkState(0, positions, plus, minus)
    if tau == 1:
        v = np.asarray(c.matrix) @ phi
        plus[2], minus[0] = v
        return PureWalkState(1, positions, plus, minus)
    for n_plus in range(tau):
        v = r_matrix(c, tau, n_plus) @ phi
        x = 2 * n_plus - tau + 1
        plus[x + 1 + tau] = v[0]
        minus[x - 1 + tau] = v[1]
    return PureWalkState(tau, positions, plus, minus)
