"""
Classical random-walk references.

A classical walker steps +1 with probability ``p_plus`` and -1 otherwise. On
the line from the origin its position law is binomial; on the loop it moves
cyclically among sites 1..n and, after each move, leaks from the sink site k
into site n+1 with probability r.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp
from scipy.stats import binom

from qwq.coin import CoinState, identity, pauli_z
from qwq.distribution import PositionDistribution
from qwq.engine import JointState, Line, Loop, Topology, builtin_channel, evolve_noisy, position_marginal
from qwq.errors import MeanOutOfRange, ParameterOutOfRange

__all__ = [
    "ClassicalWalk",
    "ContractionCheck",
    "binomial_distribution",
    "binomial_log_pmf",
    "classical_density_operator",
    "classical_loop_batch",
    "classical_loop_distribution",
    "classical_loop_trajectory",
    "contraction_joint_state",
    "contraction_walk_check",
    "gaussian_reference",
    "loop_transition_matrix",
    "parity_support",
]


@dataclass(frozen=True)
class ClassicalWalk:
    p_plus: float
    topology: Topology = Line()

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_plus <= 1.0:
            raise ParameterOutOfRange(f"p_plus={self.p_plus} outside [0, 1]")

    @property
    def p_minus(self) -> float:
        return 1.0 - self.p_plus


def _p(w: Union[ClassicalWalk, float]) -> float:
    return w.p_plus if isinstance(w, ClassicalWalk) else ClassicalWalk(float(w)).p_plus


def parity_support(tau: int) -> NDArray[np.int64]:
    """Positions -tau, -tau+2, ..., tau."""
    return np.arange(-tau, tau + 1, 2)


def binomial_log_pmf(x: ArrayLike, tau: int, p_plus: ArrayLike) -> NDArray[np.float64]:
    """Natural log of P_RW(x, tau); ``-inf`` off the support.

    Broadcasts over ``x`` and ``p_plus``.
    """
    x = np.asarray(x)
    k = (np.asarray(tau) + x) / 2.0
    return binom.logpmf(k, tau, p_plus)


def binomial_distribution(w: Union[ClassicalWalk, float], tau: int) -> PositionDistribution:
    """Binomial position law after ``tau`` steps from the origin (log-space evaluation)."""
    if isinstance(w, ClassicalWalk) and not isinstance(w.topology, Line):
        raise ParameterOutOfRange("binomial_distribution is for the line")
    x = parity_support(tau)
    probs = np.exp(binomial_log_pmf(x, tau, _p(w)))
    return PositionDistribution(x, probs / probs.sum())


def classical_density_operator(d: PositionDistribution) -> NDArray[np.float64]:
    """Diagonal density matrix with ``d`` on the diagonal."""
    return np.diag(d.probs.astype(float))


# ---------------------------------------------------------------------------
# contraction-noise realization of the classical walk


class ContractionCheck(NamedTuple):
    state: JointState
    max_offdiagonal: float
    max_diagonal_deviation: float
    max_joint_deviation: float


def contraction_joint_state(p_plus: float, tau: int) -> NDArray[np.float64]:
    """Expected joint coin-walker state of the contraction-noise walk.

    Returned on the parity support of ``tau`` with coin-major ordering::

        sum_m C(tau-1, m) p+^m p-^(tau-1-m)
              (p+ |+><+| (x) |2m-tau+2><.| + p- |-><-| (x) |2m-tau><.|)
    """
    if tau < 1:
        raise ParameterOutOfRange("tau must be >= 1")
    x = parity_support(tau)
    m = x.size
    out = np.zeros((2 * m, 2 * m))
    weights = np.exp(binom.logpmf(np.arange(tau), tau - 1, p_plus))
    pm = 1.0 - p_plus
    for j, w in enumerate(weights):
        right = (2 * j - tau + 2 + tau) // 2
        left = (2 * j - tau + tau) // 2
        out[right, right] += w * p_plus
        out[m + left, m + left] += w * pm
    return out


def contraction_walk_check(p_plus: float, coin_choice: str = "identity", tau: int = 1) -> ContractionCheck:
    """Run the contraction-noise walk and measure how classical it is.

    Reports the largest off-diagonal entry of the walker's density matrix, the
    largest deviation of its diagonal from the binomial law, and the largest
    deviation of the joint state from :func:`contraction_joint_state`.
    """
    coins = {"identity": identity, "pauli-z": pauli_z}
    try:
        coin = coins[coin_choice]()
    except KeyError:
        raise ValueError(f"coin_choice must be 'identity' or 'pauli-z', got {coin_choice!r}") from None
    if tau < 1:
        raise ParameterOutOfRange("tau must be >= 1")
    # the initial coin is irrelevant: the channel resets it before the first move
    state = evolve_noisy(coin, CoinState.pure(0.0), builtin_channel("contraction", p_plus), Line(), tau)
    d, rho = position_marginal(state)
    offdiag = np.abs(rho - np.diag(np.diag(rho)))
    ref = binomial_distribution(p_plus, tau)
    diag_dev = np.max(np.abs(d.probs - ref.aligned(d.support)))
    joint_dev = np.max(np.abs(state.rho - contraction_joint_state(p_plus, tau)))
    return ContractionCheck(state, float(offdiag.max()), float(diag_dev), float(joint_dev))


# ---------------------------------------------------------------------------
# loop


def _loop_parts(loop: Loop) -> tuple[NDArray, NDArray, NDArray]:
    """Move matrices (right, left) and the sink matrix S_k, column-stochastic."""
    n1 = loop.n + 1
    right = np.zeros((n1, n1))
    left = np.zeros((n1, n1))
    for j in range(loop.n):
        right[(j + 1) % loop.n, j] = 1.0
        left[(j - 1) % loop.n, j] = 1.0
    right[n1 - 1, n1 - 1] = left[n1 - 1, n1 - 1] = 1.0
    k = loop.sink_site - 1
    s = np.eye(n1)
    s[k, k] = 1.0 - loop.leak
    s[n1 - 1, k] = loop.leak
    return right, left, s


def loop_transition_matrix(w: Union[ClassicalWalk, float], loop: Loop) -> NDArray[np.float64]:
    """One-step column-stochastic matrix ``S_k (p+ M_right + p- M_left)``.

    The sink row/column is absorbing in both moves.
    """
    p = _p(w)
    right, left, s = _loop_parts(loop)
    move = p * right + (1.0 - p) * left
    move[-1, -1] = 1.0
    return s @ move


def _start_vector(loop: Loop, start: int) -> NDArray[np.float64]:
    if not 1 <= start <= loop.n:
        raise ParameterOutOfRange(f"start site {start} outside 1..{loop.n}")
    v = np.zeros(loop.n + 1)
    v[start - 1] = 1.0
    return v


def classical_loop_trajectory(
    w: Union[ClassicalWalk, float], loop: Loop, tau: int, start: int = 1
) -> NDArray[np.float64]:
    """Probability vectors over sites 1..n+1 for steps 0..tau, shape (tau+1, n+1)."""
    T = loop_transition_matrix(w, loop)
    out = np.empty((tau + 1, loop.n + 1))
    out[0] = _start_vector(loop, start)
    for step in range(tau):
        out[step + 1] = T @ out[step]
    return out


def classical_loop_distribution(
    w: Union[ClassicalWalk, float], tau: int, start: int = 1, loop: Optional[Loop] = None
) -> PositionDistribution:
    """Classical loop walk after ``tau`` steps, support 1..n+1."""
    if loop is None:
        if not isinstance(w, ClassicalWalk) or not isinstance(w.topology, Loop):
            raise ParameterOutOfRange("a loop topology is required")
        loop = w.topology
    v = classical_loop_trajectory(w, loop, tau, start)[-1]
    return PositionDistribution(loop.positions, v)


def classical_loop_batch(
    p_plus: NDArray[np.float64], loop: Loop, tau: int, start: int = 1
) -> NDArray[np.float64]:
    """Loop distributions at step ``tau`` for many ``p_plus`` at once, shape (len(p), n+1)."""
    p = np.asarray(p_plus, dtype=float)
    right, left, s = _loop_parts(loop)
    # move(p) = left + p (right - left), sink column fixed
    a = s @ left
    b = s @ (right - left)
    v = np.tile(_start_vector(loop, start), (p.size, 1))
    for _ in range(tau):
        v = v @ a.T + p[:, None] * (v @ b.T)
    return v


# ---------------------------------------------------------------------------
# gaussian reference


def gaussian_reference(mean: float, tau: int) -> PositionDistribution:
    """Discrete Gaussian on the parity-``tau`` support, renormalized.

    Its width follows the classical walk with the same first moment:
    ``sigma^2 = tau (1 - mean^2 / tau^2)``. At ``|mean| = tau`` it collapses to
    a point mass.

    Raises
    ------
    MeanOutOfRange
        If ``|mean| > tau``.
    """
    if tau < 1:
        raise ParameterOutOfRange("tau must be >= 1")
    if abs(mean) > tau * (1 + 1e-12):
        raise MeanOutOfRange(f"|mean|={abs(mean)} exceeds tau={tau}")
    x = parity_support(tau)
    s2 = tau * (1.0 - (mean / tau) ** 2)
    if s2 <= 1e-12 * tau:
        end = tau if mean > 0 else -tau
        return PositionDistribution(x, (x == end).astype(float))
    logw = -((x - mean) ** 2) / (2.0 * s2)
    return PositionDistribution(x, np.exp(logw - logsumexp(logw)))
