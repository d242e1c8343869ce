"""
Quantumness measures of a walk.

All entropic quantities are in bits.

- ``Q``: minimum Kullback-Leibler divergence from the walk's position
  distribution to the classical random-walk family. On the line from the
  origin the minimizer is the walk with matching first moment,
  ``p+* = 1/2 + <x>/(2 tau)``.
- ``C``: relative entropy of coherence of the walker's density matrix in the
  position basis, ``H(diag rho) - S(rho)``.
- total quantumness: minimum quantum relative entropy to the diagonal
  classical states. It equals ``Q + C``, and both are minimized by the same
  classical walk; :func:`total_quantumness` computes it both ways.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qwq import config
from qwq.classical import (
    binomial_distribution,
    binomial_log_pmf,
    classical_loop_batch,
    classical_loop_distribution,
    gaussian_reference,
    loop_transition_matrix,
    parity_support,
)
from qwq.distribution import PositionDistribution, variance
from qwq.engine import Line, Loop, Topology
from qwq.errors import ConsistencyError, DivergentQWarning, InvalidDensity, ParameterOutOfRange
from qwq.optimize import minimize_unit_interval

__all__ = [
    "GaussianApprox",
    "L1Quantumness",
    "QResult",
    "QuantumnessReport",
    "Theorem1Terms",
    "asymptotic_p_star",
    "binary_entropy",
    "coherence",
    "gaussian_q_approx",
    "kl_divergence",
    "l1_quantumness",
    "optimal_p_plus",
    "quantumness_q",
    "quantumness_q_numeric",
    "shannon_entropy",
    "theorem1_decomposition",
    "total_quantumness",
    "von_neumann_entropy",
]

LN2 = math.log(2.0)
IDENTITY_TOL = 1e-9


def _xlog2x(p: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.zeros_like(p, dtype=float)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def _probs(d) -> NDArray[np.float64]:
    return d.probs if isinstance(d, PositionDistribution) else np.asarray(d, dtype=float)


def shannon_entropy(d) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    return float(-_xlog2x(_probs(d)).sum())


def binary_entropy(p: float) -> float:
    return shannon_entropy(np.array([p, 1.0 - p]))


def _kl_terms(p: NDArray, log_q: NDArray) -> tuple[float, NDArray[np.bool_]]:
    """KL in bits given natural-log reference probabilities; also the offending mask."""
    bad = (p > config.SUPPORT_EPS) & ~np.isfinite(log_q)
    if bad.any():
        return math.inf, bad
    use = (p > 0) & np.isfinite(log_q)
    val = float(np.sum(p[use] * (np.log(p[use]) - log_q[use])) / LN2)
    # KL is non-negative; tiny negatives are cancellation noise
    if -config.EIG_CLIP < val < 0:
        val = 0.0
    return val, bad


def kl_divergence(p, q) -> float:
    """D(p || q) in bits, or ``inf`` when ``p`` has mass where ``q`` has none.

    Distributions are aligned on the union of their supports. Plain arrays are
    taken as already aligned.
    """
    if isinstance(p, PositionDistribution) and isinstance(q, PositionDistribution):
        support = np.union1d(p.support, q.support)
        pa, qa = p.aligned(support), q.aligned(support)
    else:
        pa, qa = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        log_q = np.where(qa > 0, np.log(np.where(qa > 0, qa, 1.0)), -np.inf)
    return _kl_terms(pa, log_q)[0]


def _check_hermitian_trace(rho: NDArray) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensity(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > config.STATE_ATOL:
        raise InvalidDensity("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > config.STATE_ATOL:
        raise InvalidDensity(f"density matrix has trace {np.trace(rho).real:.15g}")


def von_neumann_entropy(rho: ArrayLike) -> float:
    """S(rho) in bits.

    Eigenvalues in [-1e-10, 0) are set to zero; anything more negative raises
    :class:`InvalidDensity`.
    """
    r = np.asarray(rho)
    _check_hermitian_trace(r)
    w = np.linalg.eigvalsh(r)
    if w.min() < -config.EIG_CLIP:
        raise InvalidDensity(f"density matrix has eigenvalue {w.min():.3e}")
    return float(-_xlog2x(np.clip(w, 0.0, None)).sum())


def coherence(rho: ArrayLike) -> float:
    """Relative entropy of coherence in the position basis, in bits."""
    r = np.asarray(rho)
    if not np.any(r - np.diag(np.diag(r))):
        # diagonal input: exactly incoherent
        _check_hermitian_trace(r)
        return 0.0
    c = shannon_entropy(np.clip(np.real(np.diag(r)), 0.0, None)) - von_neumann_entropy(r)
    if -config.EIG_CLIP < c < 0:
        c = 0.0
    return c


# ---------------------------------------------------------------------------
# Q


def optimal_p_plus(d: PositionDistribution, tau: int) -> float:
    """Coin bias of the nearest classical line walk: ``sum (x + tau) P(x) / (2 tau)``."""
    if tau < 1:
        raise ParameterOutOfRange("tau must be >= 1")
    p = np.dot(d.support + tau, d.probs) / (2.0 * tau)
    return float(min(max(p, 0.0), 1.0))


class QResult(NamedTuple):
    q: float
    p_plus_star: float
    reference: PositionDistribution
    divergent_support: tuple[int, ...] = ()


def _family(t: Topology, tau: int, support: NDArray, start: int):
    """Natural-log classical probabilities on ``support`` as a function of p+.

    Returns a scalar-p callable and a vectorized grid callable.
    """
    if isinstance(t, Loop):
        idx = support - 1

        def grid(ps: NDArray) -> NDArray:
            v = classical_loop_batch(ps, t, tau, start)[:, idx]
            with np.errstate(divide="ignore"):
                return np.log(np.clip(v, 0.0, None))

        start_vec = np.zeros(t.n + 1)
        start_vec[start - 1] = 1.0

        def one(p: float) -> NDArray:
            v = np.linalg.matrix_power(loop_transition_matrix(p, t), tau) @ start_vec
            with np.errstate(divide="ignore"):
                return np.log(np.clip(v[idx], 0.0, None))

        return one, grid

    def grid_line(ps: NDArray) -> NDArray:
        return binomial_log_pmf(support[None, :], tau, np.asarray(ps)[:, None])

    return (lambda p: binomial_log_pmf(support, tau, p)), grid_line


def _masked_cross_entropy(probs: NDArray, log_q: NDArray) -> NDArray:
    """-sum p log2 q along the last axis, +inf on support mismatch."""
    with np.errstate(invalid="ignore"):
        terms = np.where(probs > 0, probs * log_q, 0.0)
    bad = (probs > config.SUPPORT_EPS) & ~np.isfinite(log_q)
    out = -terms.sum(axis=-1) / LN2
    return np.where(bad.any(axis=-1), np.inf, out)


def _reference(t: Topology, tau: int, p: float, start: int) -> PositionDistribution:
    if isinstance(t, Loop):
        return classical_loop_distribution(p, tau, start, loop=t)
    return binomial_distribution(p, tau)


def _minimize_cross_entropy(d: PositionDistribution, t: Topology, tau: int, start: int):
    f1, fgrid = _family(t, tau, d.support, start)
    probs = d.probs
    return minimize_unit_interval(
        lambda p: float(_masked_cross_entropy(probs, f1(p))),
        lambda ps: _masked_cross_entropy(probs[None, :], fgrid(ps)),
    )


def quantumness_q_numeric(
    d: PositionDistribution, t: Topology, tau: int, start: int = 1
) -> QResult:
    """Q by direct minimization over p+ (1024-point grid, golden-section refinement)."""
    p, ce = _minimize_cross_entropy(d, t, tau, start)
    if math.isinf(ce):
        # no p works; an interior p has the widest support, so the
        # diagnostic lists only positions no classical walk can reach
        p = 0.5
    ref = _reference(t, tau, p, start)
    q = kl_divergence(d, ref)
    return QResult(q, p, ref, _offending(d, ref) if math.isinf(q) else ())


def _offending(d: PositionDistribution, ref: PositionDistribution) -> tuple[int, ...]:
    r = ref.aligned(d.support)
    return tuple(int(x) for x in d.support[(d.probs > config.SUPPORT_EPS) & (r == 0)])


def quantumness_q(
    d: PositionDistribution, t: Optional[Topology] = None, tau: Optional[int] = None, start: int = 1
) -> QResult:
    """Quantumness ``Q`` of a position distribution.

    On the line (walk from the origin) the minimizing classical walk has
    ``p+* = optimal_p_plus(d, tau)``. On a loop the minimum is found
    numerically. An infinite result is returned, with the offending positions
    and a :class:`DivergentQWarning`, rather than raised.
    """
    t = Line() if t is None else t
    if isinstance(t, Loop):
        if tau is None:
            raise ParameterOutOfRange("tau is required on a loop")
        res = quantumness_q_numeric(d, t, tau, start)
    else:
        if tau is None:
            tau = int(d.support.max() - d.support.min()) // 2 if d.support.size > 1 else abs(int(d.support[0]))
        p = optimal_p_plus(d, tau)
        ref = binomial_distribution(p, tau)
        q = kl_divergence(d, ref)
        res = QResult(q, p, ref, _offending(d, ref) if math.isinf(q) else ())
    if math.isinf(res.q):
        warnings.warn(
            f"Q is infinite: reference has no mass at positions {list(res.divergent_support)}",
            DivergentQWarning,
            stacklevel=2,
        )
    return res


class Theorem1Terms(NamedTuple):
    q: float
    d_vs_half: float
    penalty: float


def theorem1_decomposition(d: PositionDistribution, tau: int) -> Theorem1Terms:
    """Split Q into the divergence from the fair walk minus a bias penalty.

    ``Q = D(P || P_1/2) - D(P* || P_1/2)`` with ``D(P* || P_1/2) = tau (1 - H2(p+*))``.
    Both forms of the penalty and the identity itself are checked.

    Raises
    ------
    ConsistencyError
        If either equality fails by more than 1e-9 bits.
    """
    res = quantumness_q(d, Line(), tau)
    half = binomial_distribution(0.5, tau)
    d_half = kl_divergence(d, half)
    penalty = tau * (1.0 - binary_entropy(res.p_plus_star))
    penalty_kl = kl_divergence(res.reference, half)
    if abs(penalty - penalty_kl) > IDENTITY_TOL * max(1.0, tau):
        raise ConsistencyError(f"penalty forms disagree: {penalty!r} vs {penalty_kl!r}")
    if math.isfinite(res.q) and abs(res.q - (d_half - penalty)) > IDENTITY_TOL * max(1.0, abs(res.q)):
        raise ConsistencyError(f"Q={res.q!r} but D_half - penalty = {d_half - penalty!r}")
    return Theorem1Terms(res.q, d_half, penalty)


# ---------------------------------------------------------------------------
# total quantumness


@dataclass(frozen=True)
class QuantumnessReport:
    q_value: float
    coherence: float
    total: float
    p_plus_star: float
    reference_distribution: PositionDistribution
    # D(P || P_1/2); None on a loop
    upper_bound: Optional[float] = None
    saturated: Optional[bool] = None
    direct_total: float = math.nan
    direct_p_plus: float = math.nan
    divergent_support: tuple[int, ...] = ()
    distribution: Optional[PositionDistribution] = field(default=None, repr=False)


def _default_support(t: Topology, tau: int) -> NDArray[np.int64]:
    return t.positions if isinstance(t, Loop) else parity_support(tau)


def total_quantumness(
    rho: ArrayLike,
    t: Optional[Topology] = None,
    tau: int = 0,
    start: int = 1,
    support: Optional[ArrayLike] = None,
) -> QuantumnessReport:
    """``Q``, ``C`` and their sum for a walker density matrix.

    ``support`` lists the positions indexing ``rho`` (default: parity support
    of ``tau`` on the line, sites 1..n+1 on a loop).

    The total is also computed directly as ``-S(rho) + min_p CE(p)`` where CE
    is the cross entropy of the diagonal against the classical family.

    Raises
    ------
    ConsistencyError
        If the two routes differ by more than 1e-9 bits.
    """
    t = Line() if t is None else t
    r = np.asarray(rho)
    pos = _default_support(t, tau) if support is None else np.asarray(support)
    d = PositionDistribution(pos, np.real(np.diag(r)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentQWarning)
        res = quantumness_q(d, t, tau, start)
    c = coherence(r)
    total = res.q + c

    p_direct, ce_min = _minimize_cross_entropy(d, t, tau, start)
    direct = ce_min - von_neumann_entropy(r)
    if math.isfinite(total) or math.isfinite(direct):
        if not abs(total - direct) <= IDENTITY_TOL * max(1.0, abs(total)):
            raise ConsistencyError(f"Q + C = {total!r} but direct route gives {direct!r}")

    upper = sat = None
    if isinstance(t, Line):
        upper = kl_divergence(d, binomial_distribution(0.5, tau))
        sat = bool(abs(upper - res.q) < IDENTITY_TOL)
    if math.isinf(res.q):
        warnings.warn(
            f"Q is infinite: reference has no mass at positions {list(res.divergent_support)}",
            DivergentQWarning,
            stacklevel=2,
        )
    return QuantumnessReport(
        q_value=res.q,
        coherence=c,
        total=total,
        p_plus_star=res.p_plus_star,
        reference_distribution=res.reference,
        upper_bound=upper,
        saturated=sat,
        direct_total=direct,
        direct_p_plus=p_direct,
        divergent_support=res.divergent_support,
        distribution=d,
    )


# ---------------------------------------------------------------------------
# long-time approximation


class GaussianApprox(NamedTuple):
    q_approx: float
    entropy_gap: float
    variance_term: float
    expansion: float


def gaussian_q_approx(d: PositionDistribution, tau: int, mean: Optional[float] = None) -> GaussianApprox:
    """Compare ``d`` with its Gaussian reference of matching first moment.

    ``q_approx`` is ``D(d || G)`` evaluated directly. ``expansion`` is the sum
    ``entropy_gap + variance_term`` with

    - ``entropy_gap = H(G) - H(d)``
    - ``variance_term = (var_d - var_G) / (2 sigma^2 ln 2)``

    where ``sigma^2 = tau (1 - mean^2/tau^2)`` is the Gaussian's width
    parameter and ``var_G`` the variance of the discretized reference about
    ``mean``. With ``mean`` equal to the mean of ``d`` the two agree to
    rounding.
    """
    if tau < 10:
        raise ParameterOutOfRange("the Gaussian reference needs tau >= 10")
    m, var_d = variance(d)
    if mean is None:
        mean = m
    g = gaussian_reference(mean, tau)
    direct = kl_divergence(d, g)
    gap = shannon_entropy(g) - shannon_entropy(d)
    s2 = tau * (1.0 - (mean / tau) ** 2)
    var_g = float(np.dot((g.support - mean) ** 2, g.probs))
    # about ``mean`` rather than about m, so the identity holds for any mean
    var_about = float(np.dot((d.support - mean) ** 2, d.probs))
    if s2 <= 1e-12 * tau:
        vterm = 0.0 if var_about == 0 else math.inf
    else:
        vterm = (var_about - var_g) / (2.0 * s2 * LN2)
    return GaussianApprox(direct, gap, vterm, gap + vterm)


def asymptotic_p_star(eta: float, gamma: float, alpha: float, beta: float, theta: float) -> float:
    """Long-time nearest-walk coin bias of a unitary walk with coin ``U(alpha, beta, theta)``.

    ``1/2 + (cos 2eta + tan(theta) cos(phi) sin 2eta)(1 - sin theta)/2`` with
    ``phi = alpha + beta - gamma``. ``tan(theta)(1 - sin theta)`` is evaluated
    as ``sin(theta) cos(theta) / (1 + sin(theta))``, which is finite on the
    whole range 0 <= theta <= pi/2.
    """
    if not 0.0 <= theta <= math.pi / 2:
        raise ParameterOutOfRange(f"theta={theta!r} outside [0, pi/2]")
    phi = alpha + beta - gamma
    s, c = math.sin(theta), math.cos(theta)
    drift = math.cos(2 * eta) * (1.0 - s) + math.sin(2 * eta) * math.cos(phi) * s * c / (1.0 + s)
    return 0.5 + drift / 2.0


# ---------------------------------------------------------------------------
# l1 variant


class L1Quantumness(NamedTuple):
    q_l1: float
    c_l1: float
    total_l1: float
    p_plus: float


def l1_quantumness(
    rho: ArrayLike,
    t: Optional[Topology] = None,
    tau: int = 0,
    start: int = 1,
    support: Optional[ArrayLike] = None,
) -> L1Quantumness:
    """l1 versions: ``min_p sum |P - P_RW(p)|`` plus the l1-norm of coherence."""
    t = Line() if t is None else t
    r = np.asarray(rho)
    pos = _default_support(t, tau) if support is None else np.asarray(support)
    probs = np.clip(np.real(np.diag(r)), 0.0, None)
    f1, fgrid = _family(t, tau, pos, start)
    p, q = minimize_unit_interval(
        lambda p: float(np.abs(probs - np.exp(f1(p))).sum()),
        lambda ps: np.abs(probs[None, :] - np.exp(fgrid(ps))).sum(axis=1),
        tol=1e-13,  # the l1 objective has a kink at its minimum, so error is linear in tol
    )
    off = np.abs(r).sum() - np.abs(np.diag(r)).sum()
    c = float(max(off, 0.0))
    return L1Quantumness(q, c, q + c, p)
