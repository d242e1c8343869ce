"""
Walk engine: unitary and noisy evolution of the coin-walker system.

Two topologies are supported:

- :class:`Line`: the integer line, walker starting at x = 0. After tau steps
  the occupied positions are {-tau, -tau+2, ..., tau}.
- :class:`Loop`: n sites 1..n on a ring plus an absorbing sink site n+1
  attached to site k with leak probability r.

Joint states are indexed coin-major: index ``c * m + i`` for coin c and
position index i, so coin operators lift as ``kron(K, I)``.

One noisy step applies coin noise, then the coin unitary, then the
coin-conditioned shift, then (loop only) the sink channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qwq import config
from qwq.coin import CoinOperator, CoinState
from qwq.distribution import PositionDistribution
from qwq.errors import (
    DimensionMismatch,
    IncompleteKraus,
    InvalidDensity,
    NonPureCoin,
    ParameterOutOfRange,
    UnsupportedTopology,
)

__all__ = [
    "JointState",
    "Line",
    "Loop",
    "NoiseChannel",
    "PureWalkState",
    "SinkChannel",
    "Topology",
    "builtin_channel",
    "evolve_noisy",
    "evolve_pure",
    "iter_noisy",
    "iter_pure",
    "position_marginal",
    "step_operator",
]


@dataclass(frozen=True)
class Line:
    """The integer line. ``max_steps`` sizes the dense step operator."""

    max_steps: Optional[int] = None

    def __post_init__(self) -> None:
        if self.max_steps is not None and self.max_steps < 1:
            raise ParameterOutOfRange("max_steps must be a positive integer")


@dataclass(frozen=True)
class Loop:
    """A ring of ``n`` sites with a sink (site n+1) hanging off ``sink_site``."""

    n: int
    sink_site: int
    leak: float

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ParameterOutOfRange(f"loop needs n >= 3 sites, got {self.n}")
        if not 1 <= self.sink_site <= self.n:
            raise ParameterOutOfRange(f"sink_site={self.sink_site} outside 1..{self.n}")
        if not 0.0 <= self.leak <= 1.0:
            raise ParameterOutOfRange(f"leak probability r={self.leak} outside [0, 1]")

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(1, self.n + 2)

    @property
    def sink(self) -> int:
        return self.n + 1


Topology = Union[Line, Loop]


# ---------------------------------------------------------------------------
# shift maps


def _shift_targets(t: Topology, half_width: int = 0) -> tuple[NDArray, NDArray]:
    """Destination index of each position index under M+ and M-.

    For the line the grid is -half_width..half_width and the map wraps around;
    callers keep amplitude away from the edges so the wrap never carries mass.
    """
    if isinstance(t, Loop):
        n = t.n
        plus = np.append((np.arange(n) + 1) % n, n)
    else:
        size = 2 * half_width + 1
        plus = (np.arange(size) + 1) % size
    minus = np.empty_like(plus)
    minus[plus] = np.arange(plus.size)
    return plus, minus


def _move_matrices(t: Topology) -> tuple[NDArray, NDArray, NDArray[np.int64]]:
    if isinstance(t, Loop):
        pos = t.positions
        plus, _ = _shift_targets(t)
        m_plus = np.zeros((pos.size, pos.size))
        m_plus[plus, np.arange(pos.size)] = 1.0
        return m_plus, m_plus.T.copy(), pos
    if t.max_steps is None:
        raise UnsupportedTopology("a dense line step operator needs Line(max_steps=...)")
    T = t.max_steps
    pos = np.arange(-T, T + 1)
    # shifts off the finite grid are dropped
    m_plus = np.eye(pos.size, k=-1)
    return m_plus, m_plus.T.copy(), pos


def step_operator(c: CoinOperator, t: Topology) -> NDArray[np.complex128]:
    """Dense one-step walk operator ``E (U kron I)``.

    On a loop this is exactly unitary. On ``Line(max_steps=T)`` the operator
    lives on positions -T..T and is exact for states supported strictly
    inside that window; use :func:`apply_step_operator` to enforce that.
    """
    m_plus, m_minus, _ = _move_matrices(t)
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    shift = np.kron(p0, m_plus) + np.kron(p1, m_minus)
    return shift @ np.kron(np.asarray(c.matrix), np.eye(m_plus.shape[0]))


def apply_step_operator(
    c: CoinOperator, t: Topology, vec: ArrayLike, steps: int = 1
) -> NDArray[np.complex128]:
    """Apply the dense step operator ``steps`` times to a joint state vector.

    Raises
    ------
    UnsupportedTopology
        On a line, when amplitude would be pushed past the end of the grid.
    """
    W = step_operator(c, t)
    v = np.asarray(vec, dtype=np.complex128)
    if v.shape != (W.shape[0],):
        raise DimensionMismatch(f"state has shape {v.shape}, operator {W.shape}")
    for _ in range(steps):
        if isinstance(t, Line):
            m = v.size // 2
            edge = np.abs(v.reshape(2, m)[:, [0, -1]])
            if np.any(edge > 0):
                raise UnsupportedTopology(f"line support exhausted (max_steps={t.max_steps})")
        v = W @ v
    return v


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True)
class NoiseChannel:
    """Coin noise given by 2x2 Kraus operators."""

    kraus_ops: tuple[NDArray[np.complex128], ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.kraus_ops)
        if not ops:
            raise IncompleteKraus("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (2, 2):
                raise DimensionMismatch(f"coin Kraus operator has shape {k.shape}")
            k.setflags(write=False)
        total = sum(k.conj().T @ k for k in ops)
        err = np.max(np.abs(total - np.eye(2)))
        if err > config.ATOL:
            raise IncompleteKraus(f"sum K^dagger K deviates from identity by {err:.3e}")
        object.__setattr__(self, "kraus_ops", ops)

    def apply(self, rho: ArrayLike) -> NDArray[np.complex128]:
        r = np.asarray(rho, dtype=np.complex128)
        return sum(k @ r @ k.conj().T for k in self.kraus_ops)


def _check_unit(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ParameterOutOfRange(f"{name}={value} outside [0, 1]")
    return value


def builtin_channel(name: str, param: Optional[float] = None) -> NoiseChannel:
    """Named coin channels.

    ``identity``
        No noise.
    ``contraction`` (p_plus)
        Resets the coin to ``p+ |+><+| + p- |-><-|``.
    ``unital-decay`` (q)
        Kraus ``sqrt(q) P0, sqrt(q) P1, sqrt(1-q) I``; q = 1 fully dephases.
    ``amplitude-damping`` (gamma)
        Decay |-> to |+> with probability gamma.
    ``depolarizing`` (p)
        ``rho -> (1 - p) rho + p I/2``.
    """
    key = name.lower()
    if key == "identity":
        return NoiseChannel((np.eye(2),), "identity")
    if param is None:
        raise ParameterOutOfRange(f"channel {name!r} needs a parameter")
    if key == "contraction":
        pp = _check_unit(param, "p_plus")
        a, b = np.sqrt(pp), np.sqrt(1.0 - pp)
        ops = (
            [[a, 0], [0, 0]],
            [[0, a], [0, 0]],
            [[0, 0], [b, 0]],
            [[0, 0], [0, b]],
        )
        return NoiseChannel(tuple(np.array(k) for k in ops), "contraction")
    if key == "unital-decay":
        q = _check_unit(param, "q")
        ops = (
            np.sqrt(q) * np.diag([1.0, 0.0]),
            np.sqrt(q) * np.diag([0.0, 1.0]),
            np.sqrt(1.0 - q) * np.eye(2),
        )
        return NoiseChannel(ops, "unital-decay")
    if key == "amplitude-damping":
        g = _check_unit(param, "gamma")
        ops = (np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]]))
        return NoiseChannel(ops, "amplitude-damping")
    if key == "depolarizing":
        p = _check_unit(param, "p")
        paulis = (
            np.array([[0, 1], [1, 0]]),
            np.array([[0, -1j], [1j, 0]]),
            np.array([[1, 0], [0, -1]]),
        )
        ops = (np.sqrt(1 - 3 * p / 4) * np.eye(2),) + tuple(np.sqrt(p / 4) * s for s in paulis)
        return NoiseChannel(ops, "depolarizing")
    raise ValueError(f"unknown channel {name!r}")


builtin_channels = builtin_channel


@dataclass(frozen=True)
class SinkChannel:
    """Leak from loop site k into the sink site n+1 with probability r.

    Kraus operators on the joint space::

        K1 = I kron (sum_{x != k} |x><x| + sqrt(1-r) |k><k|)
        K2 = I kron sqrt(r) |n+1><k|
    """

    loop: Loop

    @property
    def position_kraus(self) -> tuple[NDArray, NDArray]:
        n1 = self.loop.n + 1
        k = self.loop.sink_site - 1
        r = self.loop.leak
        a = np.eye(n1)
        a[k, k] = np.sqrt(1.0 - r)
        b = np.zeros((n1, n1))
        b[n1 - 1, k] = np.sqrt(r)
        return a, b

    @property
    def kraus_ops(self) -> tuple[NDArray, NDArray]:
        a, b = self.position_kraus
        return np.kron(np.eye(2), a), np.kron(np.eye(2), b)

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def _apply_blocks(self, X: NDArray) -> NDArray:
        # X[c, c', x, y], positions 1..n+1
        n1 = self.loop.n + 1
        k = self.loop.sink_site - 1
        r = self.loop.leak
        keep = np.ones(n1)
        keep[k] = np.sqrt(1.0 - r)
        out = X * np.outer(keep, keep)
        out[:, :, n1 - 1, n1 - 1] += r * X[:, :, k, k]
        return out

    def apply(self, rho: ArrayLike) -> NDArray[np.complex128]:
        """Apply the sink to a joint density matrix of dimension 2(n+1)."""
        n1 = self.loop.n + 1
        r = np.asarray(rho, dtype=np.complex128)
        if r.shape != (2 * n1, 2 * n1):
            raise DimensionMismatch(f"expected a {2 * n1}-dim joint state, got {r.shape}")
        X = r.reshape(2, n1, 2, n1).transpose(0, 2, 1, 3)
        return _blocks_to_matrix(self._apply_blocks(X))


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class PureWalkState:
    """Unnormalized walker amplitudes conditioned on the final coin value.

    ``psi_plus[i]`` is the amplitude of ``|+>|positions[i]>``. On the line the
    positions are -tau..tau; entries of the wrong parity are exactly zero.
    """

    tau: int
    positions: NDArray[np.int64]
    psi_plus: NDArray[np.complex128]
    psi_minus: NDArray[np.complex128]

    def norm(self) -> float:
        return float(np.vdot(self.psi_plus, self.psi_plus).real
                     + np.vdot(self.psi_minus, self.psi_minus).real)

    def vector(self) -> NDArray[np.complex128]:
        return np.concatenate([self.psi_plus, self.psi_minus])

    def amplitude(self, coin: int, x: int) -> complex:
        i = int(np.searchsorted(self.positions, x))
        if i >= self.positions.size or self.positions[i] != x:
            return 0j
        return complex((self.psi_plus, self.psi_minus)[coin][i])


@dataclass(frozen=True)
class JointState:
    """Density matrix on coin kron position at step ``tau``."""

    tau: int
    rho: NDArray[np.complex128]
    positions: NDArray[np.int64]
    topology: Topology = field(default_factory=Line)

    def __post_init__(self) -> None:
        m = self.positions.size
        if self.rho.shape != (2 * m, 2 * m):
            raise DimensionMismatch(
                f"rho has shape {self.rho.shape} but {m} positions were given"
            )

    def tensor(self) -> NDArray[np.complex128]:
        m = self.positions.size
        return self.rho.reshape(2, m, 2, m)

    def check(self) -> None:
        """Raise :class:`InvalidDensity` unless Hermitian, unit-trace and PSD."""
        herm = np.max(np.abs(self.rho - self.rho.conj().T))
        if herm > config.STATE_ATOL:
            raise InvalidDensity(f"joint state not Hermitian (deviation {herm:.3e})")
        tr = np.trace(self.rho).real
        if abs(tr - 1.0) > config.STATE_ATOL:
            raise InvalidDensity(f"joint state has trace {tr:.15g}")
        lo = np.linalg.eigvalsh(self.rho).min()
        if lo < -config.STATE_PSD_ATOL:
            raise InvalidDensity(f"joint state has eigenvalue {lo:.3e}")


# ---------------------------------------------------------------------------
# evolution


def iter_pure(c: CoinOperator, s0: CoinState, tau: int) -> Iterator[PureWalkState]:
    """Yield the unitary line walk's state after each of the steps 1..tau."""
    if tau < 0:
        raise ParameterOutOfRange("tau must be non-negative")
    if not s0.is_pure:
        raise NonPureCoin("a unitary walk needs a pure initial coin state")
    U = np.asarray(c.matrix)
    size = 2 * tau + 1
    a = np.zeros((2, size), dtype=np.complex128)
    a[:, tau] = s0.amplitudes
    for step in range(1, tau + 1):
        # only -step+1..step-1 is populated before this step
        lo, hi = tau - step + 1, tau + step
        a[:, lo:hi] = U @ a[:, lo:hi]
        a[0, lo : hi + 1] = a[0, lo - 1 : hi]
        a[1, lo - 1 : hi - 1] = a[1, lo:hi]
        a[1, hi - 1] = 0.0
        win = slice(tau - step, tau + step + 1)
        yield PureWalkState(step, np.arange(-step, step + 1), a[0, win].copy(), a[1, win].copy())


def evolve_pure(
    c: CoinOperator, s0: CoinState, tau: int, t: Optional[Line] = None
) -> PureWalkState:
    """Unitary walk on the line from x = 0, O(tau^2) amplitude updates.

    Raises
    ------
    NonPureCoin
        If the initial coin state is mixed.
    """
    if t is not None and not isinstance(t, Line):
        raise UnsupportedTopology("evolve_pure runs on the line; use evolve_noisy for loops")
    state = None
    for state in iter_pure(c, s0, tau):
        pass
    if state is None:
        amp = np.asarray(s0.amplitudes)
        state = PureWalkState(0, np.array([0]), amp[:1].copy(), amp[1:].copy())
    return state


def _initial_blocks(s0: CoinState, size: int, start_index: int) -> NDArray:
    # X[c, c', x, y] = <c, x| rho |c', y>
    X = np.zeros((2, 2, size, size), dtype=np.complex128)
    X[:, :, start_index, start_index] = s0.density
    return X


def _blocks_to_matrix(X: NDArray) -> NDArray:
    m = X.shape[-1]
    return X.transpose(0, 2, 1, 3).reshape(2 * m, 2 * m)


def _slice_state(X: NDArray, tau: int, t: Topology, half_width: int) -> JointState:
    if isinstance(t, Loop):
        return JointState(tau, _blocks_to_matrix(X).copy(), t.positions, t)
    idx = np.arange(half_width - tau, half_width + tau + 1, 2)
    sub = X[:, :, idx][:, :, :, idx]
    return JointState(tau, _blocks_to_matrix(sub), idx - half_width, t)


def _coin_superoperator(ops: Sequence[NDArray]) -> NDArray:
    """4x4 matrix S with vec(A X A^dagger) summed over ops = S vec(X) on coin blocks."""
    return sum(np.kron(A, A.conj()) for A in ops)


def iter_noisy(
    c: CoinOperator,
    s0: CoinState,
    noise: Optional[NoiseChannel],
    t: Topology,
    tau: int,
    sink: Optional[SinkChannel] = None,
    start: Optional[int] = None,
) -> Iterator[JointState]:
    """Yield the joint state after each of the steps 1..tau.

    ``start`` is the walker's initial site (loop only; default 1). The line
    walk always starts at x = 0.
    """
    if tau < 0:
        raise ParameterOutOfRange("tau must be non-negative")
    if noise is None:
        noise = builtin_channel("identity")
    if sink is not None and (not isinstance(t, Loop) or sink.loop != t):
        raise DimensionMismatch("the sink channel must be built from the same loop")
    if isinstance(t, Loop):
        start = 1 if start is None else int(start)
        if not 1 <= start <= t.n:
            raise ParameterOutOfRange(f"start site {start} outside 1..{t.n}")
        half_width = 0
        size = t.n + 1
        start_index = start - 1
    else:
        if start not in (None, 0):
            raise UnsupportedTopology("line walks start at the origin")
        half_width = tau
        size = 2 * tau + 1
        start_index = tau
    plus, minus = _shift_targets(t, half_width)
    # source index of each destination
    src = (np.argsort(plus), np.argsort(minus))
    U = np.asarray(c.matrix)
    S = _coin_superoperator([U @ k for k in noise.kraus_ops])

    X = _initial_blocks(s0, size, start_index)
    for step in range(1, tau + 1):
        X = (S @ X.reshape(4, -1)).reshape(X.shape)
        X = np.stack(
            [np.stack([X[a, b][np.ix_(src[a], src[b])] for b in (0, 1)]) for a in (0, 1)]
        )
        if sink is not None:
            X = sink._apply_blocks(X)
        yield _slice_state(X, step, t, half_width)


def evolve_noisy(
    c: CoinOperator,
    s0: CoinState,
    noise: Optional[NoiseChannel],
    t: Topology,
    tau: int,
    sink: Optional[SinkChannel] = None,
    start: Optional[int] = None,
    validate: bool = True,
) -> JointState:
    """Joint density matrix after ``tau`` noisy steps.

    Raises
    ------
    InvalidDensity
        If ``validate`` and the final state breaks Hermiticity, trace or
        positivity beyond tolerance (no eigenvalue clipping is done).
    """
    state = None
    for state in iter_noisy(c, s0, noise, t, tau, sink, start):
        pass
    if state is None:
        size = t.n + 1 if isinstance(t, Loop) else 1
        idx = (start or 1) - 1 if isinstance(t, Loop) else 0
        state = _slice_state(_initial_blocks(s0, size, idx), 0, t, 0)
    if validate:
        state.check()
    return state


def position_marginal(
    s: Union[JointState, PureWalkState],
) -> tuple[PositionDistribution, NDArray[np.complex128]]:
    """Trace out the coin.

    Returns the position distribution and the walker's density matrix on the
    same support (line: positions of the parity of tau; loop: sites 1..n+1).
    """
    if isinstance(s, PureWalkState):
        keep = (s.positions + s.tau) % 2 == 0
        pos = s.positions[keep]
        a, b = s.psi_plus[keep], s.psi_minus[keep]
        rho = np.outer(a, a.conj()) + np.outer(b, b.conj())
    else:
        R = s.tensor()
        rho = R[0, :, 0, :] + R[1, :, 1, :]
        pos = s.positions
    probs = np.real(np.diag(rho)).copy()
    return PositionDistribution(pos, probs), rho
