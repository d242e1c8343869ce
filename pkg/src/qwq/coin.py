"""
Coin states and coin unitaries.

Basis convention: index 0 is |+> (right-mover), index 1 is |-> (left-mover).

The canonical coin family is

    U(alpha, beta, theta) = [[ e^{i alpha} cos(theta),  e^{-i beta} sin(theta)],
                             [ e^{i beta}  sin(theta), -e^{-i alpha} cos(theta)]]

with 0 <= theta <= pi/2, and the canonical pure initial coin state is
cos(eta)|+> + e^{i gamma} sin(eta)|->.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qwq import config
from qwq.errors import InvalidDensity, NonPureCoin, NonUnitary, ParameterOutOfRange

__all__ = [
    "CoinOperator",
    "CoinState",
    "coin_state_density",
    "hadamard",
    "identity",
    "make_coin_operator",
    "parameterized_coin",
    "pauli_z",
]

HALF_PI = np.pi / 2


def _frozen(a: ArrayLike) -> NDArray[np.complex128]:
    arr = np.array(a, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CoinOperator:
    """A validated 2x2 unitary acting on the coin.

    Attributes
    ----------
    matrix : ndarray, shape (2, 2)
        Read-only complex matrix.
    provenance : str
        One of ``"parameterized"``, ``"hadamard"``, ``"identity"``,
        ``"pauli-z"`` or ``"custom"``.
    params : tuple of float or None
        ``(alpha, beta, theta)`` for parameterized coins.
    """

    matrix: NDArray[np.complex128]
    provenance: str = "custom"
    params: Optional[tuple[float, float, float]] = None

    def __post_init__(self) -> None:
        m = _frozen(self.matrix)
        if m.shape != (2, 2):
            raise NonUnitary(f"coin matrix must be 2x2, got shape {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if not err < config.ATOL:
            raise NonUnitary(f"U^dagger U deviates from identity by {err:.3e}")
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def label(self) -> str:
        if self.params is not None:
            return "param:{:.12g},{:.12g},{:.12g}".format(*self.params)
        return self.provenance


def parameterized_coin(alpha: float, beta: float, theta: float) -> CoinOperator:
    """Build ``U(alpha, beta, theta)``; theta must lie in [0, pi/2]."""
    if not (0.0 <= theta <= HALF_PI):
        raise ParameterOutOfRange(f"theta={theta!r} outside [0, pi/2]")
    c, s = np.cos(theta), np.sin(theta)
    m = np.array(
        [
            [np.exp(1j * alpha) * c, np.exp(-1j * beta) * s],
            [np.exp(1j * beta) * s, -np.exp(-1j * alpha) * c],
        ]
    )
    return CoinOperator(m, "parameterized", (float(alpha), float(beta), float(theta)))


def hadamard() -> CoinOperator:
    return CoinOperator(np.array([[1, 1], [1, -1]]) / np.sqrt(2.0), "hadamard")


def identity() -> CoinOperator:
    return CoinOperator(np.eye(2), "identity")


def pauli_z() -> CoinOperator:
    return CoinOperator(np.diag([1.0, -1.0]), "pauli-z")


_NAMED = {"hadamard": hadamard, "identity": identity, "pauli-z": pauli_z}

CoinSpec = Union[str, Sequence[float], ArrayLike, CoinOperator]


def make_coin_operator(spec: CoinSpec) -> CoinOperator:
    """Build a coin from a name, an ``(alpha, beta, theta)`` triple or a raw matrix.

    Raises
    ------
    ParameterOutOfRange
        theta outside [0, pi/2].
    NonUnitary
        A raw matrix that is not 2x2 unitary.
    """
    if isinstance(spec, CoinOperator):
        return spec
    if isinstance(spec, str):
        try:
            return _NAMED[spec.lower()]()
        except KeyError:
            raise ValueError(f"unknown coin name {spec!r}") from None
    arr = np.asarray(spec)
    if arr.ndim == 1 and arr.shape == (3,):
        return parameterized_coin(*(float(v) for v in arr.real))
    return CoinOperator(arr, "custom")


@dataclass(frozen=True)
class CoinState:
    """Initial state of the coin, pure or mixed.

    Build with :meth:`pure` (angles) or :meth:`from_density`.
    """

    density: NDArray[np.complex128]
    eta: Optional[float] = None
    gamma: Optional[float] = None
    _amplitudes: Optional[NDArray[np.complex128]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        rho = _frozen(self.density)
        _check_density(rho)
        object.__setattr__(self, "density", rho)

    @classmethod
    def pure(cls, eta: float, gamma: float = 0.0) -> "CoinState":
        amp = np.array([np.cos(eta), np.exp(1j * gamma) * np.sin(eta)])
        return cls(np.outer(amp, amp.conj()), float(eta), float(gamma), _frozen(amp))

    @classmethod
    def from_vector(cls, vec: ArrayLike) -> "CoinState":
        amp = np.asarray(vec, dtype=np.complex128)
        if amp.shape != (2,):
            raise InvalidDensity(f"coin vector must have length 2, got {amp.shape}")
        amp = amp / np.linalg.norm(amp)
        return cls(np.outer(amp, amp.conj()), _amplitudes=_frozen(amp))

    @classmethod
    def from_density(cls, rho: ArrayLike) -> "CoinState":
        return cls(np.asarray(rho, dtype=np.complex128))

    @property
    def is_pure(self) -> bool:
        purity = np.real(np.trace(self.density @ self.density))
        return abs(purity - 1.0) < 1e-10

    @property
    def amplitudes(self) -> NDArray[np.complex128]:
        """State vector of a pure coin state (global phase fixed by the eigensolver)."""
        if self._amplitudes is not None:
            return self._amplitudes
        if not self.is_pure:
            raise NonPureCoin("coin state is mixed; no state vector exists")
        w, v = np.linalg.eigh(self.density)
        return _frozen(v[:, np.argmax(w)])


def _check_density(rho: NDArray[np.complex128]) -> None:
    if rho.shape != (2, 2):
        raise InvalidDensity(f"coin density must be 2x2, got shape {rho.shape}")
    tol = config.ATOL
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidDensity("coin density is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidDensity(f"coin density has trace {np.trace(rho).real:.15g}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidDensity("coin density has a negative eigenvalue")


def coin_state_density(s: Union[CoinState, ArrayLike]) -> NDArray[np.complex128]:
    """Return the 2x2 density matrix of a coin state.

    Raw arrays are validated (Hermitian, unit trace, PSD) and raise
    :class:`InvalidDensity` on failure.
    """
    if isinstance(s, CoinState):
        return s.density
    return CoinState.from_density(s).density
