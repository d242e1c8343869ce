"""Position distributions with explicit support bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = ["PositionDistribution", "variance"]

_NORM_TOL = 1e-10
# diagonal entries of a valid density matrix can come out as -1e-17 or so
_NEG_TOL = 1e-12


@dataclass(frozen=True)
class PositionDistribution:
    """Probabilities over an ordered list of integer positions.

    Positions are strictly increasing. Probabilities are non-negative and sum
    to one within 1e-10; negatives above -1e-12 are rounded to zero.
    """

    support: NDArray[np.int64]
    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        x = np.array(self.support, dtype=np.int64).ravel()
        p = np.array(self.probs, dtype=np.float64).ravel()
        if x.shape != p.shape:
            raise ValueError(f"support has {x.size} points but probs has {p.size}")
        if x.size and np.any(np.diff(x) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(p < -_NEG_TOL):
            raise ValueError(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > _NORM_TOL:
            raise ValueError(f"probabilities sum to {p.sum():.15g}")
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "support", x)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_mapping(cls, mapping: dict[int, float]) -> "PositionDistribution":
        keys = sorted(mapping)
        return cls(np.array(keys), np.array([mapping[k] for k in keys]))

    @classmethod
    def point(cls, x: int) -> "PositionDistribution":
        return cls(np.array([x]), np.array([1.0]))

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(p) for x, p in zip(self.support, self.probs)}

    def __len__(self) -> int:
        return self.support.size

    def aligned(self, support: ArrayLike) -> NDArray[np.float64]:
        """Probabilities on ``support``; positions outside our support get 0."""
        s = np.asarray(support, dtype=np.int64)
        out = np.zeros(s.shape)
        idx = np.searchsorted(self.support, s)
        idx_c = np.clip(idx, 0, max(self.support.size - 1, 0))
        hit = (idx < self.support.size) & (self.support[idx_c] == s)
        out[hit] = self.probs[idx_c[hit]]
        return out

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))


def variance(d: PositionDistribution) -> tuple[float, float]:
    """Return ``(mean, variance)`` of the position."""
    x = d.support.astype(float)
    m = float(np.dot(x, d.probs))
    return m, float(np.dot((x - m) ** 2, d.probs))
