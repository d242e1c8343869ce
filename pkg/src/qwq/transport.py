"""
Transport on the loop with a sink.

Efficiency is the population that has leaked into the sink site n+1 after
tau steps, for the quantum walk (eta_qw) and for a classical walk (eta_rw).

The deviation |eta_qw - eta_rw| is tied to quantumness through the chain

    total_Q >= Q >= u >= 0,
    u = (eta_rw - eta_qw) / ln 2 + eta_qw log2(eta_qw / eta_rw),

which holds when eta_rw comes from the classical walk that attains Q.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from qwq.classical import ClassicalWalk, classical_loop_trajectory
from qwq.coin import CoinOperator, CoinState
from qwq.engine import Loop, NoiseChannel, SinkChannel, iter_noisy, position_marginal
from qwq.errors import ConsistencyError, DivergentQWarning, ParameterOutOfRange
from qwq.quantumness import LN2, total_quantumness

__all__ = [
    "CHAIN_SLACK",
    "TransportResult",
    "classical_efficiency",
    "quantum_efficiency",
    "transport_report",
    "u_lower_bound",
]

CHAIN_SLACK = 1e-9


def quantum_efficiency(
    c: CoinOperator,
    s0: CoinState,
    loop: Loop,
    noise: Optional[NoiseChannel] = None,
    tau: int = 1,
    start: int = 1,
) -> NDArray[np.float64]:
    """Sink population after steps 1..tau of the noisy quantum walk."""
    sink = SinkChannel(loop)
    out = np.empty(tau)
    for state in iter_noisy(c, s0, noise, loop, tau, sink, start):
        d, _ = position_marginal(state)
        out[state.tau - 1] = d.probs[-1]
    return out


def classical_efficiency(
    w: Union[ClassicalWalk, float], tau: int, start: int = 1, loop: Optional[Loop] = None
) -> NDArray[np.float64]:
    """Sink population after steps 1..tau of the classical loop walk."""
    if loop is None:
        if not isinstance(w, ClassicalWalk) or not isinstance(w.topology, Loop):
            raise ParameterOutOfRange("a loop topology is required")
        loop = w.topology
    return classical_loop_trajectory(w, loop, tau, start)[1:, -1].copy()


def u_lower_bound(eta_qw: float, eta_rw: float) -> float:
    """Lower bound on Q from the two efficiencies, in bits (``inf`` if eta_rw = 0 < eta_qw)."""
    for name, v in (("eta_qw", eta_qw), ("eta_rw", eta_rw)):
        if not -1e-12 <= v <= 1 + 1e-12:
            raise ParameterOutOfRange(f"{name}={v} outside [0, 1]")
    eta_qw = min(max(eta_qw, 0.0), 1.0)
    eta_rw = min(max(eta_rw, 0.0), 1.0)
    if eta_qw == eta_rw:
        return 0.0
    if eta_qw == 0.0:
        return eta_rw / LN2
    if eta_rw == 0.0:
        return math.inf
    u = (eta_rw - eta_qw) / LN2 + eta_qw * math.log2(eta_qw / eta_rw)
    return max(u, 0.0) if u > -1e-15 else u


@dataclass(frozen=True)
class TransportResult:
    """Per-step transport and quantumness trajectories for steps ``taus``.

    ``classical_mode`` is ``"optimal"`` (the classical walk minimizing Q at
    each step) or ``"fixed"`` (a user-supplied p+). ``chain_holds`` records
    whether total_q >= q >= u >= -1e-9 at each step.
    """

    taus: NDArray[np.int64]
    eta_qw: NDArray[np.float64]
    eta_rw: NDArray[np.float64]
    deviation: NDArray[np.float64]
    u_bound: NDArray[np.float64]
    q_value: NDArray[np.float64]
    total_q: NDArray[np.float64]
    classical_p_plus: NDArray[np.float64]
    classical_mode: str
    chain_holds: NDArray[np.bool_]

    def final(self) -> dict[str, float]:
        return {
            "tau": int(self.taus[-1]),
            "eta_qw": float(self.eta_qw[-1]),
            "eta_rw": float(self.eta_rw[-1]),
            "deviation": float(self.deviation[-1]),
            "u": float(self.u_bound[-1]),
            "Q": float(self.q_value[-1]),
            "total_Q": float(self.total_q[-1]),
            "classical_p_plus": float(self.classical_p_plus[-1]),
        }


def _chain_ok(total: float, q: float, u: float) -> bool:
    return total >= q - CHAIN_SLACK and q >= u - CHAIN_SLACK and u >= -CHAIN_SLACK


def transport_report(
    c: CoinOperator,
    s0: CoinState,
    loop: Loop,
    noise: Optional[NoiseChannel],
    tau: int,
    classical_mode: Union[str, float] = "optimal",
    start: int = 1,
    record: str = "all",
) -> TransportResult:
    """Transport efficiencies, the u bound, Q and total Q along the walk.

    Parameters
    ----------
    classical_mode : "optimal" or float
        ``"optimal"`` compares against the Q-minimizing classical walk at each
        step; a float fixes the classical p+.
    record : "all" or "final"
        Evaluate every step 1..tau, or only the last one.

    Raises
    ------
    ConsistencyError
        In optimal mode, if the chain total_Q >= Q >= u >= -1e-9 fails.
    """
    if tau < 1:
        raise ParameterOutOfRange("tau must be >= 1")
    if record not in ("all", "final"):
        raise ValueError("record must be 'all' or 'final'")
    fixed_p: Optional[float] = None
    if classical_mode != "optimal":
        fixed_p = ClassicalWalk(float(classical_mode)).p_plus
    mode = "optimal" if fixed_p is None else "fixed"

    rows = []
    sink = SinkChannel(loop)
    for state in iter_noisy(c, s0, noise, loop, tau, sink, start):
        if record == "final" and state.tau < tau:
            continue
        d, rho = position_marginal(state)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DivergentQWarning)
            rep = total_quantumness(rho, loop, state.tau, start)
        eta_qw = float(d.probs[-1])
        p = rep.p_plus_star if fixed_p is None else fixed_p
        eta_rw = float(classical_loop_trajectory(p, loop, state.tau, start)[-1, -1])
        u = u_lower_bound(eta_qw, eta_rw)
        rows.append((state.tau, eta_qw, eta_rw, abs(eta_qw - eta_rw), u, rep.q_value, rep.total, p))

    arr = np.array(rows, dtype=float)
    chain = np.array([_chain_ok(r[6], r[5], r[4]) for r in rows])
    if mode == "optimal" and not chain.all():
        bad = int(arr[~chain][0, 0])
        raise ConsistencyError(f"total_Q >= Q >= u fails at tau={bad}")
    return TransportResult(
        taus=arr[:, 0].astype(np.int64),
        eta_qw=arr[:, 1],
        eta_rw=arr[:, 2],
        deviation=arr[:, 3],
        u_bound=arr[:, 4],
        q_value=arr[:, 5],
        total_q=arr[:, 6],
        classical_p_plus=arr[:, 7],
        classical_mode=mode,
        chain_holds=chain,
    )
