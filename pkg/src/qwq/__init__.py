"""Quantumness measures for discrete-time quantum walks.

Simulates coined walks on a line or on a loop with an absorbing sink, and
compares them against the family of classical random walks through
relative-entropy (and l1) measures.
"""

__version__ = "0.1.0"

from qwq.coin import CoinOperator, CoinState, coin_state_density, make_coin_operator
from qwq.distribution import PositionDistribution, variance
from qwq.engine import (
    JointState,
    Line,
    Loop,
    NoiseChannel,
    PureWalkState,
    SinkChannel,
    builtin_channel,
    evolve_noisy,
    evolve_pure,
    iter_noisy,
    position_marginal,
    step_operator,
)
from qwq.quantumness import (
    QuantumnessReport,
    coherence,
    kl_divergence,
    quantumness_q,
    shannon_entropy,
    total_quantumness,
    von_neumann_entropy,
)

__all__ = [
    "CoinOperator",
    "CoinState",
    "JointState",
    "Line",
    "Loop",
    "NoiseChannel",
    "PositionDistribution",
    "PureWalkState",
    "QuantumnessReport",
    "SinkChannel",
    "builtin_channel",
    "coherence",
    "coin_state_density",
    "evolve_noisy",
    "evolve_pure",
    "iter_noisy",
    "kl_divergence",
    "make_coin_operator",
    "position_marginal",
    "quantumness_q",
    "shannon_entropy",
    "step_operator",
    "total_quantumness",
    "variance",
    "von_neumann_entropy",
]
