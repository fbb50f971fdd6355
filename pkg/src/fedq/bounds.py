"""Numeric evaluation of the high-probability convergence bounds and the
communication payload accounting.

The two bound evaluators keep every term in its original displayed form,
including the logarithmic arguments, with no algebraic simplification,
so each factor can be audited line by line.  Both bound the sup-norm
distance of the aggregated table from the fixed point after T
communication rounds, with probability at least 1 - delta: one covers
direct uploads through an unbiased sparsifier, the other error-feedback
uploads through a sup-norm-contractive one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compression import IDENTITY, contraction_alpha
from .errors import ParamOutOfRangeError, ZeroVectorError


@dataclass(frozen=True)
class BoundParams:
    """Inputs shared by the bound evaluators.

    ``q2``/``q_inf`` characterize an unbiased compressor (zero for the
    identity), ``alpha`` a biased one (one for the identity).
    ``q0_gap`` is the sup-norm distance of the initial table from the
    fixed point, computed exactly from the oracle.
    """

    beta: float
    eta: float
    gamma: float
    local_epochs: int
    rounds: int
    n_agents: int
    delta: float
    n_states: int
    n_actions: int
    q2: float = 0.0
    q_inf: float = 0.0
    alpha: float = 1.0
    q0_gap: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0 or not 0.0 < self.eta <= 1.0:
            raise ParamOutOfRangeError("beta and eta must lie in (0, 1]")
        if not 0.0 < self.gamma < 1.0:
            raise ParamOutOfRangeError("gamma must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ParamOutOfRangeError("delta must lie in (0, 1)")
        if min(self.local_epochs, self.rounds, self.n_agents, self.n_states, self.n_actions) < 1:
            raise ParamOutOfRangeError("counts must be >= 1")
        if self.q2 < 0 or self.q_inf < 0:
            raise ParamOutOfRangeError("q2 and q_inf must be non-negative")
        if not 0.0 < self.alpha <= 1.0:
            raise ParamOutOfRangeError("alpha must lie in (0, 1]")
        if self.q0_gap < 0:
            raise ParamOutOfRangeError("q0_gap must be non-negative")


def decay_factor(beta: float, eta: float, local_epochs: int) -> float:
    """Per-round linear contraction factor ``1 - beta + beta (1-eta)^K``."""
    if not 0.0 < beta <= 1.0 or not 0.0 < eta <= 1.0:
        raise ParamOutOfRangeError("beta and eta must lie in (0, 1]")
    if local_epochs < 1:
        raise ParamOutOfRangeError("local_epochs must be >= 1")
    return 1.0 - beta + beta * (1.0 - eta) ** local_epochs


def _shrink(eta: float, local_epochs: int) -> float:
    """1 - (1-eta)^K, the per-phase damping accumulated over K epochs."""
    return 1.0 - (1.0 - eta) ** local_epochs


def direct_bound(p: BoundParams) -> float:
    """Bound for direct (unbiased-compressor) uploads.

    ``decay_factor^T q0_gap + sqrt(eta/I) e1 + 2 gamma / C + e2 / sqrt(I)`` with

    * ``C  = (1-gamma)(1-(1-eta)^K)``
    * ``e1 = (4 gamma / C) sqrt(L1) (1 + sqrt(L1 / (eta I)))``,
      ``L1 = log(4 S A T K / delta)``
    * ``e2 = (sqrt(16 * 4 q2 S A / (1-gamma)^2 * L2)
      + (4/3) * 2 q_inf sqrt(I) / (1-gamma) * L2) / (1-(1-eta)^K)``,
      ``L2 = log(4 T / delta)``
    """
    r = decay_factor(p.beta, p.eta, p.local_epochs)
    shrink = _shrink(p.eta, p.local_epochs)
    c = (1.0 - p.gamma) * shrink
    sa = p.n_states * p.n_actions
    l1 = math.log(4.0 * sa * p.rounds * p.local_epochs / p.delta)
    l2 = math.log(4.0 * p.rounds / p.delta)
    e1 = (4.0 * p.gamma / c) * math.sqrt(l1) * (1.0 + math.sqrt(l1 / (p.eta * p.n_agents)))
    e2 = (
        math.sqrt(16.0 * (4.0 * p.q2 * sa / (1.0 - p.gamma) ** 2) * l2)
        + (4.0 / 3.0) * (2.0 * p.q_inf * math.sqrt(p.n_agents) / (1.0 - p.gamma)) * l2
    ) / shrink
    return (
        r**p.rounds * p.q0_gap
        + math.sqrt(p.eta / p.n_agents) * e1
        + 2.0 * p.gamma / c
        + e2 / math.sqrt(p.n_agents)
    )


def error_feedback_bound(p: BoundParams) -> float:
    """Bound for error-feedback (biased-compressor) uploads.

    ``decay_factor^T q0_gap + (4/C) sqrt(eta/I * M) e1 + 2 gamma / C
    + 2 beta (1-alpha) / (alpha (1-gamma)) * D`` with

    * ``C  = (1-gamma)(1-(1-eta)^K)``
    * ``M  = log(2 S A T K / delta)``
    * ``e1 = 1 + sqrt(M / (eta I))``
    * ``D  = 1 + (1+(1-eta)^K) / (1-(1-eta)^K)``
    """
    r = decay_factor(p.beta, p.eta, p.local_epochs)
    shrink = _shrink(p.eta, p.local_epochs)
    decay = (1.0 - p.eta) ** p.local_epochs
    c = (1.0 - p.gamma) * shrink
    sa = p.n_states * p.n_actions
    m = math.log(2.0 * sa * p.rounds * p.local_epochs / p.delta)
    e1 = 1.0 + math.sqrt(m / (p.eta * p.n_agents))
    dd = 1.0 + (1.0 + decay) / (1.0 - decay)
    return (
        r**p.rounds * p.q0_gap
        + (4.0 / c) * math.sqrt(p.eta / p.n_agents * m) * e1
        + 2.0 * p.gamma / c
        + (2.0 * p.beta * (1.0 - p.alpha) / (p.alpha * (1.0 - p.gamma))) * dd
    )


@dataclass(frozen=True)
class BitModel:
    """Payload accounting: bits per value and per coordinate index."""

    fpp: int = 32  # floating-point precision assumed on the wire

    def __post_init__(self) -> None:
        if self.fpp < 1:
            raise ParamOutOfRangeError("fpp must be >= 1")

    @staticmethod
    def index_bits(dimension: int) -> int:
        """ceil(log2(d)) bits to name one coordinate of a d-vector."""
        if dimension < 1:
            raise ParamOutOfRangeError("dimension must be >= 1")
        return (dimension - 1).bit_length()


def payload_bits(kind: str, dimension: int, entries: int, bit_model: BitModel | None = None) -> int:
    """Bits one upload costs on the wire.

    Uncompressed payloads ship every value and no indices:
    ``d * fpp``.  Sparse payloads ship ``entries`` (index, value) pairs:
    ``entries * (ceil(log2 d) + fpp)``.
    """
    bm = bit_model if bit_model is not None else BitModel()
    if entries > dimension:
        raise ParamOutOfRangeError("entries cannot exceed the vector dimension")
    if kind == IDENTITY:
        return dimension * bm.fpp
    return entries * (BitModel.index_bits(dimension) + bm.fpp)


def estimate_alpha_trace(vectors, k: int) -> tuple[np.ndarray, list[int]]:
    """Realized top_k contraction factors along a run.

    Returns the per-round alphas plus the indices of rounds whose
    pre-compression vector was zero (those are skipped: alpha is
    undefined there).  The minimum of the returned alphas is the
    conservative constant to feed :func:`error_feedback_bound`.
    """
    vectors = list(vectors)
    if not vectors:
        raise ParamOutOfRangeError("trace must be nonempty")
    alphas: list[float] = []
    skipped: list[int] = []
    for i, v in enumerate(vectors):
        try:
            alphas.append(contraction_alpha(v, k))
        except ZeroVectorError:
            skipped.append(i)
    return np.asarray(alphas), skipped
