"""Sparsifying compression operators and per-agent error feedback.

Two operator families act on a flat vector of dimension d (a flattened
Q-table delta):

* ``top_k`` keeps the k entries of largest magnitude.  It is biased but
  contracts in the sup norm: ``||C(v) - v||_inf = (1 - alpha) ||v||_inf``
  where alpha depends on the input (see :func:`contraction_alpha`).
* ``sparsified_k`` keeps entry j with probability p_j and rescales the
  survivors by 1/p_j, which makes it unbiased: ``E[C(v)] = v`` exactly.
  The probabilities satisfy ``sum_j p_j <= k``, so k is the expected
  payload budget.

``identity`` is the no-compression baseline (and is both unbiased and a
contraction with alpha = 1).

Error feedback wraps a biased operator with a running residual e: each
round compresses ``delta + e`` and stores what was not transmitted back
into e, so no information is permanently dropped.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BudgetOutOfRangeError,
    DimensionMismatchError,
    ParamOutOfRangeError,
    ShapeMismatchError,
    ZeroVectorError,
)
from .rng import as_generator

IDENTITY = "identity"
TOP_K = "top_k"
SPARSIFIED_K = "sparsified_k"
KINDS = (IDENTITY, TOP_K, SPARSIFIED_K)

# Selection-probability families for sparsified_k.
RULE_L1 = "l1"  # p_j proportional to |v_j| / ||v||_1
RULE_UNIFORM = "uniform"  # p_j = k / d on the support
RULES = (RULE_L1, RULE_UNIFORM)


@dataclass(frozen=True)
class CompressorSpec:
    """Which operator to run and with what budget.

    ``k`` is ignored for the identity operator.  ``probability_rule``
    only affects sparsified_k.
    """

    kind: str = IDENTITY
    k: int = 0
    probability_rule: str = RULE_L1

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ParamOutOfRangeError(f"unknown compressor kind {self.kind!r}")
        if self.probability_rule not in RULES:
            raise ParamOutOfRangeError(f"unknown probability rule {self.probability_rule!r}")
        if self.kind != IDENTITY and self.k < 1:
            raise BudgetOutOfRangeError(f"budget k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class SparseVector:
    """Sparse payload: (index, value) pairs over a vector of dimension d.

    Indices are strictly increasing and unique; coordinates not listed
    are implicitly zero.
    """

    dimension: int
    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64, same length

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)
        if idx.shape != vals.shape or idx.ndim != 1:
            raise DimensionMismatchError("indices and values must be 1-D and equally long")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.dimension:
                raise DimensionMismatchError("indices out of range")
            if np.any(np.diff(idx) <= 0):
                raise DimensionMismatchError("indices must be strictly increasing")

    def __len__(self) -> int:
        return int(self.indices.size)

    def densify(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        out[self.indices] = self.values
        return out

    @staticmethod
    def from_dense(v: np.ndarray) -> "SparseVector":
        """Sparse view of a dense vector, dropping exact zeros."""
        v = np.asarray(v, dtype=np.float64)
        idx = np.nonzero(v)[0]
        return SparseVector(v.size, idx, v[idx])


@dataclass
class EfState:
    """Per-agent error-feedback memory; starts at zero."""

    e: np.ndarray

    @staticmethod
    def zeros(dimension: int) -> "EfState":
        return EfState(np.zeros(dimension))


def _check_budget(k: int, d: int) -> None:
    if not 1 <= k <= d:
        raise BudgetOutOfRangeError(f"budget k={k} outside [1, {d}]")


def top_k(v: np.ndarray, k: int) -> SparseVector:
    """Keep the k entries of largest magnitude.

    Ties break toward the lower index; exact zeros are never stored, so
    the payload has min(k, nnz) entries.  Deterministic.
    """
    v = np.asarray(v, dtype=np.float64)
    d = v.size
    _check_budget(k, d)
    order = np.argsort(-np.abs(v), kind="stable")[:k]
    order = order[np.abs(v[order]) > 0]
    idx = np.sort(order)
    return SparseVector(d, idx, v[idx].copy())


def contraction_alpha(v: np.ndarray, k: int) -> float:
    """Sup-norm contraction factor of top_k on this input.

    ``alpha = 1 - max(excluded |v_j|) / ||v||_inf``; 1 when everything
    outside the kept set is zero (including k = d), 0 when a dropped
    entry ties the largest magnitude (the contraction hypothesis fails).
    """
    v = np.asarray(v, dtype=np.float64)
    _check_budget(k, v.size)
    mags = np.sort(np.abs(v))[::-1]
    if mags[0] == 0.0:
        raise ZeroVectorError("contraction factor undefined for the zero vector")
    excluded_max = mags[k] if k < v.size else 0.0
    return 1.0 - float(excluded_max) / float(mags[0])


def selection_probabilities(v: np.ndarray, k: int, rule: str = RULE_L1) -> np.ndarray:
    """Per-coordinate keep probabilities used by sparsified_k.

    Zero coordinates always get p = 0 (they carry no information and are
    never transmitted).  Under the ``l1`` rule ``p_j = min(1, k |v_j| /
    ||v||_1)``; under ``uniform`` every support coordinate gets
    ``min(1, k / d)``.  Either way ``sum_j p_j <= k``.
    """
    v = np.asarray(v, dtype=np.float64)
    d = v.size
    _check_budget(k, d)
    mags = np.abs(v)
    p = np.zeros(d)
    support = mags > 0
    if not np.any(support):
        return p
    if rule == RULE_L1:
        p[support] = np.minimum(1.0, k * mags[support] / mags.sum())
    elif rule == RULE_UNIFORM:
        p[support] = min(1.0, k / d)
    else:
        raise ParamOutOfRangeError(f"unknown probability rule {rule!r}")
    return p


def unbiased_constants(p: np.ndarray) -> tuple[float, float]:
    """Variance and sup-norm deviation constants of sparsified_k.

    Computed from the minimum selection probability over the support:
    ``q2 = 1/p_min - 1`` and ``q_inf = max(q2, 1)``.  For an empty
    support (zero vector) the operator is exact and both are 0.
    """
    p = np.asarray(p, dtype=np.float64)
    support = p > 0
    if not np.any(support):
        return 0.0, 0.0
    p_min = float(p[support].min())
    q2 = 1.0 / p_min - 1.0
    return q2, max(q2, 1.0)


def sparsified_k(v: np.ndarray, k: int, rng, rule: str = RULE_L1) -> SparseVector:
    """Unbiased random sparsification with expected budget k.

    Coordinate j survives with probability p_j (see
    :func:`selection_probabilities`) and is rescaled to ``v_j / p_j``, so
    ``E[C(v)_j] = v_j`` exactly for every j.  The zero vector compresses
    to the empty payload.  Consumes one block of d uniforms.
    """
    v = np.asarray(v, dtype=np.float64)
    d = v.size
    _check_budget(k, d)
    p = selection_probabilities(v, k, rule)
    gen = as_generator(rng)
    kept = gen.random(d) < p
    idx = np.nonzero(kept)[0]
    return SparseVector(d, idx, v[idx] / p[idx])


def _apply(v: np.ndarray, spec: CompressorSpec, rng) -> SparseVector:
    if spec.kind == IDENTITY:
        v = np.asarray(v, dtype=np.float64)
        return SparseVector(v.size, np.arange(v.size, dtype=np.int64), v.copy())
    if spec.kind == TOP_K:
        return top_k(v, spec.k)
    return sparsified_k(v, spec.k, rng, spec.probability_rule)


def direct_compress(delta: np.ndarray, spec: CompressorSpec, rng=None) -> SparseVector:
    """Compress a progress vector with no memory."""
    return _apply(delta, spec, rng)


def pack_payload(sv: SparseVector, value_bits: int = 32) -> bytes:
    """Serialize a payload to its wire form.

    Layout: two little-endian uint32 words (dimension, entry count), the
    indices packed at ceil(log2 d) bits each into a zero-padded bit
    string, then the values as IEEE float32 (value_bits must be 32).
    The index-plus-value section is exactly the size the payload
    accounting charges, up to byte padding of the index bits.
    """
    if value_bits != 32:
        raise ParamOutOfRangeError("only 32-bit wire values are supported")
    d = sv.dimension
    idx_bits = max((d - 1).bit_length(), 0)
    header = np.array([d, len(sv)], dtype="<u4").tobytes()
    stream = 0
    for idx in sv.indices:
        stream = (stream << idx_bits) | int(idx)
    total_bits = idx_bits * len(sv)
    index_bytes = stream.to_bytes((total_bits + 7) // 8, "big") if total_bits else b""
    value_bytes = sv.values.astype("<f4").tobytes()
    return header + index_bytes + value_bytes


def unpack_payload(blob: bytes) -> SparseVector:
    """Inverse of :func:`pack_payload`.

    Values come back at float32 resolution; the wire format is the
    accounting-faithful dump, not a lossless checkpoint.
    """
    d, count = (int(x) for x in np.frombuffer(blob[:8], dtype="<u4"))
    idx_bits = max((d - 1).bit_length(), 0)
    n_index_bytes = (idx_bits * count + 7) // 8
    stream = int.from_bytes(blob[8 : 8 + n_index_bytes], "big") if n_index_bytes else 0
    indices = np.zeros(count, dtype=np.int64)
    mask = (1 << idx_bits) - 1
    for slot in range(count - 1, -1, -1):
        indices[slot] = stream & mask
        stream >>= idx_bits
    values = np.frombuffer(blob[8 + n_index_bytes :], dtype="<f4").astype(np.float64)
    return SparseVector(d, indices, values)


def ef_compress(
    state: EfState, delta: np.ndarray, spec: CompressorSpec, rng=None
) -> tuple[SparseVector, EfState]:
    """Compress ``delta + e`` and bank the untransmitted remainder.

    Returns the payload and the successor state with
    ``e' = delta + e - densify(h)`` computed exactly in that form; for
    entry-copying operators (identity, top_k) the banked entries are
    bit-exact copies, so transmitted-plus-banked always telescopes to the
    sum of the deltas.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if delta.shape != state.e.shape:
        raise ShapeMismatchError(f"delta shape {delta.shape} != error shape {state.e.shape}")
    pending = delta + state.e
    h = _apply(pending, spec, rng)
    return h, EfState(pending - h.densify())
