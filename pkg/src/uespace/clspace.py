"""Classification-head embedding space: cl-embeddings and projectors.

A trained speaker encoder's last linear layer W (l x n_class) maps a
conventional embedding e to its class-logit vector c = W.T e
(the "cl-embedding"). Cosine scores between cl-embeddings can be computed
in a space of dimension at most l: factor A = W W.T as L L.T and use
y = L.T e, which preserves norms and dot products exactly, hence cosine
scores. The factor comes either from Cholesky (full dimension l) or from
a truncated eigendecomposition (any rank r <= l, approximate below full
rank).
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from uespace import linalg
from uespace.errors import (
    DimMismatchError,
    RankOutOfRangeError,
    ZeroVectorError,
)

DEFAULT_EIGEN_ENERGY = 0.99
DEFAULT_RANK_CAP = 256

_NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class ClassificationHead:
    """Final linear layer of one encoder: w is (l, n_class)."""

    w: np.ndarray
    encoder_id: str
    class_labels: Optional[tuple] = None

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise DimMismatchError(f"head matrix must be (l, n_class), got shape {w.shape}")
        object.__setattr__(self, "w", w)
        if self.class_labels is not None:
            labels = tuple(self.class_labels)
            if len(labels) != w.shape[1]:
                raise DimMismatchError(
                    f"{len(labels)} class labels for {w.shape[1]} classes"
                )
            if len(set(labels)) != len(labels):
                raise DimMismatchError("class labels must be unique")
            object.__setattr__(self, "class_labels", labels)

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    @property
    def n_class(self) -> int:
        return self.w.shape[1]


@dataclass(frozen=True)
class Projector:
    """Linear map into the (optionally reduced) cl-embedding space.

    ``l_map`` is (l, r); apply as y = l_map.T @ e. Cholesky projectors are
    always full rank (r == l); eigen projectors may truncate.
    """

    l_map: np.ndarray
    method: str
    source_encoder_id: str
    rank: int
    applied_jitter: float = 0.0

    @property
    def input_dim(self) -> int:
        return self.l_map.shape[0]


def _as_vector(e, name="embedding"):
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 1 or e.shape[0] < 1:
        raise DimMismatchError(f"{name} must be a 1-D vector, got shape {e.shape}")
    return e


def cosine(a, b) -> float:
    """Cosine similarity a.b / (|a||b|)."""
    a = _as_vector(a, "first vector")
    b = _as_vector(b, "second vector")
    if a.shape[0] != b.shape[0]:
        raise DimMismatchError(f"dims differ: {a.shape[0]} vs {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na <= _NORM_FLOOR or nb <= _NORM_FLOOR:
        raise ZeroVectorError("cosine undefined for zero-norm vector")
    return float(np.dot(a, b) / (na * nb))


def cl_embed(head: ClassificationHead, e) -> np.ndarray:
    """Class-logit vector c = W.T e (dimension n_class)."""
    e = _as_vector(e)
    if e.shape[0] != head.dim:
        raise DimMismatchError(f"embedding dim {e.shape[0]} != head dim {head.dim}")
    return head.w.T @ e


def energy_rank(eigenvalues, energy=DEFAULT_EIGEN_ENERGY, cap=DEFAULT_RANK_CAP) -> int:
    """Smallest rank keeping ``energy`` of the eigenvalue mass, capped."""
    w = np.clip(np.asarray(eigenvalues, dtype=np.float64), 0.0, None)
    total = float(np.sum(w))
    if total <= 0.0:
        return 1
    cum = np.cumsum(w)
    r = int(np.searchsorted(cum, energy * total)) + 1
    return min(r, cap, w.shape[0])


def build_projector(head: ClassificationHead, method: str, rank: Optional[int] = None,
                    jitter: linalg.JitterPolicy = linalg.JitterPolicy()) -> Projector:
    """Factor A = W W.T into a projector for this head.

    method 'cholesky' is exact and fixed at rank l; method 'eigen' allows
    rank reduction (default rank keeps 99% of eigenvalue energy, at most
    256 dimensions).
    """
    gram = head.w @ head.w.T
    l = head.dim
    if method == "cholesky":
        if rank is not None and rank != l:
            raise RankOutOfRangeError(
                f"cholesky projectors are full rank; cannot honor rank {rank} != {l}"
            )
        lower, applied = linalg.cholesky(gram, jitter)
        return Projector(l_map=lower, method="cholesky",
                         source_encoder_id=head.encoder_id, rank=l,
                         applied_jitter=applied)
    if method == "eigen":
        eig = linalg.sym_eig(gram)
        if rank is None:
            rank = energy_rank(eig.eigenvalues)
        if not 1 <= rank <= l:
            raise RankOutOfRangeError(f"rank {rank} outside [1, {l}]")
        root = linalg.truncated_root(eig, rank)  # (rank, l)
        return Projector(l_map=np.ascontiguousarray(root.T), method="eigen",
                         source_encoder_id=head.encoder_id, rank=rank)
    raise ValueError(f"unknown projector method {method!r}")


def project(p: Projector, e) -> np.ndarray:
    """Reduced cl-space vector y = L.T e (dimension p.rank)."""
    e = _as_vector(e)
    if e.shape[0] != p.input_dim:
        raise DimMismatchError(f"embedding dim {e.shape[0]} != projector dim {p.input_dim}")
    return p.l_map.T @ e
