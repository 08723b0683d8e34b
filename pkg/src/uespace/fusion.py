"""Shared embedding space for two encoders trained on the same classes.

Stacking the two heads into W_f = [W1; W2] (2l x n_class) gives the Gram
matrix A_f = W_f W_f.T whose truncated eigen root L_f (2l x r) splits into
per-encoder blocks L1 (top) and L2 (bottom). At full rank the blocks
reproduce every cross Gram exactly (L1 L2.T = W1 W2.T etc.), so cosine
scores between the two encoders' cl-embeddings survive the projection.

A_f is typically rank deficient at 2l (rank <= n_class and the heads share
structure), so fusion always uses the eigen route; Cholesky cannot reduce
dimension.
"""

import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from uespace import clspace, linalg
from uespace.clspace import ClassificationHead, _as_vector
from uespace.errors import (
    BothWeightsZeroError,
    ClassSetMismatchError,
    DimMismatchError,
    RankOutOfRangeError,
)


@dataclass(frozen=True)
class FusionProjector:
    """Per-encoder blocks of the stacked-head eigen root.

    ``l1`` and ``l2`` are both (l, r); side k projects encoder k's
    embeddings via y = lk.T @ e. ``eigen_energy`` records the fraction of
    eigenvalue mass the chosen rank retains.
    """

    l1: np.ndarray
    l2: np.ndarray
    rank: int
    encoder_ids: Tuple[str, str]
    default_weights: Tuple[float, float] = (1.0, 1.0)
    eigen_energy: float = 1.0

    def __post_init__(self):
        if self.l1.shape != self.l2.shape:
            raise DimMismatchError(
                f"fusion blocks differ in shape: {self.l1.shape} vs {self.l2.shape}"
            )
        w1, w2 = self.default_weights
        if not (np.isfinite(w1) and np.isfinite(w2)):
            raise BothWeightsZeroError("fusion weights must be finite")
        if w1 == 0.0 and w2 == 0.0:
            raise BothWeightsZeroError("fusion weights cannot both be zero")

    @property
    def input_dim(self) -> int:
        return self.l1.shape[0]

    def side(self, which: int) -> np.ndarray:
        if which == 1:
            return self.l1
        if which == 2:
            return self.l2
        raise ValueError(f"side must be 1 or 2, got {which}")

    def side_for_encoder(self, encoder_id: str) -> int:
        if encoder_id == self.encoder_ids[0]:
            return 1
        if encoder_id == self.encoder_ids[1]:
            return 2
        raise KeyError(encoder_id)


def build_fusion_projector(head1: ClassificationHead, head2: ClassificationHead,
                           rank: Optional[int] = None,
                           weights: Tuple[float, float] = (1.0, 1.0)) -> FusionProjector:
    """Eigen-factor the stacked heads and split the root into two blocks.

    Default rank keeps 99% of the eigenvalue energy, capped at 256.
    """
    if head1.dim != head2.dim:
        raise DimMismatchError(
            f"embedding dims differ: {head1.dim} vs {head2.dim}"
        )
    if head1.n_class != head2.n_class:
        raise ClassSetMismatchError(
            f"class counts differ: {head1.n_class} vs {head2.n_class}"
        )
    if head1.class_labels is not None and head2.class_labels is not None:
        if head1.class_labels != head2.class_labels:
            raise ClassSetMismatchError(
                "heads carry different class label sequences"
            )
    else:
        warnings.warn(
            "fusing heads without class labels: only the class count could be "
            "verified, same-class-set agreement is assumed",
            stacklevel=2,
        )

    l = head1.dim
    stacked = np.vstack([head1.w, head2.w])  # (2l, n_class), head1 on top
    gram = stacked @ stacked.T
    eig = linalg.sym_eig(gram)
    if rank is None:
        rank = clspace.energy_rank(eig.eigenvalues)
    if not 1 <= rank <= 2 * l:
        raise RankOutOfRangeError(f"rank {rank} outside [1, {2 * l}]")
    root = linalg.truncated_root(eig, rank)  # (rank, 2l)
    clamped = np.clip(eig.eigenvalues, 0.0, None)
    total = float(np.sum(clamped))
    energy = float(np.sum(clamped[:rank]) / total) if total > 0.0 else 1.0
    l_full = np.ascontiguousarray(root.T)  # (2l, rank)
    return FusionProjector(
        l1=np.ascontiguousarray(l_full[:l]),
        l2=np.ascontiguousarray(l_full[l:]),
        rank=rank,
        encoder_ids=(head1.encoder_id, head2.encoder_id),
        default_weights=(float(weights[0]), float(weights[1])),
        eigen_energy=energy,
    )


def project_side(fp: FusionProjector, side: int, e) -> np.ndarray:
    """Project one encoder's embedding into the fused space."""
    e = _as_vector(e)
    block = fp.side(side)
    if e.shape[0] != block.shape[0]:
        raise DimMismatchError(f"embedding dim {e.shape[0]} != fusion dim {block.shape[0]}")
    return block.T @ e


def fuse_weighted(fp: FusionProjector, e1, e2,
                  w1: Optional[float] = None, w2: Optional[float] = None) -> np.ndarray:
    """Weighted sum w1*y1 + w2*y2 of both encoders' projections."""
    if w1 is None:
        w1 = fp.default_weights[0]
    if w2 is None:
        w2 = fp.default_weights[1]
    if w1 == 0.0 and w2 == 0.0:
        raise BothWeightsZeroError("fusion weights cannot both be zero")
    return w1 * project_side(fp, 1, e1) + w2 * project_side(fp, 2, e2)
