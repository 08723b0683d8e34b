"""Duration-based encoder routing and batch trial scoring.

A duration-specialized encoder pair plus a fusion projector act as one
"universal" encoder: each utterance is routed to the short- or long-
duration encoder by its duration, projected through that encoder's fusion
block, and compared to any other utterance by cosine in the shared space.

Archives are immutable in-memory collections of (id, duration, vector)
records, one per encoder. Scoring projects whole archives up front and
then evaluates trials with the kernel backend; results are written in
trial order regardless of execution order, and the parallel path is
bitwise identical to the serial one.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from uespace import kernels
from uespace.clspace import Projector
from uespace.errors import (
    BothWeightsZeroError,
    DimMismatchError,
    DuplicateUtteranceIdError,
    EncoderNotInFusionError,
    InconsistentDurationError,
    MissingEmbeddingError,
    NonPositiveDurationError,
    UnknownUtteranceIdError,
    ZeroVectorError,
)
from uespace.fusion import FusionProjector, project_side

TRIAL_LABELS = ("target", "nontarget", "unlabeled")

_NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class EmbeddingArchive:
    """Keyed collection of (utterance id, duration seconds, embedding)."""

    ids: Tuple[str, ...]
    durations: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        ids = tuple(self.ids)
        durations = np.asarray(self.durations, dtype=np.float64)
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise DimMismatchError(f"vectors must be 2-D, got shape {vectors.shape}")
        n = len(ids)
        if durations.shape != (n,) or vectors.shape[0] != n:
            raise DimMismatchError(
                f"{n} ids, {durations.shape[0]} durations, {vectors.shape[0]} vectors"
            )
        if vectors.shape[1] < 1:
            raise DimMismatchError("embedding dim must be at least 1")
        if any(not i for i in ids):
            raise DimMismatchError("utterance ids must be non-empty")
        if n and not np.all(np.isfinite(durations) & (durations > 0.0)):
            raise NonPositiveDurationError("durations must be finite and positive")
        if len(set(ids)) != n:
            seen = set()
            dup = next(i for i in ids if i in seen or seen.add(i))
            raise DuplicateUtteranceIdError(f"duplicate utterance id {dup!r}")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "_index", {u: i for i, u in enumerate(ids)})

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def index_of(self, utt_id: str) -> int:
        try:
            return self._index[utt_id]
        except KeyError:
            raise UnknownUtteranceIdError(f"unknown utterance id {utt_id!r}") from None


@dataclass(frozen=True)
class UtteranceRecord:
    """One utterance with its per-encoder embeddings."""

    id: str
    duration: float
    embedding_by_encoder: Mapping[str, np.ndarray]

    def __post_init__(self):
        if not self.id:
            raise DimMismatchError("utterance id must be non-empty")
        if not (np.isfinite(self.duration) and self.duration > 0.0):
            raise NonPositiveDurationError(f"duration {self.duration!r}")
        if not self.embedding_by_encoder:
            raise MissingEmbeddingError("record carries no embeddings")
        dims = {np.asarray(v).shape for v in self.embedding_by_encoder.values()}
        if len(dims) != 1:
            raise DimMismatchError(f"embeddings disagree in shape: {sorted(dims)}")


@dataclass(frozen=True)
class Trial:
    enroll_id: str
    test_id: str
    label: str = "unlabeled"

    def __post_init__(self):
        if not self.enroll_id or not self.test_id:
            raise DimMismatchError("trial ids must be non-empty")
        if self.label not in TRIAL_LABELS:
            raise ValueError(f"label must be one of {TRIAL_LABELS}, got {self.label!r}")


@dataclass(frozen=True)
class RoutingPolicy:
    """Route utterances shorter than ``threshold`` seconds to the short encoder.

    The boundary itself goes to the long encoder.
    """

    short_encoder_id: str
    long_encoder_id: str
    threshold: float = 4.0

    def __post_init__(self):
        if not self.threshold > 0.0:
            raise NonPositiveDurationError(f"threshold must be positive, got {self.threshold}")


def route(policy: RoutingPolicy, duration: float) -> str:
    if not duration > 0.0:
        raise NonPositiveDurationError(f"duration must be positive, got {duration!r}")
    if duration < policy.threshold:
        return policy.short_encoder_id
    return policy.long_encoder_id


def embed_universal(policy: RoutingPolicy, fp: FusionProjector,
                    record: UtteranceRecord) -> np.ndarray:
    """Project one utterance through its routed encoder's fusion block."""
    encoder = route(policy, record.duration)
    try:
        side = fp.side_for_encoder(encoder)
    except KeyError:
        raise EncoderNotInFusionError(
            f"routed encoder {encoder!r} not in fusion pair {fp.encoder_ids}"
        ) from None
    e = record.embedding_by_encoder.get(encoder)
    if e is None:
        raise MissingEmbeddingError(
            f"utterance {record.id!r} has no embedding for routed encoder {encoder!r}"
        )
    return project_side(fp, side, e)


def _unit_rows(rows: np.ndarray, ids: Sequence[str]) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1)
    bad = np.flatnonzero(norms <= _NORM_FLOOR)
    if bad.size:
        raise ZeroVectorError(f"utterance {ids[bad[0]]!r} projects to a zero vector")
    return rows / norms[:, None]


def _expect_archive(group) -> EmbeddingArchive:
    if not isinstance(group, EmbeddingArchive):
        raise TypeError("this scorer takes a single EmbeddingArchive per side")
    return group


def _expect_group(group) -> Mapping[str, EmbeddingArchive]:
    if isinstance(group, EmbeddingArchive):
        raise TypeError("this scorer takes a mapping of encoder id -> EmbeddingArchive")
    return group


class SingleProjectorScorer:
    """Scores trials after projecting both sides through one linear map."""

    def __init__(self, l_map: np.ndarray):
        self.l_map = np.asarray(l_map, dtype=np.float64)

    @classmethod
    def from_projector(cls, p: Projector) -> "SingleProjectorScorer":
        return cls(p.l_map)

    @classmethod
    def from_fusion_side(cls, fp: FusionProjector, side: int) -> "SingleProjectorScorer":
        return cls(fp.side(side))

    def project_group(self, group):
        arch = _expect_archive(group)
        if arch.dim != self.l_map.shape[0]:
            raise DimMismatchError(
                f"archive dim {arch.dim} != projector input dim {self.l_map.shape[0]}"
            )
        rows = arch.vectors @ self.l_map
        return dict(arch._index), _unit_rows(rows, arch.ids)


class UniversalScorer:
    """Routes each utterance by duration, then projects through that side."""

    def __init__(self, fp: FusionProjector, policy: RoutingPolicy):
        for encoder in (policy.short_encoder_id, policy.long_encoder_id):
            if encoder not in fp.encoder_ids:
                raise EncoderNotInFusionError(
                    f"policy encoder {encoder!r} not in fusion pair {fp.encoder_ids}"
                )
        self.fp = fp
        self.policy = policy

    def project_group(self, group):
        group = _expect_group(group)
        duration_of: dict = {}
        for encoder, arch in group.items():
            if arch.dim != self.fp.input_dim:
                raise DimMismatchError(
                    f"archive dim {arch.dim} != fusion dim {self.fp.input_dim}"
                )
            for i, utt in enumerate(arch.ids):
                d = float(arch.durations[i])
                prev = duration_of.setdefault(utt, d)
                if prev != d:
                    raise InconsistentDurationError(
                        f"utterance {utt!r}: duration {prev} vs {d} across archives"
                    )

        index: dict = {}
        blocks = []
        row = 0
        for encoder in (self.policy.short_encoder_id, self.policy.long_encoder_id):
            side = self.fp.side_for_encoder(encoder)
            arch = group.get(encoder)
            if arch is None or len(arch) == 0:
                continue
            routed = np.fromiter(
                (route(self.policy, float(d)) == encoder for d in arch.durations),
                dtype=bool, count=len(arch),
            )
            picked = np.flatnonzero(routed)
            if picked.size == 0:
                continue
            rows = arch.vectors[picked] @ self.fp.side(side)
            ids = [arch.ids[i] for i in picked]
            blocks.append(_unit_rows(rows, ids))
            for utt in ids:
                index[utt] = row
                row += 1

        missing = [u for u in duration_of if u not in index]
        if missing:
            enc = route(self.policy, duration_of[missing[0]])
            raise MissingEmbeddingError(
                f"utterance {missing[0]!r} routes to encoder {enc!r} "
                "but that archive does not contain it"
            )
        if not blocks:
            return index, np.empty((0, self.fp.rank), dtype=np.float64)
        return index, np.vstack(blocks)


class BlendScorer:
    """Duration-independent weighted fusion of both encoders' projections."""

    def __init__(self, fp: FusionProjector,
                 w1: Optional[float] = None, w2: Optional[float] = None):
        self.fp = fp
        self.w1 = fp.default_weights[0] if w1 is None else float(w1)
        self.w2 = fp.default_weights[1] if w2 is None else float(w2)
        if self.w1 == 0.0 and self.w2 == 0.0:
            raise BothWeightsZeroError("fusion weights cannot both be zero")

    def project_group(self, group):
        group = _expect_group(group)
        enc1, enc2 = self.fp.encoder_ids
        for encoder in (enc1, enc2):
            if encoder not in group:
                raise MissingEmbeddingError(f"no archive for encoder {encoder!r}")
        a1, a2 = group[enc1], group[enc2]
        for arch in (a1, a2):
            if arch.dim != self.fp.input_dim:
                raise DimMismatchError(
                    f"archive dim {arch.dim} != fusion dim {self.fp.input_dim}"
                )
        perm = np.empty(len(a1), dtype=np.int64)
        for i, utt in enumerate(a1.ids):
            try:
                j = a2.index_of(utt)
            except UnknownUtteranceIdError:
                raise MissingEmbeddingError(
                    f"utterance {utt!r} missing from encoder {enc2!r} archive"
                ) from None
            if a1.durations[i] != a2.durations[j]:
                raise InconsistentDurationError(
                    f"utterance {utt!r}: duration {a1.durations[i]} vs {a2.durations[j]}"
                )
            perm[i] = j
        rows = self.w1 * (a1.vectors @ self.fp.l1) + self.w2 * (a2.vectors[perm] @ self.fp.l2)
        return dict(a1._index), _unit_rows(rows, a1.ids)


def score_trials(enroll, test, trials: Sequence[Trial], scorer, threads: int = 1) -> np.ndarray:
    """One cosine score per trial, aligned with the input trial order."""
    e_index, e_unit = scorer.project_group(enroll)
    t_index, t_unit = scorer.project_group(test)
    n = len(trials)
    idx_e = np.empty(n, dtype=np.int64)
    idx_t = np.empty(n, dtype=np.int64)
    for k, trial in enumerate(trials):
        try:
            idx_e[k] = e_index[trial.enroll_id]
        except KeyError:
            raise UnknownUtteranceIdError(
                f"enroll id {trial.enroll_id!r} not present on the enrollment side"
            ) from None
        try:
            idx_t[k] = t_index[trial.test_id]
        except KeyError:
            raise UnknownUtteranceIdError(
                f"test id {trial.test_id!r} not present on the test side"
            ) from None
    if threads > 1:
        kernels.set_num_threads(threads)
    return kernels.trial_dot(e_unit, t_unit, idx_e, idx_t, parallel=threads > 1)
