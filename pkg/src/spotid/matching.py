"""Identification pipelines: normalize, extract centroids, score, rank.

Two scoring methods: plain rigid ICP (mean squared residual) and
ICP followed by one-to-one pairing and Procrustes analysis (standardized
dissimilarity in [0, 1]). The query is always the source cloud, the gallery
record always the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage as ndi

from . import imaging, registration
from .errors import InvalidInputError, InvalidParameterError, UnmatchableRecordError
from .segmentation import CONNECTIVITY_8

METHOD_ICP = "icp"
METHOD_ICP_PROCRUSTES = "icp-procrustes"
METHODS = (METHOD_ICP, METHOD_ICP_PROCRUSTES)


@dataclass(frozen=True)
class MatchScore:
    individual_id: str
    scale_id: str
    dissimilarity: float
    method: str
    aligned_query_cloud: np.ndarray | None = field(default=None, compare=False)
    record_cloud: np.ndarray | None = field(default=None, compare=False)


@dataclass
class RankedCandidates:
    query_id: str
    scores: list[MatchScore]
    skipped: list[tuple[str, str, str]] = field(default_factory=list)


def extract_centroids(mask) -> np.ndarray:
    """Centroid of every 8-connected foreground component, as (x, y) rows.

    Ordering follows each component's first pixel in row-major scan order.
    """
    mask = imaging.check_mask(mask)
    labels, n = ndi.label(mask, structure=CONNECTIVITY_8)
    if n == 0:
        return np.empty((0, 2), dtype=np.float64)
    centers = ndi.center_of_mass(mask, labels, index=np.arange(1, n + 1))
    return np.array([(c, r) for r, c in centers], dtype=np.float64)


def normalize_mask(mask, target_width: int, target_height: int) -> np.ndarray:
    """Nearest-neighbor rescale of a boolean raster."""
    mask = imaging.check_mask(mask)
    if target_width < 1 or target_height < 1:
        raise InvalidParameterError("target dimensions must be >= 1")
    h, w = mask.shape
    if (w, h) == (target_width, target_height):
        return mask.copy()
    rows = np.minimum((np.arange(target_height) + 0.5) * h / target_height, h - 1)
    cols = np.minimum((np.arange(target_width) + 0.5) * w / target_width, w - 1)
    return mask[rows.astype(int)][:, cols.astype(int)]


def _prepare_clouds(query_mask, record):
    normalized = normalize_mask(query_mask, record.width, record.height)
    source = extract_centroids(normalized)
    target = np.asarray(record.cloud, dtype=np.float64)
    if len(source) < 2:
        raise UnmatchableRecordError(
            record.individual_id, record.scale_id, "query yields fewer than 2 spots"
        )
    if len(target) < 2:
        raise UnmatchableRecordError(
            record.individual_id, record.scale_id, "record has fewer than 2 spots"
        )
    return source, target


def match_icp(
    query_mask,
    record,
    max_iter: int = registration.DEFAULT_MAX_ITER,
    tol: float = registration.DEFAULT_TOL,
    normalize_by_count: bool = True,
    with_alignment: bool = False,
) -> MatchScore:
    """ICP score: final objective divided by source point count.

    The normalization removes the point-count bias of the raw sum; it can be
    disabled for raw-objective experiments.
    """
    source, target = _prepare_clouds(query_mask, record)
    result = registration.icp(source, target, max_iter=max_iter, tol=tol)
    dissim = result.objective
    if normalize_by_count:
        dissim /= len(source)
    aligned = result.transform.apply(source) if with_alignment else None
    return MatchScore(
        individual_id=record.individual_id,
        scale_id=record.scale_id,
        dissimilarity=float(dissim),
        method=METHOD_ICP,
        aligned_query_cloud=aligned,
        record_cloud=target if with_alignment else None,
    )


def match_icp_procrustes(
    query_mask,
    record,
    max_iter: int = registration.DEFAULT_MAX_ITER,
    tol: float = registration.DEFAULT_TOL,
    with_alignment: bool = False,
) -> MatchScore:
    """ICP alignment, then one-to-one pairing, then Procrustes dissimilarity."""
    source, target = _prepare_clouds(query_mask, record)
    result = registration.icp(source, target, max_iter=max_iter, tol=tol)
    aligned = result.transform.apply(source)
    pairs = registration.one_to_one_assign(aligned, target)
    if len(pairs) < 2:
        raise UnmatchableRecordError(
            record.individual_id, record.scale_id, "fewer than 2 one-to-one pairs"
        )
    si = np.array([i for i, _ in pairs])
    ti = np.array([j for _, j in pairs])
    proc = registration.procrustes(aligned[si], target[ti])
    return MatchScore(
        individual_id=record.individual_id,
        scale_id=record.scale_id,
        dissimilarity=proc.dissimilarity,
        method=METHOD_ICP_PROCRUSTES,
        aligned_query_cloud=aligned if with_alignment else None,
        record_cloud=target if with_alignment else None,
    )


def _match_one(query_mask, record, method, **kwargs):
    if method == METHOD_ICP:
        return match_icp(query_mask, record, **kwargs)
    if method == METHOD_ICP_PROCRUSTES:
        return match_icp_procrustes(query_mask, record, **kwargs)
    raise InvalidParameterError(f"unknown method {method!r}; expected one of {METHODS}")


def identify(
    query_mask,
    gallery,
    method: str = METHOD_ICP_PROCRUSTES,
    exclude: tuple[str, str] | None = None,
    query_id: str = "query",
    workers: int = 1,
    **match_kwargs,
) -> RankedCandidates:
    """Score the query against every gallery scale, ranked ascending.

    `exclude` names one (individual_id, scale_id) to leave out (leave-one-out
    evaluation). Unmatchable records are skipped and reported, not fatal.
    Ties are broken by (individual_id, scale_id) so parallel scoring cannot
    change the ranking.
    """
    records = list(gallery.records)
    if not records:
        raise InvalidInputError("gallery is empty")
    if exclude is not None:
        exclude = tuple(exclude)
        records = [
            r for r in records if (r.individual_id, r.scale_id) != exclude
        ]

    def score_one(record):
        try:
            return _match_one(query_mask, record, method, **match_kwargs)
        except UnmatchableRecordError as err:
            return (record.individual_id, record.scale_id, err.reason)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(score_one, records))
    else:
        results = [score_one(r) for r in records]

    scores = [r for r in results if isinstance(r, MatchScore)]
    skipped = [r for r in results if not isinstance(r, MatchScore)]
    scores.sort(key=lambda s: (s.dissimilarity, s.individual_id, s.scale_id))
    return RankedCandidates(query_id=query_id, scores=scores, skipped=skipped)
