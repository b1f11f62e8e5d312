"""Segmentation and identification metrics.

Four families: 2x2 pixel confusion matrix, precision/recall/F-measure,
Hoover five-class region metrics, and FAR/FRR/EER plus rank-N over a
dissimilarity matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage as ndi

from . import imaging
from .errors import InvalidInputError, InvalidParameterError
from .matching import METHOD_ICP_PROCRUSTES, _match_one
from .segmentation import CONNECTIVITY_8


@dataclass(frozen=True)
class ConfusionMatrix2x2:
    """Pixel counts plus column-normalized percentages over GT classes.

    Columns are the ground-truth classes (background, foreground); an empty GT
    class leaves its column undefined (None), never 0/0.
    """

    tn: int
    fn: int
    fp: int
    tp: int

    @property
    def background_defined(self) -> bool:
        return self.tn + self.fp > 0

    @property
    def foreground_defined(self) -> bool:
        return self.tp + self.fn > 0

    @property
    def x11(self):
        return 100.0 * self.tn / (self.tn + self.fp) if self.background_defined else None

    @property
    def x21(self):
        return 100.0 * self.fp / (self.tn + self.fp) if self.background_defined else None

    @property
    def x22(self):
        return 100.0 * self.tp / (self.tp + self.fn) if self.foreground_defined else None

    @property
    def x12(self):
        return 100.0 * self.fn / (self.tp + self.fn) if self.foreground_defined else None


@dataclass(frozen=True)
class PrfResult:
    precision: float | None
    recall: float | None
    f_measure: float | None
    precision_defined: bool
    recall_defined: bool


@dataclass
class HooverCurves:
    tolerances: list[float]
    correct_detected: list[float]
    over_segmented: list[float]
    under_segmented: list[float]
    missed: list[float]
    noise: list[float]
    gt_region_count: int
    machine_region_count: int


@dataclass
class DissimilarityMatrix:
    labels: list[tuple[str, str]]  # (individual_id, scale_id) per row/column
    values: np.ndarray  # square; excluded cells are NaN

    def __post_init__(self):
        n = len(self.labels)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (n, n):
            raise InvalidInputError("matrix dimensions must match labels")
        finite = self.values[np.isfinite(self.values)]
        if finite.size and finite.min() < 0:
            raise InvalidInputError("dissimilarities must be non-negative")


@dataclass
class RocCurves:
    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray
    eer: float
    eer_threshold: float


def confusion(gt, seg) -> ConfusionMatrix2x2:
    """Per-pixel agreement counts; foreground is the positive class."""
    gt = imaging.check_mask(gt)
    seg = imaging.check_mask(seg)
    if gt.shape != seg.shape:
        raise InvalidInputError(f"mask shapes differ: {gt.shape} vs {seg.shape}")
    tp = int(np.sum(gt & seg))
    tn = int(np.sum(~gt & ~seg))
    fp = int(np.sum(~gt & seg))
    fn = int(np.sum(gt & ~seg))
    return ConfusionMatrix2x2(tn=tn, fn=fn, fp=fp, tp=tp)


def prf(counts: ConfusionMatrix2x2) -> PrfResult:
    """Precision, recall and their harmonic mean from raw pixel counts."""
    p_def = counts.tp + counts.fp > 0
    r_def = counts.tp + counts.fn > 0
    p = counts.tp / (counts.tp + counts.fp) if p_def else None
    r = counts.tp / (counts.tp + counts.fn) if r_def else None
    if p is not None and r is not None and (p + r) > 0:
        f = 2 * p * r / (p + r)
    elif p == 0 or r == 0:
        f = 0.0 if (p is not None and r is not None) else None
    else:
        f = None
    return PrfResult(
        precision=p, recall=r, f_measure=f, precision_defined=p_def, recall_defined=r_def
    )


def _regions(mask):
    labels, n = ndi.label(mask, structure=CONNECTIVITY_8)
    return labels, n


def hoover(gt, seg, tolerances) -> HooverCurves:
    """Five-class region scoring as a function of overlap tolerance.

    Classification precedence at each tolerance: correct detection first, then
    over-/under-segmentation, then missed (GT side) and noise (machine side).
    GT-side class counts are fractions of GT regions; noise is a fraction of
    machine regions.
    """
    gt = imaging.check_mask(gt)
    seg = imaging.check_mask(seg)
    if gt.shape != seg.shape:
        raise InvalidInputError(f"mask shapes differ: {gt.shape} vs {seg.shape}")
    tolerances = [float(t) for t in tolerances]
    for t in tolerances:
        if not (0.5 < t <= 1.0):
            raise InvalidParameterError(f"tolerance must be in (0.5, 1], got {t}")

    gl, ng = _regions(gt)
    ml, nm = _regions(seg)
    g_sizes = np.bincount(gl.ravel(), minlength=ng + 1)
    m_sizes = np.bincount(ml.ravel(), minlength=nm + 1)
    # overlap[g][m] for labels 1..ng x 1..nm
    overlap = np.zeros((ng + 1, nm + 1), dtype=np.int64)
    both = (gl > 0) & (ml > 0)
    if both.any():
        np.add.at(overlap, (gl[both], ml[both]), 1)

    curves = HooverCurves(
        tolerances=tolerances,
        correct_detected=[],
        over_segmented=[],
        under_segmented=[],
        missed=[],
        noise=[],
        gt_region_count=ng,
        machine_region_count=nm,
    )

    for T in tolerances:
        g_class = {}  # gt label -> class name
        m_used = set()
        # 1. correct detections: mutual coverage >= T of both areas
        for g in range(1, ng + 1):
            for m in range(1, nm + 1):
                if m in m_used:
                    continue
                o = overlap[g, m]
                if o >= T * g_sizes[g] and o >= T * m_sizes[m]:
                    g_class[g] = "correct"
                    m_used.add(m)
                    break
        # 2. over-segmentation: one GT region vs >= 2 machine regions
        for g in range(1, ng + 1):
            if g in g_class:
                continue
            members = [
                m
                for m in range(1, nm + 1)
                if m not in m_used and overlap[g, m] >= T * m_sizes[m]
            ]
            if len(members) >= 2 and overlap[g, members].sum() >= T * g_sizes[g]:
                g_class[g] = "over"
                m_used.update(members)
        # 3. under-segmentation: one machine region vs >= 2 GT regions
        for m in range(1, nm + 1):
            if m in m_used:
                continue
            members = [
                g
                for g in range(1, ng + 1)
                if g not in g_class and overlap[g, m] >= T * g_sizes[g]
            ]
            if len(members) >= 2 and overlap[members, m].sum() >= T * m_sizes[m]:
                for g in members:
                    g_class[g] = "under"
                m_used.add(m)
        # 4. remainder
        counts = {"correct": 0, "over": 0, "under": 0}
        for cls in g_class.values():
            counts[cls] += 1
        missed = ng - len(g_class)
        noise = nm - len(m_used)

        g_total = ng if ng > 0 else 1
        m_total = nm if nm > 0 else 1
        curves.correct_detected.append(counts["correct"] / g_total)
        curves.over_segmented.append(counts["over"] / g_total)
        curves.under_segmented.append(counts["under"] / g_total)
        curves.missed.append(missed / g_total)
        curves.noise.append(noise / m_total)

    return curves


def build_dissimilarity_matrix(
    gallery_source,
    gallery_target,
    method: str = METHOD_ICP_PROCRUSTES,
    workers: int = 1,
    **match_kwargs,
) -> DissimilarityMatrix:
    """All-pairs source-vs-target scores; self pairs (same scale id) excluded.

    Supports GT-GT, AT-AT and GT-AT pairings: both galleries must carry the
    same (individual, scale) roster. Unmatchable cells become NaN (excluded).
    """
    src = sorted(gallery_source.records, key=lambda r: (r.individual_id, r.scale_id))
    tgt = sorted(gallery_target.records, key=lambda r: (r.individual_id, r.scale_id))
    roster_s = [(r.individual_id, r.scale_id) for r in src]
    roster_t = [(r.individual_id, r.scale_id) for r in tgt]
    if roster_s != roster_t:
        raise InvalidInputError("source and target galleries have different rosters")
    n = len(src)
    values = np.full((n, n), np.nan)
    mask_of = {}

    def query_mask(record):
        key = (record.individual_id, record.scale_id)
        if key not in mask_of:
            mask_of[key] = gallery_source.mask_of(record)
        return mask_of[key]

    from .errors import UnmatchableRecordError

    def fill_row(i):
        qmask = query_mask(src[i])
        for j in range(n):
            if roster_s[i] == roster_t[j]:
                continue
            try:
                score = _match_one(qmask, tgt[j], method, **match_kwargs)
                values[i, j] = score.dissimilarity
            except UnmatchableRecordError:
                pass

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_row, range(n)))
    else:
        for i in range(n):
            fill_row(i)

    return DissimilarityMatrix(labels=roster_s, values=values)


def _genuine_impostor(matrix: DissimilarityMatrix):
    """Directed (query, target) pair scores split by identity agreement."""
    n = len(matrix.labels)
    genuine, impostor = [], []
    for i in range(n):
        for j in range(n):
            v = matrix.values[i, j]
            if i == j or not np.isfinite(v):
                continue
            if matrix.labels[i][0] == matrix.labels[j][0]:
                genuine.append(v)
            else:
                impostor.append(v)
    return np.array(genuine), np.array(impostor)


def far_frr(
    matrix: DissimilarityMatrix,
    steps: int = 1000,
    thresholds=None,
) -> RocCurves:
    """FAR/FRR sweep from 0 to the matrix maximum; EER at the crossover.

    `thresholds` overrides the uniform sweep (pass every distinct score for an
    exact sweep). FAR(t) counts impostor pairs accepted (score <= t); FRR(t)
    counts genuine pairs rejected (score > t).
    """
    genuine, impostor = _genuine_impostor(matrix)
    if len(genuine) == 0 or len(impostor) == 0:
        raise InvalidInputError("need at least one genuine and one impostor pair")
    return far_frr_from_scores(genuine, impostor, steps=steps, thresholds=thresholds)


def far_frr_from_scores(genuine, impostor, steps: int = 1000, thresholds=None) -> RocCurves:
    genuine = np.asarray(genuine, dtype=np.float64)
    impostor = np.asarray(impostor, dtype=np.float64)
    if len(genuine) == 0 or len(impostor) == 0:
        raise InvalidInputError("need at least one genuine and one impostor score")
    if thresholds is None:
        if steps < 2:
            raise InvalidParameterError("steps must be >= 2")
        top = max(genuine.max(), impostor.max())
        thresholds = np.linspace(0.0, top, steps)
    else:
        thresholds = np.sort(np.asarray(thresholds, dtype=np.float64))

    far = np.array([(impostor <= t).mean() for t in thresholds])
    frr = np.array([(genuine > t).mean() for t in thresholds])

    diff = far - frr
    cross = np.flatnonzero(diff >= 0)
    if len(cross) == 0:
        k = len(thresholds) - 1
        eer = (far[k] + frr[k]) / 2.0
        eer_threshold = thresholds[k]
    else:
        k = cross[0]
        if k == 0 or diff[k] == 0:
            eer = (far[k] + frr[k]) / 2.0
            eer_threshold = thresholds[k]
        else:
            # linear interpolation between the bracketing thresholds
            a = -diff[k - 1] / (diff[k] - diff[k - 1])
            eer_far = far[k - 1] + a * (far[k] - far[k - 1])
            eer_frr = frr[k - 1] + a * (frr[k] - frr[k - 1])
            eer = (eer_far + eer_frr) / 2.0
            eer_threshold = thresholds[k - 1] + a * (thresholds[k] - thresholds[k - 1])

    return RocCurves(
        thresholds=np.asarray(thresholds),
        far=far,
        frr=frr,
        eer=float(eer),
        eer_threshold=float(eer_threshold),
    )


def n_rank(matrix: DissimilarityMatrix, n: int) -> float:
    """Fraction of queries whose individual appears among the top-n scales."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    labels = matrix.labels
    per_individual = {}
    for ind, _ in labels:
        per_individual[ind] = per_individual.get(ind, 0) + 1
    offenders = sorted(ind for ind, c in per_individual.items() if c < 2)
    if offenders:
        raise InvalidInputError(
            f"individuals with fewer than 2 scales: {offenders}"
        )
    hits = 0
    queries = 0
    size = len(labels)
    for i in range(size):
        candidates = [
            (matrix.values[i, j], labels[j][0], labels[j][1], j)
            for j in range(size)
            if j != i and np.isfinite(matrix.values[i, j])
        ]
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        queries += 1
        if any(c[1] == labels[i][0] for c in candidates[:n]):
            hits += 1
    return hits / queries if queries else 0.0


def save_matrix_csv(matrix: DissimilarityMatrix, path) -> None:
    """CSV with a header row/column of individual:scale labels; NaN = excluded."""
    names = [f"{ind}:{sc}" for ind, sc in matrix.labels]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + names)
        for name, row in zip(names, matrix.values):
            writer.writerow(
                [name] + ["" if not np.isfinite(v) else repr(float(v)) for v in row]
            )


def load_matrix_csv(path) -> DissimilarityMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "":
        raise InvalidInputError("malformed dissimilarity matrix CSV")
    names = rows[0][1:]
    labels = []
    for name in names:
        ind, _, sc = name.partition(":")
        if not ind or not sc:
            raise InvalidInputError(f"malformed label {name!r}")
        labels.append((ind, sc))
    values = np.full((len(names), len(names)), np.nan)
    for i, row in enumerate(rows[1:]):
        if row[0] != names[i]:
            raise InvalidInputError("row/column label mismatch")
        for j, cell in enumerate(row[1:]):
            if cell != "":
                values[i, j] = float(cell)
    return DissimilarityMatrix(labels=labels, values=values)
