"""Point-set alignment: rigid ICP, one-to-one assignment, Procrustes analysis.

Point clouds are (n, 2) float arrays of (x, y) pixel coordinates. The source
cloud is transformed onto the fixed target cloud.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DegenerateGeometryError, InvalidInputError

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-8
_ORTHO_TOL = 1e-9


def check_cloud(points, min_points: int = 0) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        pts = pts.reshape(0, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInputError(f"point cloud must have shape (n, 2), got {pts.shape}")
    if not np.isfinite(pts).all():
        raise InvalidInputError("point cloud contains non-finite coordinates")
    if pts.shape[0] < min_points:
        raise InvalidInputError(
            f"point cloud needs >= {min_points} points, got {pts.shape[0]}"
        )
    return pts


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray  # 2x2, det = +1
    translation: np.ndarray  # (2,)

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(2)
        if np.abs(R.T @ R - np.eye(2)).max() > 1e-6:
            raise DegenerateGeometryError("rotation matrix is not orthogonal")
        if abs(np.linalg.det(R) - 1.0) > 1e-6:
            raise DegenerateGeometryError("rotation matrix must have det = +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(2), np.zeros(2))

    @classmethod
    def from_angle(cls, theta: float, translation=(0.0, 0.0)) -> "RigidTransform":
        c, s = np.cos(theta), np.sin(theta)
        return cls(np.array([[c, -s], [s, c]]), np.asarray(translation, float))

    def apply(self, points) -> np.ndarray:
        pts = check_cloud(points)
        return pts @ self.rotation.T + self.translation

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """Transform equivalent to applying `inner` first, then self."""
        return RigidTransform(
            self.rotation @ inner.rotation,
            self.rotation @ inner.translation + self.translation,
        )


@dataclass(frozen=True)
class IcpResult:
    transform: RigidTransform
    objective: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ProcrustesResult:
    dissimilarity: float
    scale: float
    rotation: np.ndarray
    translation: np.ndarray


def _nearest(source: np.ndarray, target: np.ndarray):
    """Index of nearest target point per source point (ties -> lowest index)."""
    d = cdist(source, target)
    idx = np.argmin(d, axis=1)
    return idx, d[np.arange(len(source)), idx]


def nearest_correspondences(source, target):
    """One (source_index, target_index, distance) triple per source point."""
    src = check_cloud(source, min_points=1)
    tgt = check_cloud(target, min_points=1)
    idx, dist = _nearest(src, tgt)
    return [(int(i), int(j), float(d)) for i, (j, d) in enumerate(zip(idx, dist))]


def estimate_rigid(source, target) -> RigidTransform:
    """Least-squares rigid transform (SVD with determinant correction).

    Minimizes sum ||R a_i + t - b_i||^2 over rotations only; reflections are
    forbidden because spot patterns are chirality-bearing.
    """
    src = check_cloud(source, min_points=2)
    tgt = check_cloud(target)
    if tgt.shape[0] != src.shape[0]:
        raise InvalidInputError("matched point sequences must have equal length")
    src_c = src.mean(axis=0)
    tgt_c = tgt.mean(axis=0)
    A = src - src_c
    B = tgt - tgt_c
    if np.abs(A).max() < 1e-12:
        raise DegenerateGeometryError("all source points coincide")
    H = A.T @ B
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    D = np.diag([1.0, d if d != 0 else 1.0])
    R = Vt.T @ D @ U.T
    t = tgt_c - R @ src_c
    return RigidTransform(R, t)


# fixed initial rotations tried by icp(); the best final objective wins,
# which keeps the result deterministic while covering the +-30 degree basin
DEFAULT_START_ANGLES = (0.0, np.pi / 12, -np.pi / 12, np.pi / 6, -np.pi / 6)


def _icp_from(start: RigidTransform, src, tgt, max_iter, tol):
    total = start
    current = total.apply(src)
    _, dist0 = _nearest(current, tgt)
    prev_obj = float(np.sum(dist0**2))
    obj = prev_obj
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        idx, _ = _nearest(current, tgt)
        step = estimate_rigid(current, tgt[idx])
        current = step.apply(current)
        total = step.compose(total)
        _, dist = _nearest(current, tgt)
        obj = float(np.sum(dist**2))
        if abs(prev_obj - obj) < tol:
            converged = True
            break
        prev_obj = obj

    return IcpResult(
        transform=total, objective=obj, iterations=iterations, converged=converged
    )


def icp(
    source,
    target,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    start_angles=DEFAULT_START_ANGLES,
) -> IcpResult:
    """Rigid ICP: alternate nearest correspondences and least-squares alignment.

    Stops when the objective changes by less than `tol` between consecutive
    iterations or after `max_iter` iterations. The objective is the sum of
    squared residuals under the final correspondences. Every start is
    centroid pre-aligned and rotated by one of `start_angles` about the target
    centroid; the run with the lowest final objective is returned.
    """
    src = check_cloud(source, min_points=2)
    tgt = check_cloud(target, min_points=2)

    src_c = src.mean(axis=0)
    tgt_c = tgt.mean(axis=0)
    best = None
    for theta in start_angles:
        R = RigidTransform.from_angle(theta).rotation
        start = RigidTransform(R, tgt_c - R @ src_c)
        result = _icp_from(start, src, tgt, max_iter, tol)
        if best is None or result.objective < best.objective:
            best = result
        if best.objective < tol:
            break
    return best


def one_to_one_assign(source, target):
    """Greedy shortest-edge-first one-to-one assignment.

    Each source and each target index appears at most once; the assignment has
    min(|source|, |target|) pairs, unmatched points are dropped. Greedy rather
    than Hungarian: adequate after ICP pre-alignment, and swappable.
    """
    src = check_cloud(source, min_points=1)
    tgt = check_cloud(target, min_points=1)
    n, m = len(src), len(tgt)
    d = cdist(src, tgt)
    order = np.argsort(d, axis=None, kind="stable")
    pairs = []
    used_src = np.zeros(n, dtype=bool)
    used_tgt = np.zeros(m, dtype=bool)
    want = min(n, m)
    for flat in order:
        i, j = divmod(int(flat), m)
        if used_src[i] or used_tgt[j]:
            continue
        used_src[i] = True
        used_tgt[j] = True
        pairs.append((i, j))
        if len(pairs) == want:
            break
    return pairs


def procrustes(X, Y) -> ProcrustesResult:
    """Optimal similarity superimposition of corresponded landmark sets.

    Both configurations are centered and Frobenius-normalized; the optimal
    rotation comes from the SVD of the cross-product matrix with reflections
    forbidden. The dissimilarity is the standardized squared residual
    1 - (sum of corrected singular values)^2, in [0, 1].
    """
    X = check_cloud(X, min_points=2)
    Y = check_cloud(Y, min_points=2)
    if len(X) != len(Y):
        raise InvalidInputError("procrustes requires equal point counts")

    Xc = X.mean(axis=0)
    Yc = Y.mean(axis=0)
    X0 = X - Xc
    Y0 = Y - Yc
    nx = np.linalg.norm(X0)
    ny = np.linalg.norm(Y0)
    if nx < 1e-12 or ny < 1e-12:
        raise DegenerateGeometryError("degenerate configuration: all points coincide")
    X0 /= nx
    Y0 /= ny

    M = X0.T @ Y0
    U, s, Vt = np.linalg.svd(M)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    if d == 0:
        d = 1.0
    trace = s[0] + d * s[1]
    # Rotation mapping X0 onto Y0: X0 @ R ~ Y0.
    R = U @ np.diag([1.0, d]) @ Vt

    dissimilarity = float(np.clip(1.0 - trace**2, 0.0, 1.0))
    scale = float(max(trace, 1e-12) * ny / nx)
    translation = Yc - scale * (R.T @ Xc)
    return ProcrustesResult(
        dissimilarity=dissimilarity,
        scale=scale,
        rotation=R.T,
        translation=translation,
    )
