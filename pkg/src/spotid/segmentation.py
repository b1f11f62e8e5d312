"""Two-thread spot segmentation.

Dark-region thread: gray -> median -> active contours -> area opening.
Bright-region thread: same with a gamma correction before the contours.
The thread masks are merged by pixel-wise logical OR.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.ndimage as ndi

from . import imaging
from .errors import InvalidParameterError

# 8-connectivity structuring element used for all blob work.
CONNECTIVITY_8 = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class SegmentationParams:
    median_window: int = 5
    gamma: float = 2.2
    cv_mu: float = 0.2
    cv_lambda1: float = 1.0
    cv_lambda2: float = 1.0
    cv_iterations: int = 300
    cv_tol: float = 1e-4
    area_min: int = 15
    area_max: int = 2500

    def validate(self) -> "SegmentationParams":
        if self.median_window % 2 == 0 or self.median_window < 1:
            raise InvalidParameterError("median_window must be odd and >= 1")
        if not self.gamma > 0:
            raise InvalidParameterError("gamma must be positive")
        if self.cv_mu < 0:
            raise InvalidParameterError("cv_mu must be non-negative")
        if not (self.cv_lambda1 > 0 and self.cv_lambda2 > 0):
            raise InvalidParameterError("cv_lambda1 and cv_lambda2 must be positive")
        if self.cv_iterations < 1:
            raise InvalidParameterError("cv_iterations must be >= 1")
        if self.cv_tol < 0:
            raise InvalidParameterError("cv_tol must be non-negative")
        if not self.area_min < self.area_max:
            raise InvalidParameterError("area_min must be < area_max")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentationParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidParameterError(f"unknown parameters: {sorted(unknown)}")
        coerced = {}
        for k, v in d.items():
            target = cls.__dataclass_fields__[k].type
            coerced[k] = int(v) if target == "int" else float(v)
        return cls(**coerced).validate()


@dataclass
class SegmentationResult:
    mask: np.ndarray
    dark_thread_mask: np.ndarray
    bright_thread_mask: np.ndarray
    params_used: SegmentationParams = field(default_factory=SegmentationParams)


def _checkerboard_level_set(shape, period: int = 16) -> np.ndarray:
    # Fixed initialization so runs are reproducible and disconnected spots
    # can be captured.
    y, x = np.mgrid[: shape[0], : shape[1]]
    return np.sin(np.pi / (period / 2) * y) * np.sin(np.pi / (period / 2) * x)


def _delta(phi, eps=1.0):
    return eps / (eps * eps + phi * phi)


def _heaviside(phi, eps=1.0):
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(phi / eps))


def _region_means(img, H):
    w_in = H.sum()
    w_out = H.size - w_in
    c1 = (img * H).sum() / w_in if w_in > 0 else 0.0
    c2 = (img * (1.0 - H)).sum() / w_out if w_out > 0 else 0.0
    return c1, c2


def _energy(img, phi, mu, lam1, lam2):
    H = _heaviside(phi)
    c1, c2 = _region_means(img, H)
    fy, fx = np.gradient(H)
    length = np.hypot(fx, fy).sum()
    fit = lam1 * ((img - c1) ** 2 * H).sum() + lam2 * ((img - c2) ** 2 * (1 - H)).sum()
    return mu * length + fit


def active_contours(img, params: SegmentationParams) -> np.ndarray:
    """Region-based (Chan-Vese) level-set evolution; foreground = brighter phase.

    Semi-implicit update on a fixed checkerboard initialization; stops when the
    energy change drops below cv_tol or after cv_iterations sweeps.
    """
    img = imaging.check_gray_image(img)
    params.validate()
    if np.ptp(img) < 1e-12:
        # no two-phase structure; degenerate case resolves to "no spots"
        return np.zeros(img.shape, dtype=bool)
    mu, lam1, lam2 = params.cv_mu, params.cv_lambda1, params.cv_lambda2
    dt = 0.5
    eta = 1e-16

    phi = _checkerboard_level_set(img.shape)
    old_energy = _energy(img, phi, mu, lam1, lam2)

    for _ in range(params.cv_iterations):
        P = np.pad(phi, 1, mode="edge")
        phixp = P[1:-1, 2:] - P[1:-1, 1:-1]
        phixn = P[1:-1, 1:-1] - P[1:-1, :-2]
        phix0 = (P[1:-1, 2:] - P[1:-1, :-2]) / 2.0
        phiyp = P[2:, 1:-1] - P[1:-1, 1:-1]
        phiyn = P[1:-1, 1:-1] - P[:-2, 1:-1]
        phiy0 = (P[2:, 1:-1] - P[:-2, 1:-1]) / 2.0

        C1 = 1.0 / np.sqrt(eta + phixp**2 + phiy0**2)
        C2 = 1.0 / np.sqrt(eta + phixn**2 + phiy0**2)
        C3 = 1.0 / np.sqrt(eta + phix0**2 + phiyp**2)
        C4 = 1.0 / np.sqrt(eta + phix0**2 + phiyn**2)

        K = P[1:-1, 2:] * C1 + P[1:-1, :-2] * C2 + P[2:, 1:-1] * C3 + P[:-2, 1:-1] * C4

        # region averages use the hard indicator so the two phases separate
        # even while phi is far from converged
        c1, c2 = _region_means(img, (phi > 0).astype(np.float64))
        fit = -lam1 * (img - c1) ** 2 + lam2 * (img - c2) ** 2

        delta = _delta(phi)
        phi = (phi + dt * delta * (mu * K + fit)) / (
            1.0 + mu * dt * delta * (C1 + C2 + C3 + C4)
        )

        energy = _energy(img, phi, mu, lam1, lam2)
        if abs(old_energy - energy) < params.cv_tol:
            break
        old_energy = energy

    mask = phi > 0
    # Foreground polarity: spots are bright on dark scales.
    if mask.any() and (~mask).any():
        if img[mask].mean() < img[~mask].mean():
            mask = ~mask
    return mask


def area_open(mask, area_min: int, area_max: int) -> np.ndarray:
    """Remove 8-connected components with pixel count outside [area_min, area_max]."""
    if not area_min < area_max:
        raise InvalidParameterError("area_min must be < area_max")
    mask = imaging.check_mask(mask)
    labels, n = ndi.label(mask, structure=CONNECTIVITY_8)
    if n == 0:
        return mask.copy()
    sizes = np.bincount(labels.ravel())
    keep = (sizes >= area_min) & (sizes <= area_max)
    keep[0] = False
    return keep[labels]


def segment_scale(img, params: SegmentationParams | None = None) -> SegmentationResult:
    """Run both segmentation threads and merge their masks with logical OR."""
    params = (params or SegmentationParams()).validate()
    img = imaging.check_rgb_image(img)

    gray = imaging.to_grayscale(img)
    smoothed = imaging.median_filter(gray, params.median_window)

    dark = area_open(
        active_contours(smoothed, params), params.area_min, params.area_max
    )
    corrected = imaging.gamma_correct(smoothed, params.gamma)
    bright = area_open(
        active_contours(corrected, params), params.area_min, params.area_max
    )

    return SegmentationResult(
        mask=dark | bright,
        dark_thread_mask=dark,
        bright_thread_mask=bright,
        params_used=params,
    )
