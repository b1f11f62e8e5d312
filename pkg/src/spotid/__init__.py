"""Spot-pattern biometric toolkit.

Segmentation of skin spots via a two-thread active-contour pipeline,
individual identification via ICP and Procrustes registration of spot-centroid
clouds, and the full evaluation battery (confusion, PRF, Hoover, FAR/FRR/EER,
rank-N), with a persistent gallery and a local review service.
"""

from . import evaluation, gallery, imaging, matching, registration, segmentation
from .errors import (
    DegenerateGeometryError,
    GalleryConflictError,
    GalleryIntegrityError,
    InvalidInputError,
    InvalidParameterError,
    SpotIdError,
    UnmatchableRecordError,
)
from .estimators import ScaleSegmenter, SpotIdentifier
from .segmentation import SegmentationParams, SegmentationResult, segment_scale

__version__ = "0.1.0"

__all__ = [
    "evaluation",
    "gallery",
    "imaging",
    "matching",
    "registration",
    "segmentation",
    "SegmentationParams",
    "SegmentationResult",
    "segment_scale",
    "ScaleSegmenter",
    "SpotIdentifier",
    "SpotIdError",
    "InvalidInputError",
    "InvalidParameterError",
    "DegenerateGeometryError",
    "UnmatchableRecordError",
    "GalleryConflictError",
    "GalleryIntegrityError",
]
