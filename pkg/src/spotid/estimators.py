"""Scikit-learn style wrappers so the pipeline composes with the ecosystem.

ScaleSegmenter is a stateless transformer (RGB images -> spot masks);
SpotIdentifier is a gallery-backed classifier (masks -> individual ids).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import matching
from .gallery import Gallery, record_from_mask
from .segmentation import SegmentationParams, segment_scale


class ScaleSegmenter(TransformerMixin, BaseEstimator):
    """Two-thread active-contour spot segmentation as a transformer."""

    def __init__(
        self,
        median_window=5,
        gamma=2.2,
        cv_mu=0.2,
        cv_lambda1=1.0,
        cv_lambda2=1.0,
        cv_iterations=300,
        cv_tol=1e-4,
        area_min=15,
        area_max=2500,
    ):
        self.median_window = median_window
        self.gamma = gamma
        self.cv_mu = cv_mu
        self.cv_lambda1 = cv_lambda1
        self.cv_lambda2 = cv_lambda2
        self.cv_iterations = cv_iterations
        self.cv_tol = cv_tol
        self.area_min = area_min
        self.area_max = area_max

    def _params(self) -> SegmentationParams:
        return SegmentationParams(**self.get_params()).validate()

    def fit(self, X=None, y=None):
        self._params()
        return self

    def transform(self, X):
        """Segment a sequence of RGB images into boolean spot masks."""
        params = self._params()
        return [segment_scale(img, params).mask for img in X]


class SpotIdentifier(BaseEstimator):
    """Closed-set identification against an enrolled in-memory gallery."""

    def __init__(
        self,
        method=matching.METHOD_ICP_PROCRUSTES,
        icp_max_iter=100,
        icp_tol=1e-8,
    ):
        self.method = method
        self.icp_max_iter = icp_max_iter
        self.icp_tol = icp_tol

    def fit(self, X, y):
        """Enroll masks X with individual labels y."""
        if len(X) != len(y):
            raise ValueError("X and y must have equal length")
        counters = {}
        records = []
        for mask, label in zip(X, y):
            label = str(label)
            counters[label] = counters.get(label, 0) + 1
            records.append(record_from_mask(label, f"s{counters[label]}", mask))
        self.gallery_ = Gallery(records=records)
        self.classes_ = np.array(sorted(counters))
        return self

    def _check_fitted(self):
        if not hasattr(self, "gallery_"):
            raise NotFittedError("SpotIdentifier is not fitted; call fit first")

    def rank(self, mask, top_n=None, exclude=None):
        """Full ranked candidate list for one query mask."""
        self._check_fitted()
        ranked = matching.identify(
            mask,
            self.gallery_,
            method=self.method,
            exclude=exclude,
            max_iter=self.icp_max_iter,
            tol=self.icp_tol,
        )
        return ranked.scores[:top_n] if top_n else ranked.scores

    def predict(self, X):
        """Rank-1 individual id per query mask."""
        return np.array([self.rank(mask, top_n=1)[0].individual_id for mask in X])

    def decision_function(self, X):
        """Rank-1 dissimilarity per query (lower = more confident)."""
        return np.array([self.rank(mask, top_n=1)[0].dissimilarity for mask in X])
