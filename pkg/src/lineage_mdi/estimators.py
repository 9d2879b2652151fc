"""Scikit-learn style estimator wrappers around the analytic core.

These classes follow the fit/attributes convention (fitted state in
trailing-underscore attributes, ``get_params``/``set_params`` from
:class:`sklearn.base.BaseEstimator`) so the algorithms compose with
pipelines, grid search and ``clone``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import analytics, disruption, structure
from .ingest import Snapshot
from .lineage import LineageGraph, build_graph


def _validate_1d(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


class LineageGraphBuilder(BaseEstimator):
    """Builds the cleaned lineage DAG from a snapshot or record iterable.

    Attributes after ``fit``: ``graph_`` (the immutable DAG) and
    ``cleaning_report_`` (per-reason drop counts).
    """

    def fit(self, X, y=None):
        self.graph_, self.cleaning_report_ = build_graph(X)
        return self

    def transform(self, X=None) -> LineageGraph:
        check_is_fitted(self, "graph_")
        return self.graph_

    def fit_transform(self, X, y=None) -> LineageGraph:
        return self.fit(X).transform()


class DisruptionIndex(BaseEstimator):
    """Scores every eligible focal model of a lineage graph.

    Attributes after ``fit``: ``results_`` (sorted MdiResult rows over all
    windows) and ``scores_`` (focal id -> index value at ``main_window``).
    """

    def __init__(
        self,
        windows: tuple = disruption.DEFAULT_WINDOWS,
        epsilon: float = disruption.DEFAULT_EPSILON,
        main_window: int = disruption.DEFAULT_WINDOW_DAYS,
        workers: int = 1,
    ):
        self.windows = windows
        self.epsilon = epsilon
        self.main_window = main_window
        self.workers = workers

    def fit(self, X: LineageGraph | Snapshot, y=None):
        graph = X if isinstance(X, LineageGraph) else build_graph(X)[0]
        windows = tuple(sorted({*self.windows, self.main_window}))
        self.graph_ = graph
        self.results_ = disruption.mdi_sweep(
            graph, windows=windows, epsilon=self.epsilon, workers=self.workers
        )
        self.scores_ = {
            r.focal_id: r.mdi
            for r in self.results_
            if r.eligible and r.window_days == self.main_window
        }
        return self

    def predict(self, model_ids) -> np.ndarray:
        """Index values at ``main_window`` for the given focal ids; NaN for
        models that are not eligible."""
        check_is_fitted(self, "scores_")
        return np.array(
            [self.scores_.get(m, np.nan) for m in model_ids], dtype=np.float64
        )

    def fit_predict(self, X, model_ids=None) -> np.ndarray:
        self.fit(X)
        if model_ids is None:
            model_ids = sorted(self.scores_)
        return self.predict(model_ids)


class PowerLawEstimator(BaseEstimator):
    """Discrete power-law tail fit with KS-minimizing x_min selection.

    Attributes after ``fit``: ``alpha_``, ``x_min_``, ``ks_distance_``,
    ``n_tail_`` and the full ``fit_result_``.
    """

    def __init__(self, x_min_range: Optional[tuple] = None, min_tail: int = 10):
        self.x_min_range = x_min_range
        self.min_tail = min_tail

    def fit(self, X, y=None):
        if not isinstance(X, structure.DegreeDistribution):
            values = _validate_1d("X", X)
            if np.any(values < 0) or np.any(values != np.round(values)):
                raise ValueError("degrees must be non-negative integers")
            X = [int(v) for v in values]
        result = structure.fit_power_law(
            X, x_min_range=self.x_min_range, min_tail=self.min_tail
        )
        self.fit_result_ = result
        self.alpha_ = result.alpha
        self.x_min_ = result.x_min
        self.ks_distance_ = result.ks_distance
        self.n_tail_ = result.n_tail
        return self


class LowessSmoother(BaseEstimator):
    """Robust locally weighted regression smoother.

    ``fit`` stores the smoothed curve at the training points; ``predict``
    interpolates it linearly at new locations.
    """

    def __init__(self, frac: float = 0.3, robust_iters: int = 2):
        self.frac = frac
        self.robust_iters = robust_iters

    def fit(self, X, y):
        x = _validate_1d("X", X)
        yv = _validate_1d("y", y)
        order = np.argsort(x, kind="stable")
        self.x_ = x[order]
        self.smoothed_ = analytics.lowess(
            x, yv, frac=self.frac, robust_iters=self.robust_iters
        )[order]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "smoothed_")
        x = _validate_1d("X", X)
        return np.interp(x, self.x_, self.smoothed_)

    def fit_predict(self, X, y) -> np.ndarray:
        return self.fit(X, y).predict(X)
