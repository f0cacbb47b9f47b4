"""Scikit-learn estimator wrapping the margin program end to end.

``SqueezeFit`` learns the minimal-trace metric 0 <= M <= I separating the
classes by the requested margin, exposes the squeezed coordinates through
``transform`` (right-multiplication by M^{1/2}), and classifies with
K-nearest neighbours in the squeezed space through ``predict``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baselines import knn_fit, knn_predict
from .constraints import build_constraints_full, build_constraints_nn
from .data import LabeledDataset
from .duality import certify
from .errors import InvalidInput
from .solver import SqueezeConfig, solve
from .spectral import psd_sqrt, rank_round


class SqueezeFit(BaseEstimator, TransformerMixin):
    """Low-rank metric learning with a provable separation margin.

    Parameters
    ----------
    delta : float, default=1.0
        Required cross-class margin in the learned metric. Ignored by
        ``mode="zero_plus"``, which fixes the margin at 1 (scale the data
        instead).
    mode : {"hard", "hinge", "zero_plus"}, default="hard"
        ``hard`` enforces every constraint; ``hinge`` penalizes violations
        with weight ``lam`` (robust to outliers, may leave some pairs inside
        the margin); ``zero_plus`` drops the identity cap and fixes the
        margin at 1.
    lam : float, default=1.0
        Hinge weight (and the homotopy's starting weight in the constrained
        modes).
    n_neighbors : int or None, default=None
        When set, prune the constraint set to each point's ``n_neighbors``
        nearest points of every other class instead of all cross-class pairs.
    max_iters : int, default=20000
        Iteration budget per solve stage.
    tol_obj, tol_feas : float
        Objective / feasibility convergence tolerances.
    step : {"polyak", "diminishing"}, default="polyak"
        Subgradient step rule.
    rank_threshold : float, default=0.5
        Eigenvalue threshold for rounding the learned metric to ``rank_`` and
        ``projection_``.
    verify : bool, default=False
        After fitting, run the two-step optimality check and store the
        outcome in ``certificate_report_`` (modes ``hard``/``zero_plus``; a
        hinge solution need not satisfy the margin, so verification is
        skipped with a report of None).
    classify_k : int, default=5
        Neighbour count for ``predict``.
    random_state : int or None, default=None
        Seed for the solver's internal randomized steps.

    Attributes
    ----------
    metric_ : ndarray of shape (d, d)
        The learned matrix M.
    sqrt_metric_ : ndarray of shape (d, d)
        Its symmetric square root, the compression factor.
    rank_ : int
        Eigenvalues of M above ``rank_threshold``.
    projection_ : ndarray of shape (d, d)
        M rounded to the projection onto its dominant eigenspace.
    result_ : SqueezeResult
        Full solver diagnostics.
    certificate_report_ : CertificateReport or None
        Optimality check outcome when ``verify=True``.
    classes_ : ndarray
        Sorted unique labels seen in ``fit``.
    """

    def __init__(
        self,
        delta: float = 1.0,
        mode: str = "hard",
        lam: float = 1.0,
        n_neighbors: int | None = None,
        max_iters: int = 20000,
        tol_obj: float = 1e-6,
        tol_feas: float = 1e-6,
        step: str = "polyak",
        rank_threshold: float = 0.5,
        verify: bool = False,
        classify_k: int = 5,
        random_state: int | None = None,
    ):
        self.delta = delta
        self.mode = mode
        self.lam = lam
        self.n_neighbors = n_neighbors
        self.max_iters = max_iters
        self.tol_obj = tol_obj
        self.tol_feas = tol_feas
        self.step = step
        self.rank_threshold = rank_threshold
        self.verify = verify
        self.classify_k = classify_k
        self.random_state = random_state

    def fit(self, X, y):
        """Learn the metric from points ``X`` and class labels ``y``."""
        X, y = check_X_y(X, y, dtype=np.float64, ensure_min_samples=2)
        self.classes_, encoded = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise InvalidInput("need at least two distinct labels")
        ds = LabeledDataset(X, encoded.astype(np.int64))
        if self.n_neighbors is None:
            constraints = build_constraints_full(ds)
        else:
            constraints = build_constraints_nn(ds, int(self.n_neighbors))
        config = SqueezeConfig(
            delta=float(self.delta),
            mode=self.mode,
            lam=float(self.lam),
            max_iters=int(self.max_iters),
            tol_obj=float(self.tol_obj),
            tol_feas=float(self.tol_feas),
            step=self.step,
            seed=0 if self.random_state is None else int(self.random_state),
        )
        result = solve(constraints, config)
        self.n_features_in_ = X.shape[1]
        self.result_ = result
        self.metric_ = result.matrix
        self.sqrt_metric_ = psd_sqrt(result.matrix)
        self.rank_, self.projection_ = rank_round(result.matrix, self.rank_threshold)
        self.certificate_report_ = None
        if self.verify and self.mode in ("hard", "zero_plus"):
            effective_delta = 1.0 if self.mode == "zero_plus" else float(self.delta)
            self.certificate_report_ = certify(
                ds, self.metric_, effective_delta, constraints=constraints
            )
        self._train_ds = ds
        self._classifier = knn_fit(
            ds, self.sqrt_metric_, min(int(self.classify_k), ds.n)
        )
        return self

    def transform(self, X) -> np.ndarray:
        """Squeezed coordinates: ``X`` right-multiplied by M^{1/2}."""
        check_is_fitted(self, "sqrt_metric_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInput(
                f"X has {X.shape[1]} features, fit saw {self.n_features_in_}"
            )
        return X @ self.sqrt_metric_

    def predict(self, X) -> np.ndarray:
        """K-nearest-neighbour labels in the squeezed space."""
        check_is_fitted(self, "sqrt_metric_")
        squeezed = self.transform(X)
        encoded = knn_predict(self._classifier, squeezed)
        return self.classes_[encoded]

    def score(self, X, y) -> float:
        """Mean accuracy of ``predict`` on ``(X, y)``."""
        y = np.asarray(y).reshape(-1)
        return float(np.mean(self.predict(X) == y))
