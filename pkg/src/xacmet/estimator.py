"""scikit-learn style wrappers: fit on a policy, predict decisions for requests."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .graph import build_graph, color_edges
from .model import Decision
from .oracle import CoverageReport, batch_evaluate, coverage
from .paths import DEFAULT_MAX_PATHS, PathSet, order_paths, unfold
from .reference import evaluate_direct
from .tree import build_tree
from .validation import check_granularity, check_policy, check_positive, check_requests


def _labels(y) -> list[Decision]:
    return [Decision(v) for v in np.asarray(y, dtype=object).ravel()]


class XacmetOracle(ClassifierMixin, BaseEstimator):
    """Path-based oracle.

    ``fit`` builds the tree, the colored graph and the ordered paths of a
    policy. ``predict`` returns the verdict for each request and
    ``transform`` the rank of the path each request covers.
    """

    def __init__(self, granularity: str = "rule", max_paths: int = DEFAULT_MAX_PATHS):
        self.granularity = granularity
        self.max_paths = max_paths

    def fit(self, policy, y=None):
        check_granularity(self.granularity)
        check_positive(self.max_paths, "max_paths")
        self.policy_ = check_policy(policy)
        self.tree_ = build_tree(self.policy_)
        self.graph_ = color_edges(build_graph(self.tree_))
        paths = unfold(self.graph_, self.granularity, self.max_paths)
        self.paths_ = PathSet(self.graph_, order_paths(paths), self.granularity)
        self.classes_ = np.array(list(Decision), dtype=object)
        return self

    def _results(self, requests):
        check_is_fitted(self, "paths_")
        return batch_evaluate(self.paths_, check_requests(requests))

    def predict(self, requests) -> np.ndarray:
        return np.array([r.verdict for r in self._results(requests)], dtype=object)

    def transform(self, requests) -> np.ndarray:
        return np.array([r.covered_path_rank for r in self._results(requests)], dtype=int)

    def fit_transform(self, policy, requests=None):
        self.fit(policy)
        return self.transform([] if requests is None else requests)

    def coverage(self, requests) -> CoverageReport:
        check_is_fitted(self, "paths_")
        return coverage(self.paths_, check_requests(requests))

    def score(self, requests, y, sample_weight=None) -> float:
        pred = self.predict(requests)
        truth = _labels(y)
        if len(truth) != len(pred):
            raise ValueError(f"{len(pred)} requests but {len(truth)} labels")
        if not truth:
            return 1.0
        hits = np.array([p is t for p, t in zip(pred, truth)], dtype=float)
        return float(np.average(hits, weights=sample_weight))


class ReferencePDP(ClassifierMixin, BaseEstimator):
    """Direct evaluator with the same interface, for side-by-side use."""

    def fit(self, policy, y=None):
        self.policy_ = check_policy(policy)
        self.classes_ = np.array(list(Decision), dtype=object)
        return self

    def predict(self, requests) -> np.ndarray:
        check_is_fitted(self, "policy_")
        return np.array([evaluate_direct(self.policy_, r) for r in check_requests(requests)],
                        dtype=object)

    def score(self, requests, y, sample_weight=None) -> float:
        return XacmetOracle.score(self, requests, y, sample_weight)
