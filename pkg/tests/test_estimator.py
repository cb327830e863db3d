from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import xacmet
from xacmet import ReferencePDP, XacmetOracle
from xacmet.model import Decision

EXPECTED = ["Deny", "Deny", "Permit", "NotApplicable"]


def test_fit_predict(library, canonical):
    oracle = XacmetOracle().fit(library)
    assert list(oracle.predict(canonical)) == [Decision(v) for v in EXPECTED]
    assert list(oracle.transform(canonical)) == [1, 1, 2, 4]
    assert oracle.score(canonical, EXPECTED) == 1.0
    assert len(oracle.paths_) == 4 and oracle.graph_.is_colored


def test_fit_from_path_and_text(canonical):
    path = xacmet.data_file("library_policy.xml")
    by_path = XacmetOracle().fit(str(path))
    by_text = XacmetOracle().fit(path.read_text())
    assert by_path.policy_ == by_text.policy_


def test_params_and_clone():
    est = XacmetOracle(granularity="element", max_paths=99)
    assert est.get_params() == {"granularity": "element", "max_paths": 99}
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(granularity="rule")
    assert est.granularity == "rule"


def test_validation(library):
    with pytest.raises(ValueError):
        XacmetOracle(granularity="coarse").fit(library)
    with pytest.raises(ValueError):
        XacmetOracle(max_paths=0).fit(library)
    with pytest.raises(TypeError):
        XacmetOracle().fit(42)
    with pytest.raises(NotFittedError):
        XacmetOracle().predict([])


def test_single_request_and_mapping(library):
    oracle = XacmetOracle().fit(library)
    pred = oracle.predict({"subject": {xacmet.model.SUBJECT_ID: "Julius"},
                           "resource": {xacmet.model.RESOURCE_ID: "journals"},
                           "action": {xacmet.model.ACTION_ID: "read"}})
    assert pred.shape == (1,) and pred[0] is Decision.PERMIT


def test_reference_matches_oracle(library):
    requests = xacmet.enumerate_requests(library)
    a = XacmetOracle().fit(library).predict(requests)
    b = ReferencePDP().fit(library).predict(requests)
    assert np.array_equal(a, b)
    assert ReferencePDP().fit(library).score(requests, a) == 1.0


def test_coverage_method(library, canonical):
    report = XacmetOracle().fit(library).coverage(canonical)
    assert report.covered_paths == 3
