from __future__ import annotations

import io
import json
import shutil

import pytest

import xacmet
from xacmet.cli import run

POLICY = str(xacmet.data_file("library_policy.xml"))
REQ = {n: str(xacmet.data_file(n)) for n in xacmet.CANONICAL_REQUESTS}


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_eval_julius():
    code, out, _ = call("eval", POLICY, REQ["request_rule_b_only.xml"])
    assert code == 0 and out.splitlines()[0] == "Permit"


def test_eval_explain_json():
    code, out, _ = call("eval", POLICY, REQ["request_rule_a_only.xml"], "--explain",
                        "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["format_version"] == 1
    assert data["verdict"] == "Deny" and data["rank"] == 1 and data["constraints"]


def test_eval_xacml():
    code, out, _ = call("eval", POLICY, REQ["request_no_rule.xml"], "--format", "xacml")
    assert code == 0 and xacmet.parse_response(out).decision.value == "NotApplicable"


def test_paths_deny_first():
    code, out, _ = call("paths", POLICY, "--format", "json")
    data = json.loads(out)
    assert data["paths"][0]["rank"] == 1 and data["paths"][0]["verdict"] == "Deny"
    code, out, _ = call("paths", POLICY)
    assert out.splitlines()[1].split()[:2] == ["1", "Deny"]


def test_policyset_is_input_error(tmp_path):
    bad = tmp_path / "set.xml"
    bad.write_text('<PolicySet xmlns="urn:oasis:names:tc:xacml:2.0:policy:schema:os"/>')
    code, out, err = call("eval", str(bad), REQ["request_no_rule.xml"])
    assert code == 2 and out == ""
    assert "PolicySet" in err and len(err.strip().splitlines()) == 1


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["tree", POLICY, "--format", "xacml"],
    ["paths", POLICY, "--max-paths", "0"],
    ["eval", POLICY, "missing.xml"],
    ["diff"],
])
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == 2 and len(err.strip().splitlines()) == 1


def test_tree_and_graph_dot():
    from conftest import check_dot
    code, out, _ = call("tree", POLICY)
    assert code == 0 and "Rule_3 [Deny]" in out
    check_dot(out)
    code, out, _ = call("graph", POLICY)
    assert code == 0 and 'style="dashed"' in out
    check_dot(out)
    code, out, _ = call("graph", POLICY, "--format", "json")
    assert {"source": "Target_2", "target": "Rule_3", "condition": "1", "color": "plain"} in \
        json.loads(out)["edges"]


def test_oracle_writes_responses(tmp_path):
    for name, path in REQ.items():
        shutil.copy(path, tmp_path / name)
    code, out, _ = call("oracle", POLICY, str(tmp_path), "--format", "json")
    assert code == 0
    rows = json.loads(out)["results"]
    assert [r["verdict"] for r in rows] == ["Deny", "NotApplicable", "Deny", "Permit"]
    written = sorted(p.name for p in tmp_path.glob("*.response.xml"))
    assert written == sorted(n.replace(".xml", ".response.xml") for n in REQ)
    # a second run skips existing responses when given the directory
    code, out2, _ = call("oracle", POLICY, str(tmp_path), "--format", "json")
    assert out2 == out


def test_coverage_and_diff():
    code, out, _ = call("coverage", POLICY, *REQ.values())
    assert code == 0 and out.startswith("covered 3/4 paths with 4 request(s)")
    code, out, _ = call("diff", POLICY, "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["reports"][0]["disagreements"] == []
    code, out, _ = call("diff", "--generate", "3", "--seed", "11")
    assert code == 0 and len(out.splitlines()) == 3


def test_diff_exit_one_on_disagreement(monkeypatch):
    import xacmet.cli as cli
    real = cli.differential_check

    def rigged(policy, requests, **kw):
        return real(policy, requests, reference=lambda p, r: xacmet.Decision.PERMIT, **kw)
    monkeypatch.setattr(cli, "differential_check", rigged)
    code, out, _ = call("diff", POLICY)
    assert code == 1 and "oracle=" in out


def test_gen_requests(tmp_path):
    code, out, _ = call("gen-requests", POLICY, str(tmp_path / "a"), "--limit", "7")
    assert code == 0 and len(list((tmp_path / "a").glob("*.xml"))) == 7
    call("gen-requests", POLICY, str(tmp_path / "b"), "--sample", "5", "--seed", "1")
    call("gen-requests", POLICY, str(tmp_path / "c"), "--sample", "5", "--seed", "1")
    b = sorted((tmp_path / "b").glob("*.xml"))
    c = sorted((tmp_path / "c").glob("*.xml"))
    assert len(b) == 5 and [p.read_text() for p in b] == [p.read_text() for p in c]
    requests = [xacmet.parse_request(p.read_bytes()) for p in b]
    assert len(set(requests)) == 5
