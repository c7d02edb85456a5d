import io
import json

import pytest

from nbcover.cli import run
from nbcover.graph import bouquet, cycle_graph, identity_bgraph, theta_graph


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    text = out.getvalue()
    return code, json.loads(text) if text else None, text


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, obj in [("c3", cycle_graph(3)), ("bouquet2", bouquet(2)), ("theta", theta_graph((1, 2, 3))),
                      ("eightB", identity_bgraph(bouquet(2)))]:
        p = tmp_path / f"{name}.json"
        p.write_text(obj.to_json())
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def test_documented_examples(files):
    assert call("trace", "--graph", files["c3"], "--k", "3")[1] == {"trace": 6}
    assert call("c0", "--base", files["bouquet2"], "--k", "4")[1] == {"c0": 100}
    code, out, _ = call("certificates", "--type", files["bouquet2"], "--nu", "1.5", "--strict", "--cap", "12")
    assert code == 0 and out["verified"] and len(out["minima"]) == 5


def test_exit_codes(files):
    code, out, _ = call("trace", "--graph", str(files["dir"] / "missing.json"), "--k", "2")
    assert code == 2 and out["error"]["code"] == "invalid_input"
    bad = files["dir"] / "bad.json"
    bad.write_text(json.dumps({"vertices": ["a"], "dedges": [{"id": "x", "tail": "a", "head": "b", "inv": "x"}]}))
    code, out, _ = call("mu1", "--graph", str(bad))
    assert code == 2 and out["error"]["code"] == "dangling_reference"
    code, out, _ = call("certificates", "--type", files["bouquet2"], "--nu", "1.5", "--cap", "3", "--strict-cap")
    assert code == 3 and out["error"]["code"] == "cap_unverified"
    code, out, _ = call("sample-cover", "--base", files["bouquet2"], "--n", "3", "--kind", "cyclic-involution-even",
                        "--seed", "1")
    assert code == 2 and out["error"]["code"] == "parity_mismatch"
    assert call("nonsense")[0] == 2


def test_seed_is_mandatory(files):
    assert call("sample-cover", "--base", files["bouquet2"], "--n", "3")[0] == 2
    assert call("estimate", "--base", files["bouquet2"], "--n", "4")[0] == 2


def test_byte_identical_output(files):
    args = ("sample-cover", "--base", files["bouquet2"], "--n", "5", "--seed", "7")
    assert call(*args)[2] == call(*args)[2]


def test_estimate_then_fit_matches_combined(files):
    base = ("estimate", "--base", files["bouquet2"], "--k", "1,2", "--n", "4,8,16", "--samples", "100",
            "--seed", "3")
    code, _, text = call(*base)
    assert code == 0
    rep = files["dir"] / "rep.json"
    rep.write_text(text)
    fitted = call("fit", "--report", str(rep), "--r", "2")[2]
    combined = call(*base, "--fit", "2")[2]
    assert fitted == combined


def test_round_trips_between_commands(files):
    d = files["dir"]
    code, spec, text = call("tangles", "--nu", "3", "--r", "2")
    (d / "spec.json").write_text(text)
    assert call("has-tangle", "--graph", files["bouquet2"], "--spec", str(d / "spec.json"))[1]["has_tangle"]

    text = call("sample-cover", "--base", files["bouquet2"], "--n", "2", "--seed", "1", "--realize")[2]
    (d / "cover.json").write_text(text)
    (d / "gens.json").write_text("[" + identity_bgraph(bouquet(2)).to_json() + "]")
    code, out, _ = call("indicator", "--graph", str(d / "cover.json"), "--generators", str(d / "gens.json"),
                        "--r", "2")
    assert code == 0 and out["indicator"] == [1 if out["meets"] else 0, 1]

    text = call("suppress", "--graph", files["theta"])[2]
    (d / "type.json").write_text(text)
    lengths = ",".join(str(x) for x in json.loads(text)["lengths"].values())
    code, vlg, _ = call("vlg", "--type", str(d / "type.json"), "--lengths", lengths)
    assert code == 0 and len(vlg["dedges"]) == 12

    text = call("certificates", "--type", files["bouquet2"], "--nu", "2.5")[2]
    (d / "cert.json").write_text(text)
    assert call("certificates", "--type", str(d / "cert.json"), "--nu", "2.5")[2] == text

    code, table, _ = call("mobius", "--generators", str(d / "gens.json"), "--r", "3")
    assert code == 0 and len(table["classes"]) == 4


def test_other_commands(files):
    assert call("snbc", "--graph", files["bouquet2"], "--k", "2", "--r", "1")[1] == {
        "snbc": 12, "below": 4, "at_or_above": 8}
    assert call("mu1", "--graph", files["bouquet2"], "--nu", "3")[1]["compare"] == 0
    assert call("cert-trace", "--graph", files["c3"], "--nu", "2", "--r", "1", "--k", "3",
                "--method", "incl-excl")[1] == {"cert_trace": 6}
    code, out, _ = call("subgraph-prob", "--base", files["bouquet2"], "--subgraph", files["eightB"], "--n", "1",
                        "--samples", "3", "--seed", "0")
    assert out == {"prob": [{"n": 1, "p": 1.0, "se": 0.0}]}
