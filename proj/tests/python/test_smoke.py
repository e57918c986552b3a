import json
import os
import pathlib
import subprocess

import jsonschema
import pytest
import referencing
import requests

import stripsviz

ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = ROOT / "tests" / "data"
SCHEMAS = ROOT / "schemas"


def _registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        schema = json.loads(path.read_text())
        resources.append((schema["$id"], referencing.Resource.from_contents(schema)))
    return referencing.Registry().with_resources(resources)


REGISTRY = _registry()


def check(name, payload):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(payload)


@pytest.fixture(scope="module")
def tiny():
    return (DATA / "logistics-domain.pddl").read_text(), (DATA / "logistics-tiny.pddl").read_text()


def test_every_schema_is_valid():
    for path in SCHEMAS.glob("*.schema.json"):
        jsonschema.Draft202012Validator.check_schema(json.loads(path.read_text()))


def test_module_outputs_match_schemas(tiny):
    d, p = tiny
    g = stripsviz.ground(d, p)
    check("grounded-domain", g["domain"])
    check("problem", g["problem"])
    check("graph", stripsviz.graph(d, p))
    check("metrics", stripsviz.metrics(d, p))
    check("embedding", stripsviz.embed(d, p, seed=1, config={"iterations": 20}))
    r = stripsviz.plan(d, p)
    check("plan", r["plan"])
    check("trace", r["trace"])
    assert r["plan"]["cost"] == 3
    check("validation", stripsviz.validate(d, p, r["ipc"]))


def test_embedding_is_reproducible(tiny):
    d, p = tiny
    a = stripsviz.embed(d, p, seed=3, config={"iterations": 50, "dimension": 3})
    b = stripsviz.embed(d, p, seed=3, config={"iterations": 50, "dimension": 3})
    assert a == b
    assert len(a["nodes"][0]["xy"]) == 3


def test_errors_carry_codes(tiny):
    d, p = tiny
    with pytest.raises(stripsviz.StripsVizError) as exc:
        stripsviz.plan(d, p, goal="at_p0_nowhere")
    assert exc.value.code == "unknown_goal"
    check("error", exc.value.payload)
    with pytest.raises(stripsviz.StripsVizError) as exc:
        stripsviz.ground("(define (domain d)\n  (:predicates (p)", p)
    assert exc.value.payload["error"]["line"] == 2


def test_generators_round_trip():
    gi = stripsviz.generate_logistics(seed=2, cities=3, packages=2)
    m = stripsviz.metrics(gi["domain"], gi["problem"])
    assert len(m["components"]) == 1
    broken = stripsviz.generate_logistics(seed=2, cities=4, missing_airport_city=3)
    assert len(stripsviz.metrics(broken["domain"], broken["problem"])["components"]) >= 2
    bm = stripsviz.generate_barman(cocktails=2, shots=3)
    with pytest.raises(stripsviz.StripsVizError) as exc:
        stripsviz.plan(bm["domain"], bm["problem"], budget=10)
    assert exc.value.code == "budget_exceeded"


def test_server_endpoints_match_schemas(tiny, tmp_path):
    d, p = tiny
    with stripsviz.Server(embed={"iterations": 60}, frame_stride=20, snapshot_dir=str(tmp_path)) as srv:
        base = srv.url
        check("health", requests.get(base + "/health").json())
        info = requests.post(base + "/sessions", json={"domain": d, "problem": p})
        assert info.status_code == 201
        check("session", info.json())
        sid = info.json()["id"]
        check("session-list", requests.get(base + "/sessions").json())

        pending = requests.get(f"{base}/sessions/{sid}/embedding")
        check("pending" if pending.status_code == 202 else "embedding", pending.json())

        stream = requests.get(f"{base}/sessions/{sid}/embedding/frames").text
        frames = [json.loads(chunk[len("data: "):]) for chunk in stream.split("\n") if chunk.startswith("data: ")]
        for f in frames:
            check("embedding-frame", f)
        assert [f["iteration"] for f in frames] == [0, 20, 40, 60]
        assert frames[-1]["final"] is True

        check("embedding", requests.get(f"{base}/sessions/{sid}/embedding?wait=true").json())
        check("graph", requests.get(f"{base}/sessions/{sid}/graph").json())
        check("metrics", requests.get(f"{base}/sessions/{sid}/metrics").json())
        check("grounded-domain", requests.get(f"{base}/sessions/{sid}/domain").json())

        initial = requests.get(f"{base}/sessions/{sid}/state").text
        check("state", json.loads(initial))
        resp = requests.post(f"{base}/sessions/{sid}/plan", json={"goal": "at_p0_l2"}).json()
        check("plan-response", resp)
        assert len(resp["overlay"]["segments"]) == 8

        ref = requests.post(f"{base}/sessions/{sid}/snapshot").json()
        check("snapshot-ref", ref)
        check("snapshot", json.loads(pathlib.Path(ref["path"]).read_text()))

        assert requests.post(f"{base}/sessions/{sid}/restart").text == initial
        assert requests.get(f"{base}/sessions/{sid}/state").text == initial

        bad = requests.post(f"{base}/sessions/{sid}/plan", json={"goal": ["at_p0_l1", "at_p0_l2"]})
        assert bad.status_code == 422
        check("error", bad.json())
        missing = requests.get(base + "/sessions/none")
        assert missing.status_code == 404
        check("error", missing.json())


@pytest.mark.skipif(not os.environ.get("STRIPSVIZ_CLI"), reason="CLI path not given")
def test_cli_outputs_match_schemas(tmp_path):
    cli = os.environ["STRIPSVIZ_CLI"]
    dom, prob = str(DATA / "logistics-domain.pddl"), str(DATA / "logistics-tiny.pddl")

    def run(*args):
        out = subprocess.run([cli, *args], capture_output=True, text=True)
        return out.returncode, out.stdout, out.stderr

    code, out, _ = run("gen", "barman", "--out-dir", str(tmp_path))
    assert code == 0
    check("generated", json.loads(out))
    code, out, _ = run("trajectory", dom, prob, str(DATA / "logistics-tiny.plan"), "--family", "(at|in)_p0_.*")
    check("trajectory", json.loads(out))
    assert len(json.loads(out)["points"]) == 3
    code, out, _ = run("validate", dom, prob, str(DATA / "logistics-tiny.plan"))
    check("validation", json.loads(out))
    code, _, err = run("plan", dom, prob, "--goal", "nowhere")
    assert code != 0
    check("error", json.loads(err))
