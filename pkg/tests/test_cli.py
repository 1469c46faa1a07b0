import hashlib
import json
import subprocess
import sys

import pytest

from bta.cli import bundled_scenarios, main
from bta.proof import chainpoint_root, from_json

EMPTY_SHA256 = "E3B0C44298FC1C149AFBF4C8996FB92427AE41E4649B934CA495991B7852B855"


@pytest.fixture
def stamped(tmp_path, capsys):
    files = []
    for name, data in (("a.txt", b"alpha"), ("b.txt", b"beta"), ("empty.txt", b"")):
        p = tmp_path / name
        p.write_bytes(data)
        files.append(p)
    state = tmp_path / "chains.json"
    code = main(["stamp", *map(str, files), "--chain-state", str(state), "--out-dir", str(tmp_path)])
    capsys.readouterr()
    assert code == 0
    return tmp_path, files, state


def test_stamp_writes_proofs_and_manifest(stamped):
    tmp, files, state = stamped
    manifest = json.loads((tmp / "bta-manifest.json").read_text())
    assert [len(v) for v in manifest["transactions"].values()] == [1, 1]
    assert len(manifest["files"]) == 3
    for f in files:
        proof = from_json((tmp / f"{f.name}.bta.json").read_bytes())
        assert proof.anchor.chain_id == -1
    empty = next(e for e in manifest["files"] if e["file"].endswith("empty.txt"))
    assert empty["hash"] == EMPTY_SHA256


def test_verify_exit_codes(stamped, capsys):
    tmp, files, state = stamped
    proof = str(tmp / "a.txt.bta.json")
    assert main(["verify", proof, str(files[0]), "--chain-state", str(state)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["root_matches"] and out["anchor_matches"] and out["block_timestamp"] == 1200

    digest = hashlib.sha256(b"alpha").hexdigest()
    assert main(["verify", proof, "--hash", digest, "--chain-state", str(state)]) == 0
    capsys.readouterr()

    files[0].write_bytes(b"alpha, edited")
    assert main(["verify", proof, str(files[0]), "--chain-state", str(state)]) == 1
    out = json.loads(capsys.readouterr().out)
    assert not out["root_matches"] and "root mismatch" in out["error"]

    truncated = tmp / "cut.bta.json"
    truncated.write_text((tmp / "b.txt.bta.json").read_text()[:40])
    assert main(["verify", str(truncated), str(files[1]), "--chain-state", str(state)]) == 2
    assert main(["verify", proof, "--hash", "zz", "--chain-state", str(state)]) == 2
    assert main(["verify", proof, str(files[1]), "--chain-state", str(tmp / "missing.json")]) == 2


def test_verify_unknown_transaction(stamped, tmp_path, capsys):
    tmp, files, state = stamped
    other = tmp / "other.json"
    other.write_text(json.dumps({"chains": []}))
    assert main(["verify", str(tmp / "a.txt.bta.json"), "--hash", hashlib.sha256(b"alpha").hexdigest(),
                 "--chain-state", str(other)]) == 1


def test_stamping_twice_appends_to_state(stamped, capsys):
    tmp, files, state = stamped
    extra = tmp / "c.txt"
    extra.write_bytes(b"gamma")
    assert main(["stamp", str(extra), "--chain-state", str(state), "--out-dir", str(tmp / "second")]) == 0
    capsys.readouterr()
    for proof, data in ((tmp / "second" / "c.txt.bta.json", extra), (tmp / "b.txt.bta.json", files[1])):
        assert main(["verify", str(proof), str(data), "--chain-state", str(state)]) == 0
        assert json.loads(capsys.readouterr().out)["block_timestamp"] in (1200, 2400)


def test_stamp_reports_unreadable_file(tmp_path, capsys):
    good = tmp_path / "g"
    good.write_bytes(b"x")
    code = main(["stamp", str(good), str(tmp_path / "nope"), "--chain-state", str(tmp_path / "s.json"),
                 "--out-dir", str(tmp_path)])
    assert code == 1
    manifest = json.loads((tmp_path / "bta-manifest.json").read_text())
    assert len(manifest["files"]) == 1 and len(manifest["errors"]) == 1


def test_stamp_thousand_files_one_slow_tx(tmp_path, capsys):
    paths = []
    for i in range(1000):
        p = tmp_path / f"f{i}"
        p.write_bytes(str(i).encode())
        paths.append(str(p))
    assert main(["stamp", *paths, "--chain-state", str(tmp_path / "s.json"), "--out-dir", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "120" in out.splitlines()[-2]
    manifest = json.loads((tmp_path / "out" / "bta-manifest.json").read_text())
    assert len(manifest["transactions"]["-1"]) == 1
    assert manifest["cost_per_stamp"]["aggregated"] == 120


def test_export_chainpoint(stamped, capsys):
    tmp, files, state = stamped
    digest = hashlib.sha256(b"beta").hexdigest()
    assert main(["export", str(tmp / "b.txt.bta.json"), "--format", "chainpoint", "--target-hash", digest]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["anchors"][0]["type"] == "BTCOpReturn"
    assert chainpoint_root(doc).hex() == doc["merkleRoot"]
    wrong = hashlib.sha256(b"other").hexdigest()
    assert main(["export", str(tmp / "b.txt.bta.json"), "--target-hash", wrong]) == 1
    assert "ProofMismatch" in capsys.readouterr().err
    assert main(["export", str(tmp / "b.txt.bta.json"), "--format", "xml", "--target-hash", digest]) == 2


def test_export_zero_sibling_proof(tmp_path, capsys):
    f = tmp_path / "only"
    f.write_bytes(b"solo")
    main(["stamp", str(f), "--chain-state", str(tmp_path / "s.json"), "--out-dir", str(tmp_path)])
    capsys.readouterr()
    out = tmp_path / "cp.json"
    assert main(["export", str(tmp_path / "only.bta.json"), str(f), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["proof"] == []


def test_simulate_bundled(tmp_path, capsys):
    assert set(bundled_scenarios()) >= {"five_nodes", "crash_leader", "single_node"}
    transcript = tmp_path / "t.jsonl"
    assert main(["simulate", "five_nodes", "--transcript", str(transcript)]) == 0
    five = json.loads(capsys.readouterr().out)
    assert set(five["slow_tx_per_frame"].values()) == {1}
    assert five["merged_proofs_verified"] == five["submitted"] > 0
    lines = transcript.read_text().splitlines()
    assert all(json.loads(x)["event"] for x in lines)

    assert main(["simulate", "single_node"]) == 0
    one = json.loads(capsys.readouterr().out)
    assert one["transactions"]["slow"] == five["transactions"]["slow"]

    assert main(["simulate", "crash_leader"]) == 0
    crash = json.loads(capsys.readouterr().out)
    assert any(h["attempt"] > 0 for h in crash["leader_history"])


def test_simulate_seed_override_and_errors(tmp_path, capsys):
    main(["simulate", "single_node", "--seed", "1"])
    a = json.loads(capsys.readouterr().out)
    main(["--seed", "1", "simulate", "single_node"])
    b = json.loads(capsys.readouterr().out)
    main(["simulate", "single_node"])
    c = json.loads(capsys.readouterr().out)
    assert a == b and a["submitted"] != c["submitted"]

    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "nodes": ["a"],\n  "fast": {"lifetime": 60},\n  "slow": {"lifetime": 90}\n}')
    assert main(["simulate", str(bad)]) == 2
    assert "line" in capsys.readouterr().err
    assert main(["simulate", str(tmp_path / "missing.json")]) == 2


def test_costs_table(capsys):
    assert main(["costs"]) == 0
    out = capsys.readouterr().out
    row = next(line.split() for line in out.splitlines() if line.split()[:1] == ["1,000"])
    assert row[2:4] == ["120,000", "120"]
    assert "225" in out and "1,125" in out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bta", "costs", "--stamps", "1,2"],
                          capture_output=True, text=True, check=True)
    assert "60,000" in proc.stdout
