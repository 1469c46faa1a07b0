import json
import random

import pytest

from bta.errors import InvalidDigest, MalformedProof, ProofMismatch, UnsupportedAnchorType, UnsupportedVersion
from bta.hashing import Digest, sha256
from bta.proof import (
    CHAINS,
    Anchor,
    BtaProof,
    chainpoint_root,
    from_json,
    to_chainpoint,
    to_json,
)
from bta.verifier import prove_root

TARGET = Digest.from_hex("9D0F5692F0A7CCDBE5554732094CFB52589F5D8AD762BB54B77A1978462F01C2")
# The published sample elides the middle of each value; zeros fill the gap.
S1 = Digest.from_hex("EFA4BA8F7A66BC3B" + "0" * 32 + "D3C358038F5A9C27")
S2 = Digest.from_hex("7DDE76C5E472C9AE" + "0" * 32 + "B7B9567DCB3E9551")
TX = "84ba00d2cebbb4ee" + "0" * 32 + "fbb06a053e4fba10"


def sample_proof() -> BtaProof:
    root = prove_root(TARGET, 2, [S1, S2])
    return BtaProof(2, (S1, S2), root, Anchor(1, "9B73", TX))


def random_proof(rng: random.Random) -> BtaProof:
    k = rng.randrange(0, 8)
    siblings = tuple(Digest(rng.randbytes(32)) for _ in range(k))
    index = rng.randrange(1 << k) if k else 0
    chain = rng.choice([0, *CHAINS])
    tx = rng.randbytes(32).hex()
    tx = tx.upper() if rng.random() < 0.5 else tx
    return BtaProof(index, siblings, Digest(rng.randbytes(32)), Anchor(chain, rng.randbytes(2).hex(), tx))


def test_to_json_layout():
    p = sample_proof()
    doc = json.loads(to_json(p))
    assert doc == [6, 2, [S1.hex(), S2.hex()], p.root.hex(), [1, "9B73", TX]]
    assert doc[3] == doc[3].upper()


def test_zero_siblings():
    p = BtaProof(0, (), TARGET, Anchor(1, "9B73", TX))
    assert json.loads(to_json(p))[2] == []
    for empty in ([], "", None):
        doc = [6, 0, empty, TARGET.hex(), [1, "9B73", TX]]
        assert from_json(json.dumps(doc)).siblings == ()


def test_round_trip():
    rng = random.Random(42)
    for _ in range(1000):
        p = random_proof(rng)
        assert from_json(to_json(p)) == p


def test_from_json_normalizes_case():
    doc = [6, 2, [S1.hex().lower(), S2.hex()], TARGET.hex().lower(), [1, "9b73", TX]]
    p = from_json(json.dumps(doc))
    assert p.siblings == (S1, S2) and p.root == TARGET and p.anchor.prefix == "9B73"


def test_from_json_errors():
    good = json.loads(to_json(sample_proof()))
    with pytest.raises(UnsupportedVersion):
        from_json(json.dumps([5] + good[1:]))
    with pytest.raises(MalformedProof):
        from_json(json.dumps(good[:4]))
    with pytest.raises(MalformedProof):
        from_json(b'[6, 2, ["AB"')
    with pytest.raises(InvalidDigest):
        from_json(json.dumps(good[:3] + ["XYZ" * 21 + "X"] + good[4:]))
    with pytest.raises(InvalidDigest):
        from_json(json.dumps([6, 0, ["AB"], good[3], good[4]]))
    with pytest.raises(MalformedProof):
        from_json(json.dumps([6, -1] + good[2:]))
    with pytest.raises(MalformedProof):
        from_json(json.dumps([6, 4] + good[2:]))  # 2 siblings hold at most index 3
    with pytest.raises(MalformedProof):
        from_json(json.dumps(good[:4] + [[1, "9B73"]]))


def test_chainpoint_export_sample():
    p = sample_proof()
    doc = json.loads(to_chainpoint(p, TARGET))
    assert doc["@context"] == "https://w3id.org/chainpoint/v2"
    assert doc["type"] == "ChainpointSHA256v2"
    assert doc["targetHash"] == TARGET.hex()
    assert doc["anchors"] == [{"type": "BTCOpReturn", "sourceId": TX}]
    # index 2 = bits (0, 1): first sibling on the right, second on the left
    assert doc["proof"] == [{"right": S1.hex()}, {"left": S2.hex()}]
    assert chainpoint_root(doc) == p.root


def test_chainpoint_errors_and_types():
    p = sample_proof()
    with pytest.raises(ProofMismatch):
        to_chainpoint(p, sha256(b"not it"))
    eth = p.with_anchor(Anchor(-2, "9B73", TX))
    assert json.loads(to_chainpoint(eth, TARGET))["anchors"][0]["type"] == "ETHData"
    with pytest.raises(UnsupportedAnchorType):
        to_chainpoint(p.with_anchor(Anchor(4, "9B73", TX)), TARGET)
    empty = BtaProof(0, (), TARGET, Anchor(1, "9B73", TX))
    assert json.loads(to_chainpoint(empty, TARGET))["proof"] == []


def test_registry_mirrors_testnets():
    assert {k for k in CHAINS if k > 0} == {1, 2, 3, 4}
    for cid, info in CHAINS.items():
        twin = CHAINS[-cid]
        assert twin.family == info.family
        assert twin.is_testnet != info.is_testnet
        assert info.is_testnet == (cid < 0)
    assert CHAINS[-1].name == "Bitcoin testnet"
    assert 0 not in CHAINS
