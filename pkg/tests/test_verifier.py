import random

import pytest

from bta.errors import ChainMismatch, IndexOutOfRange, UnknownTransaction
from bta.hashing import Digest, mixer, sha256
from bta.merkle import close_tree
from bta.payload import PayloadPrefix, build_op_return
from bta.proof import Anchor, BtaProof
from bta.simchain import SimChain
from bta.verifier import concat_order, prove_root, verify_anchor, verify_proof

from oracles import brute_force_tree, random_digests


def test_concat_order():
    assert [concat_order(0, n) for n in range(5)] == [0] * 5
    assert (concat_order(2, 0), concat_order(2, 1)) == (0, 1)
    assert [concat_order(5, n) for n in range(3)] == [1, 0, 1]


def test_prove_root_two_levels():
    a, b, c, d = (sha256(x) for x in (b"a", b"b", b"c", b"d"))
    abcd = mixer(mixer(a, b), mixer(c, d))
    assert prove_root(a, 0, [b, mixer(c, d)]) == abcd
    assert prove_root(a, 0, []) == a
    with pytest.raises(IndexOutOfRange):
        prove_root(a, 4, [b, c])


def test_order_matches_ancestor_parity():
    leaves = random_digests(16, seed=9)
    _, proofs = brute_force_tree(leaves)
    for pos in range(16):
        for n in range(4):
            assert concat_order(pos, n) == (pos >> n) & 1
        assert proofs[pos][0] == pos


def _anchored(n, seed, prefix=True):
    leaves = [Digest(x) for x in random_digests(n, seed)]
    root, cores = close_tree(leaves)
    chain = SimChain(-1, 600)
    pfx = PayloadPrefix.for_host("node-a") if prefix else None
    tx = chain.broadcast(build_op_return(root, pfx))
    anchor = Anchor(-1, pfx.server_hex if pfx else "0000", tx)
    proofs = {leaf: BtaProof(c.index, c.siblings, root, anchor) for leaf, c in cores.items()}
    return chain, proofs


def test_completeness_over_random_trees():
    rng = random.Random(1)
    total = 0
    while total < 1000:
        n = rng.randrange(1, 80)
        chain, proofs = _anchored(n, seed=total)
        chain.tick(600)
        for leaf, proof in proofs.items():
            assert verify_proof(leaf, proof)
            report = verify_anchor(proof, chain, leaf)
            assert report.ok and report.block_timestamp == 600
        total += n


def test_anchor_found_at_payload_tail():
    chain, proofs = _anchored(5, seed=2)
    leaf, proof = next(iter(proofs.items()))
    payload, _ = chain.lookup(proof.anchor.tx_id)
    assert payload.endswith(bytes(proof.root))
    report = verify_anchor(proof, chain, leaf)
    assert report.root_matches and report.anchor_matches and report.block_timestamp is None


def test_tampering_detected():
    chain, proofs = _anchored(6, seed=3)
    leaf, proof = next(iter(proofs.items()))
    flipped = bytearray(proof.siblings[0])
    flipped[0] ^= 1
    bad = BtaProof(proof.index, (Digest(bytes(flipped)),) + proof.siblings[1:], proof.root, proof.anchor)
    assert not verify_proof(leaf, bad)
    assert not verify_proof(sha256(b"other"), proof)
    fake_root = BtaProof(proof.index, proof.siblings, sha256(b"fake"), proof.anchor)
    report = verify_anchor(fake_root, chain, leaf)
    assert not report.root_matches and not report.anchor_matches
    assert not verify_anchor(fake_root, chain).anchor_matches


def test_anchor_errors():
    chain, proofs = _anchored(2, seed=4)
    proof = next(iter(proofs.values()))
    with pytest.raises(ChainMismatch):
        verify_anchor(proof, SimChain(-2, 17))
    missing = proof.with_anchor(Anchor(-1, "0000", "ab" * 32))
    with pytest.raises(UnknownTransaction):
        verify_anchor(missing, chain)


def _flip(data: bytes, bit: int) -> Digest:
    b = bytearray(data)
    b[bit // 8] ^= 1 << (bit % 8)
    return Digest(bytes(b))


def test_soundness_exhaustive_three_siblings():
    leaves = [Digest(x) for x in random_digests(8, seed=12)]
    root, cores = close_tree(leaves)
    leaf = leaves[5]
    core = cores[leaf]
    assert len(core.siblings) == 3
    anchor = Anchor(-1, "0000", "00" * 32)
    assert verify_proof(leaf, BtaProof(core.index, core.siblings, root, anchor))
    for bit in range(256):
        assert not verify_proof(_flip(leaf, bit), BtaProof(core.index, core.siblings, root, anchor))
        assert not verify_proof(leaf, BtaProof(core.index, core.siblings, _flip(root, bit), anchor))
        for k in range(3):
            sibs = list(core.siblings)
            sibs[k] = _flip(sibs[k], bit)
            assert not verify_proof(leaf, BtaProof(core.index, tuple(sibs), root, anchor))
    for bit in range(3):
        assert not verify_proof(leaf, BtaProof(core.index ^ (1 << bit), core.siblings, root, anchor))
