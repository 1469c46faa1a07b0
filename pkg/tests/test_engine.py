import pytest

from bta.config import Config
from bta.engine import Engine, anchor_parallel, merge_proofs
from bta.errors import EmptyFrame, InsufficientFee
from bta.hashing import Digest
from bta.merkle import close_tree
from bta.payload import PayloadPrefix
from bta.simchain import SimChain
from bta.verifier import concat_order, prove_root, verify_anchor, verify_proof

from oracles import brute_force_tree, fold, random_digests


def leaves(n, seed):
    return [Digest(x) for x in random_digests(n, seed)]


def run_ten_minutes(per_frame, seed=0):
    """Submit per_frame[k] leaves during fast frame k; returns the engine and the frames."""
    engine = Engine(Config())
    frames = []
    for k, count in enumerate(per_frame):
        batch = leaves(count, seed * 1000 + k)
        engine.advance(60 * k + 1)
        for leaf in batch:
            engine.submit(leaf)
        frames.append(batch)
    engine.advance(600)
    return engine, frames


def test_fast_proof_at_boundary():
    engine = Engine(Config())
    receipt = engine.submit(leaves(1, 1)[0])
    assert engine.advance(59) == []
    (delivery,) = engine.advance(60)
    assert delivery.kind == "fast" and delivery.receipt == receipt
    assert engine.fast_chain.transactions and not engine.slow_chain.transactions


def test_duplicate_in_frame_returns_same_receipt():
    engine = Engine(Config())
    leaf = leaves(1, 2)[0]
    assert engine.submit(leaf) == engine.submit(leaf)
    engine.advance(60)
    # a new frame accepts it again under a new receipt
    assert engine.submit(leaf) != 1


def test_bulk_frame():
    engine = Engine(Config())
    batch = leaves(1000, 3)
    receipts = [engine.submit(x) for x in batch]
    out = engine.advance(60)
    assert sorted(d.receipt for d in out) == receipts
    root = out[0].proof.root
    assert all(verify_proof(d.leaf, d.proof) and d.proof.root == root for d in out)


def test_close_fast_frame_bookkeeping():
    engine = Engine(Config())
    for x in leaves(3, 4):
        engine.submit(x)
    root, proofs = engine.close_fast_frame(60)
    assert len(proofs) == 3 and len(engine.fast_chain.transactions) == 1
    assert engine.slow.tree.leaves == [root]
    with pytest.raises(EmptyFrame):
        engine.close_fast_frame(120)
    assert len(engine.fast_chain.transactions) == 1
    with pytest.raises(ValueError):
        engine.close_fast_frame(130)


def test_incremental_run_against_oracle():
    per_frame = [3, 0, 5, 1, 8, 2, 0, 4, 7, 6]
    engine, frames = run_ten_minutes(per_frame)
    assert len(engine.slow_chain.transactions) == 1
    assert len(engine.fast_chain.transactions) == sum(1 for c in per_frame if c)

    fast_roots = [brute_force_tree(f)[0] for f in frames if f]
    slow_root, _ = brute_force_tree(fast_roots)
    engine.advance(1200)

    by_leaf = {p.leaf: p for p in engine.pending.values()}
    assert len(by_leaf) == sum(per_frame)
    for leaf, pending in by_leaf.items():
        fast, full = pending.fast_proof, pending.merged_proof
        assert verify_proof(leaf, fast)
        assert verify_proof(leaf, full)
        assert full.root == slow_root
        assert fold(leaf, full.index, full.siblings) == slow_root
        assert full.siblings[: len(fast.siblings)] == fast.siblings
        n = len(fast.siblings)
        assert [concat_order(full.index, k) for k in range(n)] == [concat_order(fast.index, k) for k in range(n)]
        assert verify_anchor(fast, engine.fast_chain, leaf).ok
        report = verify_anchor(full, engine.slow_chain, leaf)
        assert report.ok and report.block_timestamp == 1200


def test_single_fast_frame_gives_empty_head():
    engine, frames = run_ten_minutes([4] + [0] * 9)
    for pending in engine.pending.values():
        assert pending.merged_proof.siblings == pending.fast_proof.siblings
        assert pending.merged_proof.index == pending.fast_proof.index


def test_slow_tree_leaf_count():
    engine = Engine(Config())
    for k in range(10):
        engine.advance(60 * k + 1)
        engine.submit(leaves(1, 50 + k)[0])
        engine.advance(60 * (k + 1) - 1)
    assert len(engine.slow.tree) == 9
    engine.advance(600)
    assert len(engine.slow_chain.transactions) == 1


def test_empty_slow_frame_no_transaction():
    engine = Engine(Config())
    engine.advance(1800)
    assert not engine.slow_chain.transactions and not engine.fast_chain.transactions


@pytest.mark.parametrize("fast_n,slow_n", [(1, 1), (3, 5), (16, 16), (7, 12)])
def test_merge_index_law(fast_n, slow_n):
    fast_root, fast_cores = close_tree(leaves(fast_n, fast_n))
    others = leaves(slow_n - 1, 99 + slow_n)
    slow_leaves = others[: slow_n // 2] + [fast_root] + others[slow_n // 2:]
    slow_root, slow_cores = close_tree(slow_leaves)
    head = slow_cores[fast_root]
    for leaf, tail in fast_cores.items():
        m = merge_proofs(tail, head)
        assert prove_root(leaf, m.index, m.siblings) == slow_root
        t = len(tail.siblings)
        for k in range(len(m.siblings)):
            expect = concat_order(tail.index, k) if k < t else concat_order(head.index, k - t)
            assert concat_order(m.index, k) == expect


def test_anchor_parallel():
    root, cores = close_tree(leaves(5, 7))
    chains = [SimChain(-1, 600, fee=10), SimChain(-2, 17)]
    result = anchor_parallel(root, cores, chains, PayloadPrefix.for_host("h"))
    a, b = result.proofs[-1], result.proofs[-2]
    for leaf in cores:
        assert a[leaf].to_list()[:4] == b[leaf].to_list()[:4]
        assert a[leaf].anchor != b[leaf].anchor
        assert verify_anchor(a[leaf], chains[0], leaf).ok
        assert verify_anchor(b[leaf], chains[1], leaf).ok

    engine = Engine(Config())
    cheap = {-1: 5}
    partial = engine.anchor_parallel(root, cores, [SimChain(-1, 600, fee=10), SimChain(-2, 17)], fees=cheap)
    assert isinstance(partial.errors[-1], InsufficientFee)
    assert set(partial.proofs) == {-2}
    single = anchor_parallel(root, cores, [SimChain(-2, 17)], None)
    assert list(single.proofs) == [-2]
