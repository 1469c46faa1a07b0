"""Single-node anchoring engine: parallel and incremental multi-chain anchorage.

Incremental anchorage runs two trees. Leaves go into the fast tree, which is
closed every fast lifetime; its root is anchored on the fast chain and pushed
as a leaf into the slow tree. When the slow tree closes, each fast proof is
extended with the slow proof of its fast root, giving a merged proof that
verifies against the slow chain's transaction.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable

from .config import Config
from .errors import BtaError, EmptyFrame
from .hashing import Digest
from .merkle import MerkleTree, ProofCore
from .payload import PayloadPrefix, build_eth_data, build_op_return
from .proof import Anchor, BtaProof, CHAINS
from .simchain import SimChain

log = logging.getLogger(__name__)


def build_payload(chain_id: int, root: Digest, prefix: PayloadPrefix | None) -> bytes:
    """Transaction payload for a chain: an OP_RETURN script, or raw call data on Ethereum."""
    info = CHAINS.get(chain_id)
    if info is not None and info.family == "ethereum":
        return build_eth_data(root, prefix)
    return build_op_return(root, prefix)


def merge_proofs(tail: ProofCore | BtaProof, head: ProofCore | BtaProof) -> ProofCore:
    """Extend a leaf's proof to a tree in which its root is itself a leaf.

    The head's side bits sit above the tail's, hence the shifted index.
    """
    return ProofCore(
        tail.index + (head.index << len(tail.siblings)),
        tuple(tail.siblings) + tuple(head.siblings),
    )


def make_proofs(root: Digest, cores: dict[Digest, ProofCore], anchor: Anchor) -> dict[Digest, BtaProof]:
    return {leaf: BtaProof(c.index, c.siblings, root, anchor) for leaf, c in cores.items()}


@dataclass
class ParallelAnchorage:
    proofs: dict[int, dict[Digest, BtaProof]] = field(default_factory=dict)
    errors: dict[int, BtaError] = field(default_factory=dict)


def anchor_parallel(
    root: Digest,
    cores: dict[Digest, ProofCore],
    chains: Iterable[SimChain],
    prefix: PayloadPrefix | None,
    fees: dict[int, float] | None = None,
) -> ParallelAnchorage:
    """Anchor one root on every chain; proofs differ only in their anchor tuple.

    A chain that rejects the transaction is recorded in ``errors`` and the
    remaining chains are still anchored. ``fees`` overrides the fee paid per
    chain id.
    """
    chains = list(chains)
    if not chains:
        raise ValueError("need at least one chain")
    result = ParallelAnchorage()
    server = prefix.server_hex if prefix else "0000"
    for chain in chains:
        try:
            payload = build_payload(chain.chain_id, root, prefix)
            tx_id = chain.broadcast(payload, (fees or {}).get(chain.chain_id))
        except BtaError as exc:
            log.warning("chain %s rejected anchor: %s", chain.chain_id, exc)
            result.errors[chain.chain_id] = exc
            continue
        result.proofs[chain.chain_id] = make_proofs(root, cores, Anchor(chain.chain_id, server, tx_id))
    return result


@dataclass
class TreeSlot:
    chain_id: int
    lifetime: float
    frame_start: float
    tree: MerkleTree = field(default_factory=MerkleTree)

    def __post_init__(self):
        if self.frame_start % self.lifetime:
            raise ValueError("frames must start on a multiple of the lifetime")

    @property
    def frame_end(self) -> float:
        return self.frame_start + self.lifetime

    def reopen(self, frame_start: float) -> None:
        self.frame_start = frame_start
        self.tree = MerkleTree(self.tree.mixer)


@dataclass
class PendingProof:
    leaf: Digest
    fast_proof: BtaProof | None = None
    merged_proof: BtaProof | None = None


@dataclass(frozen=True)
class Delivery:
    receipt: int
    leaf: Digest
    kind: str  # "fast" or "merged"
    proof: BtaProof
    at: float


@dataclass
class FastFrame:
    """A closed fast tree waiting for its root to be merged into the slow tree."""

    root: Digest
    proofs: dict[Digest, BtaProof]
    receipts: dict[Digest, int]


class Engine:
    def __init__(self, config: Config | None = None, chains: dict[int, SimChain] | None = None,
                 start: float = 0.0):
        self.config = config or Config()
        fast, slow = self.config.fast, self.config.slow
        chains = dict(chains or {})
        for c in (fast, slow):
            chains.setdefault(c.chain_id, SimChain(c.chain_id, c.interval(), c.fee))
        self.chains = chains
        self.prefix = PayloadPrefix.for_host(self.config.hostname, self.config.bta_version)
        self.now = start
        self.fast = TreeSlot(fast.chain_id, fast.lifetime, start - start % fast.lifetime)
        self.slow = TreeSlot(slow.chain_id, slow.lifetime, start - start % slow.lifetime)
        self.pending: dict[int, PendingProof] = {}
        self.deliveries: list[Delivery] = []
        self.fast_frames: dict[Digest, list[FastFrame]] = {}
        self._frame_receipts: dict[Digest, int] = {}
        self._receipt_ids = itertools.count(1)

    @property
    def fast_chain(self) -> SimChain:
        return self.chains[self.fast.chain_id]

    @property
    def slow_chain(self) -> SimChain:
        return self.chains[self.slow.chain_id]

    def _anchor(self, chain: SimChain, tx_id: str) -> Anchor:
        return Anchor(chain.chain_id, self.prefix.server_hex, tx_id)

    def submit(self, leaf: Digest) -> int:
        """Queue a leaf in the current fast tree; a repeat within the frame returns the same receipt."""
        leaf = Digest(leaf)
        receipt = self._frame_receipts.get(leaf)
        if receipt is not None:
            return receipt
        receipt = next(self._receipt_ids)
        self.fast.tree.push(leaf)
        self._frame_receipts[leaf] = receipt
        self.pending[receipt] = PendingProof(leaf)
        return receipt

    def advance(self, now: float) -> list[Delivery]:
        """Run every frame boundary up to ``now``; returns the proofs delivered."""
        start = len(self.deliveries)
        while self.fast.frame_end <= now:
            boundary = self.fast.frame_end
            self._tick(boundary)
            try:
                self.close_fast_frame(boundary)
            except EmptyFrame:
                log.debug("fast frame ending %s is empty", boundary)
            if boundary == self.slow.frame_end:
                try:
                    self.close_slow_frame(boundary)
                except EmptyFrame:
                    log.debug("slow frame ending %s is empty", boundary)
        self._tick(now)
        return self.deliveries[start:]

    def _tick(self, now: float) -> None:
        self.now = max(self.now, now)
        for chain in self.chains.values():
            if now >= chain.now:
                chain.tick(now)

    def close_fast_frame(self, now: float) -> tuple[Digest, dict[Digest, BtaProof]]:
        if now != self.fast.frame_end:
            raise ValueError(f"{now} is not the end of the current fast frame")
        tree, receipts = self.fast.tree, self._frame_receipts
        self.fast.reopen(now)
        self._frame_receipts = {}
        if not len(tree):
            raise EmptyFrame(f"fast frame ending {now} has no leaves")
        root, cores = tree.close()
        chain = self.fast_chain
        tx_id = chain.broadcast(build_payload(chain.chain_id, root, self.prefix))
        proofs = make_proofs(root, cores, self._anchor(chain, tx_id))
        for leaf, proof in proofs.items():
            self._deliver(receipts[leaf], "fast", proof, now)
        self.fast_frames.setdefault(root, []).append(FastFrame(root, proofs, receipts))
        self.slow.tree.push(root)
        return root, proofs

    def close_slow_frame(self, now: float) -> dict[int, BtaProof]:
        if now != self.slow.frame_end:
            raise ValueError(f"{now} is not the end of the current slow frame")
        tree, frames = self.slow.tree, self.fast_frames
        self.slow.reopen(now)
        self.fast_frames = {}
        if not len(tree):
            raise EmptyFrame(f"slow frame ending {now} has no leaves")
        root, heads = tree.close()
        chain = self.slow_chain
        anchor = self._anchor(chain, chain.broadcast(build_payload(chain.chain_id, root, self.prefix)))
        merged = {}
        # keyed on the fast root explicitly rather than searched by hash
        for fast_root, head in heads.items():
            for frame in frames[fast_root]:
                for leaf, tail in frame.proofs.items():
                    core = merge_proofs(tail, head)
                    proof = BtaProof(core.index, core.siblings, root, anchor)
                    receipt = frame.receipts[leaf]
                    self._deliver(receipt, "merged", proof, now)
                    merged[receipt] = proof
        return merged

    def _deliver(self, receipt: int, kind: str, proof: BtaProof, now: float) -> None:
        pending = self.pending[receipt]
        if kind == "fast":
            pending.fast_proof = proof
        else:
            pending.merged_proof = proof
        self.deliveries.append(Delivery(receipt, pending.leaf, kind, proof, now))

    def anchor_parallel(self, root: Digest, cores: dict[Digest, ProofCore],
                        chains: Iterable[SimChain] | None = None,
                        fees: dict[int, float] | None = None) -> ParallelAnchorage:
        return anchor_parallel(root, cores, chains or self.chains.values(), self.prefix, fees)
