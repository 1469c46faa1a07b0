"""Proof verification: the index-driven fold and the anchor payload check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ChainMismatch, IndexOutOfRange
from .hashing import Digest, mixer
from .proof import BtaProof


def concat_order(index: int, position: int) -> int:
    """1 when sibling ``position`` goes on the left of the running hash, else 0."""
    if position < 0:
        raise ValueError("position must be non-negative")
    return (index // 2**position) % 2


def prove_root(leaf: Digest, index: int, siblings: Sequence[Digest]) -> Digest:
    if index < 0 or (index >= 2 ** len(siblings) and index != 0):
        raise IndexOutOfRange(f"index {index} does not fit {len(siblings)} siblings")
    value = Digest(leaf)
    for n, sibling in enumerate(siblings):
        if concat_order(index, n) == 1:
            value = mixer(sibling, value)
        else:
            value = mixer(value, sibling)
    return value


def verify_proof(leaf: Digest, proof: BtaProof) -> bool:
    try:
        return prove_root(leaf, proof.index, proof.siblings) == proof.root
    except IndexOutOfRange:
        return False


@dataclass(frozen=True)
class VerificationReport:
    root_matches: bool
    anchor_matches: bool
    block_timestamp: float | None
    candidate_root: Digest

    @property
    def ok(self) -> bool:
        return self.root_matches and self.anchor_matches


def verify_anchor(proof: BtaProof, chain, leaf: Digest | None = None) -> VerificationReport:
    """Check the anchoring transaction carries the root.

    With ``leaf`` given, the candidate root is recomputed from it and must
    equal the proof's root; without it only the anchor is checked. The
    anchor matches when both the candidate and the stated root occur in the
    payload as raw bytes.
    """
    if proof.anchor.chain_id != chain.chain_id:
        raise ChainMismatch(
            f"proof anchored on chain {proof.anchor.chain_id}, got chain {chain.chain_id}"
        )
    payload, timestamp = chain.lookup(proof.anchor.tx_id)
    if leaf is None:
        candidate, root_ok = proof.root, True
    else:
        try:
            candidate = prove_root(leaf, proof.index, proof.siblings)
        except IndexOutOfRange:
            candidate = Digest(leaf)
        root_ok = candidate == proof.root
    return VerificationReport(
        root_matches=root_ok,
        anchor_matches=bytes(candidate) in payload and bytes(proof.root) in payload,
        block_timestamp=timestamp,
        candidate_root=candidate,
    )
