"""Deterministic in-memory blockchains.

Blocks are produced at exact multiples of ``block_interval`` on the
simulation clock; the optional jitter mode offsets each block by a seeded
uniform draw of up to 20% of the interval. Each block drains the whole
mempool in FIFO order.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .errors import ClockWentBackwards, InsufficientFee, UnknownTransaction
from .hashing import sha256
from .proof import chain_info, is_known_chain, TEST_CHAIN_ID


@dataclass
class SimTransaction:
    tx_id: str  # lowercase hex
    payload: bytes
    fee_paid: float
    submitted_at: float
    block_height: int | None = None


@dataclass
class SimBlock:
    height: int
    timestamp: float
    tx_ids: list[str] = field(default_factory=list)


class SimChain:
    def __init__(
        self,
        chain_id: int,
        block_interval: float | None = None,
        fee: float = 1,
        jitter_seed: int | None = None,
    ):
        if not is_known_chain(chain_id):
            raise ValueError(f"unknown chain id {chain_id}")
        if block_interval is None:
            if chain_id == TEST_CHAIN_ID:
                raise ValueError("the protocol-test chain needs an explicit block interval")
            block_interval = chain_info(chain_id).block_interval
        if block_interval <= 0 or fee <= 0:
            raise ValueError("block interval and fee must be positive")
        self.chain_id = chain_id
        self.block_interval = block_interval
        self.fee = fee
        self.mempool: list[SimTransaction] = []
        self.blocks: list[SimBlock] = []
        self.transactions: dict[str, SimTransaction] = {}
        self.now = 0.0
        self._counter = 0
        self._rng = random.Random(jitter_seed) if jitter_seed is not None else None
        self._next_time = self._schedule(1)

    @property
    def name(self) -> str:
        return chain_info(self.chain_id).name if self.chain_id != TEST_CHAIN_ID else "test chain"

    def _schedule(self, height: int) -> float:
        base = height * self.block_interval
        if self._rng is None:
            return base
        offset = self._rng.uniform(-0.2, 0.2) * self.block_interval
        # never schedule before the previous block
        previous = self.blocks[-1].timestamp if self.blocks else 0.0
        return max(base + offset, previous)

    def broadcast(self, payload: bytes, fee: float | None = None) -> str:
        if not payload:
            raise ValueError("payload must be non-empty")
        fee = self.fee if fee is None else fee
        if fee < self.fee:
            raise InsufficientFee(f"fee {fee} below chain minimum {self.fee}")
        self._counter += 1
        tx_id = sha256(payload + self._counter.to_bytes(8, "big")).hex().lower()
        tx = SimTransaction(tx_id, bytes(payload), fee, self.now)
        self.mempool.append(tx)
        self.transactions[tx_id] = tx
        return tx_id

    def tick(self, now: float) -> list[SimBlock]:
        """Produce every block due at or before ``now``."""
        if now < self.now:
            raise ClockWentBackwards(f"chain clock at {self.now}, asked for {now}")
        self.now = now
        produced = []
        while self._next_time <= now:
            block = SimBlock(len(self.blocks) + 1, self._next_time)
            for tx in self.mempool:
                tx.block_height = block.height
                block.tx_ids.append(tx.tx_id)
            self.mempool = []
            self.blocks.append(block)
            produced.append(block)
            self._next_time = self._schedule(block.height + 1)
        return produced

    def lookup(self, tx_id: str) -> tuple[bytes, float | None]:
        tx = self.transactions.get(tx_id.lower())
        if tx is None:
            raise UnknownTransaction(f"no transaction {tx_id} on chain {self.chain_id}")
        if tx.block_height is None:
            return tx.payload, None
        return tx.payload, self.blocks[tx.block_height - 1].timestamp

    def to_dict(self) -> dict:
        return {
            "chain_id": self.chain_id,
            "block_interval": self.block_interval,
            "fee": self.fee,
            "now": self.now,
            "counter": self._counter,
            "blocks": [
                {"height": b.height, "timestamp": b.timestamp, "tx_ids": list(b.tx_ids)}
                for b in self.blocks
            ],
            "transactions": [
                {
                    "tx_id": tx.tx_id,
                    "payload": tx.payload.hex(),
                    "fee_paid": tx.fee_paid,
                    "submitted_at": tx.submitted_at,
                    "block_height": tx.block_height,
                }
                for tx in self.transactions.values()
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimChain":
        chain = cls(doc["chain_id"], doc["block_interval"], doc["fee"])
        chain.now = doc["now"]
        chain._counter = doc["counter"]
        chain.blocks = [SimBlock(b["height"], b["timestamp"], list(b["tx_ids"])) for b in doc["blocks"]]
        for t in doc["transactions"]:
            tx = SimTransaction(
                t["tx_id"], bytes.fromhex(t["payload"]), t["fee_paid"], t["submitted_at"], t["block_height"]
            )
            chain.transactions[tx.tx_id] = tx
            if tx.block_height is None:
                chain.mempool.append(tx)
        chain._next_time = chain._schedule(len(chain.blocks) + 1)
        return chain


def dump_chains(chains, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"chains": [c.to_dict() for c in chains]}, fh, indent=1)


def load_chains(path) -> dict[int, SimChain]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return {c["chain_id"]: SimChain.from_dict(c) for c in doc["chains"]}
