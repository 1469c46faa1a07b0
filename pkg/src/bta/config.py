"""Engine and cluster configuration, loadable from JSON."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .proof import BTA_VERSION, chain_info


@dataclass
class ChainConfig:
    chain_id: int
    lifetime: float  # tree lifetime, seconds
    block_interval: float | None = None  # defaults to the registry value
    fee: float = 1

    def interval(self) -> float:
        if self.block_interval is not None:
            return self.block_interval
        return chain_info(self.chain_id).block_interval


def _default_fast() -> ChainConfig:
    return ChainConfig(chain_id=-2, lifetime=60.0, block_interval=17.0, fee=1)


def _default_slow() -> ChainConfig:
    return ChainConfig(chain_id=-1, lifetime=600.0, block_interval=600.0, fee=120_000)


@dataclass
class Config:
    hostname: str = "localhost"
    fast: ChainConfig = field(default_factory=_default_fast)
    slow: ChainConfig = field(default_factory=_default_slow)
    consensus_time: float = 20.0
    bta_version: int = BTA_VERSION

    def __post_init__(self):
        if isinstance(self.fast, dict):
            self.fast = ChainConfig(**self.fast)
        if isinstance(self.slow, dict):
            self.slow = ChainConfig(**self.slow)
        self.validate()

    def validate(self) -> None:
        if self.bta_version != BTA_VERSION:
            raise ValueError(f"only BTA version {BTA_VERSION} is supported")
        for c in (self.fast, self.slow):
            if c.lifetime <= 0 or c.fee <= 0:
                raise ValueError("lifetimes and fees must be positive")
        if self.slow.lifetime % self.fast.lifetime:
            raise ValueError("slow lifetime must be a whole number of fast lifetimes")
        if not 0 < self.consensus_time < self.fast.lifetime / 2:
            raise ValueError("consensus time must be below half the fast tree lifetime")

    @classmethod
    def load(cls, path) -> "Config":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)
