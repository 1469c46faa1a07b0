"""Scenario files for cluster simulations.

A scenario is a JSON object::

    {
      "nodes": [{"name": "n1", "skew": 0}, "n2", ...],
      "fast": {"chain_id": -2, "lifetime": 60, "block_interval": 17, "fee": 1},
      "slow": {"chain_id": -1, "lifetime": 600, "block_interval": 600, "fee": 120000},
      "consensus_time": 20,
      "link_latency": 0.5,
      "duration": 1800,
      "crashes": [{"node": "n2", "at": 130, "recover_at": 700}],
      "arrivals": [{"at": 5, "client": "alice", "data": "hello"}],
      "arrival_rate": {"per_minute": 30, "clients": ["alice"], "until": 1200},
      "seed": 0
    }

``arrivals`` and ``arrival_rate`` may be combined. Hash arrivals give either
``data`` (hashed with SHA-256) or a hex ``hash``.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field

from ..config import ChainConfig
from ..errors import ScenarioError
from ..hashing import Digest, sha256


@dataclass
class NodeSpec:
    name: str
    skew: float = 0.0
    hostname: str | None = None


@dataclass
class Crash:
    node: str
    at: float
    recover_at: float | None = None


@dataclass
class Arrival:
    at: float
    client: str
    leaf: Digest


@dataclass
class Scenario:
    nodes: list[NodeSpec]
    fast: ChainConfig = field(default_factory=lambda: ChainConfig(-2, 60.0, 17.0, 1))
    slow: ChainConfig = field(default_factory=lambda: ChainConfig(-1, 600.0, 600.0, 120_000))
    consensus_time: float = 20.0
    link_latency: float = 0.5
    duration: float = 1800.0
    drain_frames: int = 3
    epoch: float = 0.0
    crashes: list[Crash] = field(default_factory=list)
    arrivals: list[Arrival] = field(default_factory=list)
    seed: int = 0
    btc_fee_usd: float = 1.5625

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.nodes:
            raise ScenarioError("a scenario needs at least one node")
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ScenarioError("node names must be unique")
        if self.slow.lifetime % self.fast.lifetime:
            raise ScenarioError("slow lifetime must be a whole number of fast lifetimes")
        ct = self.consensus_time
        if not 0 < ct < self.fast.lifetime / 2:
            raise ScenarioError("consensus_time must be below half the fast lifetime")
        if self.link_latency < 0:
            raise ScenarioError("link_latency must be non-negative")
        for n in self.nodes:
            if abs(n.skew) >= ct:
                raise ScenarioError(f"skew of {n.name} must be below consensus_time")
        spread = max(n.skew for n in self.nodes) - min(n.skew for n in self.nodes)
        if spread + self.link_latency >= ct:
            raise ScenarioError("skew spread plus link latency must stay below consensus_time")
        for c in self.crashes:
            if c.node not in names:
                raise ScenarioError(f"crash names unknown node {c.node!r}")
            if c.recover_at is not None and c.recover_at <= c.at:
                raise ScenarioError(f"node {c.node} must recover after it crashes")


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _chain(doc: dict, default: ChainConfig) -> ChainConfig:
    merged = {**default.__dict__, **doc}
    return ChainConfig(**merged)


def generate_arrivals(rate: dict, seed: int) -> list[Arrival]:
    """Poisson arrivals at ``per_minute`` hashes per minute up to ``until``."""
    rng = random.Random(seed)
    clients = list(rate.get("clients", ["client"]))
    per_second = float(rate["per_minute"]) / 60.0
    start, until = float(rate.get("start", 0.0)), float(rate["until"])
    out, t, i = [], start, 0
    while True:
        t += rng.expovariate(per_second)
        if t >= until:
            return out
        client = clients[rng.randrange(len(clients))]
        out.append(Arrival(round(t, 6), client, sha256(f"{client}:{seed}:{i}".encode())))
        i += 1


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object", 1)
    key = None
    try:
        key = "nodes"
        nodes = [NodeSpec(n) if isinstance(n, str) else NodeSpec(**n) for n in doc["nodes"]]
        kwargs = {"nodes": nodes}
        defaults = Scenario.__dataclass_fields__
        for key in ("fast", "slow"):
            if key in doc:
                kwargs[key] = _chain(doc[key], defaults[key].default_factory())
        for key in ("consensus_time", "link_latency", "duration", "epoch", "btc_fee_usd"):
            if key in doc:
                kwargs[key] = float(doc[key])
        for key in ("seed", "drain_frames"):
            if key in doc:
                kwargs[key] = int(doc[key])
        key = "crashes"
        kwargs["crashes"] = [Crash(**c) for c in doc.get("crashes", [])]
        key = "arrivals"
        arrivals = []
        for a in doc.get("arrivals", []):
            leaf = Digest.from_hex(a["hash"]) if "hash" in a else sha256(a["data"].encode("utf-8"))
            arrivals.append(Arrival(float(a["at"]), a.get("client", "client"), leaf))
        key = "arrival_rate"
        if "arrival_rate" in doc:
            arrivals += generate_arrivals(doc["arrival_rate"], kwargs.get("seed", 0))
        kwargs["arrivals"] = sorted(arrivals, key=lambda a: a.at)
        key = None
        unknown = set(doc) - set(defaults) - {"arrival_rate"}
        if unknown:
            key = sorted(unknown)[0]
            raise ScenarioError(f"unknown field {key!r}")
        return Scenario(**kwargs)
    except ScenarioError as exc:
        if exc.line is None:
            # locate the first field the message mentions, else the one being parsed
            mentioned = next((k for k in doc if re.search(r"\b%s\b" % re.escape(k), str(exc))), key)
            raise ScenarioError(str(exc), _line_of(text, mentioned) if mentioned else None) from None
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ScenarioError(f"invalid {key or 'scenario'}: {exc}", _line_of(text, key) if key else None) from None


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
