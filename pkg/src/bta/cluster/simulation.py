"""Discrete-event simulation of a distributed anchoring cluster.

Nodes share two broker queues. ``eth`` spreads incoming hashes over the
nodes' fast trees. ``btc`` spreads the fast roots over the nodes' slow
trees. At every slow boundary each node closes its slow tree and sends the
root to the frame's elected leader. The leader puts the collected roots
under one final tree and anchors it with a single slow-chain transaction;
each contributor gets back its head of the final tree. If the leader stays
silent for twice the consensus time, the next node in the election order
takes over.

Each node's boundaries follow its own skewed clock. Everything runs on one
event heap ordered by (time, kind priority, insertion order), so a run is a
pure function of its scenario.
"""

from __future__ import annotations

import heapq
import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Any

from ..engine import build_payload, merge_proofs
from ..errors import AllNodesDead, NoRoute
from ..hashing import Digest
from ..merkle import MerkleTree, ProofCore
from ..payload import PayloadPrefix, dbta_daily_cost
from ..proof import Anchor, BtaProof
from ..simchain import SimChain
from ..verifier import verify_anchor, verify_proof
from .broker import Broker, Message
from .election import elect_leader
from .scenario import Scenario

log = logging.getLogger(__name__)

KINDS = ("message-delivery", "frame-boundary", "node-crash", "node-recover", "tick")


def priority(kind: str, payload: dict) -> int:
    # At equal times: failures first, then message traffic, then fast frames
    # (whose roots must reach the slow trees), then slow frames, then timers.
    if kind in ("node-crash", "node-recover"):
        return 0
    if kind == "message-delivery":
        return 1
    if kind == "frame-boundary":
        return 2 if payload["level"] == "fast" else 3
    return 4


@dataclass
class ClusterEvent:
    at: float
    kind: str
    payload: dict


class EventLoop:
    def __init__(self):
        self._heap: list = []
        self._seq = itertools.count()
        self.now = 0.0

    def schedule(self, at: float, kind: str, **payload) -> ClusterEvent:
        if kind not in KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        event = ClusterEvent(max(at, self.now), kind, payload)
        heapq.heappush(self._heap, (event.at, priority(kind, payload), next(self._seq), event))
        return event

    def pop_until(self, until: float):
        while self._heap and self._heap[0][0] <= until:
            event = heapq.heappop(self._heap)[-1]
            self.now = event.at
            yield event
        self.now = max(self.now, until)


@dataclass(frozen=True)
class RootMessage:
    """A closed fast tree, handed to whichever node gets it off the ``btc`` queue.

    Carries the fast proofs (the tails) so the receiving node can merge
    without the originating node being alive.
    """

    root: Digest
    origin: str
    tails: tuple[tuple[Digest, BtaProof], ...]


@dataclass
class SlowRound:
    frame: float
    root: Digest
    heads: dict[Digest, ProofCore]
    items: dict[Digest, list[tuple[int, RootMessage]]]
    ordering: list[str]
    resolved: bool = False


@dataclass(frozen=True)
class Report:
    frame: float
    attempt: int
    leader: str
    slow_root: Digest
    final_root: Digest
    head: ProofCore
    tx_id: str
    server: str


@dataclass
class LeaderRound:
    frame: float
    attempt: int
    opened_at: float


class Node:
    def __init__(self, cluster: "Cluster", name: str, skew: float, hostname: str | None = None):
        self.cluster = cluster
        self.name = name
        self.skew = float(skew)
        self.prefix = PayloadPrefix.for_host(hostname or name)
        self.alive = True
        self.incarnation = 0
        self.reset()

    def reset(self) -> None:
        self.fast_tree = MerkleTree()
        self.fast_items: dict[Digest, list[tuple[int, str]]] = {}
        self.slow_tree = MerkleTree()
        self.slow_items: dict[Digest, list[tuple[int, RootMessage]]] = {}
        self.rounds: dict[float, SlowRound] = {}
        self.orderings: dict[float, list[str]] = {}
        self.inbox: dict[tuple[float, int], dict[str, Digest]] = {}

    def local(self, t: float) -> float:
        return t + self.skew

    # -- scheduling on the node's own clock

    def _at_local(self, local_time: float, kind: str, **payload) -> None:
        self.cluster.loop.schedule(local_time - self.skew, kind, node=self.name,
                                   incarnation=self.incarnation, local=local_time, **payload)

    def schedule_boundaries(self, now: float) -> None:
        local = self.local(now)
        for level, lifetime in (("fast", self.cluster.fast_lifetime),
                                ("slow", self.cluster.slow_lifetime)):
            # frame zero opens at local time zero, even on a clock running behind
            self._at_local(max(local // lifetime + 1, 1) * lifetime, "frame-boundary", level=level)

    # -- broker traffic

    def on_message(self, queue: str, message: Message) -> None:
        if queue == "eth":
            leaf, client = message.body["leaf"], message.body["client"]
            self.fast_items.setdefault(leaf, []).append((message.id, client))
            self.fast_tree.push(leaf)
            self.cluster.record_eth(self.name)
        elif queue == "btc":
            rm: RootMessage = message.body
            self.slow_items.setdefault(rm.root, []).append((message.id, rm))
            self.slow_tree.push(rm.root)

    # -- fast frames

    def on_fast_frame(self, local_time: float) -> None:
        c = self.cluster
        self._at_local(local_time + c.fast_lifetime, "frame-boundary", level="fast")
        tree, items = self.fast_tree, self.fast_items
        self.fast_tree, self.fast_items = MerkleTree(), {}
        if not len(tree):
            return
        root, cores = tree.close()
        chain = c.fast_chain
        tx_id = chain.broadcast(build_payload(chain.chain_id, root, self.prefix))
        anchor = Anchor(chain.chain_id, self.prefix.server_hex, tx_id)
        tails, clients = [], []
        for leaf, core in cores.items():
            proof = BtaProof(core.index, core.siblings, root, anchor)
            tails.append((leaf, proof))
            c.publish_proof(leaf, {"kind": "fast", "leaf": leaf, "proof": proof})
            for _, client in items[leaf]:
                if client not in clients:
                    clients.append(client)
        for client in clients:
            c.broker.bind("proofs", root.hex(), f"{client}-clnt")
        c.broker.publish("btc", "btc", RootMessage(root, self.name, tuple(tails)))
        for entries in items.values():
            for message_id, _ in entries:
                c.broker.ack(self.name, message_id)
        c.record("fast-close", node=self.name, root=root.hex(), leaves=len(cores), tx_id=tx_id)

    # -- slow frames and the leader round

    def on_slow_frame(self, local_time: float) -> None:
        c = self.cluster
        self._at_local(local_time + c.slow_lifetime, "frame-boundary", level="slow")
        frame = local_time - c.slow_lifetime
        ordering = elect_leader(c.members(), c.scenario.epoch + frame)
        self.orderings[frame] = ordering
        c.record_election(frame, self.name, ordering)
        if len(self.slow_tree):
            root, heads = self.slow_tree.close()
            self.rounds[frame] = SlowRound(frame, root, heads, self.slow_items, ordering)
            c.record("slow-close", node=self.name, frame=frame, root=root.hex(), leaves=len(heads))
        self.slow_tree, self.slow_items = MerkleTree(), {}
        self.failover(frame, 0, local_time)

    def failover(self, frame: float, attempt: int, local_time: float) -> None:
        """Run step ``attempt`` of the frame's leadership sequence.

        The node at position ``attempt`` of the election order opens a leader
        round; any node still lacking a report sends its slow root there.
        Steps are two consensus times apart.
        """
        c = self.cluster
        ordering = self.orderings[frame]
        own = self.rounds.get(frame)
        pending = own is not None and not own.resolved
        if attempt >= len(ordering):
            if pending:
                raise AllNodesDead(f"{self.name}: no leader left for frame {frame}")
            return
        candidate = ordering[attempt]
        if candidate == self.name:
            self._at_local(local_time + c.consensus_time, "tick", action="close-final",
                           frame=frame, attempt=attempt, opened_at=c.loop.now)
        if pending:
            if attempt:
                c.record("failover", node=self.name, frame=frame, attempt=attempt, to=candidate)
            c.send(self.name, candidate, ("root", frame, attempt, self.name, own.root))
        position = ordering.index(self.name)
        if pending or position > attempt:
            self._at_local(local_time + 2 * c.consensus_time, "tick", action="failover",
                           frame=frame, attempt=attempt + 1)

    def on_root(self, frame: float, attempt: int, sender: str, root: Digest) -> None:
        self.inbox.setdefault((frame, attempt), {})[sender] = root

    def close_final(self, frame: float, attempt: int, opened_at: float) -> None:
        c = self.cluster
        roots = self.inbox.pop((frame, attempt), {})
        if not roots:
            return
        senders = sorted(roots)
        tree = MerkleTree()
        for sender in senders:
            tree.push(roots[sender])
        final_root, heads = tree.close()
        chain = c.slow_chain
        tx_id = chain.broadcast(build_payload(chain.chain_id, final_root, self.prefix))
        c.record_leadership(frame, self.name, attempt, opened_at, tx_id, len(senders))
        for sender in senders:
            slow_root = roots[sender]
            report = Report(frame, attempt, self.name, slow_root, final_root, heads[slow_root],
                            tx_id, self.prefix.server_hex)
            c.send(self.name, sender, ("report", report))

    def on_report(self, report: Report) -> None:
        c = self.cluster
        own = self.rounds.get(report.frame)
        if own is None or own.resolved or own.root != report.slow_root:
            return
        own.resolved = True
        anchor = Anchor(c.slow_chain.chain_id, report.server, report.tx_id)
        published = set()
        count = 0
        for fast_root, head in own.heads.items():
            for message_id, rm in own.items[fast_root]:
                for leaf, tail in rm.tails:
                    if (fast_root, leaf) not in published:
                        published.add((fast_root, leaf))
                        core = merge_proofs(merge_proofs(tail, head), report.head)
                        proof = BtaProof(core.index, core.siblings, report.final_root, anchor)
                        c.publish_proof(fast_root, {"kind": "merged", "leaf": leaf, "proof": proof})
                        count += 1
                c.broker.ack(self.name, message_id)
        c.record("merged", node=self.name, frame=report.frame, proofs=count, leader=report.leader)


class Cluster:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.fast_lifetime = float(scenario.fast.lifetime)
        self.slow_lifetime = float(scenario.slow.lifetime)
        self.consensus_time = float(scenario.consensus_time)
        f, s = scenario.fast, scenario.slow
        self.fast_chain = SimChain(f.chain_id, f.interval(), f.fee)
        self.slow_chain = SimChain(s.chain_id, s.interval(), s.fee)
        self.loop = EventLoop()
        self.broker = Broker(self._broker_deliver)
        for name in ("eth", "btc", "proofs"):
            self.broker.declare_exchange(name, "direct")
        for name in ("eth", "btc"):
            self.broker.bind(name, name, name)
        self.nodes: dict[str, Node] = {
            n.name: Node(self, n.name, n.skew, n.hostname) for n in scenario.nodes
        }
        self.transcript: list[dict] = []
        self.leader_history: list[dict] = []
        self.elections: dict[float, dict[str, list[str]]] = {}
        self.slow_tx_by_frame: dict[float, list[str]] = {}
        self.submitted: list[tuple[str, Digest]] = []
        self.eth_deliveries: list[tuple[float, str]] = []
        self.errors: list[str] = []
        for node in self.nodes.values():
            self.broker.consume("eth", node.name)
            self.broker.consume("btc", node.name)
            node.schedule_boundaries(0.0)
        for a in scenario.arrivals:
            self.loop.schedule(a.at, "message-delivery", channel="client", client=a.client, leaf=a.leaf)
        for crash in scenario.crashes:
            self.loop.schedule(crash.at, "node-crash", node=crash.node)
            if crash.recover_at is not None:
                self.loop.schedule(crash.recover_at, "node-recover", node=crash.node)

    # -- plumbing used by nodes

    def members(self) -> list[str]:
        return [n.name for n in self.nodes.values() if n.alive]

    def record(self, event: str, **fields) -> None:
        self.transcript.append({"t": self.loop.now, "event": event, **fields})

    def record_eth(self, node: str) -> None:
        self.eth_deliveries.append((self.loop.now, node))

    def record_election(self, frame: float, node: str, ordering: list[str]) -> None:
        self.elections.setdefault(frame, {})[node] = ordering
        self.record("election", node=node, frame=frame, ordering=ordering)

    def record_leadership(self, frame, leader, attempt, opened_at, tx_id, roots) -> None:
        self.slow_tx_by_frame.setdefault(frame, []).append(tx_id)
        entry = {"frame": frame, "leader": leader, "attempt": attempt,
                 "took_over_at": opened_at, "broadcast_at": self.loop.now,
                 "tx_id": tx_id, "roots": roots}
        self.leader_history.append(entry)
        self.record("final-close", **entry)

    def send(self, sender: str, recipient: str, body: tuple) -> None:
        latency = 0.0 if sender == recipient else self.scenario.link_latency
        self.loop.schedule(self.loop.now + latency, "message-delivery",
                           channel="direct", node=recipient, body=body)

    def publish_proof(self, key: Digest, body: dict) -> None:
        try:
            self.broker.publish("proofs", key.hex(), body)
        except NoRoute:
            self.record("no-route", key=key.hex(), kind=body["kind"])

    def _broker_deliver(self, consumer: str, queue: str, message: Message) -> None:
        node = self.nodes[consumer]
        self.loop.schedule(self.loop.now, "message-delivery", channel="broker", node=consumer,
                           queue=queue, message=message, incarnation=node.incarnation)

    # -- operations

    def submit_hash(self, client_id: str, leaf: Digest) -> None:
        leaf = Digest(leaf)
        self.broker.bind("proofs", leaf.hex(), f"{client_id}-clnt")
        self.submitted.append((client_id, leaf))
        self.record("submit", client=client_id, leaf=leaf.hex())
        self.broker.publish("eth", "eth", {"leaf": leaf, "client": client_id})

    def crash(self, name: str) -> None:
        node = self.nodes[name]
        if not node.alive:
            return
        node.alive = False
        node.incarnation += 1
        node.reset()
        returned = self.broker.cancel(name)
        self.record("crash", node=name, redelivered=len(returned))
        if not self.members():
            self.errors.append(f"AllNodesDead: every node is down at t={self.loop.now}")
            self.record("all-nodes-dead")

    def recover(self, name: str) -> None:
        node = self.nodes[name]
        if node.alive:
            return
        node.alive = True
        node.incarnation += 1
        node.reset()
        self.record("recover", node=name)
        self.broker.consume("eth", name)
        self.broker.consume("btc", name)
        node.schedule_boundaries(self.loop.now)

    # -- the loop

    def _handle(self, event: ClusterEvent) -> None:
        p = event.payload
        if event.kind == "message-delivery" and p["channel"] == "client":
            self.submit_hash(p["client"], p["leaf"])
            return
        if event.kind == "node-crash":
            self.crash(p["node"])
            return
        if event.kind == "node-recover":
            self.recover(p["node"])
            return
        node = self.nodes[p["node"]]
        if not node.alive:
            return
        if event.kind == "message-delivery" and p["channel"] == "direct":
            tag, *args = p["body"]
            if tag == "root":
                node.on_root(*args)
            else:
                node.on_report(*args)
            return
        if p["incarnation"] != node.incarnation:
            return
        if event.kind == "message-delivery":
            if self.broker.is_unacked(node.name, p["message"].id):
                node.on_message(p["queue"], p["message"])
        elif event.kind == "frame-boundary":
            if p["level"] == "fast":
                node.on_fast_frame(p["local"])
            else:
                node.on_slow_frame(p["local"])
        elif p["action"] == "failover":
            try:
                node.failover(p["frame"], p["attempt"], p["local"])
            except AllNodesDead as exc:
                self.errors.append(f"AllNodesDead: {exc}")
                self.record("all-nodes-dead", node=node.name, frame=p["frame"])
        else:
            node.close_final(p["frame"], p["attempt"], p["opened_at"])

    def run_until(self, until: float) -> None:
        for event in self.loop.pop_until(until):
            self._tick_chains(event.at)
            self._handle(event)
        self._tick_chains(until)

    def _tick_chains(self, now: float) -> None:
        for chain in (self.fast_chain, self.slow_chain):
            if now > chain.now:
                chain.tick(now)

    def run(self) -> "SimulationResult":
        """Run to the scenario's duration, then drain until every leaf is served."""
        s = self.scenario
        self.run_until(s.duration)
        # let in-flight frames finish: the final-tree round ends a few
        # consensus times after each slow boundary
        tail = self.slow_lifetime + 2 * (len(self.nodes) + 1) * s.consensus_time
        for _ in range(s.drain_frames):
            if not self.unserved():
                break
            self.run_until(self.loop.now + tail)
        self.run_until(self.loop.now + self.slow_chain.block_interval)
        return SimulationResult(self)

    # -- inspection

    def client_proofs(self, client: str) -> list[dict]:
        q = self.broker.queues.get(f"{client}-clnt")
        return [m.body for m in q.messages] if q else []

    def unserved(self) -> list[tuple[str, Digest]]:
        out = []
        for client, leaf in self.submitted:
            if not any(b["kind"] == "merged" and b["leaf"] == leaf for b in self.client_proofs(client)):
                out.append((client, leaf))
        return out


@dataclass
class SimulationResult:
    cluster: Cluster
    summary: dict = field(init=False)

    def __post_init__(self):
        self.summary = self._summarize()

    def _summarize(self) -> dict:
        c = self.cluster
        fast = merged = verified = fast_verified = 0
        leaves = []
        for client, leaf in dict.fromkeys(c.submitted):
            bodies = [b for b in c.client_proofs(client) if b["leaf"] == leaf]
            fast_proofs = [b["proof"] for b in bodies if b["kind"] == "fast"]
            merged_proofs = [b["proof"] for b in bodies if b["kind"] == "merged"]
            fast += bool(fast_proofs)
            merged += bool(merged_proofs)
            fast_ok = any(verify_anchor(p, c.fast_chain, leaf).ok for p in fast_proofs)
            ok = any(
                verify_proof(leaf, p)
                and (r := verify_anchor(p, c.slow_chain, leaf)).ok
                and r.block_timestamp is not None
                for p in merged_proofs
            )
            fast_verified += fast_ok
            verified += ok
            leaves.append({"client": client, "leaf": leaf.hex(), "fast": len(fast_proofs),
                           "merged": len(merged_proofs), "verified": ok})
        nu = len(c.nodes)
        fee = c.scenario.btc_fee_usd
        lifetime = c.slow_lifetime
        agreement = all(
            len({tuple(o) for o in per_node.values()}) == 1 for per_node in c.elections.values()
        )
        return {
            "nodes": nu,
            "transactions": {
                "fast": len(c.fast_chain.transactions),
                "slow": len(c.slow_chain.transactions),
            },
            "slow_tx_per_frame": {_fmt(f): len(txs) for f, txs in sorted(c.slow_tx_by_frame.items())},
            "submitted": len(leaves),
            "fast_proofs_delivered": fast,
            "fast_proofs_verified": fast_verified,
            "merged_proofs_delivered": merged,
            "merged_proofs_verified": verified,
            "leader_history": c.leader_history,
            "election_agreement": agreement,
            "unroutable": c.broker.unroutable,
            "errors": c.errors,
            "costs": {
                "btc_fee_usd": fee,
                "daily_leader_mode": dbta_daily_cost(nu, fee, True, lifetime),
                "daily_naive_mode": dbta_daily_cost(nu, fee, False, lifetime),
            },
            "leaves": leaves,
        }

    def transcript_lines(self) -> list[str]:
        return [json.dumps(_jsonable(r), sort_keys=True) for r in self.cluster.transcript]

    def write_transcript(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.transcript_lines():
                fh.write(line + "\n")


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Digest):
        return value.hex()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def simulate(scenario: Scenario) -> SimulationResult:
    return Cluster(scenario).run()
