"""In-process model of an AMQP broker with direct exchanges.

Only the semantics the cluster relies on are modelled: routing by exact key
match, round-robin push delivery to a queue's consumers, explicit acks, and
requeueing of a dead consumer's unacknowledged messages at the queue head.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import NoRoute


@dataclass
class Message:
    id: int
    exchange: str
    routing_key: str
    body: Any
    redelivered: bool = False


@dataclass
class Queue:
    name: str
    messages: deque = field(default_factory=deque)
    consumers: list[str] = field(default_factory=list)
    cursor: int = 0


@dataclass
class Exchange:
    name: str
    type: str = "direct"
    bindings: dict[str, list[str]] = field(default_factory=dict)


# deliver(consumer, queue name, message)
DeliverFn = Callable[[str, str, Message], None]


class Broker:
    def __init__(self, deliver: DeliverFn | None = None):
        self.exchanges: dict[str, Exchange] = {}
        self.queues: dict[str, Queue] = {}
        self.unacked: dict[tuple[str, int], tuple[str, Message]] = {}
        self.unroutable = 0
        self._deliver = deliver or (lambda consumer, queue, message: None)
        self._ids = itertools.count(1)

    def declare_exchange(self, name: str, type: str = "direct") -> Exchange:
        if type != "direct":
            raise ValueError("only direct exchanges are modelled")
        return self.exchanges.setdefault(name, Exchange(name, type))

    def declare_queue(self, name: str) -> Queue:
        return self.queues.setdefault(name, Queue(name))

    def bind(self, exchange: str, routing_key: str, queue: str) -> None:
        self.declare_queue(queue)
        targets = self.exchanges[exchange].bindings.setdefault(routing_key, [])
        if queue not in targets:
            targets.append(queue)

    def publish(self, exchange: str, routing_key: str, body: Any) -> int:
        """Route a message; returns the number of queues it reached.

        Raises NoRoute (after counting the drop) when no binding matches.
        """
        targets = self.exchanges[exchange].bindings.get(routing_key, [])
        if not targets:
            self.unroutable += 1
            raise NoRoute(f"no binding for {routing_key!r} on exchange {exchange!r}")
        for name in targets:
            message = Message(next(self._ids), exchange, routing_key, body)
            self.queues[name].messages.append(message)
            self._dispatch(self.queues[name])
        return len(targets)

    def consume(self, queue: str, consumer: str) -> None:
        q = self.declare_queue(queue)
        if consumer not in q.consumers:
            q.consumers.append(consumer)
        self._dispatch(q)

    def cancel(self, consumer: str) -> list[Message]:
        """Drop a consumer everywhere and requeue what it had not acked.

        Returned messages go back to the head of their queues, in their
        original order, and are pushed to the remaining consumers.
        """
        touched = []
        for q in self.queues.values():
            if consumer in q.consumers:
                pos = q.consumers.index(consumer)
                q.consumers.remove(consumer)
                if pos < q.cursor:
                    q.cursor -= 1
                touched.append(q)
        returned = [(key, v) for key, v in self.unacked.items() if key[0] == consumer]
        returned.sort(key=lambda item: item[0][1], reverse=True)
        for key, (queue, message) in returned:
            del self.unacked[key]
            message.redelivered = True
            self.queues[queue].messages.appendleft(message)
            if self.queues[queue] not in touched:
                touched.append(self.queues[queue])
        for q in touched:
            self._dispatch(q)
        return [message for _, (_, message) in reversed(returned)]

    def ack(self, consumer: str, message_id: int) -> None:
        self.unacked.pop((consumer, message_id), None)

    def is_unacked(self, consumer: str, message_id: int) -> bool:
        return (consumer, message_id) in self.unacked

    def _dispatch(self, q: Queue) -> None:
        while q.messages and q.consumers:
            q.cursor %= len(q.consumers)
            consumer = q.consumers[q.cursor]
            q.cursor = (q.cursor + 1) % len(q.consumers)
            message = q.messages.popleft()
            self.unacked[(consumer, message.id)] = (q.name, message)
            self._deliver(consumer, q.name, message)
