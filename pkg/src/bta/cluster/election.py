"""Signal-free leader election.

Every node hashes each peer name with the frame's start time appended and
sorts the hex digests; the resulting order is the order of leadership for
that frame. Nodes that see the same peers and the same frame agree without
exchanging a message.
"""

from __future__ import annotations

from typing import Iterable

from ..hashing import sha256


def epoch_text(epoch: float) -> str:
    """Decimal rendering of an epoch second as it is fed to the hash."""
    if float(epoch).is_integer():
        return str(int(epoch))
    return repr(float(epoch))


def election_key(name: str, frame_start_epoch: float) -> str:
    return sha256((name + epoch_text(frame_start_epoch)).encode("utf-8")).hex()


def elect_leader(peer_names: Iterable[str], frame_start_epoch: float) -> list[str]:
    """Peers in leadership order for the frame; the first one is the leader."""
    names = list(dict.fromkeys(peer_names))
    if not names:
        raise ValueError("need at least one peer")
    return sorted(names, key=lambda n: (election_key(n, frame_start_epoch), n))
