"""Progressive Merkle tree.

Leaves are pushed one at a time. Every time a level completes a pair, the
pair is mixed into a parent straight away and the proofs of all leaves under
the two children are extended, so once the tree is closed the proofs are
already there.

Closing promotes an orphan trailing node to the next level unchanged. A
promoted node costs no mixer call and adds nothing to the proofs under it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .errors import CloseEmptyTree, CloseOnClosedTree, PushOnClosedTree
from .hashing import Digest, mixer as default_mixer

Mixer = Callable[[Digest, Digest], Digest]


@dataclass
class ProofAccumulator:
    """Siblings collected so far for one leaf, bottom-up.

    ``side_bits[n]`` is 1 when ``siblings[n]`` sits on the left of the running
    value, 0 when it sits on the right.
    """

    siblings: list[Digest] = field(default_factory=list)
    side_bits: list[int] = field(default_factory=list)

    def append(self, sibling: Digest, side_bit: int) -> None:
        self.siblings.append(sibling)
        self.side_bits.append(side_bit)


def effective_index(acc: ProofAccumulator) -> int:
    """Pack the side bits into an integer, bit n for sibling n."""
    return sum(bit << n for n, bit in enumerate(acc.side_bits))


class ProofCore(NamedTuple):
    """What a closed tree knows about a leaf: Merkle index and siblings."""

    index: int
    siblings: tuple[Digest, ...]


class MerkleTree:
    def __init__(self, mixer: Mixer = default_mixer):
        self.mixer = mixer
        self.levels: list[list[Digest]] = []
        self.proofs: dict[Digest, ProofAccumulator] = {}
        self.closed = False
        self.root: Digest | None = None

    def __len__(self) -> int:
        return len(self.levels[0]) if self.levels else 0

    def __contains__(self, leaf: object) -> bool:
        return leaf in self.proofs

    @property
    def leaves(self) -> list[Digest]:
        return list(self.levels[0]) if self.levels else []

    def push(self, leaf: Digest) -> "MerkleTree":
        """Append a leaf. Repeated leaves are ignored."""
        if self.closed:
            raise PushOnClosedTree("cannot push into a closed tree")
        leaf = Digest(leaf)
        if leaf in self.proofs:
            return self
        self.proofs[leaf] = ProofAccumulator()
        self._push(leaf, 0)
        return self

    def _push(self, node: Digest, level: int) -> None:
        if level == len(self.levels):
            self.levels.append([])
        row = self.levels[level]
        completes_pair = len(row) % 2 == 1
        row.append(node)
        if completes_pair:
            left = row[-2]
            parent = self.mixer(left, node)
            self.extend_proofs(left, node, level)
            self._push(parent, level + 1)

    def extend_proofs(self, left: Digest, right: Digest, level: int) -> None:
        """Give every leaf under ``left`` the sibling ``right`` and vice versa.

        ``left`` and ``right`` must be the last two nodes of ``level``. A node
        at position k of level L spans leaf slots [k * 2**L, (k + 1) * 2**L),
        clipped to the leaves present; this also holds for promoted nodes,
        since only the trailing node of a level is ever promoted.
        """
        row = self.levels[level]
        assert row[-2] == left and row[-1] == right
        leaves = self.levels[0]
        span = 1 << level
        k = len(row) - 2
        start, middle = k * span, (k + 1) * span
        end = min((k + 2) * span, len(leaves))
        for leaf in leaves[start:middle]:
            self.proofs[leaf].append(right, 0)
        for leaf in leaves[middle:end]:
            self.proofs[leaf].append(left, 1)

    def close(self) -> tuple[Digest, dict[Digest, ProofCore]]:
        """Reduce the tree to a single root and return it with every leaf's proof."""
        if self.closed:
            raise CloseOnClosedTree("tree already closed")
        if not self.levels:
            raise CloseEmptyTree("cannot close a tree without leaves")
        level = 0
        while not (level == len(self.levels) - 1 and len(self.levels[level]) == 1):
            row = self.levels[level]
            if len(row) % 2 == 1:
                self._push(row[-1], level + 1)
            level += 1
        self.closed = True
        self.root = self.levels[-1][0]
        return self.root, self.proof_cores()

    def proof_cores(self) -> dict[Digest, ProofCore]:
        return {
            leaf: ProofCore(effective_index(acc), tuple(acc.siblings))
            for leaf, acc in self.proofs.items()
        }


def close_tree(leaves, mixer: Mixer = default_mixer) -> tuple[Digest, dict[Digest, ProofCore]]:
    """Build and close a tree over ``leaves`` in one go."""
    tree = MerkleTree(mixer)
    for leaf in leaves:
        tree.push(leaf)
    return tree.close()
