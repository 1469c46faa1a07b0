"""
Growing a Merkle tree one leaf at a time
========================================

"""

from bta.hashing import mixer, sha256
from bta.merkle import MerkleTree
from bta.verifier import prove_root

calls = 0


def counting_mixer(left, right):
    global calls
    calls += 1
    return mixer(left, right)


names = ["alpha", "beta", "gamma", "delta", "epsilon"]
leaves = [sha256(n.encode()) for n in names]

# Pairs are hashed as soon as they complete, so closing is cheap
tree = MerkleTree(counting_mixer)
for name, leaf in zip(names, leaves):
    tree.push(leaf)
    print(f"after {name:8s} levels={[len(level) for level in tree.levels]} mixer calls={calls}")

root, proofs = tree.close()
print("root", root.hex(), "total mixer calls", calls)

# Each proof is an index (packed side bits) and a sibling list
for name, leaf in zip(names, leaves):
    p = proofs[leaf]
    print(f"{name:8s} index={p.index} siblings={len(p.siblings)} ok={prove_root(leaf, p.index, p.siblings) == root}")
