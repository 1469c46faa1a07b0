"""
Proof documents: verify, serialize, export
==========================================

"""

import json

from bta.hashing import sha256
from bta.merkle import close_tree
from bta.payload import PayloadPrefix, build_op_return
from bta.proof import Anchor, BtaProof, from_json, to_chainpoint, to_json
from bta.simchain import SimChain
from bta.verifier import verify_anchor, verify_proof

documents = [b"contract.pdf", b"invoice-17.pdf", b"photo.jpg", b"notes.txt"]
leaves = [sha256(d) for d in documents]
root, cores = close_tree(leaves)

# Put the root on a simulated Bitcoin testnet and wait a block
chain = SimChain(-1)
prefix = PayloadPrefix.for_host("localhost")
tx_id = chain.broadcast(build_op_return(root, prefix))
chain.tick(600)

leaf = leaves[2]
core = cores[leaf]
proof = BtaProof(core.index, core.siblings, root, Anchor(-1, prefix.server_hex, tx_id))

# The compact form is a JSON array
text = to_json(proof)
print(text.decode())
assert from_json(text) == proof

print("folds to root:", verify_proof(leaf, proof))
report = verify_anchor(proof, chain, leaf)
print("anchored:", report.ok, "block time:", report.block_timestamp)

# An edited document no longer folds to the root
print("edited:", verify_anchor(proof, chain, sha256(b"photo-edited.jpg")).ok)

# Chainpoint v2 needs the target hash to label each sibling as left or right
print(json.dumps(json.loads(to_chainpoint(proof, leaf)), indent=2))
