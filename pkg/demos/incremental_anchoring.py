"""
Fast and slow chains together
=============================

"""

import random

from bta.config import Config
from bta.engine import Engine
from bta.hashing import sha256
from bta.payload import cost_per_stamp
from bta.verifier import verify_anchor

rng = random.Random(3)
engine = Engine(Config(hostname="demo"))

# Ten one-minute fast frames inside one ten-minute slow frame
for minute in range(10):
    engine.advance(60 * minute)
    for _ in range(rng.randrange(0, 12)):
        engine.submit(sha256(rng.randbytes(16)))

engine.advance(1200)
fast = [d for d in engine.deliveries if d.kind == "fast"]
merged = [d for d in engine.deliveries if d.kind == "merged"]
print(len(fast), "fast proofs over", len(engine.fast_chain.transactions), "fast transactions")
print(len(merged), "merged proofs over", len(engine.slow_chain.transactions), "slow transaction")

# The merged proof extends the fast one: same first siblings, then the slow-tree head
p = engine.pending[1]
n = len(p.fast_proof.siblings)
print("fast siblings are a prefix:", p.merged_proof.siblings[:n] == p.fast_proof.siblings)
print("fast anchor ok:", verify_anchor(p.fast_proof, engine.fast_chain, p.leaf).ok)
print("slow anchor ok:", verify_anchor(p.merged_proof, engine.slow_chain, p.leaf).ok)

fee = engine.config.slow.fee
print(f"slow-chain cost per stamp: {cost_per_stamp(len(merged), fee, True):.0f} satoshi instead of {fee}")
