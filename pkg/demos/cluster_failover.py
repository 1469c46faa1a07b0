"""
A five-node cluster losing its leader
=====================================

"""

import json

from bta.cluster import elect_leader, parse_scenario, simulate

names = ["n1", "n2", "n3", "n4", "n5"]
order = elect_leader(names, 0)
print("leadership order for the first frame:", order)

# The leader dies ten seconds after its frame closes, before it can broadcast
doc = {
    "nodes": [{"name": n, "skew": s} for n, s in zip(names, [-9, -4, 0, 4, 9])],
    "consensus_time": 20,
    "duration": 1800,
    "crashes": [{"node": order[0], "at": 610}],
    "arrival_rate": {"per_minute": 40, "clients": ["alice", "bob"], "until": 1500},
    "seed": 5,
}
result = simulate(parse_scenario(json.dumps(doc)))
s = result.summary

for h in s["leader_history"]:
    print(f"frame {h['frame']:6.0f}: {h['leader']} attempt {h['attempt']} opened at {h['took_over_at']}")
print("slow transactions per frame:", s["slow_tx_per_frame"])
print(f"{s['merged_proofs_verified']} of {s['submitted']} leaves have anchored merged proofs")

# One slow transaction per frame whatever the cluster size
print("daily cost, leader mode:", s["costs"]["daily_leader_mode"])
print("daily cost, every node anchoring:", s["costs"]["daily_naive_mode"])
