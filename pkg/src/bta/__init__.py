"""Blockchain timestamping: progressive Merkle trees, BTA v6 proofs and simulated anchoring."""

from .config import ChainConfig, Config
from .engine import Engine, anchor_parallel, merge_proofs
from .hashing import Digest, commutative_mixer, mixer, sha256
from .merkle import MerkleTree, ProofCore, close_tree
from .payload import PayloadPrefix, build_op_return, cost_per_stamp, dbta_daily_cost, parse_op_return, total_cost
from .proof import Anchor, BtaProof, from_json, to_chainpoint, to_json
from .simchain import SimChain
from .verifier import VerificationReport, prove_root, verify_anchor, verify_proof

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "BtaProof",
    "ChainConfig",
    "Config",
    "Digest",
    "Engine",
    "MerkleTree",
    "PayloadPrefix",
    "ProofCore",
    "SimChain",
    "VerificationReport",
    "anchor_parallel",
    "build_op_return",
    "close_tree",
    "commutative_mixer",
    "cost_per_stamp",
    "dbta_daily_cost",
    "from_json",
    "merge_proofs",
    "mixer",
    "parse_op_return",
    "prove_root",
    "sha256",
    "to_chainpoint",
    "to_json",
    "total_cost",
    "verify_anchor",
    "verify_proof",
]
