"""BTA v6 proof records, their JSON form, Chainpoint v2 export and chain IDs."""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    InvalidDigest,
    MalformedProof,
    ProofMismatch,
    UnknownChain,
    UnsupportedAnchorType,
    UnsupportedVersion,
)
from .hashing import Digest, as_digest, mixer

BTA_VERSION = 6
CHAINPOINT_CONTEXT = "https://w3id.org/chainpoint/v2"
CHAINPOINT_TYPE = "ChainpointSHA256v2"


class ChainInfo(NamedTuple):
    name: str
    family: str
    is_testnet: bool
    block_interval: float  # seconds


# Default block intervals: Bitcoin ~10 min, Ethereum ~17 s, Litecoin ~2.5 min.
CHAINS: dict[int, ChainInfo] = {
    1: ChainInfo("Bitcoin livenet", "bitcoin", False, 600.0),
    2: ChainInfo("Ethereum Classic livenet", "ethereum", False, 17.0),
    3: ChainInfo("Ethereum Fork livenet", "ethereum", False, 17.0),
    4: ChainInfo("Litecoin livenet", "litecoin", False, 150.0),
    -1: ChainInfo("Bitcoin testnet", "bitcoin", True, 600.0),
    -2: ChainInfo("Ethereum Rinkeby testnet", "ethereum", True, 17.0),
    -3: ChainInfo("Ethereum Morden testnet", "ethereum", True, 17.0),
    -4: ChainInfo("Litecoin testnet", "litecoin", True, 150.0),
}

# Reserved for protocol tests; never assigned to a real chain.
TEST_CHAIN_ID = 0

# Chainpoint v2 anchor types. ETHData is the Chainpoint name for Ethereum
# data anchors; Litecoin has no Chainpoint type.
_CHAINPOINT_ANCHOR_TYPES = {"bitcoin": "BTCOpReturn", "ethereum": "ETHData"}


def chain_info(chain_id: int) -> ChainInfo:
    try:
        return CHAINS[chain_id]
    except KeyError:
        raise UnknownChain(f"unknown chain id {chain_id}") from None


def is_known_chain(chain_id: int) -> bool:
    return chain_id in CHAINS or chain_id == TEST_CHAIN_ID


def _check_hex(text: str, what: str) -> str:
    if not isinstance(text, str) or not text or any(c not in string.hexdigits for c in text):
        raise MalformedProof(f"{what} must be a non-empty hex string, got {text!r}")
    return text


@dataclass(frozen=True)
class Anchor:
    chain_id: int
    prefix: str  # server id, 4 hex chars
    tx_id: str

    def __post_init__(self):
        if not isinstance(self.chain_id, int) or isinstance(self.chain_id, bool):
            raise MalformedProof(f"chain id must be an integer, got {self.chain_id!r}")
        if not isinstance(self.prefix, str) or len(self.prefix) != 4:
            raise MalformedProof(f"anchor prefix must be 4 hex chars, got {self.prefix!r}")
        _check_hex(self.prefix, "anchor prefix")
        _check_hex(self.tx_id, "transaction id")
        object.__setattr__(self, "prefix", self.prefix.upper())

    def to_list(self) -> list:
        return [self.chain_id, self.prefix, self.tx_id]


@dataclass(frozen=True)
class BtaProof:
    index: int
    siblings: tuple[Digest, ...]
    root: Digest
    anchor: Anchor
    version: int = BTA_VERSION

    def __post_init__(self):
        if self.version != BTA_VERSION:
            raise UnsupportedVersion(f"unsupported BTA proof version {self.version!r}")
        if not isinstance(self.index, int) or isinstance(self.index, bool) or self.index < 0:
            raise MalformedProof(f"index must be a non-negative integer, got {self.index!r}")
        siblings = tuple(as_digest(s) for s in self.siblings)
        if self.index >= (1 << len(siblings)):
            raise MalformedProof(
                f"index {self.index} out of range for {len(siblings)} siblings"
            )
        object.__setattr__(self, "siblings", siblings)
        object.__setattr__(self, "root", as_digest(self.root))

    def with_anchor(self, anchor: Anchor) -> "BtaProof":
        return BtaProof(self.index, self.siblings, self.root, anchor, self.version)

    def to_list(self) -> list:
        return [
            self.version,
            self.index,
            [s.hex() for s in self.siblings],
            self.root.hex(),
            self.anchor.to_list(),
        ]


def to_json(proof: BtaProof, indent: int | None = None) -> bytes:
    return json.dumps(proof.to_list(), indent=indent).encode("utf-8")


def from_list(doc) -> BtaProof:
    if not isinstance(doc, list) or len(doc) != 5:
        raise MalformedProof("a BTA proof is a 5-element array")
    version, index, siblings, root, anchor = doc
    if version != BTA_VERSION or isinstance(version, bool):
        raise UnsupportedVersion(f"unsupported BTA proof version {version!r}")
    if siblings is None or siblings == "":
        siblings = []
    if not isinstance(siblings, list) or not all(isinstance(s, str) for s in siblings):
        raise MalformedProof("siblings must be a list of hex strings")
    if not isinstance(root, str):
        raise MalformedProof("root must be a hex string")
    if not isinstance(anchor, list) or len(anchor) != 3:
        raise MalformedProof("anchor must be a 3-element array")
    chain_id, prefix, tx_id = anchor
    try:
        return BtaProof(
            index=index,
            siblings=tuple(Digest.from_hex(s) for s in siblings),
            root=Digest.from_hex(root),
            anchor=Anchor(chain_id, prefix, tx_id),
            version=version,
        )
    except InvalidDigest:
        raise
    except TypeError as exc:
        raise MalformedProof(str(exc)) from exc


def from_json(data: bytes | str) -> BtaProof:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedProof(f"not valid JSON: {exc}") from exc
    return from_list(doc)


def _fold(leaf: Digest, entries: list[dict]) -> Digest:
    value = leaf
    for entry in entries:
        ((side, sibling),) = entry.items()
        sibling = Digest.from_hex(sibling)
        value = mixer(sibling, value) if side == "left" else mixer(value, sibling)
    return value


def chainpoint_root(document: dict) -> Digest:
    """Fold a Chainpoint document's targetHash through its proof entries."""
    return _fold(Digest.from_hex(document["targetHash"]), document["proof"])


def to_chainpoint_dict(proof: BtaProof, target_hash: Digest) -> dict:
    target_hash = as_digest(target_hash)
    entries = [
        {"left" if (proof.index >> n) & 1 else "right": sibling.hex()}
        for n, sibling in enumerate(proof.siblings)
    ]
    if _fold(target_hash, entries) != proof.root:
        raise ProofMismatch(f"{target_hash.hex()} does not fold to root {proof.root.hex()}")
    family = CHAINS[proof.anchor.chain_id].family if proof.anchor.chain_id in CHAINS else None
    anchor_type = _CHAINPOINT_ANCHOR_TYPES.get(family)
    if anchor_type is None:
        raise UnsupportedAnchorType(
            f"chain id {proof.anchor.chain_id} has no Chainpoint anchor type"
        )
    return {
        "@context": CHAINPOINT_CONTEXT,
        "type": CHAINPOINT_TYPE,
        "targetHash": target_hash.hex(),
        "merkleRoot": proof.root.hex(),
        "proof": entries,
        "anchors": [{"type": anchor_type, "sourceId": proof.anchor.tx_id}],
    }


def to_chainpoint(proof: BtaProof, target_hash: Digest, indent: int | None = 2) -> bytes:
    return json.dumps(to_chainpoint_dict(proof, target_hash), indent=indent).encode("utf-8")
