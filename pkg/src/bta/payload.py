"""Anchoring payloads for Bitcoin OP_RETURN scripts and Ethereum call data.

Also holds the aggregation cost model."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .errors import EmptyHostname, NotOpReturn, PayloadTooLarge, UnrecognizedLayout
from .hashing import DIGEST_SIZE, Digest
from .proof import BTA_VERSION

OP_RETURN = 0x6A
PREFIX_MAGIC = 0x53  # ASCII "S"
PREFIX_SIZE = 4
MAX_OP_RETURN_DATA = 80

# Bitcoin fee per anchoring transaction, satoshi (recommended 60k-120k).
DEFAULT_BTC_FEE = 120_000
# Ethereum message call: 24000 szabo of gas at 20 Gwei. Metadata only.
ETH_GAS_SZABO = 24_000
ETH_GAS_PRICE_GWEI = 20


def server_id(hostname: str) -> bytes:
    """First two bytes of MD5(hostname)."""
    if not hostname:
        raise EmptyHostname("hostname must be non-empty")
    return hashlib.md5(hostname.encode("utf-8")).digest()[:2]


@dataclass(frozen=True)
class PayloadPrefix:
    version: int
    server_id: bytes

    def __post_init__(self):
        if not 0 <= self.version <= 9:
            raise ValueError(f"version must be a single digit, got {self.version}")
        if len(self.server_id) != 2:
            raise ValueError("server id must be 2 bytes")

    @classmethod
    def for_host(cls, hostname: str, version: int = BTA_VERSION) -> "PayloadPrefix":
        return cls(version, server_id(hostname))

    @classmethod
    def from_bytes(cls, data: bytes) -> "PayloadPrefix":
        if len(data) != PREFIX_SIZE or data[0] != PREFIX_MAGIC:
            raise UnrecognizedLayout(f"not a payload prefix: {data.hex()}")
        digit = chr(data[1])
        if not digit.isdigit():
            raise UnrecognizedLayout(f"version byte is not an ASCII digit: {data[1]:#x}")
        return cls(int(digit), bytes(data[2:4]))

    @property
    def server_hex(self) -> str:
        return self.server_id.hex().upper()

    def to_bytes(self) -> bytes:
        return bytes([PREFIX_MAGIC, ord(str(self.version))]) + self.server_id


def build_data(root: Digest, prefix: PayloadPrefix | None = None) -> bytes:
    root = Digest(root)
    return (prefix.to_bytes() if prefix else b"") + root


def build_op_return(root: Digest, prefix: PayloadPrefix | None = None) -> bytes:
    """scriptPubKey ``6A <len> <data>`` carrying the (optionally prefixed) root."""
    data = build_data(root, prefix)
    if len(data) > MAX_OP_RETURN_DATA:
        raise PayloadTooLarge(f"OP_RETURN data is {len(data)} bytes, limit {MAX_OP_RETURN_DATA}")
    return bytes([OP_RETURN, len(data)]) + data


def parse_op_return(script: bytes) -> tuple[PayloadPrefix | None, Digest]:
    if not script or script[0] != OP_RETURN:
        raise NotOpReturn("script does not start with OP_RETURN (0x6A)")
    if len(script) < 2 or len(script) != 2 + script[1]:
        raise UnrecognizedLayout("declared data length does not match the script")
    size, data = script[1], script[2:]
    if size == DIGEST_SIZE:
        return None, Digest(data)
    if size == PREFIX_SIZE + DIGEST_SIZE:
        return PayloadPrefix.from_bytes(data[:PREFIX_SIZE]), Digest(data[PREFIX_SIZE:])
    raise UnrecognizedLayout(f"unexpected OP_RETURN data length {size}")


def build_eth_data(root: Digest, prefix: PayloadPrefix | None = None) -> bytes:
    """Message-call data field: the root, prefixed like any other payload."""
    return build_data(root, prefix)


_WS = re.compile(r"\s+")


def script_from_hex(text: str) -> bytes:
    """Parse a hex rendering, ignoring spaces and newlines."""
    return bytes.fromhex(_WS.sub("", text))


def script_to_hex(script: bytes) -> str:
    return script.hex().upper()


def total_cost(n: int, fee: float, aggregated: bool) -> float:
    _check_cost_args(n, fee)
    return fee if aggregated else n * fee


def cost_per_stamp(n: int, fee: float, aggregated: bool) -> float:
    _check_cost_args(n, fee)
    return fee / n if aggregated else fee


def dbta_daily_cost(nodes: int, fee_usd: float, leader_mode: bool, lifetime: float = 600.0) -> float:
    """Daily slow-chain spend of a cluster: one tx per frame, or one per node per frame.

    With the default 10-minute frames this is 24*6*fee (leader) or 24*6*nodes*fee.
    """
    _check_cost_args(nodes, fee_usd)
    frames_per_day = 86_400 / lifetime
    return frames_per_day * fee_usd * (1 if leader_mode else nodes)


def _check_cost_args(n: int, fee: float) -> None:
    if n < 1:
        raise ValueError(f"count must be >= 1, got {n}")
    if fee <= 0:
        raise ValueError(f"fee must be positive, got {fee}")
