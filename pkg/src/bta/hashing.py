"""Digests and the functions that mix two child nodes into a parent."""

from __future__ import annotations

import hashlib

from .errors import InvalidDigest

DIGEST_SIZE = 32


class Digest(bytes):
    """A 32-byte hash value.

    Behaves like ``bytes`` (comparison, slicing, concatenation) but always
    renders as 64 uppercase hex characters.
    """

    def __new__(cls, value: bytes = b"") -> "Digest":
        if isinstance(value, Digest):
            return value
        if not isinstance(value, (bytes, bytearray, memoryview)):
            raise InvalidDigest(f"expected bytes, got {type(value).__name__}")
        value = bytes(value)
        if len(value) != DIGEST_SIZE:
            raise InvalidDigest(f"digest must be {DIGEST_SIZE} bytes, got {len(value)}")
        return super().__new__(cls, value)

    @classmethod
    def from_hex(cls, text: str) -> "Digest":
        if not isinstance(text, str):
            raise InvalidDigest(f"expected hex text, got {type(text).__name__}")
        if len(text) != 2 * DIGEST_SIZE:
            raise InvalidDigest(f"digest hex must be {2 * DIGEST_SIZE} chars, got {len(text)}")
        try:
            return cls(bytes.fromhex(text))
        except ValueError as exc:
            raise InvalidDigest(f"not a hex string: {text!r}") from exc

    def hex(self, *args) -> str:  # type: ignore[override]
        return bytes.hex(self, *args).upper()

    def __str__(self) -> str:
        return self.hex()

    def __repr__(self) -> str:
        return f"Digest({self.hex()[:16]}…)"


def as_digest(value: Digest | bytes | str) -> Digest:
    """Coerce raw bytes or hex text (either case) to a Digest."""
    if isinstance(value, str):
        return Digest.from_hex(value)
    return Digest(value)


def sha256(data: bytes) -> Digest:
    return Digest(hashlib.sha256(data).digest())


def mixer(left: Digest, right: Digest) -> Digest:
    """Parent node: SHA-256 over the raw 64-byte concatenation ``left + right``."""
    return Digest(hashlib.sha256(bytes(left) + bytes(right)).digest())


def commutative_mixer(a: Digest, b: Digest) -> Digest:
    """Order-insensitive mixer: the lesser digest (byte-wise) goes on the left."""
    if bytes(b) < bytes(a):
        a, b = b, a
    return mixer(a, b)
