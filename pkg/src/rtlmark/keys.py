"""Watermark key material and keyed parameter derivation.

Every key-dependent choice a transformation makes (bit orderings, rename
suffixes, comment tags, payload keystream) is derived from a keyed hash of
the key secret plus a domain label and site discriminators, so detection can
recompute the same parameters and an independent key produces independent
signatures.
"""

from __future__ import annotations

import hashlib
import os
import secrets
from dataclasses import dataclass

SECRET_LEN = 32


@dataclass(frozen=True)
class WatermarkKey:
    secret: bytes
    key_id: str = "default"

    def __post_init__(self):
        if len(self.secret) != SECRET_LEN:
            raise ValueError(f"key secret must be {SECRET_LEN} bytes")


def generate_key(key_id: str = "default") -> WatermarkKey:
    return WatermarkKey(secrets.token_bytes(SECRET_LEN), key_id)


def key_from_seed(seed: int, key_id: str = "seeded") -> WatermarkKey:
    """Deterministic key for tests and reproducible runs."""
    secret = hashlib.blake2b(seed.to_bytes(8, "big"), digest_size=SECRET_LEN).digest()
    return WatermarkKey(secret, key_id)


def save_key(key: WatermarkKey, path: str) -> None:
    data = key.secret.hex() + "\n"
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w") as f:
        f.write(data)


def load_key(path: str, key_id: str | None = None) -> WatermarkKey:
    with open(path) as f:
        secret = bytes.fromhex(f.read().strip())
    return WatermarkKey(secret, key_id or os.path.basename(path))


def _encode_parts(parts) -> bytes:
    out = bytearray()
    for p in parts:
        if isinstance(p, str):
            b = p.encode("utf-8")
        elif isinstance(p, bytes):
            b = p
        elif isinstance(p, int):
            b = p.to_bytes((max(p.bit_length(), 1) + 7) // 8, "big", signed=False) \
                if p >= 0 else repr(p).encode()
        elif isinstance(p, (tuple, list)):
            b = _encode_parts(p)
        else:
            raise TypeError(f"cannot derive from {type(p).__name__}")
        out += len(b).to_bytes(4, "big") + b
    return bytes(out)


def derive(key: WatermarkKey, *parts, size: int = 32) -> bytes:
    """Keyed hash of length-prefixed parts; up to 64 bytes per call."""
    h = hashlib.blake2b(_encode_parts(parts), key=key.secret, digest_size=size)
    return h.digest()


def keystream(key: WatermarkKey, label: str, length: int) -> bytes:
    """Counter-mode keyed stream of `length` bytes."""
    out = bytearray()
    counter = 0
    while len(out) < length:
        out += derive(key, label, counter, size=64)
        counter += 1
    return bytes(out[:length])


def derive_int(key: WatermarkKey, *parts, below: int) -> int:
    """Uniform-ish integer in [0, below) keyed by parts."""
    if below <= 0:
        raise ValueError("below must be positive")
    raw = int.from_bytes(derive(key, *parts, size=8), "big")
    return raw % below


def derive_bit(key: WatermarkKey, *parts) -> int:
    return derive(key, *parts, size=1)[0] & 1


def derive_bits(key: WatermarkKey, *parts, count: int) -> list[int]:
    raw = keystream(key, "bits:" + repr(_encode_parts(parts)), (count + 7) // 8)
    return [(raw[i // 8] >> (i % 8)) & 1 for i in range(count)]


def derive_permutation(key: WatermarkKey, *parts, n: int) -> tuple[int, ...]:
    """Keyed Fisher-Yates permutation of range(n)."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = derive_int(key, *parts, "perm", i, below=i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return tuple(perm)


_SUFFIX_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def derive_suffix(key: WatermarkKey, *parts, length: int = 4) -> str:
    """Short lowercase tag suitable for identifier suffixes."""
    raw = derive(key, *parts, size=length)
    return "".join(_SUFFIX_ALPHABET[b % 26] for b in raw)


def derive_hex(key: WatermarkKey, *parts, length: int = 8) -> str:
    return derive(key, *parts, size=(length + 1) // 2).hex()[:length]
