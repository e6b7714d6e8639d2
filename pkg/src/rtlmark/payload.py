"""Keyed payload encoding: model + developer signatures to opaque bytes.

The encoding is a keyed stream construction: length-framed signature bytes
XORed with a key-derived stream, followed by a 2-byte keyed checksum. It is
invertible under the same key and fails framing under any other; it makes no
claim of cryptographic strength beyond that contract.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BadFraming, PayloadTooLarge
from .keys import WatermarkKey, derive, keystream

MAC_LEN = 2
DEFAULT_MAX_BYTES = 32


@dataclass(frozen=True)
class Payload:
    model_signature: str
    developer_signature: str
    encoded: bytes


def encode_payload(model_sig: str, dev_sig: str, key: WatermarkKey,
                   max_bytes: int = DEFAULT_MAX_BYTES) -> Payload:
    if not model_sig or not dev_sig:
        raise ValueError("signatures must be non-empty")
    m = model_sig.encode("utf-8")
    d = dev_sig.encode("utf-8")
    if len(m) > 255 or len(d) > 255:
        raise PayloadTooLarge("signature longer than 255 bytes")
    body = bytes([len(m)]) + m + bytes([len(d)]) + d
    ks = keystream(key, "payload-stream", len(body))
    enc = bytes(a ^ b for a, b in zip(body, ks))
    mac = derive(key, "payload-mac", enc, size=MAC_LEN)
    encoded = enc + mac
    if len(encoded) > max_bytes:
        raise PayloadTooLarge(
            f"encoded payload is {len(encoded)} bytes, capacity is {max_bytes}")
    return Payload(model_sig, dev_sig, encoded)


def decode_payload(data: bytes, key: WatermarkKey) -> tuple[str, str]:
    """Exact inverse of encode_payload; BadFraming on any mismatch."""
    if len(data) < MAC_LEN + 2:
        raise BadFraming("payload too short")
    enc, mac = data[:-MAC_LEN], data[-MAC_LEN:]
    if derive(key, "payload-mac", enc, size=MAC_LEN) != mac:
        raise BadFraming("keyed checksum mismatch")
    ks = keystream(key, "payload-stream", len(enc))
    body = bytes(a ^ b for a, b in zip(enc, ks))
    mlen = body[0]
    if 1 + mlen + 1 > len(body):
        raise BadFraming("bad length framing")
    m = body[1:1 + mlen]
    dlen = body[1 + mlen]
    rest = body[2 + mlen:]
    if dlen != len(rest):
        raise BadFraming("bad length framing")
    try:
        return m.decode("utf-8"), rest.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadFraming("decoded signatures are not valid UTF-8") from exc
