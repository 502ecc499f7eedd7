"""Keyed deterministic randomness.

All randomness in bin construction flows through :class:`KeyStream`, a
SHA-256 counter-mode generator. It depends only on the key bytes and a
derivation label, so the same key reproduces the same draws on every
platform and Python version (unlike ``random.Random`` state pickling or
hash-seeded iteration orders). Test vectors live in tests/test_keys.py.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field


def derive_key(passphrase: str) -> bytes:
    """Turn a UTF-8 passphrase into key bytes (SHA-256 digest)."""
    return hashlib.sha256(passphrase.encode("utf-8")).digest()


@dataclass(frozen=True)
class SecretKey:
    """Opaque key bytes plus a short public fingerprint."""

    data: bytes

    @classmethod
    def from_passphrase(cls, passphrase: str) -> "SecretKey":
        return cls(derive_key(passphrase))

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(b"fingerprint/" + self.data).hexdigest()[:16]

    def stream(self, label: str) -> "KeyStream":
        """Derive an independent stream for one labeled purpose."""
        return KeyStream(self.data, label)


class KeyStream:
    """Deterministic byte stream: block_i = SHA256(key || label || i)."""

    def __init__(self, key: bytes, label: str):
        self._prefix = key + b"/" + label.encode("utf-8") + b"/"
        self._counter = 0
        self._buf = b""

    def _refill(self) -> None:
        block = hashlib.sha256(
            self._prefix + self._counter.to_bytes(8, "big")
        ).digest()
        self._counter += 1
        self._buf += block

    def bytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            self._refill()
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling on 64-bit words."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = int.from_bytes(self.bytes(8), "big")
            if x < limit:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: list, k: int) -> list:
        """k draws without replacement, in draw order."""
        if k > len(items):
            raise ValueError("sample larger than population")
        pool = list(items)
        out = []
        for _ in range(k):
            j = self.randbelow(len(pool))
            out.append(pool.pop(j))
        return out
