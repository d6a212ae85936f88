"""Key-to-bin hashing.

Two kinds are supported, mirroring real deployments: the default is bare
modulo (bin = key mod nbins, free when nbins is a power of two), which is
what latency-obsessed clients use when their keys are already uniform.
The alternative is a 64-bit avalanche mixer for adversarial or structured
key distributions.

The mixer is the splitmix64 finalizer: invertible (a bijection on 64-bit
words), passes standard avalanche tests, and is cheap enough in pure
Python.  Bijectivity is also load-bearing for the benchmark harness, which
derives guaranteed-distinct key streams by mixing distinct inputs.
"""

from __future__ import annotations

__all__ = [
    "HashKind",
    "MOD",
    "STRONG",
    "mix64",
    "unmix64",
    "mix_bytes",
    "key_word_of",
    "bin_of",
]

_M = 0xFFFFFFFFFFFFFFFF


class HashKind:
    MOD = "mod"
    STRONG = "strong"


MOD = HashKind.MOD
STRONG = HashKind.STRONG


def mix64(x: int) -> int:
    """splitmix64 finalizer: 64-bit avalanche bijection."""
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _M
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _M
    return x ^ (x >> 31)


def unmix64(x: int) -> int:
    """Inverse of :func:`mix64` (used to audit reserved-key preimages)."""
    x ^= (x >> 31) ^ (x >> 62)
    x = x * 0x319642B2D24D8EC3 & _M  # modular inverse of 0x94D049BB133111EB
    x ^= (x >> 27) ^ (x >> 54)
    x = x * 0x96DE1B173F119089 & _M  # modular inverse of 0xBF58476D1CE4E5B9
    x ^= (x >> 30) ^ (x >> 60)
    return x


def mix_bytes(key: bytes) -> int:
    """Avalanche hash of an arbitrary byte string to a 64-bit word."""
    h = 0x9E3779B97F4A7C15 ^ (len(key) << 1)
    for off in range(0, len(key), 8):
        chunk = int.from_bytes(key[off : off + 8], "little")
        h = mix64(h ^ chunk)
    return h


def key_word_of(key: bytes) -> int:
    """The 8 least significant bytes of a byte key, as a little-endian word.

    This is both the slot signature for oversized keys and the full key
    word for keys of at most 8 bytes (the key length disambiguates equal
    words of different lengths).
    """
    return int.from_bytes(key[:8], "little")


def bin_of(key, kind: str, nbins: int) -> int:
    """Map a 64-bit integer or byte-string key to its bin.

    ``nbins`` must be a power of two so the modulo is a mask.
    """
    mask = nbins - 1
    if isinstance(key, int):
        if kind == MOD:
            return key & mask
        return mix64(key) & mask
    if kind == MOD:
        return key_word_of(key) & mask
    return mix_bytes(key) & mask
