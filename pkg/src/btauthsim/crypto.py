"""Key material, the keyed mixing function behind E1/E2/E3, and Diffie-Hellman arithmetic.

All operations are pure functions on value types and safe to call from any
thread. Octet widths follow the Bluetooth wire formats: 48-bit addresses,
128-bit challenges and keys, 32-bit signed responses, 96-bit ciphering offset.
"""

from dataclasses import dataclass
import struct

__all__ = [
    "DeviceId",
    "Challenge",
    "Sres",
    "Aco",
    "LinkKey",
    "InitKey",
    "SessionKey",
    "Pin",
    "DhParams",
    "DhKeyPair",
    "mixhash128",
    "e1",
    "init_key",
    "combination_link_key",
    "encryption_key",
    "modexp",
    "is_prime",
    "prime_factors",
    "is_primitive_root",
    "has_full_order",
    "dh_keypair",
    "dh_shared",
    "session_key_from_shared",
    "xor_bytes",
]


def _check_width(name: str, value: bytes, width: int) -> None:
    if not isinstance(value, (bytes, bytearray)):
        raise TypeError(f"{name} must be bytes, got {type(value).__name__}")
    if len(value) != width:
        raise ValueError(f"{name} must be exactly {width} octets, got {len(value)}")


@dataclass(frozen=True)
class DeviceId:
    """48-bit hardware address (BD_ADDR). Renders as 12 lowercase hex digits."""

    addr: bytes

    def __post_init__(self):
        _check_width("DeviceId.addr", self.addr, 6)

    def __str__(self) -> str:
        return self.addr.hex()

    @classmethod
    def from_hex(cls, text: str) -> "DeviceId":
        return cls(bytes.fromhex(text))


@dataclass(frozen=True)
class Challenge:
    """128-bit random authentication challenge (AU_RAND)."""

    value: bytes

    def __post_init__(self):
        _check_width("Challenge.value", self.value, 16)


@dataclass(frozen=True)
class Sres:
    """32-bit signed response to a challenge."""

    value: bytes

    def __post_init__(self):
        _check_width("Sres.value", self.value, 4)


@dataclass(frozen=True)
class Aco:
    """96-bit authenticated ciphering offset, the secondary E1 output."""

    value: bytes

    def __post_init__(self):
        _check_width("Aco.value", self.value, 12)


@dataclass(frozen=True)
class LinkKey:
    """128-bit long-term shared secret used for authentication."""

    value: bytes

    def __post_init__(self):
        _check_width("LinkKey.value", self.value, 16)


@dataclass(frozen=True)
class InitKey:
    """128-bit bootstrap key used when no link key exists yet."""

    value: bytes

    def __post_init__(self):
        _check_width("InitKey.value", self.value, 16)


@dataclass(frozen=True)
class SessionKey:
    """128-bit key derived from a completed Diffie-Hellman exchange."""

    value: bytes

    def __post_init__(self):
        _check_width("SessionKey.value", self.value, 16)


@dataclass(frozen=True)
class Pin:
    """PIN code of 1 to 16 octets, factory value or user-entered."""

    digits: bytes

    def __post_init__(self):
        if not isinstance(self.digits, (bytes, bytearray)):
            raise TypeError("Pin.digits must be bytes")
        if not 1 <= len(self.digits) <= 16:
            raise ValueError(f"PIN length must be in [1, 16] octets, got {len(self.digits)}")


_MASK64 = 0xFFFFFFFFFFFFFFFF
_MULT = 0x9E3779B97F4A7C15
_S0_INIT = 0x736F6D6570736575
_S1_INIT = 0x646F72616E646F6D


def _rotl13(x: int) -> int:
    return ((x << 13) & _MASK64) | (x >> 51)


def _rotl32(x: int) -> int:
    return ((x << 32) & _MASK64) | (x >> 32)


def mixhash128(data: bytes) -> bytes:
    """Deterministic 128-bit keyed-mixing digest of an octet sequence.

    Wire-format contract (bit-exact, so independent implementations produce
    identical transcripts): the input is padded with a single 0x80 octet,
    then 0x00 octets up to a multiple of 8, then one final 8-octet block
    holding the original length in octets, little-endian. Each 8-octet block
    m (read as a little-endian u64) updates the two 64-bit lanes with
    wrapping arithmetic:

        s0 = rotl64(s0 ^ m, 13) * 0x9E3779B97F4A7C15
        s1 = (s1 + s0) ^ rotl64(s1, 32)

    followed by four trailing block steps with m = 0. The digest is the
    little-endian octets of s0 then s1.
    """
    s0 = _S0_INIT
    s1 = _S1_INIT
    buf = bytes(data) + b"\x80" + b"\x00" * ((-len(data) - 1) % 8) + struct.pack("<Q", len(data))
    for (m,) in struct.iter_unpack("<Q", buf):
        s0 = (_rotl13(s0 ^ m) * _MULT) & _MASK64
        s1 = ((s1 + s0) & _MASK64) ^ _rotl32(s1)
    for _ in range(4):
        s0 = (_rotl13(s0) * _MULT) & _MASK64
        s1 = ((s1 + s0) & _MASK64) ^ _rotl32(s1)
    return struct.pack("<QQ", s0, s1)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("xor_bytes operands must have equal length")
    return bytes(x ^ y for x, y in zip(a, b))


# Domain-separation tags keep the authentication, link-key, encryption-key,
# and session-key uses of the one mixing function disjoint.
_TAG_AUTH = b"\x01"
_TAG_INIT_KEY = b"\x02"
_TAG_LINK_KEY = b"\x03"
_TAG_ENC_KEY = b"\x04"
_TAG_SESSION = b"\x05"


def e1(key: LinkKey, challenge: Challenge, claimant: DeviceId) -> tuple[Sres, Aco]:
    """Authentication function: 32-bit response plus 96-bit ciphering offset.

    The full 16-octet digest splits exactly into Sres (first 4 octets) and
    Aco (remaining 12).
    """
    digest = mixhash128(_TAG_AUTH + key.value + challenge.value + claimant.addr)
    return Sres(digest[:4]), Aco(digest[4:])


def init_key(pin: Pin, addr: DeviceId, rand: Challenge) -> InitKey:
    """Bootstrap key from PIN, PIN length, hardware address, and a random number."""
    material = _TAG_INIT_KEY + pin.digits + bytes([len(pin.digits)]) + addr.addr + rand.value
    return InitKey(mixhash128(material))


def combination_link_key(
    rand_a: Challenge, addr_a: DeviceId, rand_b: Challenge, addr_b: DeviceId
) -> LinkKey:
    """XOR combination of the two sides' (random, address) contributions.

    Symmetric in the two contribution pairs; equal contributions cancel to
    the all-zero key.
    """
    half_a = mixhash128(_TAG_LINK_KEY + rand_a.value + addr_a.addr)
    half_b = mixhash128(_TAG_LINK_KEY + rand_b.value + addr_b.addr)
    return LinkKey(xor_bytes(half_a, half_b))


def encryption_key(key: LinkKey, aco: Aco, en_rand: Challenge) -> bytes:
    """Encryption key derived from the link key, ciphering offset, and a random."""
    return mixhash128(_TAG_ENC_KEY + key.value + aco.value + en_rand.value)


def modexp(base: int, exponent: int, modulus: int) -> int:
    """Square-and-multiply base**exponent mod modulus."""
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if exponent < 0:
        raise ValueError(f"exponent must be non-negative, got {exponent}")
    result = 1
    acc = base % modulus
    e = exponent
    while e > 0:
        if e & 1:
            result = result * acc % modulus
        acc = acc * acc % modulus
        e >>= 1
    return result


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Miller-Rabin with a fixed base set; deterministic below 3.3e24."""
    if n < 2:
        return False
    for small in _MR_BASES:
        if n % small == 0:
            return n == small
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = modexp(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors by trial division; intended for desk-scale n."""
    if n < 2:
        return []
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        factors.append(n)
    return factors


def is_primitive_root(alpha: int, p: int) -> bool:
    """True iff the powers alpha^1..alpha^(p-1) cover all p-1 residues.

    Walks the full cycle, so O(p): desk-scale p only. Raises if p is not
    prime.
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    alpha %= p
    if alpha == 0:
        return False
    cur = 1
    for k in range(1, p):
        cur = cur * alpha % p
        if cur == 1:
            return k == p - 1
    return False


def has_full_order(alpha: int, p: int) -> bool:
    """Primitive-root check via the prime factorization of p-1.

    Equivalent to is_primitive_root but needs only the factorization, so it
    also covers moduli too large to enumerate (used for startup validation).
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    alpha %= p
    if alpha == 0:
        return False
    return all(modexp(alpha, (p - 1) // q, p) != 1 for q in prime_factors(p - 1))


@dataclass(frozen=True)
class DhParams:
    """Public group: prime modulus p and a generator candidate alpha.

    Construction enforces primality, alpha in [2, p-1], and p < 2^128 so the
    shared secret always fits the 16-octet session-key derivation. Whether
    alpha really generates the full group is the caller's check
    (is_primitive_root / has_full_order); scenario validation performs it.
    """

    p: int
    alpha: int

    def __post_init__(self):
        if self.p >= 1 << 128:
            raise ValueError("p must be below 2^128")
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if not 2 <= self.alpha <= self.p - 1:
            raise ValueError(f"alpha must be in [2, p-1], got {self.alpha}")


@dataclass(frozen=True)
class DhKeyPair:
    """Per-device exchange pair: private exponent and public power."""

    r_private: int
    s_public: int


def dh_keypair(params: DhParams, r: int) -> DhKeyPair:
    """Key pair with public value alpha^r mod p; r must lie in [1, p-1]."""
    if not 1 <= r <= params.p - 1:
        raise ValueError(f"private exponent must be in [1, p-1], got {r}")
    return DhKeyPair(r_private=r, s_public=modexp(params.alpha, r, params.p))


def dh_shared(params: DhParams, peer_public: int, r: int) -> int:
    """Shared secret peer_public^r mod p; both directions agree."""
    if not 1 <= peer_public <= params.p - 1:
        raise ValueError(f"peer public value must be in [1, p-1], got {peer_public}")
    return modexp(peer_public, r, params.p)


def session_key_from_shared(k: int, params: DhParams) -> SessionKey:
    """Bind the shared integer and group modulus into a uniform 128-bit key."""
    if not 0 <= k <= params.p - 1:
        raise ValueError(f"shared value must be in [0, p-1], got {k}")
    material = _TAG_SESSION + k.to_bytes(16, "big") + params.p.to_bytes(16, "big")
    return SessionKey(mixhash128(material))
