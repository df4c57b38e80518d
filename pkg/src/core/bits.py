"""
Bit-level primitives shared by every principal: bitstrings, keys, masking,
partial keys and the verification arithmetic of the classical P2 protocol.

Position 0 is the first element of a bitstring and is always rendered first.
A mask bit of 1 means "forward this element to the counterpart verifier",
so mask(k, n) is exactly the partial key that travels on the wire.
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Tuple, Union

import numpy as np
from bitarray import frozenbitarray
from bitarray.util import count_xor

from .errors import ConfigurationError, LengthMismatchError, PositionOutOfRangeError

SeedLike = Union[int, np.random.SeedSequence, None]


class Role(Enum):
    """Protocol principals"""
    ALICE = "A"
    BOB = "B"
    CHARLIE = "C"
    EVE = "E"

    @property
    def letter(self) -> str:
        return self.value

    @property
    def counterpart(self) -> "Role":
        """The other verifier"""
        if self is Role.BOB:
            return Role.CHARLIE
        if self is Role.CHARLIE:
            return Role.BOB
        raise ValueError(f"{self.name} is not a verifier")

    @classmethod
    def verifier(cls, text: str) -> "Role":
        """Parse B or C"""
        try:
            role = cls(text.strip().upper())
        except ValueError:
            raise ConfigurationError(f"unknown verifier {text!r}, expected B or C") from None
        if role not in VERIFIERS:
            raise ConfigurationError(f"{text!r} is not a verifier, expected B or C")
        return role


VERIFIERS = (Role.BOB, Role.CHARLIE)


@dataclass(frozen=True)
class BitString:
    """Fixed-length sequence of bits: keys, masks and signatures"""
    bits: frozenbitarray

    def __post_init__(self):
        if len(self.bits) < 1:
            raise ConfigurationError("bitstrings must hold at least one element")

    @classmethod
    def parse(cls, text: str) -> "BitString":
        """Build from a "1011" rendering"""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ConfigurationError(f"not a bitstring: {text!r}")
        return cls(frozenbitarray(text))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        return cls(frozenbitarray([int(b) for b in bits]))

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, position: int) -> int:
        return self.bits[position]

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __str__(self) -> str:
        return self.bits.to01()


def all_bitstrings(length: int) -> Tuple[BitString, ...]:
    """Every bitstring of the given length, in counting order"""
    return tuple(BitString.from_bits(bits) for bits in itertools.product((0, 1), repeat=length))


@dataclass(frozen=True)
class PartialKey:
    """Positioned subset of a key's bits, the value of mask(k, n)"""
    entries: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        previous = -1
        for position, bit in self.entries:
            if position <= previous:
                raise ConfigurationError(
                    f"partial key positions must be strictly increasing: {position} after {previous}"
                )
            if bit not in (0, 1):
                raise ConfigurationError(f"partial key bit at {position} is {bit!r}")
            previous = position

    @classmethod
    def parse(cls, text: str) -> "PartialKey":
        """Build from a "1:0,2:1" rendering ("-" is the empty partial)"""
        text = text.strip()
        if text == "-":
            return cls()
        entries = []
        for item in text.split(","):
            position, _, bit = item.partition(":")
            try:
                entries.append((int(position), int(bit)))
            except ValueError:
                raise ConfigurationError(f"not a partial key entry: {item!r}") from None
        return cls(tuple(entries))

    def check_range(self, length: int):
        for position, _ in self.entries:
            if not 0 <= position < length:
                raise PositionOutOfRangeError(position, length)

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        if not self.entries:
            return "-"
        return ",".join(f"{position}:{bit}" for position, bit in self.entries)


@dataclass(frozen=True)
class KeyStore:
    """Alice's four secret keys, indexed by future message bit and recipient"""
    k0b: BitString
    k1b: BitString
    k0c: BitString
    k1c: BitString

    def __post_init__(self):
        lengths = {len(key) for key in (self.k0b, self.k1b, self.k0c, self.k1c)}
        if len(lengths) != 1:
            raise LengthMismatchError(min(lengths), max(lengths), "key store entries")

    @classmethod
    def parse(cls, text: str) -> "KeyStore":
        """Build from "k0B,k1B,k0C,k1C" """
        parts = [part for part in text.split(",")]
        if len(parts) != 4:
            raise ConfigurationError(f"a key store needs four keys, got {len(parts)}")
        return cls(*(BitString.parse(part) for part in parts))

    @property
    def length(self) -> int:
        return len(self.k0b)

    def key(self, future_message: int, recipient: Role) -> BitString:
        return self.pair(recipient)[future_message]

    def pair(self, recipient: Role) -> Tuple[BitString, BitString]:
        """(k0, k1) destined for one verifier"""
        if recipient is Role.BOB:
            return self.k0b, self.k1b
        if recipient is Role.CHARLIE:
            return self.k0c, self.k1c
        raise ValueError(f"no keys are generated for {recipient.name}")

    def __str__(self) -> str:
        return ",".join(str(key) for key in (self.k0b, self.k1b, self.k0c, self.k1c))


@dataclass(frozen=True)
class SignedMessage:
    """(m, k_mB, k_mC) as sent by Alice"""
    m: int
    sig_b: BitString
    sig_c: BitString

    def __post_init__(self):
        if self.m not in (0, 1):
            raise ConfigurationError(f"message must be a single bit, got {self.m!r}")
        if len(self.sig_b) != len(self.sig_c):
            raise LengthMismatchError(len(self.sig_b), len(self.sig_c), "signature components")

    def component(self, role: Role) -> BitString:
        return self.sig_b if role is Role.BOB else self.sig_c

    def flipped(self) -> "SignedMessage":
        return SignedMessage(1 - self.m, self.sig_b, self.sig_c)

    def __str__(self) -> str:
        return f"{self.m},{self.sig_b},{self.sig_c}"


class PolicyMode(Enum):
    EXACT = "exact"
    THRESHOLD = "threshold"


class Decision(Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class VerificationPolicy:
    """How many mismatches a verifier tolerates"""
    mode: PolicyMode = PolicyMode.EXACT
    max_mismatch_fraction: Fraction = Fraction(0)

    def __post_init__(self):
        if not 0 <= self.max_mismatch_fraction < 1:
            raise ConfigurationError(
                f"threshold fraction must lie in [0, 1), got {self.max_mismatch_fraction}"
            )
        if self.mode is PolicyMode.EXACT and self.max_mismatch_fraction != 0:
            raise ConfigurationError("exact matching takes no threshold fraction")

    @classmethod
    def exact(cls) -> "VerificationPolicy":
        return cls()

    @classmethod
    def threshold(cls, fraction: Union[Fraction, float, str]) -> "VerificationPolicy":
        return cls(PolicyMode.THRESHOLD, Fraction(fraction))

    @classmethod
    def parse(cls, text: str) -> "VerificationPolicy":
        """Parse "exact" or "threshold:<fraction>" """
        name, _, value = text.strip().partition(":")
        if name == PolicyMode.EXACT.value and not value:
            return cls.exact()
        if name == PolicyMode.THRESHOLD.value and value:
            try:
                return cls.threshold(Fraction(value))
            except (ValueError, ZeroDivisionError):
                raise ConfigurationError(f"bad threshold fraction {value!r}") from None
        raise ConfigurationError(f"unknown verification policy {text!r}")

    def __str__(self) -> str:
        if self.mode is PolicyMode.EXACT:
            return "exact"
        return f"threshold:{self.max_mismatch_fraction}"


EXACT_MATCH = VerificationPolicy.exact()


def generate_keys(length: int, seed: SeedLike) -> KeyStore:
    """Draw Alice's four keys uniformly and independently"""
    if length < 1:
        raise ConfigurationError(f"key length must be at least 1, got {length}")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 2, size=(4, length), dtype=np.uint8)
    return KeyStore(*(BitString.from_bits(row.tolist()) for row in rows))


def mask(key: BitString, mask_vector: BitString) -> PartialKey:
    """Select the elements of key whose mask bit is 1"""
    if len(key) != len(mask_vector):
        raise LengthMismatchError(len(key), len(mask_vector), "key and mask")
    return PartialKey(tuple(
        (position, key[position]) for position, bit in enumerate(mask_vector) if bit
    ))


def verify_full(sig: BitString, stored_key: BitString) -> int:
    """Number of positions where the signature differs from the stored key"""
    if len(sig) != len(stored_key):
        raise LengthMismatchError(len(sig), len(stored_key), "signature and key")
    return count_xor(sig.bits, stored_key.bits)


def verify_partial(sig: BitString, partial: PartialKey) -> int:
    """Number of partial entries the signature contradicts"""
    partial.check_range(len(sig))
    return sum(1 for position, bit in partial.entries if sig[position] != bit)


def decide(full_mismatches: int, partial_mismatches: int, length: int,
           policy: VerificationPolicy, partial_size: Optional[int] = None) -> Decision:
    """Accept or reject given the mismatch counts of both checks"""
    if policy.mode is PolicyMode.EXACT:
        accepted = full_mismatches == 0 and partial_mismatches == 0
    else:
        if partial_size is None:
            partial_size = length
        fraction = policy.max_mismatch_fraction
        accepted = (full_mismatches <= math.floor(fraction * length)
                    and partial_mismatches <= math.floor(fraction * partial_size))
    return Decision.ACCEPT if accepted else Decision.REJECT


def swap_future_message_keys(k0: BitString, k1: BitString) -> Tuple[BitString, BitString]:
    """Rebind each key to the other future message bit"""
    if len(k0) != len(k1):
        raise LengthMismatchError(len(k0), len(k1), "swapped keys")
    return k1, k0


def restore_partial(original_key: BitString, partial_from_swapped: PartialKey) -> PartialKey:
    """Keep the positions of a partial key but read the bits from original_key.

    The positions of mask(k', n) are the 1-positions of n, so this equals
    mask(original_key, n) without knowing n in advance.
    """
    partial_from_swapped.check_range(len(original_key))
    return PartialKey(tuple(
        (position, original_key[position]) for position, _ in partial_from_swapped.entries
    ))
