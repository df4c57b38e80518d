"""
Wire messages exchanged between principals
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

from core.bits import BitString, PartialKey, Role, SignedMessage


class MessageKind(Enum):
    KEY_DIST = "keydist"
    PARTIAL_SHARE = "partials"
    SIGN = "sign"
    FORWARD = "forward"


@dataclass(frozen=True)
class KeyDist:
    """Alice's keys for one verifier, indexed by future message bit"""
    k0: BitString
    k1: BitString

    kind = MessageKind.KEY_DIST

    def render(self) -> str:
        return f"{self.k0},{self.k1}"


@dataclass(frozen=True)
class PartialShare:
    """A verifier's forwarded partial keys for m_f = 0 and 1"""
    p0: PartialKey
    p1: PartialKey

    kind = MessageKind.PARTIAL_SHARE

    def render(self) -> str:
        return f"{self.p0}; {self.p1}"


@dataclass(frozen=True)
class Sign:
    """Alice's signed message to the first verifier"""
    signed: SignedMessage

    kind = MessageKind.SIGN

    def render(self) -> str:
        return str(self.signed)


@dataclass(frozen=True)
class Forward:
    """The first verifier passing the signed message on"""
    signed: SignedMessage

    kind = MessageKind.FORWARD

    def render(self) -> str:
        return str(self.signed)


Payload = Union[KeyDist, PartialShare, Sign, Forward]


@dataclass(frozen=True)
class WireMessage:
    """A payload plus its addressing.

    claimed_sender equals true_sender for honest emissions; Eve sets
    claimed_sender to the principal she impersonates.
    """
    payload: Payload
    claimed_sender: Role
    true_sender: Role
    intended_receiver: Role

    @classmethod
    def honest(cls, payload: Payload, sender: Role, receiver: Role) -> "WireMessage":
        return cls(payload, sender, sender, receiver)

    @property
    def kind(self) -> MessageKind:
        return self.payload.kind

    @property
    def impersonated(self) -> bool:
        return self.claimed_sender is not self.true_sender

    def with_payload(self, payload: Payload) -> "WireMessage":
        return replace(self, payload=payload)
