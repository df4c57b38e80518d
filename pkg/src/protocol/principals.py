"""
State machines for Alice (signer) and the two verifiers.

Every transition is driven by a received message and returns a new state,
so a verifier cannot tell whether its peer is honest or Eve.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from core.bits import (BitString, Decision, KeyStore, PartialKey, Role, SeedLike,
                       SignedMessage, VerificationPolicy, decide, mask,
                       verify_full, verify_partial)
from core.errors import ConfigurationError, PhaseError
from .messages import Forward, KeyDist, PartialShare, Sign, WireMessage

logger = logging.getLogger(__name__)

MaskPair = Tuple[BitString, BitString]


class AlicePhase(Enum):
    FRESH = "fresh"
    DISTRIBUTED = "distributed"
    SIGNED = "signed"


class VerifierPhase(Enum):
    AWAIT_KEYS = "await-keys"
    AWAIT_PARTIALS = "await-partials"
    READY = "ready"
    DECIDED = "decided"


@dataclass(frozen=True)
class AliceState:
    keystore: KeyStore
    phase: AlicePhase = AlicePhase.FRESH
    signed_message: Optional[int] = None


@dataclass(frozen=True)
class Outcome:
    """A verifier's decision on the signed message it received"""
    principal: Role
    decision: Decision
    accepted_message: Optional[int]
    full_mismatches: int
    partial_mismatches: int

    def __post_init__(self):
        if (self.decision is Decision.ACCEPT) != (self.accepted_message is not None):
            raise ValueError("accepted_message is present exactly when the decision is accept")

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT


@dataclass(frozen=True)
class VerifierState:
    """Bob or Charlie"""
    role: Role
    phase: VerifierPhase = VerifierPhase.AWAIT_KEYS
    own_keys: Optional[Tuple[BitString, BitString]] = None
    masks: Optional[MaskPair] = None
    # elements kept back from the counterpart, per future message bit
    kept_record: Optional[Tuple[PartialKey, PartialKey]] = None
    counterpart_partials: Optional[Tuple[PartialKey, PartialKey]] = None
    outcome: Optional[Outcome] = None

    @classmethod
    def fresh(cls, role: Role) -> "VerifierState":
        if role not in (Role.BOB, Role.CHARLIE):
            raise ConfigurationError(f"{role.name} cannot verify")
        return cls(role)


def _require(actual, expected, what: str):
    if actual is not expected:
        raise PhaseError(f"{what} requires phase {expected.value}, current phase is {actual.value}")


def alice_distribute(state: AliceState) -> Tuple[WireMessage, WireMessage, AliceState]:
    """Send each verifier its two keys"""
    _require(state.phase, AlicePhase.FRESH, "key distribution")
    to_b = WireMessage.honest(KeyDist(*state.keystore.pair(Role.BOB)), Role.ALICE, Role.BOB)
    to_c = WireMessage.honest(KeyDist(*state.keystore.pair(Role.CHARLIE)), Role.ALICE, Role.CHARLIE)
    return to_b, to_c, replace(state, phase=AlicePhase.DISTRIBUTED)


def alice_sign(state: AliceState, m: int, destination: Role) -> Tuple[WireMessage, AliceState]:
    """Sign a single message bit; the keys are then spent"""
    if state.phase is AlicePhase.SIGNED:
        raise PhaseError(f"one-time signature already used for message {state.signed_message}")
    _require(state.phase, AlicePhase.DISTRIBUTED, "signing")
    if destination not in (Role.BOB, Role.CHARLIE):
        raise ConfigurationError(f"cannot sign to {destination.name}")
    signed = SignedMessage(m, state.keystore.key(m, Role.BOB), state.keystore.key(m, Role.CHARLIE))
    message = WireMessage.honest(Sign(signed), Role.ALICE, destination)
    return message, replace(state, phase=AlicePhase.SIGNED, signed_message=m)


def sample_masks(length: int, seed: SeedLike) -> MaskPair:
    """Independent uniform masks for m_f = 0 and 1"""
    rows = np.random.default_rng(seed).integers(0, 2, size=(2, length), dtype=np.uint8)
    return BitString.from_bits(rows[0].tolist()), BitString.from_bits(rows[1].tolist())


def verifier_receive_keys(state: VerifierState, msg: WireMessage, seed: SeedLike = None,
                          masks: Optional[MaskPair] = None) -> Tuple[WireMessage, VerifierState]:
    """Store the keys, choose masks and share the masked elements with the counterpart.

    Masks are sampled from seed unless given explicitly.
    """
    _require(state.phase, VerifierPhase.AWAIT_KEYS, "receiving keys")
    keys: KeyDist = msg.payload
    if masks is None:
        masks = sample_masks(len(keys.k0), seed)
    n0, n1 = masks
    share = PartialShare(mask(keys.k0, n0), mask(keys.k1, n1))
    kept = (mask(keys.k0, _complement(n0)), mask(keys.k1, _complement(n1)))
    outgoing = WireMessage.honest(share, state.role, state.role.counterpart)
    logger.debug(f"{state.role.letter} masks {n0},{n1} forward {share.render()}")
    return outgoing, replace(state, phase=VerifierPhase.AWAIT_PARTIALS, own_keys=(keys.k0, keys.k1),
                             masks=masks, kept_record=kept)


def verifier_receive_partials(state: VerifierState, msg: WireMessage) -> VerifierState:
    """Store the counterpart's partial keys"""
    _require(state.phase, VerifierPhase.AWAIT_PARTIALS, "receiving partial keys")
    share: PartialShare = msg.payload
    return replace(state, phase=VerifierPhase.READY, counterpart_partials=(share.p0, share.p1))


def verifier_check(state: VerifierState, msg: WireMessage, policy: VerificationPolicy,
                   forward_on_reject: bool = False
                   ) -> Tuple[Outcome, Optional[WireMessage], VerifierState]:
    """Check a signed message against the own key and the counterpart's partial key.

    The verifier that receives Alice's Sign forwards the signed message to the
    other verifier when it accepts (or always, with forward_on_reject).
    """
    _require(state.phase, VerifierPhase.READY, "checking a signature")
    signed: SignedMessage = msg.payload.signed
    m = signed.m
    own = state.own_keys[m]
    partial = state.counterpart_partials[m]
    full_mismatches = verify_full(signed.component(state.role), own)
    partial_mismatches = verify_partial(signed.component(state.role.counterpart), partial)
    decision = decide(full_mismatches, partial_mismatches, len(own), policy, len(partial))
    outcome = Outcome(state.role, decision, m if decision is Decision.ACCEPT else None,
                      full_mismatches, partial_mismatches)
    logger.debug(f"{state.role.letter} {decision.value} m={m} "
                 f"(full={full_mismatches}, partial={partial_mismatches})")

    forward = None
    if isinstance(msg.payload, Sign) and (outcome.accepted or forward_on_reject):
        forward = WireMessage.honest(Forward(signed), state.role, state.role.counterpart)
    return outcome, forward, replace(state, phase=VerifierPhase.DECIDED, outcome=outcome)


def _complement(bits: BitString) -> BitString:
    return BitString(~bits.bits)
