"""
Channel fabric, protocol instances and the scenario runner.

Channels between honest principals are confidential and authentic. Eve's only
power is interposition: under full control of a victim every message to or
from the victim is delivered to her instead, and what she sends is delivered
as if it came from the principal she impersonates.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.bits import (EXACT_MATCH, KeyStore, Role, SeedLike, VerificationPolicy,
                       all_bitstrings, generate_keys)
from core.errors import ConfigurationError, PhaseError, ScenarioDeadlockError
from attack.adversary import AttackerStrategy, Eve, mitm_strategy
from .messages import MessageKind, WireMessage
from .principals import (AliceState, MaskPair, Outcome, VerifierPhase, VerifierState,
                         alice_distribute, alice_sign, sample_masks,
                         verifier_check, verifier_receive_keys,
                         verifier_receive_partials)
from .transcript import Transcript

logger = logging.getLogger(__name__)


class InterpositionMode(Enum):
    NONE = "none"
    FULL_CONTROL = "full-control"


@dataclass(frozen=True)
class InterpositionConfig:
    victim: Optional[Role] = None
    mode: InterpositionMode = InterpositionMode.NONE

    def __post_init__(self):
        if (self.victim is not None) != (self.mode is InterpositionMode.FULL_CONTROL):
            raise ConfigurationError("a victim is named exactly when Eve has full control")

    @classmethod
    def full_control(cls, victim: Role) -> "InterpositionConfig":
        return cls(victim, InterpositionMode.FULL_CONTROL)


NO_INTERPOSITION = InterpositionConfig()


def route(msg: WireMessage, config: InterpositionConfig) -> Role:
    """Actual receiver of a message"""
    if config.mode is InterpositionMode.NONE or msg.true_sender is Role.EVE:
        return msg.intended_receiver
    if config.victim in (msg.intended_receiver, msg.true_sender):
        return Role.EVE
    return msg.intended_receiver


@dataclass(frozen=True)
class Honest:
    name = "honest"


@dataclass(frozen=True)
class Attack:
    """The reference man-in-the-middle attack against victim"""
    victim: Role = Role.BOB

    @property
    def name(self) -> str:
        return f"attack-{self.victim.letter.lower()}"


@dataclass(frozen=True)
class Custom:
    strategy: AttackerStrategy
    name = "custom"


Scenario = Union[Honest, Attack, Custom]


def scenario_strategy(scenario: Scenario) -> Optional[AttackerStrategy]:
    if isinstance(scenario, Attack):
        return mitm_strategy(scenario.victim)
    if isinstance(scenario, Custom):
        return scenario.strategy
    return None


def first_verifier(scenario: Scenario) -> Role:
    """Recipient of Alice's signed message; Eve's victim when there is one"""
    strategy = scenario_strategy(scenario)
    return strategy.victim if strategy else Role.BOB


@dataclass(frozen=True)
class ProtocolInstance:
    """Everything random in a run: keys, both verifiers' masks, the message"""
    keystore: KeyStore
    masks_b: MaskPair
    masks_c: MaskPair
    message: int

    def __post_init__(self):
        if self.message not in (0, 1):
            raise ConfigurationError(f"message must be 0 or 1, got {self.message!r}")
        for mask_vector in self.masks_b + self.masks_c:
            if len(mask_vector) != self.keystore.length:
                raise ConfigurationError("masks must have the key length")

    @property
    def length(self) -> int:
        return self.keystore.length

    def masks(self, role: Role) -> MaskPair:
        return self.masks_b if role is Role.BOB else self.masks_c

    def render(self) -> str:
        masks = ",".join(str(n) for n in self.masks_b + self.masks_c)
        return f"L={self.length} m={self.message} keys={self.keystore} masks={masks}"


def _as_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def instance_from_seed(length: int, seed: SeedLike, message: int) -> ProtocolInstance:
    """Keys and masks drawn from independent streams spawned from seed"""
    if length < 1:
        raise ConfigurationError(f"key length must be at least 1, got {length}")
    keys_seed, masks_b_seed, masks_c_seed = _as_sequence(seed).spawn(3)
    return ProtocolInstance(generate_keys(length, keys_seed), sample_masks(length, masks_b_seed),
                            sample_masks(length, masks_c_seed), message)


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent seed for trial index of a seeded batch"""
    return np.random.SeedSequence(seed, spawn_key=(index,))


def sample_instance(length: int, seed: SeedLike) -> ProtocolInstance:
    """Random instance including a uniformly drawn message bit"""
    message_seed, instance_seed = _as_sequence(seed).spawn(2)
    message = int(np.random.default_rng(message_seed).integers(0, 2))
    return instance_from_seed(length, instance_seed, message)


def all_instances(length: int) -> Iterator[ProtocolInstance]:
    """Every key store, every mask quadruple and both messages (2 * 2^(8L) instances)"""
    strings = all_bitstrings(length)
    for keys in itertools.product(strings, repeat=4):
        keystore = KeyStore(*keys)
        for n0b, n1b, n0c, n1c in itertools.product(strings, repeat=4):
            for message in (0, 1):
                yield ProtocolInstance(keystore, (n0b, n1b), (n0c, n1c), message)


def instance_count(length: int) -> int:
    return 2 * 2 ** (8 * length)


@dataclass
class ScenarioResult:
    scenario: Scenario
    instance: ProtocolInstance
    transcript: Transcript
    outcomes: Tuple[Outcome, ...]

    def outcome(self, role: Role) -> Optional[Outcome]:
        for outcome in self.outcomes:
            if outcome.principal is role:
                return outcome
        return None

    def accepted(self, role: Role) -> Optional[int]:
        """Message bit role accepted, None when it rejected or never decided"""
        outcome = self.outcome(role)
        return outcome.accepted_message if outcome else None


class ScenarioRunner:
    """Drives one protocol run in protocol order, one message in flight"""

    def __init__(self, scenario: Scenario, instance: ProtocolInstance,
                 policy: VerificationPolicy = EXACT_MATCH, forward_on_reject: bool = False):
        self.scenario = scenario
        self.instance = instance
        self.policy = policy
        self.forward_on_reject = forward_on_reject

        strategy = scenario_strategy(scenario)
        self.eve = Eve(strategy) if strategy else None
        self.config = InterpositionConfig.full_control(strategy.victim) if strategy else NO_INTERPOSITION
        self.first = first_verifier(scenario)
        self.second = self.first.counterpart

        self.alice = AliceState(instance.keystore)
        self.verifiers: Dict[Role, VerifierState] = {
            Role.BOB: VerifierState.fresh(Role.BOB),
            Role.CHARLIE: VerifierState.fresh(Role.CHARLIE),
        }
        self.outbox: Dict[Role, WireMessage] = {}
        self.outcomes: List[Outcome] = []
        self.transcript = Transcript()

    def run(self) -> ScenarioResult:
        to_b, to_c, self.alice = alice_distribute(self.alice)
        key_messages = {Role.BOB: to_b, Role.CHARLIE: to_c}
        self.deliver(key_messages[self.second])
        self.deliver(key_messages[self.first])

        for role in (self.first, self.second):
            if role in self.outbox:
                self.deliver(self.outbox.pop(role))

        waiting = [role.letter for role, state in self.verifiers.items()
                   if state.phase is not VerifierPhase.READY]
        if waiting:
            raise ScenarioDeadlockError(f"verifier(s) {', '.join(waiting)} still await key material")

        sign, self.alice = alice_sign(self.alice, self.instance.message, self.first)
        self.deliver(sign)

        logger.debug(f"{self.scenario.name} finished after {len(self.transcript)} deliveries")
        return ScenarioResult(self.scenario, self.instance, self.transcript, tuple(self.outcomes))

    def deliver(self, msg: WireMessage, annotation: str = ""):
        receiver = route(msg, self.config)
        self.transcript.record(msg, receiver, annotation)
        if receiver is Role.EVE:
            out, out_annotation = self.eve.intercept(msg)
            self.deliver(out, out_annotation)
        else:
            self.dispatch(msg, receiver)

    def dispatch(self, msg: WireMessage, receiver: Role):
        if receiver not in self.verifiers:
            raise PhaseError(f"{receiver.name} does not accept {msg.kind.value} messages")
        state = self.verifiers[receiver]
        if msg.kind is MessageKind.KEY_DIST:
            share, state = verifier_receive_keys(state, msg, masks=self.instance.masks(receiver))
            self.outbox[receiver] = share
            self.verifiers[receiver] = state
        elif msg.kind is MessageKind.PARTIAL_SHARE:
            self.verifiers[receiver] = verifier_receive_partials(state, msg)
        else:
            outcome, forward, state = verifier_check(state, msg, self.policy, self.forward_on_reject)
            self.verifiers[receiver] = state
            self.outcomes.append(outcome)
            if forward is not None:
                self.deliver(forward)


def run_scenario(scenario: Scenario, instance: ProtocolInstance,
                 policy: VerificationPolicy = EXACT_MATCH,
                 forward_on_reject: bool = False) -> ScenarioResult:
    """Run the full protocol once; deterministic in (scenario, instance, policy)"""
    return ScenarioRunner(scenario, instance, policy, forward_on_reject).run()


def simulate(scenario: Scenario, length: int, seed: SeedLike, message: int,
             policy: VerificationPolicy = EXACT_MATCH,
             forward_on_reject: bool = False) -> ScenarioResult:
    """run_scenario on the instance drawn from seed"""
    return run_scenario(scenario, instance_from_seed(length, seed, message), policy, forward_on_reject)


def replay_verifier(role: Role, received: Sequence[WireMessage], masks: MaskPair,
                    policy: VerificationPolicy = EXACT_MATCH) -> VerifierState:
    """Feed a recorded message sequence to a fresh verifier"""
    state = VerifierState.fresh(role)
    for msg in received:
        if msg.kind is MessageKind.KEY_DIST:
            _, state = verifier_receive_keys(state, msg, masks=masks)
        elif msg.kind is MessageKind.PARTIAL_SHARE:
            state = verifier_receive_partials(state, msg)
        else:
            _, _, state = verifier_check(state, msg, policy)
    return state
