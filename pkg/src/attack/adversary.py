"""
Eve: attacker actions, strategies and the interceptor that applies them.

Eve controls every channel of one victim verifier. Each message addressed to
or emitted by the victim reaches her first; she applies the action her
strategy assigns to that intercept point and delivers the result while
impersonating the original sender. She only ever re-sends values she has
observed.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

from core.bits import (BitString, PartialKey, Role, restore_partial,
                       swap_future_message_keys)
from core.errors import (InapplicableActionError, MissingKnowledgeError,
                         StrategyParseError)
from protocol.messages import (KeyDist, MessageKind, PartialShare,
                               WireMessage)

logger = logging.getLogger(__name__)


class AttackerAction(Enum):
    FORWARD_UNCHANGED = "forward"
    SWAP_KEY_DIST = "swap-keys"
    RESTORE_PARTIALS = "restore"
    SWAP_PARTIALS = "swap-partials"
    FLIP_MESSAGE = "flip"
    FLIP_MESSAGE_AND_FORWARD = "flip-forward"

    @classmethod
    def parse(cls, token: str) -> "AttackerAction":
        try:
            return cls(token.strip().lower())
        except ValueError:
            names = ", ".join(action.value for action in cls)
            raise ValueError(f"unknown action {token!r} (expected one of {names})") from None


ALL_ACTIONS = tuple(AttackerAction)

ACTION_KINDS: Dict[AttackerAction, frozenset] = {
    AttackerAction.FORWARD_UNCHANGED: frozenset(MessageKind),
    AttackerAction.SWAP_KEY_DIST: frozenset({MessageKind.KEY_DIST}),
    AttackerAction.RESTORE_PARTIALS: frozenset({MessageKind.PARTIAL_SHARE}),
    AttackerAction.SWAP_PARTIALS: frozenset({MessageKind.PARTIAL_SHARE}),
    AttackerAction.FLIP_MESSAGE: frozenset({MessageKind.SIGN, MessageKind.FORWARD}),
    AttackerAction.FLIP_MESSAGE_AND_FORWARD: frozenset({MessageKind.FORWARD}),
}

# flip-forward is the Forward-hop spelling of flip
_EFFECT = {AttackerAction.FLIP_MESSAGE_AND_FORWARD: AttackerAction.FLIP_MESSAGE}


def effect_of(action: AttackerAction) -> AttackerAction:
    return _EFFECT.get(action, action)


@dataclass(frozen=True)
class InterceptPoint:
    """The n-th message Eve intercepts in a run"""
    ordinal: int
    kind: MessageKind
    outgoing: bool = False  # emitted by the victim

    def describe(self) -> str:
        return f"{self.ordinal} {self.kind.value}"


# Same shape for either victim: keys in, own partials out, counterpart partials in,
# Alice's signature in, the victim's forward out.
INTERCEPT_POINTS: Tuple[InterceptPoint, ...] = (
    InterceptPoint(1, MessageKind.KEY_DIST),
    InterceptPoint(2, MessageKind.PARTIAL_SHARE, outgoing=True),
    InterceptPoint(3, MessageKind.PARTIAL_SHARE),
    InterceptPoint(4, MessageKind.SIGN),
    InterceptPoint(5, MessageKind.FORWARD, outgoing=True),
)


def is_applicable(action: AttackerAction, point: InterceptPoint) -> bool:
    """Whether action transforms the message seen at point.

    Restoration needs the owner's original keys, which Eve only learns for
    the victim, so it applies to the victim's own partial keys only.
    """
    if point.kind not in ACTION_KINDS[action]:
        return False
    if action is AttackerAction.RESTORE_PARTIALS:
        return point.outgoing
    return True


@dataclass(frozen=True)
class Knowledge:
    """Everything Eve has observed, in order. Only ever grows."""
    keys: Tuple[Tuple[Role, int, BitString], ...] = ()
    observed: Tuple[Union[BitString, PartialKey, int], ...] = ()

    def learn(self, msg: WireMessage) -> "Knowledge":
        payload = msg.payload
        keys = self.keys
        if isinstance(payload, KeyDist):
            values = (payload.k0, payload.k1)
            keys = keys + ((msg.intended_receiver, 0, payload.k0), (msg.intended_receiver, 1, payload.k1))
        elif isinstance(payload, PartialShare):
            values = (payload.p0, payload.p1)
        else:
            values = (payload.signed.m, payload.signed.sig_b, payload.signed.sig_c)
        return Knowledge(keys, self.observed + values)

    def key(self, owner: Role, future_message: int) -> Optional[BitString]:
        """The first key seen on its way to owner for future_message"""
        for role, index, key in self.keys:
            if role is owner and index == future_message:
                return key
        return None

    def __len__(self) -> int:
        return len(self.observed)


def apply_action(action: AttackerAction, msg: WireMessage,
                 knowledge: Knowledge) -> Tuple[WireMessage, Knowledge]:
    """Transform an intercepted message and re-address it as its original sender"""
    if msg.kind not in ACTION_KINDS[action]:
        raise InapplicableActionError(f"{action.value} does not apply to {msg.kind.value} messages")
    knowledge = knowledge.learn(msg)
    payload = msg.payload
    effect = effect_of(action)

    if effect is AttackerAction.SWAP_KEY_DIST:
        payload = KeyDist(*swap_future_message_keys(payload.k0, payload.k1))
    elif effect is AttackerAction.RESTORE_PARTIALS:
        owner = msg.true_sender
        k0, k1 = knowledge.key(owner, 0), knowledge.key(owner, 1)
        if k0 is None or k1 is None:
            raise MissingKnowledgeError(f"Eve has not seen the keys of {owner.letter} and cannot restore")
        payload = PartialShare(restore_partial(k0, payload.p0), restore_partial(k1, payload.p1))
    elif effect is AttackerAction.SWAP_PARTIALS:
        payload = PartialShare(payload.p1, payload.p0)
    elif effect is AttackerAction.FLIP_MESSAGE:
        payload = type(payload)(payload.signed.flipped())

    out = WireMessage(payload, claimed_sender=msg.true_sender, true_sender=Role.EVE,
                      intended_receiver=msg.intended_receiver)
    return out, knowledge


def annotate(action: AttackerAction, victim: Role) -> str:
    """Annotation text shown next to a forged delivery"""
    effect = effect_of(action)
    if effect is AttackerAction.SWAP_KEY_DIST:
        return f"swap k0{victim.letter},k1{victim.letter}"
    if effect is AttackerAction.RESTORE_PARTIALS:
        return f"restore kpart0{victim.letter},kpart1{victim.letter}"
    if effect is AttackerAction.SWAP_PARTIALS:
        return "swap partial keys"
    if effect is AttackerAction.FLIP_MESSAGE:
        return "swap m,not(m)"
    return ""


@dataclass(frozen=True)
class AttackerStrategy:
    """One action per intercept point against a single victim"""
    victim: Role
    actions: Tuple[AttackerAction, ...]

    def __post_init__(self):
        if self.victim not in (Role.BOB, Role.CHARLIE):
            raise InapplicableActionError(f"Eve can only interpose on a verifier, not {self.victim.name}")
        if len(self.actions) != len(INTERCEPT_POINTS):
            raise InapplicableActionError(
                f"a strategy assigns {len(INTERCEPT_POINTS)} actions, got {len(self.actions)}"
            )
        for point, action in zip(INTERCEPT_POINTS, self.actions):
            if not is_applicable(action, point):
                raise InapplicableActionError(
                    f"{action.value} is not applicable at intercept {point.describe()}"
                )

    def action_at(self, ordinal: int, kind: MessageKind) -> AttackerAction:
        if 1 <= ordinal <= len(INTERCEPT_POINTS) and INTERCEPT_POINTS[ordinal - 1].kind is kind:
            return self.actions[ordinal - 1]
        return AttackerAction.FORWARD_UNCHANGED

    @property
    def effects(self) -> Tuple[AttackerAction, ...]:
        return tuple(effect_of(action) for action in self.actions)

    def with_action(self, ordinal: int, action: AttackerAction) -> "AttackerStrategy":
        actions = list(self.actions)
        actions[ordinal - 1] = action
        return AttackerStrategy(self.victim, tuple(actions))

    def serialize(self) -> str:
        lines = [f"victim {self.victim.letter}"]
        for point, action in zip(INTERCEPT_POINTS, self.actions):
            lines.append(f"intercept {point.ordinal} {point.kind.value} -> {action.value}")
        return "\n".join(lines)


def strategy_from(victim: Role, assignments: Dict[int, AttackerAction]) -> AttackerStrategy:
    actions = tuple(assignments.get(point.ordinal, AttackerAction.FORWARD_UNCHANGED)
                    for point in INTERCEPT_POINTS)
    return AttackerStrategy(victim, actions)


def mitm_strategy(victim: Role = Role.BOB) -> AttackerStrategy:
    """Swap the victim's keys, restore its partials, swap the counterpart's
    partials, flip the signed bit and flip it back on the forward."""
    return AttackerStrategy(victim, (
        AttackerAction.SWAP_KEY_DIST,
        AttackerAction.RESTORE_PARTIALS,
        AttackerAction.SWAP_PARTIALS,
        AttackerAction.FLIP_MESSAGE,
        AttackerAction.FLIP_MESSAGE,
    ))


def naive_flip_strategy(victim: Role = Role.BOB) -> AttackerStrategy:
    """Flip the bit on Alice's signature and nothing else"""
    return strategy_from(victim, {4: AttackerAction.FLIP_MESSAGE})


def transparent_proxy(victim: Role = Role.BOB) -> AttackerStrategy:
    return strategy_from(victim, {})


class Eve:
    """Interceptor running one strategy for the length of a scenario"""

    def __init__(self, strategy: AttackerStrategy):
        self.strategy = strategy
        self.knowledge = Knowledge()
        self.intercepted = 0

    @property
    def victim(self) -> Role:
        return self.strategy.victim

    def intercept(self, msg: WireMessage) -> Tuple[WireMessage, str]:
        self.intercepted += 1
        action = self.strategy.action_at(self.intercepted, msg.kind)
        out, self.knowledge = apply_action(action, msg, self.knowledge)
        logger.debug(f"intercept {self.intercepted} {msg.kind.value}: {action.value}")
        return out, annotate(action, self.victim)


def _parse_line(words: Sequence[str], line: int, source: Optional[str]) -> Tuple[int, AttackerAction]:
    # intercept <ordinal> <kind> -> <action>
    if len(words) != 5 or words[0] != "intercept" or words[3] != "->":
        raise StrategyParseError("expected 'intercept <ordinal> <kind> -> <action>'", line, source)
    try:
        ordinal = int(words[1])
    except ValueError:
        raise StrategyParseError(f"ordinal {words[1]!r} is not a number", line, source) from None
    if not 1 <= ordinal <= len(INTERCEPT_POINTS):
        raise StrategyParseError(f"ordinal {ordinal} outside 1..{len(INTERCEPT_POINTS)}", line, source)
    point = INTERCEPT_POINTS[ordinal - 1]
    if words[2] != point.kind.value:
        raise StrategyParseError(
            f"intercept {ordinal} is a {point.kind.value} message, not {words[2]!r}", line, source
        )
    try:
        action = AttackerAction.parse(words[4])
    except ValueError as e:
        raise StrategyParseError(str(e), line, source) from None
    if not is_applicable(action, point):
        raise StrategyParseError(f"{action.value} is not applicable at intercept {point.describe()}",
                                 line, source)
    return ordinal, action


def parse_strategy(text: str, source: Optional[str] = None) -> AttackerStrategy:
    """Read the line-oriented strategy format.

    Blank lines and '#' comments are ignored; an optional 'victim B|C' line
    selects the victim (default B); unlisted intercepts forward unchanged.
    """
    victim = Role.BOB
    assignments: Dict[int, AttackerAction] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        words = content.split()
        if words[0] == "victim":
            if len(words) != 2 or words[1].upper() not in ("B", "C"):
                raise StrategyParseError("expected 'victim B' or 'victim C'", number, source)
            victim = Role(words[1].upper())
            continue
        ordinal, action = _parse_line(words, number, source)
        if ordinal in assignments:
            raise StrategyParseError(f"intercept {ordinal} assigned twice", number, source)
        assignments[ordinal] = action
    return strategy_from(victim, assignments)


def enumerate_points_actions(alphabet: Iterable[AttackerAction]) -> Tuple[Tuple[AttackerAction, ...], ...]:
    """Applicable actions per intercept point, one per distinct effect"""
    chosen = []
    allowed = set(alphabet)
    for point in INTERCEPT_POINTS:
        seen = set()
        options = []
        for action in ALL_ACTIONS:
            if action in allowed and is_applicable(action, point) and effect_of(action) not in seen:
                seen.add(effect_of(action))
                options.append(action)
        chosen.append(tuple(options))
    return tuple(chosen)
