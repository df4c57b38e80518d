"""
Bounded attacker-strategy search.

A concrete-execution model checker: every strategy drawn from an action
alphabet (one action per intercept point) is run against every protocol
instance of a small key length, and a strategy is reported when a security
goal is violated on every instance.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Iterable, Iterator, List, Optional, Tuple, Union

from core.bits import EXACT_MATCH, Role, VerificationPolicy
from core.errors import ConfigurationError
from protocol.network import (Custom, ProtocolInstance, ScenarioResult, all_instances,
                              run_scenario, sample_instance, trial_seed)
from protocol.transcript import Transcript
from .adversary import (ALL_ACTIONS, INTERCEPT_POINTS, AttackerAction, AttackerStrategy,
                        enumerate_points_actions, mitm_strategy)

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_LENGTH = 4


class SecurityGoal(Enum):
    TRANSFERABILITY_VIOLATION = "transferability"
    FORGERY_ACCEPTANCE = "forgery"

    @classmethod
    def parse(cls, text: str) -> "SecurityGoal":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ConfigurationError(f"unknown goal {text!r}, expected transferability or forgery") from None


def goal_holds(goal: SecurityGoal, result: ScenarioResult) -> bool:
    """Whether a finished run violates the goal"""
    if goal is SecurityGoal.TRANSFERABILITY_VIOLATION:
        b, c = result.accepted(Role.BOB), result.accepted(Role.CHARLIE)
        return b is not None and c is not None and b != c
    signed = result.instance.message
    return any(outcome.accepted and outcome.accepted_message != signed for outcome in result.outcomes)


@dataclass(frozen=True)
class Exhaustive:
    length: int


@dataclass(frozen=True)
class Sampled:
    length: int
    count: int
    seed: int


TestInstances = Union[Exhaustive, Sampled]


def iter_instances(instances: TestInstances) -> Iterator[ProtocolInstance]:
    if isinstance(instances, Exhaustive):
        if instances.length > MAX_EXHAUSTIVE_LENGTH:
            raise ConfigurationError(
                f"exhaustive checking is bounded to L <= {MAX_EXHAUSTIVE_LENGTH}, got {instances.length}"
            )
        return all_instances(instances.length)
    return (sample_instance(instances.length, trial_seed(instances.seed, index))
            for index in range(instances.count))


@dataclass
class ViolationReport:
    strategy: AttackerStrategy
    goal: SecurityGoal
    witness: ProtocolInstance
    transcript: Transcript
    universal: bool
    instances_checked: int

    @property
    def kind(self) -> str:
        return "universal" if self.universal else "opportunistic"

    def replays(self, policy: VerificationPolicy = EXACT_MATCH, forward_on_reject: bool = False) -> bool:
        """Re-run the witness and confirm the violation"""
        result = run_scenario(Custom(self.strategy), self.witness, policy, forward_on_reject)
        return goal_holds(self.goal, result) and result.transcript.render() == self.transcript.render()

    def render(self) -> str:
        return "\n".join([
            f"goal {self.goal.value} {self.kind} ({self.instances_checked} instances checked)",
            self.strategy.serialize(),
            f"witness {self.witness.render()}",
            self.transcript.render(),
        ])


def enumerate_strategies(alphabet: Iterable[AttackerAction] = ALL_ACTIONS,
                         intercept_points: int = len(INTERCEPT_POINTS),
                         victim: Role = Role.BOB) -> Iterator[AttackerStrategy]:
    """Every assignment of an applicable alphabet action to each intercept point"""
    if intercept_points != len(INTERCEPT_POINTS):
        raise ConfigurationError(
            f"the interposed scenario has {len(INTERCEPT_POINTS)} intercept points, not {intercept_points}"
        )
    for actions in itertools.product(*enumerate_points_actions(alphabet)):
        yield AttackerStrategy(victim, actions)


def check_strategy(strategy: AttackerStrategy, goal: SecurityGoal, instances: TestInstances,
                   policy: VerificationPolicy = EXACT_MATCH, forward_on_reject: bool = False,
                   require_universal: bool = False) -> Optional[ViolationReport]:
    """Report the first instance violating goal and whether every instance does.

    With require_universal the check stops at the first non-violating instance.
    """
    witness = None
    universal = True
    checked = 0
    for instance in iter_instances(instances):
        result = run_scenario(Custom(strategy), instance, policy, forward_on_reject)
        checked += 1
        if goal_holds(goal, result):
            if witness is None:
                witness = result
            continue
        universal = False
        if require_universal or witness is not None:
            break
    if witness is None or (require_universal and not universal):
        return None
    return ViolationReport(strategy, goal, witness.instance, witness.transcript, universal, checked)


def search(goal: SecurityGoal, length: int, policy: VerificationPolicy = EXACT_MATCH,
           alphabet: Iterable[AttackerAction] = ALL_ACTIONS, victim: Role = Role.BOB,
           workers: int = 1, forward_on_reject: bool = False) -> List[ViolationReport]:
    """All strategies violating goal on every instance of key length"""
    if not 1 <= length <= MAX_EXHAUSTIVE_LENGTH:
        raise ConfigurationError(f"search runs exhaustively for 1 <= L <= {MAX_EXHAUSTIVE_LENGTH}, got {length}")
    strategies = list(enumerate_strategies(alphabet, len(INTERCEPT_POINTS), victim))
    logger.info(f"searching {len(strategies)} strategies for {goal.value} at L={length}")
    check = partial(check_strategy, goal=goal, instances=Exhaustive(length), policy=policy,
                    forward_on_reject=forward_on_reject, require_universal=True)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, strategies))
    else:
        results = [check(strategy) for strategy in strategies]
    reports = sorted((report for report in results if report is not None),
                     key=lambda report: report.strategy.serialize())
    logger.info(f"{len(reports)} universal violation(s) found")
    return reports


def contains_mitm(reports: Iterable[ViolationReport]) -> bool:
    """Whether the reference man-in-the-middle action sequence is among the reports"""
    reference = mitm_strategy().effects
    return any(report.strategy.effects == reference for report in reports)


def ablations(strategy: AttackerStrategy) -> List[Tuple[int, AttackerStrategy]]:
    """Each single non-forward action replaced by ForwardUnchanged"""
    return [
        (ordinal, strategy.with_action(ordinal, AttackerAction.FORWARD_UNCHANGED))
        for ordinal, action in enumerate(strategy.actions, start=1)
        if action is not AttackerAction.FORWARD_UNCHANGED
    ]
