"""
Acceptance rates of the verifiers under an attacker strategy
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Tuple

from core.bits import EXACT_MATCH, PolicyMode, VerificationPolicy
from core.errors import ConfigurationError
from protocol.network import (Custom, ProtocolInstance, all_instances, run_scenario,
                              sample_instance, trial_seed)
from .adversary import AttackerStrategy

logger = logging.getLogger(__name__)

# beyond this the full instance grid (2 * 2^(8L)) is too large to run
BRUTE_FORCE_LENGTH = 2

COUNTERS = ("victim_accept", "victim_accept_flipped", "counterpart_accept")


@dataclass
class AcceptanceTally:
    """Counts over a batch of runs"""
    trials: int = 0
    victim_accept: int = 0
    victim_accept_flipped: int = 0
    counterpart_accept: int = 0

    def add(self, other: "AcceptanceTally"):
        self.trials += other.trials
        for name in COUNTERS:
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def rate(self, counter: str) -> float:
        return getattr(self, counter) / self.trials if self.trials else 0.0

    def standard_error(self, counter: str) -> float:
        p = self.rate(counter)
        return math.sqrt(p * (1 - p) / self.trials) if self.trials else 0.0

    def exact_rates(self) -> Dict[str, Fraction]:
        return {name: Fraction(getattr(self, name), self.trials) for name in COUNTERS}


def tally(strategy: AttackerStrategy, instances: Iterable[ProtocolInstance],
          policy: VerificationPolicy = EXACT_MATCH, forward_on_reject: bool = False) -> AcceptanceTally:
    victim = strategy.victim
    counterpart = victim.counterpart
    counts = AcceptanceTally()
    for instance in instances:
        result = run_scenario(Custom(strategy), instance, policy, forward_on_reject)
        counts.trials += 1
        victim_bit = result.accepted(victim)
        if victim_bit is not None:
            counts.victim_accept += 1
            if victim_bit != instance.message:
                counts.victim_accept_flipped += 1
        if result.accepted(counterpart) is not None:
            counts.counterpart_accept += 1
    return counts


def sampled_acceptance(strategy: AttackerStrategy, length: int, trials: int, seed: int,
                       policy: VerificationPolicy = EXACT_MATCH,
                       forward_on_reject: bool = False) -> AcceptanceTally:
    """Monte Carlo estimate; trial i runs on the instance drawn from (seed, i)"""
    if trials < 1:
        raise ConfigurationError(f"trials must be at least 1, got {trials}")
    if length < 1:
        raise ConfigurationError(f"key length must be at least 1, got {length}")
    instances = (sample_instance(length, trial_seed(seed, index)) for index in range(trials))
    counts = tally(strategy, instances, policy, forward_on_reject)
    logger.info(f"{trials} trials at L={length}: victim accepted {counts.victim_accept}")
    return counts


def _split_by_message(strategy: AttackerStrategy, policy: VerificationPolicy,
                      forward_on_reject: bool) -> Tuple[AcceptanceTally, AcceptanceTally]:
    per_message = (AcceptanceTally(), AcceptanceTally())
    for instance in all_instances(1):
        per_message[instance.message].add(tally(strategy, [instance], policy, forward_on_reject))
    return per_message


def exact_acceptance(strategy: AttackerStrategy, length: int,
                     policy: VerificationPolicy = EXACT_MATCH,
                     forward_on_reject: bool = False) -> Dict[str, Fraction]:
    """Exact rates over uniform keys, masks and message.

    Up to BRUTE_FORCE_LENGTH every instance is run. Beyond it, exact matching
    makes each decision a conjunction of independent per-element checks once
    the message bit is fixed, so the rate is the mean over m of the
    single-element rate for m raised to the power L.
    """
    if length < 1:
        raise ConfigurationError(f"key length must be at least 1, got {length}")
    if length <= BRUTE_FORCE_LENGTH:
        return tally(strategy, all_instances(length), policy, forward_on_reject).exact_rates()
    if policy.mode is not PolicyMode.EXACT:
        raise ConfigurationError(f"exact rates beyond L={BRUTE_FORCE_LENGTH} need exact matching")
    per_message = [counts.exact_rates() for counts in _split_by_message(strategy, policy, forward_on_reject)]
    return {
        name: (per_message[0][name] ** length + per_message[1][name] ** length) / 2
        for name in COUNTERS
    }
