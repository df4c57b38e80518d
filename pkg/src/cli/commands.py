"""
Subcommand handlers. Each takes the parsed arguments and the loaded settings
and returns the process exit status.
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from core.bits import BitString, KeyStore, Role
from core.config import Config, RunConfig, SearchRun, StatsRun
from core.database import DatabaseManager, RunRecord, StatsRecord, ViolationRecord
from core.errors import ConfigurationError
from attack.adversary import (ALL_ACTIONS, AttackerAction, AttackerStrategy,
                              mitm_strategy, naive_flip_strategy, parse_strategy,
                              transparent_proxy)
from attack.search import SecurityGoal, contains_mitm, search
from attack.stats import exact_acceptance, sampled_acceptance
from protocol.network import (Attack, Custom, Honest, ProtocolInstance, Scenario, ScenarioResult,
                              instance_from_seed, run_scenario)
from . import output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INCONSISTENT = 1
EXIT_ERROR = 2
EXIT_NO_VIOLATION = 3

NAMED_STRATEGIES = {
    "naive": naive_flip_strategy,
    "mitm": mitm_strategy,
    "proxy": transparent_proxy,
}


def _first(*values):
    for value in values:
        if value is not None:
            return value
    return None


def load_strategy_file(path: Path) -> AttackerStrategy:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read strategy file {path}: {e.strerror}") from None
    return parse_strategy(text, source=str(path))


def resolve_strategy(name: str, victim: Role) -> AttackerStrategy:
    """A named strategy against victim, or a strategy file"""
    if name in NAMED_STRATEGIES:
        return NAMED_STRATEGIES[name](victim)
    return load_strategy_file(Path(name))


def parse_alphabet(text: str) -> List[AttackerAction]:
    try:
        return [AttackerAction.parse(token) for token in text.split(",") if token.strip()]
    except ValueError as e:
        raise ConfigurationError(str(e)) from None


def open_store(args: argparse.Namespace, config: Config) -> Optional[DatabaseManager]:
    url = args.db or config.database_url
    if not url:
        return None
    store = DatabaseManager(url, echo=config.database_config.echo)
    store.initialize()
    return store


# ---------------------------------------------------------------- run


def build_run_config(args: argparse.Namespace, config: Config) -> RunConfig:
    """Flags over the settings file over the defaults"""
    protocol = config.protocol_config
    run = config.run_config
    return RunConfig.build(
        scenario=_first(args.scenario, run.scenario),
        strategy_file=args.strategy,
        key_length=_first(args.key_length, protocol.key_length),
        seed=_first(args.seed, run.seed),
        message=str(_first(args.message, run.message)),
        policy=_first(args.policy, protocol.policy),
        output=_first(args.output, run.output),
        forward_on_reject=_first(args.forward_on_reject, protocol.forward_on_reject),
        keys=args.keys,
        masks=args.masks,
    )


def scenario_for(run: RunConfig) -> Scenario:
    if run.scenario == "honest":
        return Honest()
    if run.scenario == "attack-b":
        return Attack(Role.BOB)
    if run.scenario == "attack-c":
        return Attack(Role.CHARLIE)
    return Custom(load_strategy_file(run.strategy_file))


def pinned_instance(keys: str, masks: str, message: int) -> ProtocolInstance:
    keystore = KeyStore.parse(keys)
    vectors = [BitString.parse(part) for part in masks.split(",")]
    if len(vectors) != 4:
        raise ConfigurationError(f"masks need four vectors n0B,n1B,n0C,n1C, got {len(vectors)}")
    return ProtocolInstance(keystore, (vectors[0], vectors[1]), (vectors[2], vectors[3]), message)


def behaves_as_predicted(scenario: Scenario, result: ScenarioResult) -> bool:
    """Honest runs end with both verifiers accepting the signed bit; attacks
    with the victim accepting its complement and the counterpart the signed
    bit. Custom strategies carry no prediction."""
    m = result.instance.message
    if isinstance(scenario, Honest):
        return result.accepted(Role.BOB) == m and result.accepted(Role.CHARLIE) == m
    if isinstance(scenario, Attack):
        return (result.accepted(scenario.victim) == 1 - m
                and result.accepted(scenario.victim.counterpart) == m)
    return True


def run_record(result: ScenarioResult, run: RunConfig, consistent: bool) -> RunRecord:
    bob, charlie = result.outcome(Role.BOB), result.outcome(Role.CHARLIE)
    return RunRecord(
        scenario=result.scenario.name,
        key_length=result.instance.length,
        seed=None if run.pinned else run.seed,
        message=result.instance.message,
        policy=run.policy,
        instance=result.instance.render(),
        transcript=result.transcript.render(),
        bob_decision=bob.decision.value if bob else None,
        bob_message=bob.accepted_message if bob else None,
        charlie_decision=charlie.decision.value if charlie else None,
        charlie_message=charlie.accepted_message if charlie else None,
        consistent=consistent,
    )


def cmd_run(args: argparse.Namespace, config: Config) -> int:
    run = build_run_config(args, config)
    scenario = scenario_for(run)
    policy = run.verification_policy
    seed = None if run.pinned else run.seed

    blocks, records = [], []
    all_consistent = True
    for m in run.messages:
        if run.pinned:
            instance = pinned_instance(run.keys, run.masks, m)
            if args.key_length is not None and args.key_length != instance.length:
                raise ConfigurationError(
                    f"--L {args.key_length} disagrees with the pinned keys of length {instance.length}"
                )
        else:
            instance = instance_from_seed(run.key_length, run.seed, m)
        result = run_scenario(scenario, instance, policy, run.forward_on_reject)
        consistent = behaves_as_predicted(scenario, result)
        all_consistent = all_consistent and consistent
        if run.output == "structured":
            blocks.append(output.render_run_structured(result, str(policy), seed, consistent))
        else:
            blocks.append(output.render_run_text(result, str(policy), seed, consistent))
        records.append(run_record(result, run, consistent))
        logger.info(f"{scenario.name} m={m}: {'consistent' if consistent else 'inconsistent'}")

    separator = "\n" if run.output == "structured" else "\n\n"
    print(separator.join(blocks))

    store = open_store(args, config)
    if store is not None:
        store.add_all(records)
    return EXIT_OK if all_consistent else EXIT_INCONSISTENT


# ---------------------------------------------------------------- search


def build_search_run(args: argparse.Namespace, config: Config) -> SearchRun:
    protocol = config.protocol_config
    settings = config.search_config
    return SearchRun.build(
        key_length=_first(args.key_length, settings.key_length),
        policy=_first(args.policy, protocol.policy),
        output=_first(args.output, config.run_config.output),
        forward_on_reject=_first(args.forward_on_reject, protocol.forward_on_reject),
        goal=_first(args.goal, settings.goal),
        alphabet=args.alphabet.split(",") if args.alphabet else settings.alphabet,
        victim=_first(args.victim, settings.victim),
        workers=_first(args.workers, settings.workers),
    )


def cmd_search(args: argparse.Namespace, config: Config) -> int:
    run = build_search_run(args, config)
    goal = SecurityGoal.parse(run.goal)
    length = run.key_length
    alphabet = parse_alphabet(",".join(run.alphabet))
    victim = Role.verifier(run.victim)
    policy = run.verification_policy

    reports = search(goal, length, policy, alphabet, victim, run.workers, run.forward_on_reject)
    found = contains_mitm(reports)

    if run.output == "structured":
        print(output.render_search_structured(reports, found))
    else:
        header = (f"# search goal={goal.value} L={length} policy={policy} victim={victim.letter} "
                  f"alphabet={','.join(action.value for action in alphabet)}")
        print(output.render_search_text(reports, header, found))

    store = open_store(args, config)
    if store is not None:
        store.add_all([
            ViolationRecord(goal=goal.value, key_length=length, victim=victim.letter,
                            strategy=report.strategy.serialize(), universal=report.universal,
                            witness=report.witness.render(), transcript=report.transcript.render())
            for report in reports
        ])

    if not reports:
        return EXIT_NO_VIOLATION
    if set(alphabet) == set(ALL_ACTIONS) and not found:
        logger.error("the reference man-in-the-middle strategy is missing from the search results")
        return EXIT_INCONSISTENT
    return EXIT_OK


# ---------------------------------------------------------------- stats


def build_stats_run(args: argparse.Namespace, config: Config) -> StatsRun:
    protocol = config.protocol_config
    settings = config.stats_config
    return StatsRun.build(
        key_length=_first(args.key_length, protocol.key_length),
        policy=_first(args.policy, protocol.policy),
        output=_first(args.output, config.run_config.output),
        forward_on_reject=_first(args.forward_on_reject, protocol.forward_on_reject),
        strategy=_first(args.strategy, settings.strategy),
        victim=_first(args.victim, settings.victim),
        trials=_first(args.trials, settings.trials),
        seed=_first(args.seed, config.run_config.seed),
        exact=args.exact,
    )


def cmd_stats(args: argparse.Namespace, config: Config) -> int:
    run = build_stats_run(args, config)
    name = run.strategy
    strategy = resolve_strategy(name, Role.verifier(run.victim))
    length, trials, seed = run.key_length, run.trials, run.seed
    policy = run.verification_policy

    counts = sampled_acceptance(strategy, length, trials, seed, policy, run.forward_on_reject)
    exact = exact_acceptance(strategy, length, policy, run.forward_on_reject) if run.exact else None

    if run.output == "structured":
        print(output.render_stats_structured(counts, exact))
    else:
        header = (f"# stats strategy={name} victim={strategy.victim.letter} L={length} "
                  f"trials={trials} seed={seed} policy={policy}")
        print(output.render_stats_text(header, counts, exact))

    store = open_store(args, config)
    if store is not None:
        store.add_all([StatsRecord(strategy=strategy.serialize(), key_length=length, seed=seed,
                                   trials=counts.trials, victim_accept=counts.victim_accept,
                                   victim_accept_flipped=counts.victim_accept_flipped,
                                   counterpart_accept=counts.counterpart_accept)])
    return EXIT_OK


# ---------------------------------------------------------------- config


def cmd_config(args: argparse.Namespace, config: Config) -> int:
    if args.action == "show":
        print(config.dumps())
        return EXIT_OK
    path = Path(args.path)
    if path.exists() and not args.force:
        raise ConfigurationError(f"{path} already exists (use --force to overwrite)")
    config.save_config(path)
    logger.info(f"wrote settings to {path}")
    return EXIT_OK
