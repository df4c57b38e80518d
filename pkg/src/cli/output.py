"""
Text and line-delimited JSON renderings of runs, search reports and statistics
"""

import json
from typing import Any, Dict, List, Optional

from core.bits import VERIFIERS, Role
from attack.search import ViolationReport
from attack.stats import COUNTERS, AcceptanceTally
from protocol.network import ScenarioResult
from protocol.transcript import Delivery

COUNTER_LABELS = {
    "victim_accept": "victim accept",
    "victim_accept_flipped": "victim accept flipped",
    "counterpart_accept": "counterpart accept",
}


def _record(kind: str, /, **fields: Any) -> str:
    return json.dumps({"record": kind, **fields})


def render_outcome_line(result: ScenarioResult, role: Role) -> str:
    outcome = result.outcome(role)
    if outcome is None:
        return f"{role.letter}: no decision"
    mismatches = f"(full mismatches {outcome.full_mismatches}, partial mismatches {outcome.partial_mismatches})"
    if outcome.accepted:
        return f"{role.letter}: accept {outcome.accepted_message} {mismatches}"
    return f"{role.letter}: reject {mismatches}"


def run_header(result: ScenarioResult, policy: str, seed: Optional[int]) -> str:
    source = "instance=pinned" if seed is None else f"seed={seed}"
    return (f"# scenario={result.scenario.name} L={result.instance.length} "
            f"m={result.instance.message} policy={policy} {source}")


def render_run_text(result: ScenarioResult, policy: str, seed: Optional[int], consistent: bool) -> str:
    lines = [run_header(result, policy, seed), result.transcript.render()]
    lines.extend(render_outcome_line(result, role) for role in VERIFIERS)
    lines.append(f"verdict: {'consistent' if consistent else 'inconsistent'}")
    return "\n".join(lines)


def delivery_record(delivery: Delivery) -> Dict[str, Any]:
    return {
        "step": delivery.step,
        "true_sender": delivery.true_sender.letter,
        "claimed_sender": delivery.claimed_sender.letter,
        "intended_receiver": delivery.message.intended_receiver.letter,
        "receiver": delivery.receiver.letter,
        "kind": delivery.kind.value,
        "payload": delivery.message.payload.render(),
        "annotation": delivery.annotation,
    }


def render_run_structured(result: ScenarioResult, policy: str, seed: Optional[int], consistent: bool) -> str:
    lines = [_record("run", scenario=result.scenario.name, key_length=result.instance.length,
                     message=result.instance.message, policy=policy, seed=seed)]
    lines.extend(_record("delivery", **delivery_record(delivery)) for delivery in result.transcript)
    for role in VERIFIERS:
        outcome = result.outcome(role)
        if outcome is None:
            lines.append(_record("outcome", principal=role.letter, decision=None, accepted_message=None,
                                 full_mismatches=None, partial_mismatches=None))
        else:
            lines.append(_record("outcome", principal=role.letter, decision=outcome.decision.value,
                                 accepted_message=outcome.accepted_message,
                                 full_mismatches=outcome.full_mismatches,
                                 partial_mismatches=outcome.partial_mismatches))
    lines.append(_record("verdict", consistent=consistent))
    return "\n".join(lines)


def render_search_text(reports: List[ViolationReport], header: str, found_mitm: bool) -> str:
    lines = [header]
    for index, report in enumerate(reports, start=1):
        lines.append(f"== violation {index} ==")
        lines.append(report.render())
    summary = f"== {len(reports)} universal violation(s)"
    if reports:
        summary += "; reference attack " + ("found" if found_mitm else "not found")
    lines.append(summary + " ==")
    return "\n".join(lines)


def render_search_structured(reports: List[ViolationReport], found_mitm: bool) -> str:
    lines = [
        _record("violation", goal=report.goal.value, universal=report.universal,
                instances_checked=report.instances_checked, victim=report.strategy.victim.letter,
                strategy=[action.value for action in report.strategy.actions],
                witness=report.witness.render(),
                transcript=[delivery.render() for delivery in report.transcript])
        for report in reports
    ]
    lines.append(_record("summary", violations=len(reports), mitm_found=found_mitm))
    return "\n".join(lines)


def render_stats_text(header: str, counts: AcceptanceTally, exact: Optional[Dict] = None) -> str:
    lines = [header]
    for name in COUNTERS:
        count = getattr(counts, name)
        line = (f"{COUNTER_LABELS[name]:<22} {count}/{counts.trials}  "
                f"{counts.rate(name):.6f} (se {counts.standard_error(name):.6f})")
        if exact is not None:
            line += f"  exact {exact[name]} = {float(exact[name]):.6f}"
        lines.append(line)
    return "\n".join(lines)


def render_stats_structured(counts: AcceptanceTally, exact: Optional[Dict] = None) -> str:
    lines = []
    for name in COUNTERS:
        fields = {"counter": name, "count": getattr(counts, name), "trials": counts.trials,
                  "rate": counts.rate(name), "standard_error": counts.standard_error(name)}
        if exact is not None:
            fields["exact"] = str(exact[name])
        lines.append(_record("rate", **fields))
    return "\n".join(lines)
