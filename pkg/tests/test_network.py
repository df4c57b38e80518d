"""
Tests for routing, protocol instances and the scenario runner
"""

import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers, sampled_from

from core.bits import BitString, KeyStore, Role, VerificationPolicy
from core.errors import ConfigurationError
from attack.adversary import mitm_strategy, naive_flip_strategy, transparent_proxy
from protocol.messages import KeyDist, MessageKind, WireMessage
from protocol.network import (NO_INTERPOSITION, Attack, Custom, Honest, InterpositionConfig,
                              InterpositionMode, ScenarioRunner, all_instances,
                              instance_count, instance_from_seed, replay_verifier, route,
                              run_scenario, sample_instance, simulate, trial_seed)

HONEST_TRANSCRIPT = """\
1. A -> C : 1,0
2. A -> B : 0,1
3. B -> C : 0:0; 0:1
4. C -> B : 0:1; 0:0
5. A -> B : 0,0,1
6. B -> C : 0,0,1"""

ATTACK_C_TRANSCRIPT = """\
1. A -> B : 0,1
2. A -> E(C) : 1,0
3. E(A) -> C : 0,1 [swap k0C,k1C]
4. C -> E(B) : 0:0; 0:1
5. E(C) -> B : 0:1; 0:0 [restore kpart0C,kpart1C]
6. B -> E(C) : 0:0; 0:1
7. E(B) -> C : 0:1; 0:0 [swap partial keys]
8. A -> E(C) : 0,0,1
9. E(A) -> C : 1,0,1 [swap m,not(m)]
10. C -> E(B) : 1,0,1
11. E(C) -> B : 0,0,1 [swap m,not(m)]"""


def keydist(sender, receiver):
    keys = KeyDist(BitString.parse("0"), BitString.parse("1"))
    return WireMessage(keys, sender, sender, receiver)


class TestRouting:

    def test_no_interposition_delivers_to_intended_receiver(self):
        assert route(keydist(Role.ALICE, Role.BOB), NO_INTERPOSITION) is Role.BOB

    def test_full_control_diverts_victim_traffic(self):
        config = InterpositionConfig.full_control(Role.BOB)
        assert route(keydist(Role.ALICE, Role.BOB), config) is Role.EVE
        assert route(keydist(Role.BOB, Role.CHARLIE), config) is Role.EVE
        assert route(keydist(Role.ALICE, Role.CHARLIE), config) is Role.CHARLIE

    def test_eve_output_reaches_its_receiver(self):
        config = InterpositionConfig.full_control(Role.BOB)
        forged = WireMessage(keydist(Role.ALICE, Role.BOB).payload, Role.ALICE, Role.EVE, Role.BOB)
        assert route(forged, config) is Role.BOB

    def test_victim_iff_full_control(self):
        with pytest.raises(ConfigurationError):
            InterpositionConfig(victim=Role.BOB)
        with pytest.raises(ConfigurationError):
            InterpositionConfig(mode=InterpositionMode.FULL_CONTROL)


class TestInstances:

    def test_seeded_instances_are_reproducible(self):
        assert instance_from_seed(8, 7, 0) == instance_from_seed(8, 7, 0)
        assert sample_instance(8, trial_seed(3, 11)) == sample_instance(8, trial_seed(3, 11))

    def test_trials_are_independent(self):
        assert sample_instance(16, trial_seed(3, 0)) != sample_instance(16, trial_seed(3, 1))

    def test_exhaustive_enumeration(self):
        instances = list(all_instances(1))
        assert len(instances) == instance_count(1) == 512
        assert len(set(instances)) == 512

    def test_invalid_instances(self, make_instance):
        with pytest.raises(ConfigurationError):
            make_instance("0,1,1,0", "1,1,1,1", 2)
        with pytest.raises(ConfigurationError):
            make_instance("0,1,1,0", "11,1,1,1", 0)
        with pytest.raises(ConfigurationError):
            instance_from_seed(0, 1, 0)

    def test_render(self, golden_instance):
        assert golden_instance.render() == "L=1 m=0 keys=0,1,1,0 masks=1,1,1,1"


class TestHonestScenario:

    def test_transcript(self, golden_instance):
        result = run_scenario(Honest(), golden_instance)
        assert result.transcript.render() == HONEST_TRANSCRIPT
        assert result.accepted(Role.BOB) == 0
        assert result.accepted(Role.CHARLIE) == 0

    def test_completeness_over_every_instance(self):
        for instance in all_instances(1):
            result = run_scenario(Honest(), instance)
            assert len(result.transcript) == 6
            assert result.accepted(Role.BOB) == instance.message
            assert result.accepted(Role.CHARLIE) == instance.message

    @pytest.mark.parametrize("seed", [0, 7, 99])
    def test_seeded_runs_at_l8(self, seed):
        for m in (0, 1):
            result = simulate(Honest(), 8, seed, m)
            assert result.accepted(Role.BOB) == m
            assert result.accepted(Role.CHARLIE) == m

    def test_deterministic(self):
        first = simulate(Attack(Role.BOB), 8, 7, 0)
        second = simulate(Attack(Role.BOB), 8, 7, 0)
        assert first.transcript.render() == second.transcript.render()
        assert first.outcomes == second.outcomes


class TestAttackScenario:

    def test_attack_on_bob(self, golden_instance):
        result = run_scenario(Attack(Role.BOB), golden_instance)
        assert len(result.transcript) == 11
        assert result.accepted(Role.BOB) == 1
        assert result.accepted(Role.CHARLIE) == 0
        assert result.transcript.annotations == [
            "swap k0B,k1B", "restore kpart0B,kpart1B", "swap partial keys", "swap m,not(m)", "swap m,not(m)",
        ]

    def test_attack_on_charlie_mirrors_the_roles(self, golden_instance):
        result = run_scenario(Attack(Role.CHARLIE), golden_instance)
        assert result.transcript.render() == ATTACK_C_TRANSCRIPT
        assert result.accepted(Role.CHARLIE) == 1
        assert result.accepted(Role.BOB) == 0
        assert result.scenario.name == "attack-c"

    @pytest.mark.parametrize("victim", [Role.BOB, Role.CHARLIE])
    def test_attack_succeeds_on_every_instance(self, victim):
        for instance in all_instances(1):
            result = run_scenario(Attack(victim), instance)
            assert result.accepted(victim) == 1 - instance.message
            assert result.accepted(victim.counterpart) == instance.message

    def test_counterpart_cannot_tell(self):
        """The counterpart's received messages match the honest run exactly"""
        for instance in all_instances(1):
            honest = run_scenario(Honest(), instance)
            attacked = run_scenario(Attack(Role.BOB), instance)
            assert attacked.transcript.observation(Role.CHARLIE) == honest.transcript.observation(Role.CHARLIE)

    def test_transparent_proxy_is_honest(self):
        for instance in all_instances(1):
            honest = run_scenario(Honest(), instance)
            proxied = run_scenario(Custom(transparent_proxy()), instance)
            assert proxied.transcript.annotations == []
            assert [o.accepted_message for o in proxied.outcomes] == [o.accepted_message for o in honest.outcomes]
            for role in (Role.BOB, Role.CHARLIE):
                assert proxied.transcript.observation(role) == honest.transcript.observation(role)

    def test_eve_learns_only_the_victims_keys(self, golden_instance):
        runner = ScenarioRunner(Attack(Role.BOB), golden_instance)
        runner.run()
        assert runner.eve.intercepted == 5
        assert {owner for owner, _, _ in runner.eve.knowledge.keys} == {Role.BOB}


class TestRejection:

    def test_rejecting_first_verifier_stops_the_run(self, golden_instance):
        result = run_scenario(Custom(naive_flip_strategy()), golden_instance)
        assert result.outcome(Role.BOB).accepted is False
        assert result.outcome(Role.CHARLIE) is None
        assert result.accepted(Role.CHARLIE) is None
        assert len(result.transcript) == 9

    def test_forward_on_reject_reaches_the_counterpart(self, golden_instance):
        result = run_scenario(Custom(naive_flip_strategy()), golden_instance, forward_on_reject=True)
        assert result.outcome(Role.CHARLIE) is not None
        assert result.outcome(Role.CHARLIE).full_mismatches == 1
        assert result.transcript[-1].kind is MessageKind.FORWARD

    def test_threshold_policy_changes_decisions(self, golden_instance):
        lenient = VerificationPolicy.threshold("1/2")
        # floor(1/2 * 1) is still zero at L = 1
        result = run_scenario(Custom(naive_flip_strategy()), golden_instance, lenient)
        assert result.accepted(Role.BOB) is None


class TestReplay:

    def test_replayed_verifier_reaches_the_same_outcome(self, golden_instance):
        result = run_scenario(Attack(Role.BOB), golden_instance)
        for role in (Role.BOB, Role.CHARLIE):
            received = [delivery.message for delivery in result.transcript.delivered_to(role)]
            state = replay_verifier(role, received, golden_instance.masks(role))
            assert state.outcome == result.outcome(role)

    def test_mitm_custom_equals_attack(self, golden_instance):
        attack = run_scenario(Attack(Role.BOB), golden_instance)
        custom = run_scenario(Custom(mitm_strategy()), golden_instance)
        assert custom.transcript.render() == attack.transcript.render()


class TestChannelIsolation:

    @given(seed=integers(min_value=0, max_value=2**32 - 1), length=integers(min_value=1, max_value=8),
           message=integers(min_value=0, max_value=1), victim=sampled_from([Role.BOB, Role.CHARLIE]))
    @settings(max_examples=200)
    def test_victim_exchanges_messages_only_with_eve(self, seed, length, message, victim):
        instance = instance_from_seed(length, seed, message)
        for scenario in (Attack(victim), Custom(naive_flip_strategy(victim))):
            for delivery in run_scenario(scenario, instance).transcript:
                if delivery.true_sender is victim:
                    assert delivery.receiver is Role.EVE
                if delivery.receiver is victim:
                    assert delivery.true_sender is Role.EVE

    @given(seed=integers(min_value=0, max_value=2**32 - 1), length=integers(min_value=1, max_value=8),
           message=integers(min_value=0, max_value=1))
    @settings(max_examples=200)
    def test_honest_runs_carry_no_impersonation(self, seed, length, message):
        for delivery in run_scenario(Honest(), instance_from_seed(length, seed, message)).transcript:
            assert not delivery.message.impersonated
            assert Role.EVE not in (delivery.true_sender, delivery.receiver)
