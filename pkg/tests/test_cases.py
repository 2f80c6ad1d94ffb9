from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

import casetree as ct
from support import brute_force_best_weight, random_base, random_target


def target(*perceptions: ct.Perception) -> ct.TargetCase:
    return ct.TargetCase(perceptions=perceptions, origin="test")


def P(name, values, choice) -> ct.Perception:
    return ct.Perception(name, tuple(values), choice)


class TestParseCase:
    def test_case1_fields(self, three_case_base):
        cases, _ = three_case_base
        case1 = cases[0]
        assert case1.id == "case1"
        assert case1.weights == (0.3, 0.7, 0.45)
        assert case1.action == "pass"
        assert [str(p) for p in case1.perceptions] == [
            "hasball(me)=False",
            "partner(?A)=True",
            "distance(ball,?A)=long",
        ]

    def test_single_perception_case(self, small_ctx):
        doc = ('<case id="solo"><predicate name="hasball" weight="1.0">'
               '<value val="me" type="Me"/><choice val="true"/></predicate></case>')
        case = ct.parse_case(doc, small_ctx)
        assert len(case.perceptions) == 1
        assert case.total_weight == 1.0

    def test_negative_weight_rejected(self, small_ctx, fixture_dir):
        text = (fixture_dir / "three.cases.xml").read_text()
        bad = text.replace('weight="0.3"', 'weight="-0.1"')
        with pytest.raises(ct.ContextError) as err:
            ct.parse_case_base(bad, small_ctx)
        assert "negative" in str(err.value)

    def test_zero_total_weight_rejected(self, small_ctx):
        doc = ('<case id="z"><predicate name="hasball" weight="0.0">'
               '<value val="me" type="Me"/><choice val="true"/></predicate></case>')
        with pytest.raises(ct.ContextError):
            ct.parse_case(doc, small_ctx)

    def test_schema_violation_reported_with_path(self, small_ctx):
        doc = ('<case id="bad"><predicate name="distance" weight="1.0">'
               '<value val="ball" type="Ball"/><choice val="long"/></predicate></case>')
        with pytest.raises(ct.ContextError) as err:
            ct.parse_case(doc, small_ctx)
        assert "arity" in str(err.value)
        assert "predicate[1]" in str(err.value)

    def test_duplicate_case_id_rejected(self, small_ctx, fixture_dir):
        text = (fixture_dir / "three.cases.xml").read_text()
        bad = text.replace('id="case2"', 'id="case1"')
        with pytest.raises(ct.ContextError) as err:
            ct.parse_case_base(bad, small_ctx)
        assert "duplicate case id" in str(err.value)

    def test_base_round_trip(self, three_case_base, small_ctx):
        cases, priority = three_case_base
        text = ct.serialize_case_base(cases, priority, small_ctx)
        again, priority2 = ct.parse_case_base(text, small_ctx)
        assert again == cases
        assert priority2 == priority


class TestUnify:
    def test_full_match(self, case1, exact_case1_target):
        sub, matched = ct.unify(case1, exact_case1_target)
        assert sub.as_dict() == {"A": "Agent.1"}
        assert matched == {0, 1, 2}

    def test_empty_target(self, case1):
        sub, matched = ct.unify(case1, target())
        assert not sub and matched == frozenset()

    def test_maximizing_binding_wins(self, case1):
        # A -> Agent.1 matches only partner; A -> Agent.2 matches partner
        # and distance, so it must win.
        t = target(
            P("hasball", [ct.ME], False),
            P("partner", [ct.concrete("Agent.1")], True),
            P("partner", [ct.concrete("Agent.2")], True),
            P("distance", [ct.const("ball", "Ball"), ct.concrete("Agent.2")], "long"),
        )
        sub, matched = ct.unify(case1, t)
        assert sub.as_dict() == {"A": "Agent.2"}
        assert len(matched) == 3

    def test_substitution_is_injective(self):
        case = ct.GenericCase("c", (
            P("partner", [ct.generic("A")], True),
            P("partner", [ct.generic("B")], True),
        ), (1.0, 1.0))
        t = target(P("partner", [ct.concrete("Agent.1")], True))
        sub, matched = ct.unify(case, t)
        # only one of A, B can take Agent.1
        assert len(matched) == 1
        assert len(sub.as_dict()) == 1

    def test_weight_tie_breaks_lexicographically(self):
        case = ct.GenericCase("c", (P("partner", [ct.generic("A")], True),), (1.0,))
        t = target(
            P("partner", [ct.concrete("Agent.1")], True),
            P("partner", [ct.concrete("Agent.2")], True),
        )
        sub, _ = ct.unify(case, t)
        assert sub.as_dict() == {"A": "Agent.1"}

    def test_matched_weight_equals_brute_force(self):
        rng = random.Random(5)
        for seed in range(25):
            base = random_base(seed, 6)
            t = random_target(seed + 900)
            if not len(t):
                continue
            for case in base:
                _, matched = ct.unify(case, t)
                got = sum(case.weights[i] for i in matched)
                want = brute_force_best_weight(case, t)
                assert got == pytest.approx(want, abs=1e-12), case.id

    def test_matched_image_lies_in_target(self, case1, exact_case1_target):
        sub, matched = ct.unify(case1, exact_case1_target)
        binding = sub.as_dict()
        tset = exact_case1_target.perception_set
        for i in matched:
            values = tuple(
                ct.concrete(binding[v.name]) if v.kind == "generic" else v
                for v in case1.perceptions[i].values
            )
            assert ct.Perception(case1.perceptions[i].name, values,
                                 case1.perceptions[i].choice) in tset


class TestGeneralize:
    def test_single_renaming(self):
        t = target(P("hasball", [ct.concrete("Agent.7")], True))
        case = ct.generalize(t, action="pass")
        assert [str(p) for p in case.perceptions] == ["hasball(?A)=True"]
        assert case.action == "pass"
        assert case.weights == (1.0,)

    def test_consistent_renaming(self):
        t = target(
            P("partner", [ct.concrete("Agent.1")], True),
            P("distance", [ct.const("ball", "Ball"), ct.concrete("Agent.1")], "far"),
        )
        case = ct.generalize(t, action="move")
        labels = {v.name for p in case.perceptions for v in p.values if v.kind == "generic"}
        assert labels == {"A"}

    def test_me_is_preserved(self):
        t = target(P("hasball", [ct.ME], False))
        case = ct.generalize(t, action="wait")
        assert case.perceptions[0].values[0].kind == "me"

    def test_alpha_equivalent_to_case1(self, case1, exact_case1_target):
        acquired = ct.generalize(exact_case1_target, action="pass")
        assert ct.case_equivalent(acquired, case1)

    def test_idempotent_up_to_renaming(self):
        for seed in range(10):
            t = random_target(seed + 50)
            if not len(t):
                continue
            a = ct.generalize(t, action="pass", case_id="a")
            b = ct.generalize(t, action="shoot", case_id="b")
            assert ct.case_equivalent(a, b)


class TestCaseEquivalent:
    def test_identity(self, case1):
        assert ct.case_equivalent(case1, case1)

    def test_renamed_labels(self, case1):
        renamed = ct.GenericCase("other", tuple(
            ct.Perception(
                p.name,
                tuple(ct.generic("Z") if v.kind == "generic" else v for v in p.values),
                p.choice,
            ) for p in case1.perceptions
        ), case1.weights)
        assert ct.case_equivalent(case1, renamed)

    def test_different_cases(self, three_case_base):
        cases, _ = three_case_base
        assert not ct.case_equivalent(cases[0], cases[1])
        assert not ct.case_equivalent(cases[0], cases[2])

    def test_label_swap_needs_bijection(self):
        a = ct.GenericCase("a", (
            P("markedBy", [ct.generic("A"), ct.generic("B")], True),
            P("hasball", [ct.generic("A")], True),
        ), (1.0, 1.0))
        b = ct.GenericCase("b", (
            P("markedBy", [ct.generic("A"), ct.generic("B")], True),
            P("hasball", [ct.generic("B")], True),
        ), (1.0, 1.0))
        assert not ct.case_equivalent(a, b)
        swapped = ct.GenericCase("s", (
            P("markedBy", [ct.generic("B"), ct.generic("A")], True),
            P("hasball", [ct.generic("B")], True),
        ), (1.0, 1.0))
        assert ct.case_equivalent(a, swapped)

    def test_weights_and_action_ignored(self, case1):
        reweighted = ct.GenericCase("x", case1.perceptions, (9.0, 9.0, 9.0), "shoot")
        assert ct.case_equivalent(case1, reweighted)


class TestInvariants:
    def test_generic_case_rejects_concrete_agents(self):
        with pytest.raises(ct.CaseError):
            ct.GenericCase("bad", (P("hasball", [ct.concrete("Agent.1")], True),), (1.0,))

    def test_target_rejects_generic_agents(self):
        with pytest.raises(ct.CaseError):
            ct.TargetCase(perceptions=(P("hasball", [ct.generic("A")], True),))

    def test_duplicate_perceptions_rejected(self):
        p = P("hasball", [ct.ME], True)
        with pytest.raises(ct.CaseError):
            ct.GenericCase("dup", (p, p), (1.0, 1.0))

    def test_substitution_injectivity_enforced(self):
        with pytest.raises(ct.CaseError):
            ct.Substitution((("A", "Agent.1"), ("B", "Agent.1")))

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=30, deadline=None)
    def test_unify_never_exceeds_brute_force(self, seed):
        base = random_base(seed % 40, 3)
        t = random_target(seed % 40 + 300)
        if not base or not len(t):
            return
        case = base[seed % len(base)]
        _, matched = ct.unify(case, t)
        got = sum(case.weights[i] for i in matched)
        assert got <= brute_force_best_weight(case, t) + 1e-12


class TestLargeTargetFallback:
    """Beyond the exact-search agent limit, binding goes greedy per label."""

    def target_with(self, n_partners):
        perceptions = [P("hasball", [ct.ME], False)]
        for i in range(1, n_partners + 1):
            perceptions.append(P("partner", [ct.concrete(f"Agent.{i}")], True))
        perceptions.append(
            P("distance", [ct.const("ball", "Ball"), ct.concrete(f"Agent.{n_partners}")], "long")
        )
        return target(*perceptions)

    def test_greedy_result_is_still_a_valid_matching(self, case1):
        t = self.target_with(8)  # 8 concrete agents: greedy territory
        sub, matched = ct.unify(case1, t)
        binding = sub.as_dict()
        assert len(set(binding.values())) == len(binding)
        tset = t.perception_set
        for i in matched:
            p = case1.perceptions[i]
            values = tuple(
                ct.concrete(binding[v.name]) if v.kind == "generic" else v
                for v in p.values
            )
            assert ct.Perception(p.name, values, p.choice) in tset

    def test_greedy_is_deterministic(self, case1):
        t = self.target_with(10)
        assert ct.unify(case1, t) == ct.unify(case1, t)

    def test_exact_regime_boundary(self, case1):
        # five concrete agents still use the exact search: the binding that
        # also matches the distance perception must win
        t = self.target_with(4)
        sub, matched = ct.unify(case1, t)
        assert len(matched) == 3
        assert sub.as_dict() == {"A": "Agent.4"}
