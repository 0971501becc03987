import random

import pytest

from aspdbg.grounder import (
    DroppedRuleWarning,
    GroundingBudgetExceeded,
    anti_simplification_closure,
    ground,
    herbrand_universe,
)
from aspdbg.instrument import build_debugging_program
from aspdbg.parser import parse_program
from aspdbg.pretty import format_ground_rule
from aspdbg.solver import brute_force_answer_sets
from aspdbg.syntax import Term

from .genprog import random_ground_program


def _atom_set_models(g):
    return frozenset(
        frozenset(g.atom_table.atom(i) for i in model)
        for model in brute_force_answer_sets(g)
    )


def test_herbrand_universe(coloring_program):
    assert herbrand_universe(coloring_program) == frozenset(
        {
            Term.num(1),
            Term.num(2),
            Term.num(3),
            Term.sym("blue"),
            Term.sym("red"),
            Term.sym("green"),
        }
    )
    assert herbrand_universe(parse_program("p(a).\n")) == frozenset({Term.sym("a")})


def test_coloring_ground_size_and_shape(coloring_program):
    g = ground(coloring_program, "no-simplify")
    assert len(g.rules) == 21
    by_origin = {}
    for rule in g.rules:
        by_origin.setdefault(rule.origin_rule_id, []).append(rule)
    assert {k: len(v) for k, v in by_origin.items()} == {
        1: 2,
        2: 2,
        3: 3,
        4: 12,
        5: 1,
        6: 1,
    }
    assert g.warnings == ()
    assert len(g.atom_table) == 14
    assert g.herbrand_base == frozenset(g.atom_table)


def test_comparisons_filter_instances(coloring_program):
    g = ground(coloring_program, "no-simplify")
    instances = [r for r in g.rules if r.origin_rule_id == 4]
    assert len(instances) == 12
    substitutions = {tuple(r.substitution_map()[v].name for v in "X Y C1 C2".split()) for r in instances}
    assert ("1", "2", "blue", "red") in substitutions
    # C1 != C2 and X != Y are decided at instantiation time
    assert all(c1 != c2 and x != y for x, y, c1, c2 in substitutions)
    assert {(x, y) for x, y, _, _ in substitutions} == {("1", "2"), ("2", "3")}


def test_instances_sorted_by_substitution(coloring_program):
    g = ground(coloring_program, "no-simplify")
    node_instances = [r.substitution_map()["X"] for r in g.rules if r.origin_rule_id == 3]
    assert node_instances == [Term.num(1), Term.num(2), Term.num(3)]


def test_no_simplify_keeps_rules_with_underivable_bodies():
    g = ground(parse_program("a :- b, not c.\n"), "no-simplify")
    assert len(g.rules) == 1
    assert format_ground_rule(g.rules[0], g.atom_table) == "a :- b, not c."
    assert g.warnings == ()


def test_simplify_drops_underivable_positive_bodies():
    g = ground(parse_program("a :- b, not c.\nd.\n"), "simplify")
    assert g.warnings == (DroppedRuleWarning(1),)
    assert [format_ground_rule(r, g.atom_table) for r in g.rules] == ["d."]


def test_simplify_evaluates_negation_over_underivable_atoms():
    g = ground(parse_program("a :- not b.\n"), "simplify")
    assert [format_ground_rule(r, g.atom_table) for r in g.rules] == ["a."]
    assert g.warnings == ()


def test_simplify_propagates_facts():
    g = ground(parse_program("a.\nb :- a.\nc :- not a.\n"), "simplify")
    assert sorted(format_ground_rule(r, g.atom_table) for r in g.rules) == ["a.", "b."]


def test_simplify_erases_instrumented_debugging_program(propositional_program):
    d = build_debugging_program(propositional_program, background=frozenset())
    simplified = ground(d, "simplify")
    assert [w.rule_id for w in simplified.warnings] == [1, 2, 3, 4]
    # only the support rules survive, degraded to plain facts
    assert len(simplified.rules) == 3
    assert all(not r.positive_body and not r.negative_body and len(r.head) == 1 for r in simplified.rules)


def test_simplify_erases_instrumented_coloring_program(coloring_program):
    d = build_debugging_program(coloring_program)
    simplified = ground(d, "simplify")
    assert [w.rule_id for w in simplified.warnings] == [1, 2, 3, 4]
    # the marker bodies keep every instance underivable, leaving only facts
    assert len(simplified.rules) == 16
    assert all(len(r.head) == 1 and not r.positive_body and not r.negative_body for r in simplified.rules)


def test_anti_simplification_closure_shields_every_rule(coloring_program):
    g = ground(coloring_program, "no-simplify")
    closure = anti_simplification_closure(g, coloring_program)
    assert len(closure.rules) == len(coloring_program.rules) + 14
    assert all(r.is_choice for r in closure.rules[6:])
    simplified = ground(closure, "simplify")
    assert simplified.warnings == ()
    original = g.resolved_rules()
    shielded = {
        r
        for r in simplified.resolved_rules()
        if r[0] is not None and r[0] <= len(coloring_program.rules)
    }
    assert shielded == original


def test_closure_skips_choice_partner_atoms():
    program = parse_program("{p}.\nq :- p.\n")
    g = ground(program, "no-simplify")
    closure = anti_simplification_closure(g, program)
    added = closure.rules[len(program.rules):]
    added_atoms = {r.head[0].predicate for r in added}
    assert added_atoms == {"p", "q"}
    partners = {r.head[1].predicate for r in added}
    assert partners == {"_f_1", "_f_2"}


def test_grounding_budget():
    program = parse_program("p(1).\np(2).\nq(X,Y) :- p(X), p(Y).\n")
    with pytest.raises(GroundingBudgetExceeded):
        ground(program, "no-simplify", budget=3)
    assert len(ground(program, "no-simplify", budget=100).rules) == 6


def test_unknown_mode_rejected(coloring_program):
    with pytest.raises(ValueError, match="unknown grounding mode"):
        ground(coloring_program, "fast")


def test_simplify_preserves_answer_sets_on_random_programs():
    rng = random.Random(20240917)
    for _ in range(40):
        program = random_ground_program(rng, max_atoms=8, max_rules=7)
        plain = ground(program, "no-simplify")
        simplified = ground(program, "simplify")
        assert _atom_set_models(plain) == _atom_set_models(simplified)


def test_closure_protects_random_programs_from_simplification():
    rng = random.Random(911)
    for _ in range(25):
        program = random_ground_program(rng, max_atoms=7, max_rules=6)
        plain = ground(program, "no-simplify")
        closure = anti_simplification_closure(plain, program)
        simplified = ground(closure, "simplify")
        assert simplified.warnings == ()
        shielded = {
            r
            for r in simplified.resolved_rules()
            if r[0] is not None and r[0] <= len(program.rules)
        }
        assert shielded == plain.resolved_rules()
