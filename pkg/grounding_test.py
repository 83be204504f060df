#!/usr/bin/env python3

import itertools

import numpy as np
import pytest

from dadgplan.errors import NotApplicable, NotApplicableAt
from dadgplan.grounding import apply, apply_plan, applicable, ground_all, instantiate, successors
from dadgplan.pddl_classes import Atom, State
from dadgplan.pddlparse import parse_domain

### objects per domain for the brute-force comparison, at most five per type
SMALL_OBJECTS = {
    'blocks': dict.fromkeys(['a', 'b', 'c', 'd'], 'object'),
    'logistics': dict.fromkeys(['p0', 't0', 'a0', 'l0', 'l1'], 'object'),
    'depot': {'depot0': 'depot', 'distributor0': 'distributor', 'truck0': 'truck', 'hoist0': 'hoist',
              'hoist1': 'hoist', 'pallet0': 'pallet', 'crate0': 'crate', 'crate1': 'crate'},
    'mystery': dict.fromkeys(['o1', 'o2', 'o3', 'o4'], 'object'),
}


def brute_force_successors(dom, objects, atoms):
    """ every substitution of every schema, kept when its preconditions hold """
    found = []
    for schema in dom.schemas:
        domains = [sorted(obj for obj, t in objects.items() if dom.is_subtype(t, type_name))
                   for _, type_name in schema.params]
        for args in itertools.product(*domains):
            binding = dict(zip(schema.variables, args))
            if all(atom.substitute(binding) in atoms for atom in schema.pre):
                found.append((schema.name, args))
    return sorted(found)


def all_ground_atoms(dom, objects):
    names = sorted(objects)
    return [Atom(decl.name, args) for decl in dom.predicates
            for args in itertools.product(names, repeat=decl.arity)]


def random_state(rng, candidates, density):
    return State.of(atom for atom in candidates if rng.random() < density)


def test_blocks_ground_count(worked, worked_idx):
    assert len(worked_idx) == 24
    counts = {}
    for action in worked_idx.all:
        counts[action.name] = counts.get(action.name, 0) + 1
    assert counts == {'pick-up': 3, 'put-down': 3, 'stack': 9, 'unstack': 9}


def test_repeated_objects_are_grounded(worked_idx):
    assert worked_idx.find('stack', ['a', 'a']) is not None


def test_depot_drive_groundings(domains):
    objects = {'t0': 'truck', 't1': 'truck', 'dep0': 'depot', 'dist0': 'distributor', 'dist1': 'distributor'}
    idx = ground_all(domains['depot'], objects)
    assert len([action for action in idx.all if action.name == 'drive']) == 18


def test_zero_objects_leave_only_parameterless_schemas(blocks):
    assert len(ground_all(blocks, {})) == 0
    dom = parse_domain('(define (domain d) (:predicates (p) (q ?x)) '
                       '(:action flip :parameters () :precondition (p) :effect (not (p))) '
                       '(:action mark :parameters (?x) :precondition (p) :effect (q ?x)))')
    idx = ground_all(dom, {})
    assert [str(action) for action in idx.all] == ['(flip)']


def test_index_order_and_precondition_map(worked_idx):
    assert list(worked_idx.all) == sorted(worked_idx.all)
    for atom, actions in worked_idx.by_precondition.items():
        assert all(atom in action.pre for action in actions)
    used = {atom for action in worked_idx.all for atom in action.pre}
    assert set(worked_idx.by_precondition) == used


def test_applicable(worked, worked_idx):
    _, problem = worked
    assert applicable(problem.init, worked_idx.find('pick-up', ['b']))
    assert not applicable(problem.init, worked_idx.find('stack', ['a', 'b']))
    assert not applicable(State(), worked_idx.find('pick-up', ['b']))


def test_successors_of_the_worked_states(worked, worked_idx, state):
    _, problem = worked
    assert [str(a) for a in successors(problem.init, worked_idx)] == ['(pick-up a)', '(pick-up b)', '(pick-up c)']

    after = apply(problem.init, worked_idx.find('pick-up', ['b']))
    assert [str(a) for a in successors(after, worked_idx)] == ['(put-down b)', '(stack b a)', '(stack b c)']

    stuck = state('(ontable a) (ontable b) (ontable c) (clear a) (clear b) (clear c)')
    assert successors(stuck, worked_idx) == []


def test_apply_pick_up(worked, worked_idx, atoms):
    _, problem = worked
    after = apply(problem.init, worked_idx.find('pick-up', ['b']))
    assert problem.init.atoms - after.atoms == frozenset(atoms('(ontable b) (clear b) (handempty)'))
    assert after.atoms - problem.init.atoms == frozenset(atoms('(holding b)'))
    assert Atom('handempty') in problem.init


def test_apply_inapplicable(worked, worked_idx):
    _, problem = worked
    with pytest.raises(NotApplicable) as err:
        apply(problem.init, worked_idx.find('stack', ['a', 'b']))
    assert err.value.missing == (Atom('holding', ('a',)),)


def test_apply_plan(worked, worked_plan):
    _, problem = worked
    final = apply_plan(problem.init, worked_plan)
    assert problem.goal.satisfied_by(final)
    assert apply_plan(problem.init, []) == problem.init


def test_apply_plan_reports_the_failing_step(worked, worked_idx, worked_plan):
    _, problem = worked
    with pytest.raises(NotApplicableAt) as err:
        apply_plan(problem.init, [worked_idx.find('stack', ['a', 'b'])])
    assert err.value.index == 0

    with pytest.raises(NotApplicableAt) as err:
        apply_plan(problem.init, worked_plan[:2] + [worked_idx.find('stack', ['a', 'c'])])
    assert err.value.index == 2


def test_successors_match_brute_force(domains):
    rng = np.random.default_rng(11)
    for name in ('blocks', 'logistics', 'depot', 'mystery'):
        dom = domains[name]
        objects = SMALL_OBJECTS[name]
        idx = ground_all(dom, objects)
        candidates = all_ground_atoms(dom, objects)
        for _ in range(50):
            s = random_state(rng, candidates, float(rng.uniform(0.3, 0.8)))
            got = [(action.name, action.args) for action in successors(s, idx)]
            assert got == brute_force_successors(dom, objects, s.atoms), name


def test_apply_frame(worked, worked_idx):
    _, problem = worked
    rng = np.random.default_rng(5)
    candidates = all_ground_atoms(worked[0], problem.objects)
    for _ in range(100):
        s = random_state(rng, candidates, 0.5)
        for action in successors(s, worked_idx):
            after = apply(s, action)
            for atom in candidates:
                if atom in action.add:
                    assert atom in after
                elif atom in action.delete:
                    assert atom not in after
                else:
                    assert (atom in after) == (atom in s)


def test_applicability_is_monotone(worked, worked_idx):
    _, problem = worked
    rng = np.random.default_rng(9)
    candidates = all_ground_atoms(worked[0], problem.objects)
    for _ in range(100):
        s = random_state(rng, candidates, 0.3)
        extra = random_state(rng, candidates, 0.3)
        bigger = State(s.atoms | extra.atoms)
        for action in successors(s, worked_idx):
            assert applicable(bigger, action)


def test_grounding_is_deterministic(domains):
    objects = SMALL_OBJECTS['logistics']
    first = ground_all(domains['logistics'], objects)
    second = ground_all(domains['logistics'], dict(reversed(list(objects.items()))))
    assert first.all == second.all
    assert [a.pre for a in first.all] == [a.pre for a in second.all]


def test_instantiate_substitutes_every_set(blocks):
    action = instantiate(blocks.schema('unstack'), ('a', 'b'))
    assert str(action) == '(unstack a b)'
    assert Atom('on', ('a', 'b')) in action.pre
    assert Atom('holding', ('a',)) in action.add
    assert Atom('on', ('a', 'b')) in action.delete
