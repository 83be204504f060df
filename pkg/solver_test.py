#!/usr/bin/env python3

import math
import os
import sys
import time

import numpy as np
import pytest

from dadgplan.checks import GoalUnsatisfied, InvalidAt, Valid, validate_plan
from dadgplan.errors import ConfigError, ExternalFailure, ExternalInvalidPlan, SolverError
from dadgplan.external import build_command
from dadgplan.generate import blocks_instance
from dadgplan.grounding import ground_all
from dadgplan.pddl_classes import Atom, GoalSpec, State
from dadgplan.pddlparse import parse_domain, parse_problem
from dadgplan.search import (EngineSpec, Plan, ProvedUnsolvable, SolveRequest, Solved, TimedOut,
                             bfs_optimal, h_add, solve, solve_internal)

LAMP_DOMAIN = ('(define (domain lamp) (:requirements :strips) (:predicates (off ?x) (lit ?x) (broken ?x)) '
               '(:action switch :parameters (?x) :precondition (off ?x) :effect (and (not (off ?x)) (lit ?x))))')

WORKED_PLAN_TEXT = '(pick-up b)\n(stack b c)\n(pick-up a)\n(stack a b)\n; cost = 4 (unit cost)\n'

FAKE_PLANNER = '''
import os
import shutil
import sys
import time

domain, problem, plan = sys.argv[1:4]
behaviour = sys.argv[4]
shutil.copy(problem, sys.argv[5])
with open(sys.argv[6], 'w') as handle:
    handle.write(os.getcwd())

if behaviour == 'sleep':
    time.sleep(30)
if behaviour == 'unsolvable':
    sys.exit(11)
if behaviour == 'crash':
    sys.stderr.write('segfault, or close enough')
    sys.exit(3)
if behaviour != 'silent':
    with open(plan, 'w') as handle:
        handle.write(sys.argv[7].replace('|', chr(10)))
print('Expanded 7 state(s).')
print('Generated 19 state(s).')
'''


def lamp():
    dom = parse_domain(LAMP_DOMAIN)
    problem = parse_problem('(define (problem p) (:domain lamp) (:objects l) (:init (off l)) (:goal (and (lit l))))', dom)
    return dom, problem, ground_all(dom, problem.objects)


def external_request(worked, tmp_path, behaviour, plan_text=WORKED_PLAN_TEXT, timeout=20.0, keep=False, extra=()):
    dom, problem = worked
    script = tmp_path / 'fake_planner.py'
    script.write_text(FAKE_PLANNER)
    command = ' '.join([sys.executable, str(script), '{domain}', '{problem}', '{plan}', behaviour,
                        str(tmp_path / 'seen.pddl'), str(tmp_path / 'cwd.txt'), "'" + plan_text.replace('\n', '|') + "'"] + list(extra))
    engine = EngineSpec('external', command, keep)
    return SolveRequest(problem.init, problem.goal, dom, problem.objects, timeout, engine)


def test_worked_instance_is_solved_in_four_steps(worked, worked_idx):
    dom, problem = worked
    start = time.perf_counter()
    outcome = solve_internal(SolveRequest(problem.init, problem.goal, dom, problem.objects, 15.0), worked_idx)
    assert time.perf_counter() - start < 1.0
    assert isinstance(outcome, Solved)
    assert len(outcome.plan) == 4
    assert outcome.stats.plan_length == 4
    assert validate_plan(problem.init, problem.goal, outcome.plan) == Valid(4)

    optimal, _ = bfs_optimal(problem.init, problem.goal, worked_idx)
    assert len(optimal) == 4


def test_worked_plan_validates(worked, worked_plan):
    _, problem = worked
    verdict = validate_plan(problem.init, problem.goal, worked_plan)
    assert verdict.valid
    assert str(verdict) == 'VALID (4 steps)'


def test_swapped_plan_is_invalid_at_the_first_step(worked, worked_plan):
    _, problem = worked
    verdict = validate_plan(problem.init, problem.goal, [worked_plan[1], worked_plan[0]] + worked_plan[2:])
    assert isinstance(verdict, InvalidAt)
    assert verdict.index == 0
    assert str(verdict.action) == '(stack b c)'
    assert verdict.missing == (Atom('holding', ('b',)),)
    assert not verdict.valid


def test_empty_plan_leaves_the_goal_unsatisfied(worked, atoms):
    _, problem = worked
    verdict = validate_plan(problem.init, problem.goal, [])
    assert isinstance(verdict, GoalUnsatisfied)
    assert verdict.missing == tuple(atoms('(on a b) (on b c)'))


def test_goal_already_true(worked, worked_idx, goal):
    dom, problem = worked
    outcome = solve_internal(SolveRequest(problem.init, goal('(clear a) (handempty)'), dom, problem.objects), worked_idx)
    assert isinstance(outcome, Solved)
    assert len(outcome.plan) == 0
    assert outcome.stats.expansions == 0


def test_goal_no_action_adds_is_unsolvable_without_search():
    dom, problem, idx = lamp()
    broken = GoalSpec.of([Atom('broken', ('l',))])
    assert h_add(problem.init, broken, idx) == math.inf
    outcome = solve_internal(SolveRequest(problem.init, broken, dom, problem.objects), idx)
    assert isinstance(outcome, ProvedUnsolvable)
    assert outcome.stats.expansions == 0


def test_exhausted_search_is_unsolvable():
    dom, problem, idx = lamp()
    both = GoalSpec.of([Atom('lit', ('l',)), Atom('off', ('l',))])
    outcome = solve_internal(SolveRequest(problem.init, both, dom, problem.objects), idx)
    assert isinstance(outcome, ProvedUnsolvable)
    assert outcome.stats.expansions >= 1
    assert bfs_optimal(problem.init, both, idx)[0] is None


def test_zero_timeout(worked, worked_idx):
    dom, problem = worked
    outcome = solve_internal(SolveRequest(problem.init, problem.goal, dom, problem.objects, 0.0), worked_idx)
    assert isinstance(outcome, TimedOut)
    assert outcome.stats.expansions == 0


def test_negative_timeout_is_rejected(worked):
    dom, problem = worked
    with pytest.raises(ConfigError):
        SolveRequest(problem.init, problem.goal, dom, problem.objects, -1.0)


def test_h_add_values(worked, worked_idx, goal):
    _, problem = worked
    assert h_add(problem.init, GoalSpec(), worked_idx) == 0
    assert h_add(problem.init, goal('(clear a)'), worked_idx) == 0
    assert h_add(problem.init, goal('(on a b)'), worked_idx) == 2
    assert h_add(problem.init, problem.goal, worked_idx) == 4
    assert h_add(problem.init, goal('(holding a)'), worked_idx) == 1


def test_h_add_is_zero_exactly_on_goal_states(worked, worked_idx):
    _, problem = worked
    rng = np.random.default_rng(4)
    for _ in range(20):
        instance = blocks_instance(3, rng)
        assert h_add(instance.init, instance.goal, worked_idx) > 0
        assert h_add(instance.init, GoalSpec(instance.init.atoms), worked_idx) == 0


def test_unsolvable_heuristic_agrees_with_breadth_first_search():
    dom, problem, idx = lamp()
    broken = GoalSpec.of([Atom('broken', ('l',))])
    plan, stats = bfs_optimal(problem.init, broken, idx)
    assert plan is None
    assert stats.expansions == 2


def test_small_instances_are_solved_and_valid(blocks):
    rng = np.random.default_rng(21)
    for _ in range(12):
        problem = blocks_instance(int(rng.integers(3, 6)), rng)
        idx = ground_all(blocks, problem.objects)
        outcome = solve_internal(SolveRequest(problem.init, problem.goal, blocks, problem.objects, 30.0), idx)
        assert outcome.solved
        assert validate_plan(problem.init, problem.goal, outcome.plan).valid
        optimal, _ = bfs_optimal(problem.init, problem.goal, idx)
        assert len(optimal) <= len(outcome.plan)
        assert outcome.stats.branching > 0


def test_more_time_gives_the_same_plan(blocks):
    rng = np.random.default_rng(8)
    problem = blocks_instance(6, rng)
    idx = ground_all(blocks, problem.objects)
    short = solve_internal(SolveRequest(problem.init, problem.goal, blocks, problem.objects, 30.0), idx)
    long = solve_internal(SolveRequest(problem.init, problem.goal, blocks, problem.objects, 60.0), idx)
    assert short.solved and long.solved
    assert short.plan == long.plan
    assert short.stats.expansions == long.stats.expansions


def test_breadth_first_limit(worked, worked_idx):
    _, problem = worked
    with pytest.raises(SolverError):
        bfs_optimal(problem.init, problem.goal, worked_idx, max_expansions=1)


def test_plan_concatenation(worked_plan):
    first = Plan(tuple(worked_plan[:2]))
    joined = first + worked_plan[2:]
    assert len(joined) == 4
    assert list(joined) == worked_plan
    assert str(first) == '(pick-up b) (stack b c)'


def test_engine_spec():
    assert EngineSpec.parse('internal').kind == 'internal'
    assert EngineSpec.parse(None).kind == 'internal'
    spec = EngineSpec.parse('external:"fast-downward --plan-file {plan} {domain} {problem} --search lazy"')
    assert spec.kind == 'external'
    assert spec.command == 'fast-downward --plan-file {plan} {domain} {problem} --search lazy'
    with pytest.raises(ConfigError):
        EngineSpec.parse('external:"planner {domain} {problem}"')
    with pytest.raises(ConfigError):
        EngineSpec.parse('lama')


def test_external_planner_plan_is_read_back(worked, tmp_path):
    dom, _ = worked
    req = external_request(worked, tmp_path, 'plan')
    outcome = solve(req)
    assert isinstance(outcome, Solved)
    assert [str(action) for action in outcome.plan] == ['(pick-up b)', '(stack b c)', '(pick-up a)', '(stack a b)']
    assert outcome.stats.expansions == 7
    assert outcome.stats.generated == 19

    seen = parse_problem((tmp_path / 'seen.pddl').read_text(), dom)
    assert seen.init == req.state
    assert seen.goal == req.goal
    assert not os.path.exists((tmp_path / 'cwd.txt').read_text())


def test_external_planner_artifacts_can_be_kept(worked, tmp_path):
    solve(external_request(worked, tmp_path, 'plan', keep=True))
    workdir = (tmp_path / 'cwd.txt').read_text()
    assert os.path.isfile(os.path.join(workdir, 'domain.pddl'))
    assert os.path.isfile(os.path.join(workdir, 'plan.txt'))


def test_external_planner_invalid_plan(worked, tmp_path):
    with pytest.raises(ExternalInvalidPlan) as err:
        solve(external_request(worked, tmp_path, 'plan', plan_text='(pick-up a)\n(stack b c)\n'))
    assert err.value.index == 1


def test_external_planner_short_plan(worked, tmp_path):
    with pytest.raises(ExternalInvalidPlan) as err:
        solve(external_request(worked, tmp_path, 'plan', plan_text='(pick-up b)\n(stack b c)\n'))
    assert isinstance(err.value.verdict, GoalUnsatisfied)


def test_external_planner_timeout(worked, tmp_path):
    start = time.perf_counter()
    outcome = solve(external_request(worked, tmp_path, 'sleep', timeout=1.0))
    assert isinstance(outcome, TimedOut)
    assert time.perf_counter() - start < 20.0
    assert outcome.stats.elapsed >= 1.0


def test_external_planner_exit_codes(worked, tmp_path):
    assert isinstance(solve(external_request(worked, tmp_path, 'unsolvable')), ProvedUnsolvable)
    with pytest.raises(ExternalFailure) as err:
        solve(external_request(worked, tmp_path, 'crash'))
    assert err.value.exit_code == 3
    assert 'segfault' in err.value.stderr
    with pytest.raises(ExternalFailure):
        solve(external_request(worked, tmp_path, 'silent'))


def test_external_planner_skips_trivial_requests(worked, tmp_path):
    dom, problem = worked
    req = external_request(worked, tmp_path, 'plan')
    done = SolveRequest(problem.init, GoalSpec(), dom, problem.objects, 20.0, req.engine)
    assert isinstance(solve(done), Solved)
    later = SolveRequest(problem.init, problem.goal, dom, problem.objects, 0.0, req.engine)
    assert isinstance(solve(later), TimedOut)
    assert not (tmp_path / 'cwd.txt').exists()


def test_state_arguments_accept_plain_sets(worked, worked_idx, worked_plan):
    _, problem = worked
    verdict = validate_plan(set(problem.init.atoms), set(problem.goal.atoms), worked_plan)
    assert verdict.valid
    assert isinstance(problem.init, State)


def test_build_command_leaves_other_braces_alone():
    command = build_command("sh -c 'awk \"{print}\" \"$1\" > ${OUT}' {problem} --plan {plan} {domain}",
                            '/tmp/d.pddl', '/tmp/my problem.pddl', '/tmp/plan')
    assert command == ['sh', '-c', 'awk "{print}" "$1" > ${OUT}', '/tmp/my problem.pddl',
                       '--plan', '/tmp/plan', '/tmp/d.pddl']
    with pytest.raises(ConfigError):
        build_command("planner {domain} {problem} {plan} 'unclosed", 'd', 'p', 'o')
    with pytest.raises(ConfigError):
        EngineSpec.parse("external:planner {domain} {problem} {plan} 'unclosed")


def test_external_planner_with_braces_in_the_command(worked, tmp_path):
    outcome = solve(external_request(worked, tmp_path, 'plan', extra=["'{print}'", "'${HOME}'"]))
    assert isinstance(outcome, Solved)
    assert len(outcome.plan) == 4
