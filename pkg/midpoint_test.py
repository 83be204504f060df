#!/usr/bin/env python3
""" Splitting at a predicted intermediate state: the joined halves always solve, and search shrinks. """

import numpy as np

from dadgplan.assist import PredictRequest, parse_predict_response, render_predict_prompt
from dadgplan.checks import validate_plan
from dadgplan.errors import DegenerateState
from dadgplan.generate import blocks_instance, block_names, random_towers, tower_atoms, tower_goal
from dadgplan.grounding import apply_plan, ground_all
from dadgplan.llm import OracleClient
from dadgplan.pddl_classes import GoalSpec, State
from dadgplan.search import SolveRequest, bfs_optimal, solve_internal


def oracle_midpoint(oracle, dom, objects, s, g):
    prompt = render_predict_prompt(PredictRequest(s, g, dom.name))
    return parse_predict_response(oracle.complete(prompt), dom, objects, s, g)


def test_joined_halves_solve_the_instance(blocks):
    rng = np.random.default_rng(99)
    indexes = {}
    checked = 0
    while checked < 200:
        problem = blocks_instance(int(rng.integers(3, 7)), rng)
        key = len(problem.objects)
        if key not in indexes:
            indexes[key] = ground_all(blocks, problem.objects)
        idx = indexes[key]
        oracle = OracleClient(blocks, problem.objects, idx)
        try:
            middle = oracle_midpoint(oracle, blocks, problem.objects, problem.init, problem.goal)
        except DegenerateState:
            continue

        first = solve_internal(SolveRequest(problem.init, middle.goal(), blocks, problem.objects, 30.0), idx)
        assert first.solved
        halfway = apply_plan(problem.init, first.plan)
        second = solve_internal(SolveRequest(halfway, problem.goal, blocks, problem.objects, 30.0), idx)
        assert second.solved
        assert validate_plan(problem.init, problem.goal, first.plan + second.plan).valid
        checked += 1


def test_midpoints_shrink_breadth_first_search(blocks):
    rng = np.random.default_rng(12)
    names = block_names(6)
    objects = dict.fromkeys(names, 'object')
    idx = ground_all(blocks, objects)
    oracle = OracleClient(blocks, objects, idx)

    direct, split = [], []
    candidates = 0
    while len(direct) < 30:
        candidates += 1
        assert candidates <= 400, 'too few long instances'
        s = State.of(tower_atoms(random_towers(rng, names)))
        g = GoalSpec.of(tower_goal([[str(name) for name in rng.permutation(names)]]))
        plan, stats = oracle.optimal(s.atoms, g.atoms)
        if plan is None or len(plan) < 12:
            continue

        middle = oracle_midpoint(oracle, blocks, objects, s, g)
        first, first_stats = bfs_optimal(s, middle.goal(), idx)
        second, second_stats = bfs_optimal(apply_plan(s, first), g, idx)
        assert validate_plan(s, g, first + second).valid
        direct.append(stats.expansions)
        split.append(first_stats.expansions + second_stats.expansions)

    assert np.median(split) <= 0.7 * np.median(direct)
