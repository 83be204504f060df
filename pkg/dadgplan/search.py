#!/usr/bin/env python3
""" Solver: greedy best-first search on the additive heuristic, plus an exhaustive breadth-first oracle. """

import heapq
import logging
import math
import shlex
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .errors import ConfigError, SolverError
from .grounding import ground_all
from .pddl_classes import GoalSpec, State

log = logging.getLogger(__name__)

INFINITY = math.inf


@dataclass
class SearchStats:
    expansions: int = 0
    generated: int = 0
    elapsed: float = 0.0
    plan_length: Optional[int] = None

    @property
    def branching(self):
        """ average number of successors per expanded state """
        if self.expansions == 0:
            return 0.0
        return self.generated / self.expansions


@dataclass(frozen=True)
class Plan:
    actions: Tuple = ()

    def __iter__(self):
        return iter(self.actions)

    def __len__(self):
        return len(self.actions)

    def __getitem__(self, index):
        return self.actions[index]

    def __add__(self, other):
        return Plan(tuple(self.actions) + tuple(other))

    def __str__(self):
        return ' '.join(str(action) for action in self.actions)


@dataclass
class Solved:
    plan: Plan
    stats: SearchStats = field(default_factory=SearchStats)
    solved = True


@dataclass
class TimedOut:
    stats: SearchStats = field(default_factory=SearchStats)
    solved = False


@dataclass
class ProvedUnsolvable:
    stats: SearchStats = field(default_factory=SearchStats)
    solved = False


@dataclass(frozen=True)
class EngineSpec:
    """ internal, or external with a command template holding {domain}, {problem} and {plan} """
    kind: str = 'internal'
    command: Optional[str] = None
    keep_artifacts: bool = False

    @classmethod
    def parse(cls, text, keep_artifacts=False):
        if text is None or text == 'internal':
            return cls('internal', None, keep_artifacts)
        if text.startswith('external:'):
            command = text[len('external:'):].strip().strip('"').strip("'")
            for slot in ('{domain}', '{problem}', '{plan}'):
                if slot not in command:
                    raise ConfigError(''.join(['external command template lacks ', slot]))
            try:
                shlex.split(command)
            except ValueError as err:
                raise ConfigError(''.join(['cannot split external command: ', str(err)])) from None
            return cls('external', command, keep_artifacts)
        raise ConfigError(''.join(['unknown engine "', text, '", expected internal or external:"<cmd>"']))

    def __str__(self):
        if self.kind == 'internal':
            return 'internal'
        return ''.join(['external:', self.command])


INTERNAL = EngineSpec()


@dataclass(frozen=True)
class SolveRequest:
    state: State
    goal: GoalSpec
    dom: object
    objects: Dict[str, str]
    timeout: float = 15.0
    engine: EngineSpec = INTERNAL

    def __post_init__(self):
        if self.timeout < 0:
            raise ConfigError('solver timeout must be 0 or positive')

    def __hash__(self):
        return hash((self.state, self.goal, self.timeout, self.engine))


def _atoms(value):
    if isinstance(value, (State, GoalSpec)):
        return value.atoms
    return frozenset(value)


def h_add(s, g, idx):
    """ Additive relaxed cost of g from s; math.inf when some goal atom is relaxed-unreachable. """
    state = _atoms(s)
    goal = _atoms(g)
    if goal <= state:
        return 0

    cost = dict.fromkeys(state, 0)
    heap = [(0, atom) for atom in sorted(state)]
    waiting = {}
    accumulated = {}

    def fire(action, value):
        for atom in action.add:
            if value < cost.get(atom, INFINITY):
                cost[atom] = value
                heapq.heappush(heap, (value, atom))

    for action in idx.unconditional:
        fire(action, 1)

    pending_goals = set(goal)
    settled = set()
    while heap and pending_goals:
        value, atom = heapq.heappop(heap)
        if atom in settled or value > cost[atom]:
            continue
        settled.add(atom)
        pending_goals.discard(atom)
        for action in idx.by_precondition.get(atom, ()):
            left = waiting.get(action, len(action.pre)) - 1
            waiting[action] = left
            accumulated[action] = accumulated.get(action, 0) + value
            if left == 0:
                fire(action, 1 + accumulated[action])

    if pending_goals:
        return INFINITY
    return sum(cost[atom] for atom in goal)


def _trace(parents, state):
    actions = []
    while parents[state] is not None:
        state, action = parents[state]
        actions.append(action)
    actions.reverse()
    return Plan(tuple(actions))


def solve_internal(req, idx=None):
    if idx is None:
        idx = ground_all(req.dom, req.objects)

    start = time.perf_counter()
    stats = SearchStats()

    def finish(outcome):
        stats.elapsed = time.perf_counter() - start
        return outcome

    root = req.state.atoms
    goal = req.goal.atoms
    if goal <= root:
        stats.plan_length = 0
        return finish(Solved(Plan(()), stats))

    h_root = h_add(root, goal, idx)
    if h_root == INFINITY:
        log.debug('goal is unreachable in the delete relaxation')
        return finish(ProvedUnsolvable(stats))

    counter = 0
    heap = [(h_root, counter, root)]
    parents = {root: None}
    closed = set()

    while heap:
        if time.perf_counter() - start >= req.timeout:
            return finish(TimedOut(stats))

        _, _, state = heapq.heappop(heap)
        if state in closed:
            continue
        closed.add(state)
        stats.expansions += 1

        for action in idx.all:
            if not action.pre <= state:
                continue
            stats.generated += 1
            child = (state - action.delete) | action.add
            if child in parents:
                continue
            parents[child] = (state, action)
            if goal <= child:
                plan = _trace(parents, child)
                stats.plan_length = len(plan)
                return finish(Solved(plan, stats))
            h_child = h_add(child, goal, idx)
            if h_child == INFINITY:
                continue
            counter += 1
            heapq.heappush(heap, (h_child, counter, child))

    return finish(ProvedUnsolvable(stats))


def bfs_optimal(s, g, idx, max_expansions=None):
    """ Breadth-first search. Returns (Plan or None when the reachable space is exhausted, stats). """
    start = time.perf_counter()
    stats = SearchStats()
    root = _atoms(s)
    goal = _atoms(g)

    if goal <= root:
        stats.plan_length = 0
        stats.elapsed = time.perf_counter() - start
        return Plan(()), stats

    parents = {root: None}
    frontier = deque([root])
    while frontier:
        if max_expansions is not None and stats.expansions >= max_expansions:
            raise SolverError(''.join(['breadth-first search exceeded ', str(max_expansions), ' expansions']))
        state = frontier.popleft()
        stats.expansions += 1
        for action in idx.all:
            if not action.pre <= state:
                continue
            stats.generated += 1
            child = (state - action.delete) | action.add
            if child in parents:
                continue
            parents[child] = (state, action)
            if goal <= child:
                plan = _trace(parents, child)
                stats.plan_length = len(plan)
                stats.elapsed = time.perf_counter() - start
                return plan, stats
            frontier.append(child)

    stats.elapsed = time.perf_counter() - start
    return None, stats


def solve(req, idx=None):
    if req.engine.kind == 'external':
        from .external import solve_external
        return solve_external(req)
    return solve_internal(req, idx)
