#!/usr/bin/env python3
""" Decompose, solve each sub-goal, escalate stuck sub-goals to the LLM, then validate the concatenated plan. """

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

from .assist import InspireRequest, PredictRequest, inspire_step, predict_step
from .checks import validate_plan
from .corpus import rules_for
from .decompose import decompose, format_goal
from .errors import (ConfigError, GoalCycle, InspireExhausted, LLMError, NotApplicableAt, PDDLError,
                     PredictExhausted, SolverError)
from .grounding import apply_plan, ground_all, successors
from .pddl_classes import GoalSpec
from .search import INTERNAL, EngineSpec, Plan, ProvedUnsolvable, SolveRequest, TimedOut, solve

log = logging.getLogger(__name__)

MODES = ('direct', 'decompose', 'inspire', 'predict')
LLM_MODES = ('inspire', 'predict')

### failure reasons
SUBGOAL_EXHAUSTED = 'SubGoalExhausted'
BUDGET_EXHAUSTED = 'BudgetExhausted'
GOAL_CYCLE = 'GoalCycle'
FINAL_VALIDATION = 'FinalValidation'
UNSOLVABLE = 'Unsolvable'


@dataclass
class PlannerConfig:
    mode: str = 'decompose'
    sub_solve_timeout: float = 15.0
    total_solver_budget: float = 180.0
    retry_limit: int = 10
    protect_achieved: bool = False
    engine: EngineSpec = INTERNAL
    seed: int = 0
    rules: object = None
    predict_timeout: float = 15.0
    strict: bool = False
    cycle_fallback: bool = False
    requery_limit: int = 3

    def __post_init__(self):
        self.mode = self.mode.lower()
        if self.mode == 'decompose-only':
            self.mode = 'decompose'
        if self.mode not in MODES:
            raise ConfigError(''.join(['unknown mode "', self.mode, '", expected one of ', ', '.join(MODES)]))
        if self.retry_limit < 1:
            raise ConfigError('retry limit must be at least 1')
        if self.requery_limit < 1:
            raise ConfigError('re-query limit must be at least 1')
        for name in ('sub_solve_timeout', 'total_solver_budget', 'predict_timeout'):
            if getattr(self, name) < 0:
                raise ConfigError(''.join([name, ' must not be negative']))


@dataclass
class Failure:
    reason: str
    subgoal_index: Optional[int] = None
    detail: str = ''
    solved = False

    def __str__(self):
        head = self.reason if self.subgoal_index is None else ''.join([self.reason, '(', str(self.subgoal_index), ')'])
        return ''.join([head, ': ', self.detail]) if self.detail else head


@dataclass
class SubGoalEntry:
    index: int
    subgoal: object = None
    attempts: int = 0
    llm_calls: int = 0
    requeries: int = 0
    solver_time: float = 0.0
    llm_time: float = 0.0
    expansions: int = 0
    generated: int = 0
    fragments: List[int] = field(default_factory=list)
    resolved_by: str = ''


@dataclass
class RunRecord:
    instance: str = ''
    mode: str = ''
    seed: int = 0
    entries: List[SubGoalEntry] = field(default_factory=list)
    plan: Optional[Plan] = None
    failure: Optional[Failure] = None

    @property
    def solved(self):
        return self.plan is not None and self.failure is None

    @property
    def outcome(self):
        return 'solved' if self.solved else 'failed'

    def total(self, name):
        return sum(getattr(entry, name) for entry in self.entries)

    @property
    def plan_length(self):
        return len(self.plan) if self.solved else None


@dataclass
class MetricsRow:
    solved: bool
    plan_length: Optional[int]
    solver_time: float
    llm_calls: int
    expansions: int
    branching: float
    llm_time: float = 0.0
    failure: str = ''


class _Budget:
    """ Wall-clock solver time still available to the episode """

    def __init__(self, total):
        self.total = total
        self.spent = 0.0

    @property
    def remaining(self):
        return max(0.0, self.total - self.spent)

    def grant(self, timeout):
        return min(timeout, self.remaining)

    def charge(self, elapsed):
        self.spent += elapsed


class _Episode:

    def __init__(self, problem, dom, cfg, client, idx, transcript):
        self.problem = problem
        self.dom = dom
        self.cfg = cfg
        self.client = client
        self.idx = idx
        self.transcript = transcript
        self.budget = _Budget(cfg.total_solver_budget)
        self.record = RunRecord(problem.name, cfg.mode, cfg.seed)

    def solve(self, state, goal, timeout, entry):
        req = SolveRequest(state, goal, self.dom, self.problem.objects, self.budget.grant(timeout), self.cfg.engine)
        start = time.perf_counter()
        try:
            outcome = solve(req, self.idx)
        except (SolverError, PDDLError) as err:
            log.warning('sub-solve failed: %s', err)
            outcome = TimedOut()
        elapsed = time.perf_counter() - start
        self.budget.charge(elapsed)
        entry.solver_time += elapsed
        entry.expansions += outcome.stats.expansions
        entry.generated += outcome.stats.generated
        return outcome

    def fail(self, reason, index=None, detail=''):
        self.record.failure = Failure(reason, index, detail)
        log.info('%s: %s', self.problem.name, self.record.failure)
        return self.record.failure, self.record

    def finish(self, plan):
        verdict = validate_plan(self.problem.init, self.problem.goal, plan)
        if not verdict.valid:
            return self.fail(FINAL_VALIDATION, None, str(verdict))
        self.record.plan = plan
        return plan, self.record

    def direct(self):
        entry = SubGoalEntry(0, None)
        self.record.entries.append(entry)
        outcome = self.solve(self.problem.init, self.problem.goal, self.cfg.total_solver_budget, entry)
        if outcome.solved:
            entry.resolved_by = 'solver'
            entry.fragments.append(len(outcome.plan))
            return self.finish(outcome.plan)
        if isinstance(outcome, ProvedUnsolvable):
            return self.fail(UNSOLVABLE, None, 'search space exhausted')
        return self.fail(BUDGET_EXHAUSTED, None, 'direct solve ran out of time')

    def escalate(self, state, goal, entry, trajectory, achieved):
        """ One attempt. Returns the fragment to apply, possibly empty. """
        if self.cfg.mode == 'inspire':
            applicable = successors(state, self.idx)
            if not applicable:
                return None
            request = InspireRequest(state, goal, trajectory, tuple(applicable), self.dom.name)
            step = inspire_step(request, self.client, self.cfg.requery_limit, self.transcript)
        else:
            request = PredictRequest(state, goal, self.dom.name)
            protected = achieved if self.cfg.protect_achieved else ()

            def solve_fn(start, sub_goal):
                return self.solve(start, sub_goal, self.cfg.predict_timeout, entry)

            step = predict_step(request, self.client, solve_fn, self.dom, self.problem.objects,
                                protected, self.cfg.requery_limit, self.transcript)
        entry.llm_calls += 1
        entry.requeries += step.requeries
        entry.llm_time += step.llm_time
        return step.fragment

    def decomposed(self):
        cfg = self.cfg
        rule = cfg.rules if cfg.rules is not None else rules_for(self.dom)
        try:
            sequence = decompose(self.problem.goal, rule, fallback=cfg.cycle_fallback)
        except GoalCycle as cycle:
            return self.fail(GOAL_CYCLE, None, str(cycle))
        log.info('%s: sub-goals %s', self.problem.name, sequence)

        state = self.problem.init
        actions = []
        achieved = []

        for index, subgoal in enumerate(sequence):
            entry = SubGoalEntry(index, subgoal)
            self.record.entries.append(entry)
            goal = GoalSpec.of(achieved + [subgoal]) if cfg.protect_achieved else GoalSpec.of([subgoal])

            if goal.satisfied_by(state):
                entry.resolved_by = 'already'
                achieved.append(subgoal)
                continue
            if self.budget.remaining <= 0 and cfg.sub_solve_timeout > 0:
                return self.fail(BUDGET_EXHAUSTED, index, 'no solver time left')

            outcome = self.solve(state, goal, cfg.sub_solve_timeout, entry)
            if outcome.solved:
                entry.resolved_by = 'solver'
            elif cfg.mode == 'decompose':
                return self.fail(SUBGOAL_EXHAUSTED, index, ''.join([format_goal(subgoal), ' not solved by the engine']))
            else:
                trajectory = []
                while not outcome.solved and entry.attempts < cfg.retry_limit:
                    if self.budget.remaining <= 0:
                        return self.fail(BUDGET_EXHAUSTED, index, 'no solver time left for LLM-assisted attempts')
                    entry.attempts += 1
                    try:
                        fragment = self.escalate(state, goal, entry, trajectory, achieved)
                    except (InspireExhausted, PredictExhausted) as err:
                        entry.llm_calls += 1
                        entry.requeries += max(0, err.attempts - 1)
                        entry.llm_time += getattr(err, 'llm_time', 0.0)
                        log.info('attempt %d on %s: %s', entry.attempts, format_goal(subgoal), err)
                        continue
                    except LLMError as err:
                        entry.llm_calls += 1
                        log.warning('attempt %d on %s: %s', entry.attempts, format_goal(subgoal), err)
                        continue
                    if fragment is None:
                        return self.fail(SUBGOAL_EXHAUSTED, index, 'dead end, no applicable actions')
                    if not fragment:
                        continue
                    try:
                        state = apply_plan(state, fragment)
                    except NotApplicableAt as err:
                        log.info('fragment rejected: %s', err)
                        continue
                    actions.extend(fragment)
                    entry.fragments.append(len(fragment))
                    if self.budget.remaining <= 0 and cfg.sub_solve_timeout > 0 and not goal.satisfied_by(state):
                        return self.fail(BUDGET_EXHAUSTED, index, 'no solver time left')
                    outcome = self.solve(state, goal, cfg.sub_solve_timeout, entry)

                if not outcome.solved:
                    return self.fail(SUBGOAL_EXHAUSTED, index,
                                     ''.join([format_goal(subgoal), ' unsolved after ', str(entry.attempts), ' attempts']))
                entry.resolved_by = 'solver' if not entry.fragments else cfg.mode

            if outcome.plan.actions:
                state = apply_plan(state, outcome.plan)
                actions.extend(outcome.plan)
                entry.fragments.append(len(outcome.plan))
            achieved.append(subgoal)

        if not self.problem.goal.satisfied_by(state):
            missing = ' '.join(str(atom) for atom in self.problem.goal.missing(state))
            if cfg.strict or self.budget.remaining <= 0:
                return self.fail(FINAL_VALIDATION, None, ''.join(['goal atoms undone: ', missing]))
            log.info('%s: repairing, %s undone', self.problem.name, missing)
            entry = SubGoalEntry(len(sequence), None, resolved_by='repair')
            self.record.entries.append(entry)
            outcome = self.solve(state, self.problem.goal, self.budget.remaining, entry)
            if not outcome.solved:
                return self.fail(FINAL_VALIDATION, None, ''.join(['repair failed, missing ', missing]))
            actions.extend(outcome.plan)
            entry.fragments.append(len(outcome.plan))

        return self.finish(Plan(tuple(actions)))


def plan(problem, dom, cfg, client=None, idx=None, transcript=None):
    """ Returns (Plan | Failure, RunRecord) """
    if cfg.mode in LLM_MODES and client is None:
        raise ConfigError(''.join(['mode ', cfg.mode, ' needs an LLM client (--llm)']))
    if idx is None:
        idx = ground_all(dom, problem.objects)

    episode = _Episode(problem, dom, cfg, client, idx, transcript)
    if cfg.mode == 'direct':
        return episode.direct()
    return episode.decomposed()


def run_episode_metrics(record):
    expansions = record.total('expansions')
    generated = record.total('generated')
    return MetricsRow(
        solved=record.solved,
        plan_length=record.plan_length,
        solver_time=record.total('solver_time'),
        llm_calls=record.total('llm_calls'),
        expansions=expansions,
        branching=generated / expansions if expansions else 0.0,
        llm_time=record.total('llm_time'),
        failure=str(record.failure) if record.failure else '',
    )


def format_record(record):
    """ key: value lines, one block per episode, sub-goals as subgoal.<i> """
    metrics = run_episode_metrics(record)
    lines = [
        ''.join(['instance: ', record.instance]),
        ''.join(['mode: ', record.mode]),
        ''.join(['seed: ', str(record.seed)]),
        ''.join(['outcome: ', record.outcome]),
        ''.join(['failure: ', metrics.failure]),
        ''.join(['plan_length: ', '' if metrics.plan_length is None else str(metrics.plan_length)]),
        ''.join(['solver_time: ', '%.6f' % metrics.solver_time]),
        ''.join(['llm_time: ', '%.6f' % metrics.llm_time]),
        ''.join(['llm_calls: ', str(metrics.llm_calls)]),
        ''.join(['requeries: ', str(record.total('requeries'))]),
        ''.join(['expansions: ', str(metrics.expansions)]),
        ''.join(['branching: ', '%.3f' % metrics.branching]),
    ]
    for entry in record.entries:
        subgoal = format_goal(entry.subgoal) if entry.subgoal is not None else 'goal'
        lines.append(''.join([
            'subgoal.', str(entry.index), ': ', subgoal,
            ' attempts=', str(entry.attempts),
            ' llm_calls=', str(entry.llm_calls),
            ' expansions=', str(entry.expansions),
            ' fragments=', ','.join(str(length) for length in entry.fragments),
            ' resolved_by=', entry.resolved_by or '-',
        ]))
    return '\n'.join(lines) + '\n'
