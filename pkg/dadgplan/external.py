#!/usr/bin/env python3
""" Runs an external planner on a serialized sub-instance and reads back its plan file. """

import logging
import os
import re
import shlex
import shutil
import subprocess
import tempfile
import time

from .checks import InvalidAt, validate_plan
from .errors import ConfigError, ExternalFailure, ExternalInvalidPlan
from .pddlparse import parse_plan, serialize_domain, serialize_problem
from .search import Plan, ProvedUnsolvable, SearchStats, Solved, TimedOut

log = logging.getLogger(__name__)

### Fast Downward reports these on stdout; other planners simply leave the stats at 0
_EXPANDED = re.compile(r'Expanded (\d+) state')
_GENERATED = re.compile(r'Generated (\d+) state')

### Fast Downward exit code for a search that proved the task unsolvable
EXIT_UNSOLVABLE = 11


def _last_count(pattern, text):
    found = pattern.findall(text or '')
    return int(found[-1]) if found else 0


def build_command(template, domain_path, problem_path, plan_path):
    """ only the three slots are filled; any other braces reach the planner as written """
    text = template
    for slot, path in (('{domain}', domain_path), ('{problem}', problem_path), ('{plan}', plan_path)):
        text = text.replace(slot, shlex.quote(path))
    try:
        return shlex.split(text)
    except ValueError as err:
        raise ConfigError(''.join(['cannot split external command: ', str(err)])) from None


def solve_external(req):
    stats = SearchStats()
    if req.goal.atoms <= req.state.atoms:
        stats.plan_length = 0
        return Solved(Plan(()), stats)
    if req.timeout <= 0:
        return TimedOut(stats)

    workdir = tempfile.mkdtemp(prefix='dadgplan-')
    domain_path = os.path.join(workdir, 'domain.pddl')
    problem_path = os.path.join(workdir, 'problem.pddl')
    plan_path = os.path.join(workdir, 'plan.txt')

    try:
        with open(domain_path, 'w') as handle:
            handle.write(serialize_domain(req.dom))
        with open(problem_path, 'w') as handle:
            handle.write(serialize_problem(req.state, req.goal, req.dom, req.objects, 'subproblem'))

        command = build_command(req.engine.command, domain_path, problem_path, plan_path)
        log.debug('running %s in %s', command, workdir)

        start = time.perf_counter()
        try:
            result = subprocess.run(command, cwd=workdir, capture_output=True, text=True, timeout=req.timeout)
        except subprocess.TimeoutExpired:
            stats.elapsed = time.perf_counter() - start
            return TimedOut(stats)
        except OSError as err:
            raise ExternalFailure(-1, str(err)) from None
        stats.elapsed = time.perf_counter() - start
        stats.expansions = _last_count(_EXPANDED, result.stdout)
        stats.generated = _last_count(_GENERATED, result.stdout)

        if result.returncode == EXIT_UNSOLVABLE:
            return ProvedUnsolvable(stats)
        if result.returncode != 0:
            raise ExternalFailure(result.returncode, result.stderr or result.stdout)
        if not os.path.exists(plan_path):
            raise ExternalFailure(result.returncode, 'planner exited without writing a plan file')

        with open(plan_path, 'r') as handle:
            plan = Plan(tuple(parse_plan(handle.read(), req.dom, req.objects)))

        verdict = validate_plan(req.state, req.goal, plan)
        if not verdict.valid:
            index = verdict.index if isinstance(verdict, InvalidAt) else len(plan)
            raise ExternalInvalidPlan(index, verdict)

        stats.plan_length = len(plan)
        return Solved(plan, stats)

    finally:
        if req.engine.keep_artifacts:
            log.info('kept external planner files in %s', workdir)
        else:
            shutil.rmtree(workdir, ignore_errors=True)
