#!/usr/bin/env python3
""" Benchmark harness: every (instance, mode) pair of a suite, one report row each. """

import csv
import glob
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from .errors import ConfigError, PlannerError
from .grounding import ground_all
from .llm import Transcript, make_client
from .orchestrator import LLM_MODES, PlannerConfig, format_record, plan, run_episode_metrics
from .pddlparse import load_domain, load_problem

log = logging.getLogger(__name__)

FIELDS = ['instance', 'mode', 'solved', 'plan_length', 'solver_ms', 'llm_calls', 'expansions', 'branching']
TIMING_FIELDS = ('solver_ms',)


@dataclass
class SuiteSpec:
    domain: str
    instances: List[str]
    modes: List[str]
    config: PlannerConfig = field(default_factory=PlannerConfig)
    overrides: Dict[str, dict] = field(default_factory=dict)
    llm: Optional[str] = None
    csv: Optional[str] = None
    record_dir: Optional[str] = None
    jobs: int = 1

    def check(self):
        if not self.instances:
            raise ConfigError('the suite has no instances')
        if not self.modes:
            raise ConfigError('the suite has no modes')
        for path in [self.domain] + list(self.instances):
            if not os.path.isfile(path):
                raise ConfigError(''.join(['no such file: ', path]))
        for mode in self.modes:
            self.config_for(mode)
            if mode in LLM_MODES and not self.llm:
                raise ConfigError(''.join(['mode ', mode, ' needs --llm']))
        if self.jobs < 1:
            raise ConfigError('--jobs must be at least 1')

    def config_for(self, mode):
        return replace(self.config, mode=mode, **self.overrides.get(mode, {}))

    @property
    def transcript_dir(self):
        """ beside the run records, else <csv stem>.transcripts when an LLM mode runs """
        if self.record_dir:
            return self.record_dir
        if self.csv and any(mode in LLM_MODES for mode in self.modes):
            return os.path.splitext(self.csv)[0] + '.transcripts'
        return None


@dataclass
class ReportRow:
    instance: str
    mode: str
    solved: bool
    plan_length: Optional[int]
    solver_ms: float
    llm_calls: int
    expansions: int
    branching: float
    failure: str = ''

    def cells(self):
        return {
            'instance': self.instance,
            'mode': self.mode,
            'solved': 'true' if self.solved else 'false',
            'plan_length': '' if self.plan_length is None else str(self.plan_length),
            'solver_ms': '%.1f' % self.solver_ms,
            'llm_calls': str(self.llm_calls),
            'expansions': str(self.expansions),
            'branching': '%.3f' % self.branching,
        }


def instance_id(path):
    return os.path.splitext(os.path.basename(path))[0]


def resolve_instances(pattern, domain=None):
    """ a directory (every .pddl in it but the domain file) or a glob """
    if os.path.isdir(pattern):
        paths = glob.glob(os.path.join(pattern, '*.pddl'))
    else:
        paths = glob.glob(pattern)
    skip = os.path.abspath(domain) if domain else None
    return sorted(path for path in paths if os.path.abspath(path) != skip)


def run_one(domain_path, instance_path, cfg, llm=None, record_dir=None, transcript_dir=None):
    """ One episode. Planning failures and bad input become a failed row; OSError propagates. """
    transcript_dir = transcript_dir or record_dir
    name = instance_id(instance_path)
    try:
        dom = load_domain(domain_path)
        problem = load_problem(instance_path, dom)
        idx = ground_all(dom, problem.objects)
        client = make_client(llm, dom, problem.objects, idx) if cfg.mode in LLM_MODES else None
        transcript = None
        if transcript_dir is not None and client is not None:
            transcript = Transcript(os.path.join(transcript_dir, ''.join([name, '.', cfg.mode, '.jsonl'])))
        _, record = plan(problem, dom, cfg, client, idx, transcript)
    except PlannerError as err:
        log.error('%s [%s]: %s', name, cfg.mode, err)
        return ReportRow(name, cfg.mode, False, None, 0.0, 0, 0, 0.0, str(err))

    if record_dir is not None:
        with open(os.path.join(record_dir, ''.join([name, '.', cfg.mode, '.txt'])), 'w') as handle:
            handle.write(format_record(record))

    metrics = run_episode_metrics(record)
    return ReportRow(name, cfg.mode, metrics.solved, metrics.plan_length, metrics.solver_time * 1000.0,
                     metrics.llm_calls, metrics.expansions, metrics.branching, metrics.failure)


def _job(args):
    return run_one(*args)


class _Journal:
    """ Rows land in <csv>.partial as they finish """

    def __init__(self, csv_path):
        self.path = csv_path + '.partial' if csv_path else None
        if self.path:
            with open(self.path, 'w', newline='') as handle:
                csv.DictWriter(handle, fieldnames=FIELDS).writeheader()

    def append(self, row):
        if not self.path:
            return
        with open(self.path, 'a', newline='') as handle:
            csv.DictWriter(handle, fieldnames=FIELDS).writerow(row.cells())
            handle.flush()


def row_key(row):
    return (row.instance, row.mode)


def summarize(rows, modes=None):
    """ mode -> solved, total, median plan length of the solved rows, mean logical LLM calls """
    modes = modes or sorted({row.mode for row in rows})
    summary = {}
    for mode in modes:
        subset = [row for row in rows if row.mode == mode]
        lengths = [row.plan_length for row in subset if row.solved]
        summary[mode] = {
            'solved': sum(1 for row in subset if row.solved),
            'total': len(subset),
            'median_length': float(np.median(lengths)) if lengths else None,
            'mean_llm_calls': float(np.mean([row.llm_calls for row in subset])) if subset else 0.0,
        }
    return summary


def run_suite(spec):
    spec.check()
    for directory in (spec.record_dir, spec.transcript_dir):
        if directory:
            os.makedirs(directory, exist_ok=True)

    jobs = [(spec.domain, path, spec.config_for(mode), spec.llm, spec.record_dir, spec.transcript_dir)
            for path in spec.instances for mode in spec.modes]
    journal = _Journal(spec.csv)
    rows = []

    if spec.jobs == 1:
        for job in jobs:
            row = _job(job)
            journal.append(row)
            rows.append(row)
    else:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            futures = [pool.submit(_job, job) for job in jobs]
            for future in as_completed(futures):
                row = future.result()
                journal.append(row)
                rows.append(row)

    rows.sort(key=row_key)
    if spec.csv:
        emit_report(rows, 'csv', spec.csv)
        os.remove(journal.path)
    return rows, summarize(rows, spec.modes)


def _table(rows, columns):
    widths = [max(len(column), *(len(row[i]) for row in rows)) if rows else len(column)
              for i, column in enumerate(columns)]
    lines = ['  '.join(column.ljust(width) for column, width in zip(columns, widths))]
    lines.append('  '.join('-' * width for width in widths))
    for row in rows:
        lines.append('  '.join(cell.ljust(width) for cell, width in zip(row, widths)))
    return '\n'.join(line.rstrip() for line in lines) + '\n'


def emit_report(rows, format='csv', out=None):
    """ out: a path, an open text file, or None for stdout """
    rows = sorted(rows, key=row_key)
    if format == 'csv':
        def write(handle):
            writer = csv.DictWriter(handle, fieldnames=FIELDS, lineterminator='\n')
            writer.writeheader()
            for row in rows:
                writer.writerow(row.cells())
    elif format == 'table':
        def write(handle):
            columns = FIELDS + ['failure']
            cells = [[row.cells()[name] for name in FIELDS] + [row.failure] for row in rows]
            handle.write(_table(cells, columns))
    else:
        raise ConfigError(''.join(['unknown report format ', format]))

    if out is None:
        write(sys.stdout)
    elif isinstance(out, str):
        with open(out, 'w', newline='') as handle:
            write(handle)
    else:
        write(out)


def format_summary(summary):
    """ per mode solved/total, the way the comparison tables print it """
    cells = []
    for mode, entry in summary.items():
        median = '' if entry['median_length'] is None else '%.1f' % entry['median_length']
        cells.append([mode, '%d/%d' % (entry['solved'], entry['total']), median, '%.2f' % entry['mean_llm_calls']])
    return _table(cells, ['mode', 'solved', 'median_length', 'mean_llm_calls'])
