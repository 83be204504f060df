#!/usr/bin/env python3
""" dadgplan command line: parse, ground, decompose, solve, validate, bench, prompts, generate. """

import argparse
import logging
import os
import sys

from . import corpus
from .assist import InspireRequest, PredictRequest, render_direct_prompt, render_inspire_prompt, render_predict_prompt
from .bench import SuiteSpec, emit_report, format_summary, resolve_instances, run_suite
from .checks import validate_plan
from .decompose import decompose, read_rules
from .errors import ConfigError, PDDLError, PlannerError
from .generate import generate_suite
from .grounding import ground_all, successors
from .llm import Transcript, make_client
from .orchestrator import LLM_MODES, MODES, Failure, PlannerConfig, format_record, plan
from .pddlparse import format_plan, load_domain, load_problem, parse_plan
from .search import EngineSpec
from .utils import Stopwatch, config_defaults, configure_logging, read_config

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

RULES_HELP = ('dependency rule file: one "predicate -> none | edge <from_idx> <to_idx>" per line, '
              '0-based indices, "default -> ..." for unlisted binary predicates, # comments')


def _common(parser):
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v info, -vv debug')
    parser.add_argument('-q', '--quiet', action='store_true', help='errors only')
    parser.add_argument('--config', type=str, help='key=value file mirroring the flags; flags win')


def _files(parser, problem=True):
    parser.add_argument('--domain', type=str, help='domain file, or one of: ' + ', '.join(corpus.DOMAINS))
    if problem:
        parser.add_argument('--problem', type=str, help='problem file')


def _planner(parser, mode_help):
    parser.add_argument('--mode', type=str.lower, default='decompose', help=mode_help)
    parser.add_argument('--engine', type=str, default='internal', help='internal, or external:"<cmd with {domain} {problem} {plan}>"')
    parser.add_argument('--sub-timeout', dest='sub_timeout', type=float, default=15.0, help='seconds per sub-instance solve (0 = goal check only)')
    parser.add_argument('--predict-timeout', dest='predict_timeout', type=float, default=15.0, help='seconds for solving towards a predicted intermediate state')
    parser.add_argument('--budget', type=float, default=180.0, help='total solver seconds per instance, LLM time excluded')
    parser.add_argument('--retry-limit', dest='retry_limit', type=int, default=10, help='LLM attempts per sub-goal')
    parser.add_argument('--requery-limit', dest='requery_limit', type=int, default=3, help='responses per LLM call before giving up on it')
    parser.add_argument('--llm', type=str, help='live | scripted:<file> | oracle')
    parser.add_argument('--endpoint', type=str, help='chat completion URL for --llm live (or DADGPLAN_ENDPOINT)')
    parser.add_argument('--model', type=str, help='model id for --llm live (or DADGPLAN_MODEL)')
    parser.add_argument('--protect-achieved', dest='protect_achieved', action='store_true', help='keep earlier sub-goals in every later sub-instance')
    parser.add_argument('--strict', action='store_true', help='no repair solve when sub-goals were undone')
    parser.add_argument('--cycle-fallback', dest='cycle_fallback', action='store_true', help='cyclic goal dependencies fall back to goal file order')
    parser.add_argument('--rules', type=str, help=RULES_HELP)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--keep-artifacts', dest='keep_artifacts', action='store_true', help='keep external planner temp directories')


def build_parser():
    parser = argparse.ArgumentParser(prog='dadgplan', description='Decomposition-based PDDL planner with LLM assistance')
    sub = parser.add_subparsers(dest='command')
    commands = {}

    p = commands['parse'] = sub.add_parser('parse', help='syntax-check domain and problem files')
    _common(p)
    p.add_argument('--domain', type=str, help='domain file, or one of: ' + ', '.join(corpus.DOMAINS))
    p.add_argument('--problem', type=str, nargs='*', default=[], help='problem file(s)')
    p.add_argument('--strict', action='store_true', help='domain name mismatches are errors')

    p = commands['ground'] = sub.add_parser('ground', help='list the applicable actions of the initial state')
    _common(p)
    _files(p)
    p.add_argument('--all', action='store_true', help='list every ground action instead')

    p = commands['decompose'] = sub.add_parser('decompose', help='print the ordered sub-goal sequence')
    _common(p)
    _files(p)
    p.add_argument('--rules', type=str, help=RULES_HELP)
    p.add_argument('--cycle-fallback', dest='cycle_fallback', action='store_true')

    p = commands['solve'] = sub.add_parser('solve', help='plan one instance in one mode')
    _common(p)
    _files(p)
    _planner(p, ' | '.join(MODES))
    p.add_argument('--plan-out', dest='plan_out', type=str, help='write the plan file here')
    p.add_argument('--record', type=str, help='write the run record here')
    p.add_argument('--transcript', type=str, help='append LLM calls as JSON lines here (default: <plan-out or record>.transcript.jsonl)')

    p = commands['validate'] = sub.add_parser('validate', help='check a plan file')
    _common(p)
    _files(p)
    p.add_argument('--plan', type=str, help='plan file, one (name args...) per line')

    p = commands['bench'] = sub.add_parser('bench', help='run a suite across modes')
    _common(p)
    _files(p, problem=False)
    p.add_argument('--suite', type=str, help='directory of problem files or a glob')
    _planner(p, 'comma separated, from: ' + ', '.join(MODES))
    p.add_argument('--csv', type=str, help='report file')
    p.add_argument('--format', choices=['csv', 'table'], default='table', help='what to print on stdout')
    p.add_argument('--jobs', type=int, default=1, help='worker processes')
    p.add_argument('--record-dir', dest='record_dir', type=str, help='run records and transcripts per episode')

    p = commands['prompts'] = sub.add_parser('prompts', help='render the inspire, predict and direct prompts')
    _common(p)
    _files(p)
    p.add_argument('--which', choices=['all', 'inspire', 'predict', 'direct'], default='all')

    p = commands['generate'] = sub.add_parser('generate', help='write seeded random instances')
    _common(p)
    p.add_argument('--domain', choices=['blocks', 'logistics'], default='blocks')
    p.add_argument('--count', type=int, default=10)
    p.add_argument('--size', type=int, default=5, help='blocks, or packages for logistics')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--outdir', type=str, default='instances')

    return parser, commands


### helpers

def _domain_path(value):
    if not value:
        raise ConfigError('--domain is required')
    if not os.path.isfile(value) and value in corpus.DOMAINS:
        return corpus.domain_path(value)
    return value


def _load(args):
    dom = load_domain(_domain_path(args.domain))
    if not args.problem:
        raise ConfigError('--problem is required')
    return dom, load_problem(args.problem, dom)


def _rules(args, dom):
    return read_rules(args.rules, dom) if args.rules else corpus.rules_for(dom)


def planner_config(args, mode=None):
    return PlannerConfig(
        mode=mode or args.mode,
        sub_solve_timeout=args.sub_timeout,
        total_solver_budget=args.budget,
        retry_limit=args.retry_limit,
        protect_achieved=args.protect_achieved,
        engine=EngineSpec.parse(args.engine, args.keep_artifacts),
        seed=args.seed,
        predict_timeout=args.predict_timeout,
        strict=args.strict,
        cycle_fallback=args.cycle_fallback,
        requery_limit=args.requery_limit,
    )


### sub-commands

def cmd_parse(args):
    dom = load_domain(_domain_path(args.domain))
    print(''.join(['domain ', dom.name, ': ', str(len(dom.schemas)), ' schemas, ', str(len(dom.predicates)), ' predicates']))
    for path in args.problem:
        problem = load_problem(path, dom, strict=args.strict)
        print(''.join(['problem ', problem.name, ': ', str(len(problem.objects)), ' objects, ', str(len(problem.init)), ' init atoms, ', str(len(problem.goal)), ' goal atoms']))
    return EXIT_OK


def cmd_ground(args):
    dom, problem = _load(args)
    idx = ground_all(dom, problem.objects)
    actions = idx.all if args.all else successors(problem.init, idx)
    for action in actions:
        print(action)
    log.info('%d of %d ground actions', len(actions), len(idx))
    return EXIT_OK


def cmd_decompose(args):
    dom, problem = _load(args)
    print(decompose(problem.goal, _rules(args, dom), fallback=args.cycle_fallback))
    return EXIT_OK


def cmd_solve(args):
    dom, problem = _load(args)
    cfg = planner_config(args)
    cfg.rules = _rules(args, dom)
    idx = ground_all(dom, problem.objects)
    client = None
    if cfg.mode in LLM_MODES:
        if not args.llm:
            raise ConfigError(''.join(['mode ', cfg.mode, ' needs --llm live|scripted:<file>|oracle']))
        client = make_client(args.llm, dom, problem.objects, idx, endpoint=args.endpoint, model=args.model)
    transcript = None
    if args.transcript:
        transcript = Transcript(args.transcript)
    elif client is not None:
        ## beside the plan file, else beside the run record, else kept in memory
        beside = args.plan_out or args.record
        transcript = Transcript(beside + '.transcript.jsonl' if beside else None)

    watch = Stopwatch()
    result, record = plan(problem, dom, cfg, client, idx, transcript)

    if args.record:
        with open(args.record, 'w') as handle:
            handle.write(format_record(record))

    if isinstance(result, Failure):
        print(''.join(['FAILED ', str(result)]))
        return EXIT_FAILED

    text = format_plan(result)
    if args.plan_out:
        with open(args.plan_out, 'w') as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    print(''.join(['SOLVED (', str(len(result)), ' steps, ', str(record.total('llm_calls')), ' llm calls, ', str(watch.ms()), ' ms)']))
    return EXIT_OK


def cmd_validate(args):
    dom, problem = _load(args)
    if not args.plan:
        raise ConfigError('--plan is required')
    with open(args.plan, 'r') as handle:
        actions = parse_plan(handle.read(), dom, problem.objects)
    verdict = validate_plan(problem.init, problem.goal, actions)
    print(verdict)
    return EXIT_OK if verdict.valid else EXIT_FAILED


def cmd_bench(args):
    domain = _domain_path(args.domain)
    if not args.suite:
        raise ConfigError('--suite is required')
    modes = [mode.strip() for mode in args.mode.split(',') if mode.strip()]
    spec = SuiteSpec(
        domain=domain,
        instances=resolve_instances(args.suite, domain),
        modes=modes,
        config=planner_config(args, mode=modes[0] if modes else 'decompose'),
        llm=args.llm,
        csv=args.csv,
        record_dir=args.record_dir,
        jobs=args.jobs,
    )
    if args.rules:
        spec.config.rules = read_rules(args.rules, load_domain(domain))
    rows, summary = run_suite(spec)
    if args.format == 'table':
        emit_report(rows, 'table')
    elif not args.csv:
        emit_report(rows, 'csv')
    print(format_summary(summary), end='')
    return EXIT_OK


def cmd_prompts(args):
    dom, problem = _load(args)
    idx = ground_all(dom, problem.objects)
    renders = {
        'inspire': lambda: render_inspire_prompt(InspireRequest(
            problem.init, problem.goal, [], tuple(successors(problem.init, idx)), dom.name)),
        'predict': lambda: render_predict_prompt(PredictRequest(problem.init, problem.goal, dom.name)),
        'direct': lambda: render_direct_prompt(dom.name, problem.init, problem.goal),
    }
    which = list(renders) if args.which == 'all' else [args.which]
    for name in which:
        if len(which) > 1:
            print(''.join(['=== ', name, ' ===']))
        sys.stdout.write(renders[name]())
    return EXIT_OK


def cmd_generate(args):
    for path in generate_suite(args.domain, args.count, args.seed, args.size, args.outdir):
        print(path)
    return EXIT_OK


COMMANDS = {
    'parse': cmd_parse,
    'ground': cmd_ground,
    'decompose': cmd_decompose,
    'solve': cmd_solve,
    'validate': cmd_validate,
    'bench': cmd_bench,
    'prompts': cmd_prompts,
    'generate': cmd_generate,
}


def _parse(parser, commands, argv):
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise ConfigError('a sub-command is required')
    if args.config:
        known = {action.dest for command in commands.values() for action in command._actions}
        command = commands[args.command]
        command.set_defaults(**config_defaults(read_config(args.config), command, known))
        args = parser.parse_args(argv)
    return args


def cli_main(argv=None):
    parser, commands = build_parser()
    try:
        args = _parse(parser, commands, argv)
    except SystemExit as exit:
        return exit.code if isinstance(exit.code, int) else EXIT_USAGE
    except ConfigError as err:
        print(''.join(['dadgplan: error: ', str(err)]), file=sys.stderr)
        return EXIT_USAGE

    configure_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PDDLError, OSError) as err:
        print(''.join(['dadgplan: error: ', str(err)]), file=sys.stderr)
        return EXIT_USAGE
    except PlannerError as err:
        print(''.join(['dadgplan: ', str(err)]), file=sys.stderr)
        return EXIT_FAILED


def main():
    sys.exit(cli_main())
