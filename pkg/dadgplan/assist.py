#!/usr/bin/env python3
""" The two LLM protocols: action suggestion (Inspire) and intermediate-state prediction (Predict). """

import ast
import json
import logging
import re
import time
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from .corpus import family, prompt_template
from .errors import (DegenerateState, InspireExhausted, NotInApplicableSet, ParseFailure,
                     PredictExhausted, ResponseError, TooManyAtoms, UnknownObject, UnknownPredicate)
from .pddl_classes import Atom, GoalSpec, State, canonical

log = logging.getLogger(__name__)

SLOT = 'XXX'
MAX_INTERMEDIATE_ATOMS = 2
REQUERY_LIMIT = 3


@dataclass
class InspireRequest:
    state: State
    goal: GoalSpec
    trajectory: List = field(default_factory=list)
    applicable: Tuple = ()
    domain_name: str = 'blocks'


@dataclass
class PredictRequest:
    state: State
    goal: GoalSpec
    domain_name: str = 'blocks'


@dataclass(frozen=True)
class ParsedIntermediate:
    atoms: FrozenSet[Atom]

    def goal(self, protected=()):
        return GoalSpec.of(canonical(set(self.atoms) | set(protected)))

    def __str__(self):
        return ' '.join(str(atom) for atom in canonical(self.atoms))


@dataclass
class StepResult:
    """ One logical LLM call. `responses` counts completions, re-queries included. """
    fragment: Tuple = ()
    responses: int = 0
    llm_time: float = 0.0
    intermediate: Optional[ParsedIntermediate] = None
    outcome: object = None

    @property
    def requeries(self):
        return max(0, self.responses - 1)


### Rendering

def render_list(items):
    return ''.join(['[', ', '.join(str(item) for item in items), ']'])


def domain_phrase(template, domain_name):
    """ the templates are written for Blocks World; other domains get their own name """
    name = family(domain_name)
    if name.startswith('blocks'):
        return template
    title = name.capitalize()
    template = template.replace('Blocks World domain', title + ' domain')
    return template.replace('Blocks domain', title + ' domain')


def fill(template, values):
    parts = template.split(SLOT)
    if len(parts) != len(values) + 1:
        raise ValueError(''.join(['template has ', str(len(parts) - 1), ' slots, ', str(len(values)), ' values given']))
    out = [parts[0]]
    for value, part in zip(values, parts[1:]):
        out.append(value)
        out.append(part)
    return ''.join(out)


def render_inspire_prompt(r):
    template = domain_phrase(prompt_template('inspire'), r.domain_name)
    return fill(template, [
        render_list(r.goal),
        render_list(r.state),
        render_list(r.trajectory),
        render_list(r.applicable),
    ])


def render_predict_prompt(r):
    template = domain_phrase(prompt_template('predict'), r.domain_name)
    return fill(template, [render_list(r.goal), render_list(r.state)])


def render_direct_prompt(domain_name, s, g):
    template = domain_phrase(prompt_template('direct'), domain_name)
    return fill(template, [render_list(g), render_list(s)])


### Parsing

_THINK = re.compile(r'<think>.*?</think>', flags=re.S | re.I)
_GROUP = re.compile(r'\(([^()]*)\)')
_FENCE = re.compile(r'```[A-Za-z0-9_-]*')


def strip_reasoning(text):
    text = _THINK.sub('', text or '')
    ## some endpoints drop the opening tag and only send the closing one
    if '</think>' in text.lower():
        text = re.split(r'</think>', text, flags=re.I)[-1]
    return text


def _tokens(group):
    return [token.strip('\'"`') for token in re.split(r'[\s,]+', group.strip().lower()) if token.strip('\'"`')]


def parse_inspire_response(text, applicable):
    """ First parenthesised group naming a member of `applicable`; a multi-action reply keeps its first valid action """
    text = strip_reasoning(text)
    groups = _GROUP.findall(text)
    candidates = [_tokens(group) for group in groups]
    candidates = [tokens for tokens in candidates if tokens]
    if not candidates:
        raise ParseFailure('no parenthesised action in the response')

    by_key = {(action.schema_name, tuple(action.args)): action for action in applicable}
    for tokens in candidates:
        action = by_key.get((tokens[0], tuple(tokens[1:])))
        if action is not None:
            return action

    first = candidates[0]
    raise NotInApplicableSet(''.join(['(', ' '.join(first), ')']))


def _first_array(text):
    start = text.find('[')
    if start < 0:
        raise ParseFailure('no array in the response')
    depth = 0
    quote = None
    for index in range(start, len(text)):
        char = text[index]
        if quote:
            if char == quote:
                quote = None
            continue
        if char in '\'"':
            quote = char
        elif char == '[':
            depth += 1
        elif char == ']':
            depth -= 1
            if depth == 0:
                return text[start:index + 1]
    raise ParseFailure('unterminated array in the response')


def _literal(text):
    try:
        return json.loads(text)
    except ValueError:
        pass
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        raise ParseFailure(''.join(['cannot read ', text[:80]])) from None


def _entry_atom(entry):
    """ ['on', ['b', 'c']] or ['on', 'b', 'c'] -> Atom """
    if not isinstance(entry, (list, tuple)) or not entry or not isinstance(entry[0], str):
        raise ParseFailure(''.join(['not a [predicate, [args]] pair: ', repr(entry)]))
    if len(entry) == 2 and isinstance(entry[1], (list, tuple)):
        args = entry[1]
    else:
        args = entry[1:]
    if not all(isinstance(arg, str) for arg in args):
        raise ParseFailure(''.join(['arguments must be names: ', repr(entry)]))
    return Atom(entry[0].strip().lower(), tuple(arg.strip().lower() for arg in args))


def parse_predict_response(text, dom, objects, s, g):
    text = _FENCE.sub('', strip_reasoning(text))
    value = _literal(_first_array(text))
    if not isinstance(value, (list, tuple)):
        raise ParseFailure('expected an array')
    ## a bare ['on', ['b', 'c']] pair
    if value and isinstance(value[0], str):
        value = [value]

    atoms = []
    for entry in value:
        atom = _entry_atom(entry)
        if atom not in atoms:
            atoms.append(atom)

    if not atoms:
        raise ParseFailure('empty intermediate state')
    if len(atoms) > MAX_INTERMEDIATE_ATOMS:
        raise TooManyAtoms(len(atoms))

    for atom in atoms:
        decl = dom.predicate(atom.predicate)
        if decl is None:
            raise UnknownPredicate(atom.predicate)
        if decl.arity != atom.arity:
            raise ParseFailure(''.join([str(atom.predicate), ' takes ', str(decl.arity), ' argument(s), got ', str(atom.arity)]))
        for arg in atom.args:
            if arg not in objects:
                raise UnknownObject(arg)

    predicted = frozenset(atoms)
    state = s.atoms if isinstance(s, State) else frozenset(s)
    goal = g.atoms if isinstance(g, GoalSpec) else frozenset(g)
    if predicted <= state:
        raise DegenerateState('intermediate state already holds')
    if predicted == goal:
        raise DegenerateState('intermediate state equals the goal')
    return ParsedIntermediate(predicted)


### Steps

def _ask(client, prompt):
    start = time.perf_counter()
    try:
        response = client.complete(prompt)
    finally:
        elapsed = time.perf_counter() - start
    return response, elapsed


def inspire_step(r, client, requery_limit=REQUERY_LIMIT, transcript=None):
    """ One action from the applicable set, appended to r.trajectory """
    prompt = render_inspire_prompt(r)
    result = StepResult()
    last_error = None

    while result.responses < requery_limit:
        result.responses += 1
        response, elapsed = _ask(client, prompt)
        result.llm_time += elapsed
        try:
            action = parse_inspire_response(response, r.applicable)
        except ResponseError as err:
            last_error = err
            log.info('inspire response rejected: %s', err)
            if transcript is not None:
                transcript.record('inspire', prompt, response, str(err), elapsed)
            continue
        if transcript is not None:
            transcript.record('inspire', prompt, response, ''.join(['accepted ', str(action)]), elapsed)
        r.trajectory.append(action)
        result.fragment = (action,)
        return result

    exhausted = InspireExhausted(result.responses, last_error)
    exhausted.llm_time = result.llm_time
    raise exhausted


def predict_step(r, client, solve_fn, dom, objects, protected=(), requery_limit=REQUERY_LIMIT, transcript=None):
    """
    Asks for an intermediate state s~, then solves <s, s~ (+ protected atoms), D> with solve_fn(state, goal).
    The fragment is empty when that solve fails.
    """
    prompt = render_predict_prompt(r)
    result = StepResult()
    last_error = None
    intermediate = None

    while result.responses < requery_limit:
        result.responses += 1
        response, elapsed = _ask(client, prompt)
        result.llm_time += elapsed
        try:
            intermediate = parse_predict_response(response, dom, objects, r.state, r.goal)
        except ResponseError as err:
            last_error = err
            log.info('predict response rejected: %s', err)
            if transcript is not None:
                transcript.record('predict', prompt, response, str(err), elapsed)
            continue
        if transcript is not None:
            transcript.record('predict', prompt, response, ''.join(['accepted ', str(intermediate)]), elapsed)
        break

    if intermediate is None:
        exhausted = PredictExhausted(result.responses, last_error)
        exhausted.llm_time = result.llm_time
        raise exhausted

    result.intermediate = intermediate
    result.outcome = solve_fn(r.state, intermediate.goal(protected))
    if result.outcome.solved:
        result.fragment = tuple(result.outcome.plan.actions)
    return result

