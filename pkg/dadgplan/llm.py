#!/usr/bin/env python3
""" Completion clients: a live chat-completion endpoint, canned responses, and a search-backed oracle. """

import abc
import json
import logging
import os
import re
import time

import requests

from .errors import ConfigError, LLMError, SolverError
from .grounding import apply_plan, ground_all
from .pddl_classes import Atom, canonical
from .search import SearchStats, bfs_optimal

log = logging.getLogger(__name__)

ENV_API_KEY = 'DADGPLAN_API_KEY'
ENV_ENDPOINT = 'DADGPLAN_ENDPOINT'
ENV_MODEL = 'DADGPLAN_MODEL'

DEFAULT_ENDPOINT = 'https://api.deepseek.com/chat/completions'
DEFAULT_MODEL = 'deepseek-reasoner'


class CompletionClient(abc.ABC):
    """ complete(prompt) -> text is the only thing the planner asks of a model """

    calls = 0

    @abc.abstractmethod
    def complete(self, prompt):
        raise NotImplementedError


class LiveClient(CompletionClient):

    def __init__(self, endpoint=DEFAULT_ENDPOINT, model=DEFAULT_MODEL, api_key_env=ENV_API_KEY,
                 timeout=300.0, temperature=0.0, session=None):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.temperature = temperature
        self.session = session or requests.Session()
        self.calls = 0

    def complete(self, prompt):
        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise ConfigError(''.join(['live client needs the ', self.api_key_env, ' environment variable']))

        payload = {
            'model': self.model,
            'messages': [{'role': 'user', 'content': prompt}],
            'temperature': self.temperature,
        }
        headers = {
            'Content-Type': 'application/json',
            'Authorization': ''.join(['Bearer ', str(api_key)]),
        }

        self.calls += 1
        try:
            response = self.session.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout)
        except requests.RequestException as err:
            raise LLMError(''.join(['completion request failed: ', str(err)])) from None

        if response.status_code != 200:
            raise LLMError(''.join(['completion endpoint returned ', str(response.status_code), ': ', str(response.text[:300])]))

        try:
            return response.json()['choices'][0]['message']['content'] or ''
        except (ValueError, KeyError, IndexError, TypeError):
            raise LLMError('completion response has no choices[0].message.content') from None


class ScriptedClient(CompletionClient):
    """ Replays canned responses in order; with `cycle` it starts over instead of running dry """

    def __init__(self, responses, cycle=False):
        self.responses = list(responses)
        self.cycle = cycle
        self.calls = 0

    @classmethod
    def from_file(cls, path, cycle=False):
        with open(path, 'r') as handle:
            responses = [line.rstrip('\n') for line in handle if line.strip()]
        return cls(responses, cycle=cycle)

    def complete(self, prompt):
        if not self.responses:
            raise LLMError('scripted client has no responses')
        if self.calls >= len(self.responses) and not self.cycle:
            raise LLMError(''.join(['scripted client ran out after ', str(len(self.responses)), ' responses']))
        response = self.responses[self.calls % len(self.responses)]
        self.calls += 1
        return response


### Oracle: reads the state, goal and applicable actions back out of the rendered prompt

_GROUP = re.compile(r'\(([^()]*)\)')


def _slot(prompt, label):
    match = re.search(''.join(['^', re.escape(label), r'\s*(.*)$']), prompt, flags=re.M)
    return match.group(1) if match else ''


def _read_atoms(text):
    atoms = []
    for group in _GROUP.findall(text):
        tokens = [token for token in re.split(r'[\s,]+', group.strip().lower()) if token]
        if tokens:
            atoms.append(Atom(tokens[0], tuple(tokens[1:])))
    return atoms


class OracleClient(CompletionClient):
    """
    Answers from breadth-first optimal plans on the instance it was built for.
    Inspire: first action of an optimal plan. Predict: at most two atoms true at the
    plan's midpoint and false now. Anything else: the whole plan, one action per line.
    """

    def __init__(self, dom, objects, idx=None, max_expansions=500000):
        self.dom = dom
        self.objects = dict(objects)
        self.idx = idx if idx is not None else ground_all(dom, objects)
        self.max_expansions = max_expansions
        self.calls = 0
        self._plans = {}

    def optimal(self, state, goal):
        """ (Plan or None, SearchStats), memoised per (state, goal) """
        key = (frozenset(state), frozenset(goal))
        if key not in self._plans:
            try:
                self._plans[key] = bfs_optimal(key[0], key[1], self.idx, max_expansions=self.max_expansions)
            except SolverError as err:
                log.warning('oracle gave up: %s', err)
                self._plans[key] = (None, SearchStats())
        return self._plans[key]

    def optimal_plan(self, state, goal):
        return self.optimal(state, goal)[0]

    def complete(self, prompt):
        self.calls += 1
        state = frozenset(_read_atoms(_slot(prompt, 'The init state:')))
        goal = frozenset(_read_atoms(_slot(prompt, 'The goal state:')))
        plan = self.optimal_plan(state, goal)

        if 'The applicable actions:' in prompt:
            return self._inspire(prompt, plan)
        if 'intermediate state' in prompt:
            return self._predict(state, goal, plan)
        if plan is None:
            return ''
        return '\n'.join(str(action) for action in plan)

    def _inspire(self, prompt, plan):
        if plan:
            action = plan[0]
            return ''.join(['(', action.schema_name, ', ', ' '.join(action.args), ')'])
        ## nothing to aim for, take whatever is offered first
        offered = _GROUP.findall(_slot(prompt, 'The applicable actions:'))
        return ''.join(['(', offered[0], ')']) if offered else '()'

    def _predict(self, state, goal, plan):
        if not plan:
            return '[]'
        midpoint = max(1, len(plan) // 2)
        middle = apply_plan(state, plan.actions[:midpoint]).atoms

        added_at = {}
        for step, action in enumerate(plan.actions[:midpoint]):
            for atom in action.add:
                added_at[atom] = step

        fresh = middle - state
        ranked = sorted(fresh, key=lambda atom: (atom not in goal, -added_at.get(atom, -1), -atom.arity, atom))
        chosen = ranked[:2]

        if set(chosen) == set(goal):
            others = [atom for atom in ranked if atom not in goal]
            chosen = [chosen[0], others[0]] if others else chosen[:1]

        return json.dumps([[atom.predicate, list(atom.args)] for atom in canonical(chosen)])


def make_client(spec, dom=None, objects=None, idx=None, endpoint=None, model=None, cycle=False):
    """ `live`, `scripted:<file>` or `oracle`; None gives None """
    if spec is None or spec == '':
        return None
    if spec == 'oracle':
        if dom is None or objects is None:
            raise ConfigError('the oracle client needs the domain and the problem objects')
        return OracleClient(dom, objects, idx)
    if spec.startswith('scripted:'):
        path = spec[len('scripted:'):]
        if not os.path.isfile(path):
            raise ConfigError(''.join(['no scripted response file at ', path]))
        return ScriptedClient.from_file(path, cycle=cycle)
    if spec == 'live':
        return LiveClient(
            endpoint=endpoint or os.environ.get(ENV_ENDPOINT, DEFAULT_ENDPOINT),
            model=model or os.environ.get(ENV_MODEL, DEFAULT_MODEL),
        )
    raise ConfigError(''.join(['unknown llm client "', spec, '", expected live, scripted:<file> or oracle']))


class Transcript:
    """ One JSON line per completion: mode, prompt, raw response, verdict """

    def __init__(self, path=None):
        self.path = path
        self.records = []

    def record(self, mode, prompt, response, verdict, elapsed=0.0):
        entry = {
            'mode': mode,
            'prompt': prompt,
            'response': response,
            'verdict': verdict,
            'elapsed': round(elapsed, 6),
            'time': time.time(),
        }
        self.records.append(entry)
        if self.path is not None:
            with open(self.path, 'a') as handle:
                handle.write(json.dumps(entry) + '\n')
        return entry
