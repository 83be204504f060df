#!/usr/bin/env python3
""" Successor Generator: grounds lifted schemas over the problem objects and applies actions to states. """

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple

from .errors import NotApplicable, NotApplicableAt
from .pddl_classes import Atom, State

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class GroundAction:
    """ Propositional action. Identity is (schema name, args); the atom sets follow from them. """
    schema_name: str
    args: Tuple[str, ...]
    pre: FrozenSet[Atom] = field(default=frozenset(), compare=False)
    add: FrozenSet[Atom] = field(default=frozenset(), compare=False)
    delete: FrozenSet[Atom] = field(default=frozenset(), compare=False)

    @property
    def name(self):
        return self.schema_name

    def __str__(self):
        if not self.args:
            return ''.join(['(', self.schema_name, ')'])
        return ''.join(['(', self.schema_name, ' ', ' '.join(self.args), ')'])


@dataclass(frozen=True)
class GroundingIndex:
    all: Tuple[GroundAction, ...]
    by_precondition: Dict[Atom, Tuple[GroundAction, ...]]
    achievers: Dict[Atom, Tuple[GroundAction, ...]]
    unconditional: Tuple[GroundAction, ...] = ()

    def __len__(self):
        return len(self.all)

    def __hash__(self):
        return hash(self.all)

    def find(self, schema_name, args):
        key = GroundAction(schema_name, tuple(args))
        for action in self.all:
            if action == key:
                return action
        return None


def instantiate(schema, args):
    args = tuple(args)
    binding = dict(zip(schema.variables, args))
    return GroundAction(
        schema.name,
        args,
        frozenset(atom.substitute(binding) for atom in schema.pre),
        frozenset(atom.substitute(binding) for atom in schema.add),
        frozenset(atom.substitute(binding) for atom in schema.delete),
    )


def objects_of_type(dom, objects, type_name):
    return sorted(obj for obj, obj_type in objects.items() if dom.is_subtype(obj_type, type_name))


def ground_all(dom, objects):
    """ Every type-respecting binding of every schema, repeated objects included """
    actions = []
    for schema in dom.schemas:
        domains = [objects_of_type(dom, objects, type_name) for _, type_name in schema.params]
        for args in itertools.product(*domains):
            actions.append(instantiate(schema, args))
    actions.sort()

    by_precondition = {}
    achievers = {}
    for action in actions:
        for atom in action.pre:
            by_precondition.setdefault(atom, []).append(action)
        for atom in action.add:
            achievers.setdefault(atom, []).append(action)

    unconditional = tuple(action for action in actions if not action.pre)
    log.debug('grounded %d actions over %d objects', len(actions), len(objects))

    return GroundingIndex(
        tuple(actions),
        {atom: tuple(group) for atom, group in by_precondition.items()},
        {atom: tuple(group) for atom, group in achievers.items()},
        unconditional,
    )


def _atoms(s):
    return s.atoms if isinstance(s, State) else s


def applicable(s, a):
    return a.pre <= _atoms(s)


def successors(s, idx):
    atoms = _atoms(s)
    return [action for action in idx.all if action.pre <= atoms]


def apply(s, a):
    atoms = _atoms(s)
    if not a.pre <= atoms:
        raise NotApplicable(a, a.pre - atoms)
    return State((atoms - a.delete) | a.add)


def apply_plan(s, p):
    state = s if isinstance(s, State) else State(frozenset(s))
    for index, action in enumerate(p):
        if not action.pre <= state.atoms:
            raise NotApplicableAt(index, action, action.pre - state.atoms)
        state = State((state.atoms - action.delete) | action.add)
    return state
