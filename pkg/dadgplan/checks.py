#!/usr/bin/env python3
""" Plan validation by simulation. Verdicts are values, not exceptions. """

from dataclasses import dataclass
from typing import Tuple

from .pddl_classes import Atom, GoalSpec, State


@dataclass(frozen=True)
class Valid:
    steps: int = 0
    valid = True

    def __str__(self):
        return ''.join(['VALID (', str(self.steps), ' steps)'])


@dataclass(frozen=True)
class InvalidAt:
    index: int
    action: object
    missing: Tuple[Atom, ...] = ()
    valid = False

    @property
    def reason(self):
        return 'preconditions unmet: ' + ' '.join(str(atom) for atom in self.missing)

    def __str__(self):
        return ''.join(['INVALID at step ', str(self.index), ' ', str(self.action), ': ', self.reason])


@dataclass(frozen=True)
class GoalUnsatisfied:
    missing: Tuple[Atom, ...] = ()
    valid = False

    def __str__(self):
        return 'GOAL UNSATISFIED, missing ' + ' '.join(str(atom) for atom in self.missing)


def validate_plan(s, g, p):
    atoms = s.atoms if isinstance(s, State) else frozenset(s)
    goal = g.atoms if isinstance(g, GoalSpec) else frozenset(g)

    steps = 0
    for index, action in enumerate(p):
        if not action.pre <= atoms:
            return InvalidAt(index, action, tuple(sorted(action.pre - atoms)))
        atoms = (atoms - action.delete) | action.add
        steps += 1

    if not goal <= atoms:
        return GoalUnsatisfied(tuple(sorted(goal - atoms)))
    return Valid(steps)
