#!/usr/bin/env python3

import re

import pytest

from dadgplan import corpus
from dadgplan.grounding import ground_all
from dadgplan.pddl_classes import Atom, GoalSpec, State

_ATOM = re.compile(r'\(([^()]*)\)')


def atoms_of(text):
    """ "(on a b) (handempty)" -> [Atom('on', ('a', 'b')), Atom('handempty')] """
    atoms = []
    for group in _ATOM.findall(text):
        tokens = group.split()
        atoms.append(Atom(tokens[0], tuple(tokens[1:])))
    return atoms


@pytest.fixture(scope='session')
def domains():
    return {name: corpus.bundled_domain(name) for name in corpus.DOMAINS}


@pytest.fixture(scope='session')
def blocks(domains):
    return domains['blocks']


@pytest.fixture(scope='session')
def worked():
    """ (domain, problem) of the three-block example """
    return corpus.worked_instance()


@pytest.fixture(scope='session')
def worked_idx(worked):
    dom, problem = worked
    return ground_all(dom, problem.objects)


@pytest.fixture
def state():
    return lambda text: State.of(atoms_of(text))


@pytest.fixture
def goal():
    return lambda text: GoalSpec.of(atoms_of(text))


@pytest.fixture
def worked_plan(worked_idx):
    """ pick-up b, stack b c, pick-up a, stack a b """
    return [worked_idx.find('pick-up', ['b']), worked_idx.find('stack', ['b', 'c']),
            worked_idx.find('pick-up', ['a']), worked_idx.find('stack', ['a', 'b'])]


@pytest.fixture
def atoms():
    return atoms_of
