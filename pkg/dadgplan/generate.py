#!/usr/bin/env python3
""" Seeded Blocks and Logistics instances, so suites need no redistributed competition files. """

import logging
import os

import numpy as np

from . import corpus
from .pddl_classes import ROOT_TYPE, Atom, GoalSpec, Problem, State
from .pddlparse import serialize_problem

log = logging.getLogger(__name__)

BLOCK_NAMES = 'abcdefghijklmnopqrstuvwxyz'


def block_names(n):
    if n <= len(BLOCK_NAMES):
        return [BLOCK_NAMES[i] for i in range(n)]
    return ['b%d' % i for i in range(1, n + 1)]


def random_towers(rng, blocks):
    """ random partition of a random permutation; each tower listed bottom to top """
    order = [str(block) for block in rng.permutation(blocks)]
    cuts = [i for i in range(1, len(order)) if rng.random() < 0.5]
    towers = []
    start = 0
    for cut in cuts + [len(order)]:
        towers.append(order[start:cut])
        start = cut
    return towers


def tower_atoms(towers, hand=True):
    atoms = []
    for tower in towers:
        atoms.append(Atom('ontable', (tower[0],)))
        for below, above in zip(tower, tower[1:]):
            atoms.append(Atom('on', (above, below)))
        atoms.append(Atom('clear', (tower[-1],)))
    if hand:
        atoms.append(Atom('handempty'))
    return atoms


def tower_goal(towers):
    return [Atom('on', (above, below)) for tower in towers for below, above in zip(tower, tower[1:])]


def blocks_instance(n, rng, name=None):
    """ random initial and goal towers over n blocks; the goal has at least one `on` and is not already true """
    if n < 2:
        raise ValueError('a blocks instance needs at least two blocks')
    blocks = block_names(n)
    while True:
        init = State.of(tower_atoms(random_towers(rng, blocks)))
        goal = GoalSpec.of(tower_goal(random_towers(rng, blocks)))
        if len(goal) and not goal.satisfied_by(init):
            break
    objects = dict.fromkeys(blocks, ROOT_TYPE)
    return Problem(name or 'blocks-%d' % n, 'blocks', objects, init, goal)


def blocks_tower(n, name=None):
    """ a single tower to be rebuilt upside down """
    blocks = block_names(n)
    init = State.of(tower_atoms([blocks]))
    goal = GoalSpec.of(tower_goal([list(reversed(blocks))]))
    return Problem(name or 'tower-%d' % n, 'blocks', dict.fromkeys(blocks, ROOT_TYPE), init, goal)


def logistics_instance(rng, cities=2, locations=2, packages=2, airplanes=1, name=None):
    """ one truck per city; location 0 of every city is its airport """
    atoms = []
    objects = {}
    places = []

    for c in range(cities):
        city = 'c%d' % c
        truck = 't%d' % c
        objects[city] = ROOT_TYPE
        objects[truck] = ROOT_TYPE
        atoms += [Atom('city', (city,)), Atom('truck', (truck,))]
        for k in range(locations):
            place = 'l%d-%d' % (c, k)
            objects[place] = ROOT_TYPE
            places.append(place)
            atoms += [Atom('location', (place,)), Atom('in-city', (place, city))]
            if k == 0:
                atoms.append(Atom('airport', (place,)))
        atoms.append(Atom('at', (truck, 'l%d-%d' % (c, int(rng.integers(locations))))))

    airports = ['l%d-0' % c for c in range(cities)]
    for a in range(airplanes):
        plane = 'a%d' % a
        objects[plane] = ROOT_TYPE
        atoms += [Atom('airplane', (plane,)), Atom('at', (plane, airports[int(rng.integers(len(airports)))]))]

    goal = []
    for p in range(packages):
        package = 'p%d' % p
        objects[package] = ROOT_TYPE
        start = places[int(rng.integers(len(places)))]
        others = [place for place in places if place != start]
        target = others[int(rng.integers(len(others)))]
        atoms += [Atom('package', (package,)), Atom('at', (package, start))]
        goal.append(Atom('at', (package, target)))

    return Problem(name or 'logistics-%d' % packages, 'logistics', objects, State.of(atoms), GoalSpec.of(goal))


def generate_suite(domain_name, count, seed, size, outdir):
    """ writes <outdir>/<domain>-<size>-<i>.pddl and returns the paths """
    rng = np.random.default_rng(seed)
    dom = corpus.bundled_domain(domain_name)
    os.makedirs(outdir, exist_ok=True)

    paths = []
    for i in range(1, count + 1):
        name = '%s-%d-%02d' % (domain_name, size, i)
        if domain_name == 'blocks':
            problem = blocks_instance(size, rng, name)
        elif domain_name == 'logistics':
            problem = logistics_instance(rng, packages=size, name=name)
        else:
            raise ValueError(''.join(['no generator for ', domain_name]))
        path = os.path.join(outdir, name + '.pddl')
        with open(path, 'w') as handle:
            handle.write(serialize_problem(problem.init, problem.goal, dom, problem.objects, name))
        paths.append(path)
        log.debug('wrote %s', path)
    return paths
