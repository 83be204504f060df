#!/usr/bin/env python3
""" Bundled package data: the four reference domains, the worked instance, prompt templates and rule files. """

import functools
import os

from .decompose import DEFAULT_RULE, read_rules
from .pddlparse import load_domain, load_problem

PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))
DOMAIN_DIR = os.path.join(PACKAGE_DIR, 'domains')
PROMPT_DIR = os.path.join(PACKAGE_DIR, 'prompts')
RULE_DIR = os.path.join(PACKAGE_DIR, 'rules')

DOMAINS = ('blocks', 'logistics', 'depot', 'mystery')
PROMPTS = ('inspire', 'predict', 'direct')

### (schemas, predicates) of each bundled domain file
DOMAIN_COUNTS = {
    'blocks': (4, 5),
    'logistics': (6, 9),
    'depot': (5, 6),
    'mystery': (3, 12),
}

WORKED_INSTANCE = 'blocks-3'


def domain_path(name):
    return os.path.join(DOMAIN_DIR, name + '.pddl')


def bundled_domain(name):
    return load_domain(domain_path(name))


def worked_instance():
    """ the three-block example with handempty in its initial state """
    dom = bundled_domain('blocks')
    return dom, load_problem(domain_path(WORKED_INSTANCE), dom)


@functools.lru_cache(maxsize=None)
def prompt_template(name):
    if name not in PROMPTS:
        raise KeyError(name)
    with open(os.path.join(PROMPT_DIR, name + '.txt'), 'r', encoding='utf-8', newline='') as handle:
        return handle.read()


def family(domain_name):
    """ 'mystery-strips' -> 'mystery' """
    return domain_name.lower().split('-')[0]


def rules_path(domain_name):
    path = os.path.join(RULE_DIR, family(domain_name) + '.rules')
    return path if os.path.isfile(path) else None


def rules_for(dom):
    path = rules_path(dom.name)
    if path is None:
        return DEFAULT_RULE
    return read_rules(path, dom)
