#!/usr/bin/env python3
""" Model Parser and Instance Factory: PDDL text <-> Domain/Problem, plus plan files. """

import logging
import re

import pyparsing as pp

from .errors import (ArityMismatch, ContradictoryEffect, DomainNameMismatch, DuplicateName,
                     InvalidAtom, PDDLSyntaxError, PlanParseError, UndeclaredObject,
                     UndeclaredPredicate, UndeclaredVariable, UnknownType, UnsupportedFeature)
from .pddl_classes import (ROOT_TYPE, ActionSchema, Atom, Domain, GoalSpec, PredicateDecl,
                           Problem, State, canonical, format_signature)

log = logging.getLogger(__name__)

SUPPORTED_REQUIREMENTS = frozenset([':strips', ':typing'])

### keywords that open formulas outside the :strips/:typing subset
UNSUPPORTED_CONNECTIVES = {
    'or': ':disjunctive-preconditions',
    'imply': ':disjunctive-preconditions',
    'exists': ':existential-preconditions',
    'forall': ':universal-preconditions',
    'when': ':conditional-effects',
    '=': ':equality',
    'increase': ':action-costs',
    'decrease': ':numeric-fluents',
    'assign': ':numeric-fluents',
}


class _Token(str):
    """ str that remembers where it was read, for error positions """
    loc = 0


def _make_token(string, loc, toks):
    token = _Token(toks[0])
    token.loc = loc
    return token


def _grammar():
    token = pp.Word(pp.printables, exclude_chars='();').set_parse_action(_make_token)
    sexpr = pp.Forward()
    sexpr <<= pp.Group(pp.Suppress('(') + pp.ZeroOrMore(token | sexpr) + pp.Suppress(')'))
    sexpr.ignore(';' + pp.rest_of_line)
    document = sexpr + pp.StringEnd()
    document.ignore(';' + pp.rest_of_line)
    return document


_GRAMMAR = _grammar()


class _Reader:
    """ Holds the source text so semantic errors can report line and column """

    def __init__(self, text):
        self.text = text.lower()
        try:
            self.tree = _GRAMMAR.parse_string(self.text, parse_all=True).as_list()[0]
        except pp.ParseBaseException as err:
            raise PDDLSyntaxError(err.lineno, err.col, err.msg) from None

    def position(self, node):
        while isinstance(node, list):
            if not node:
                return 1, 1
            node = node[0]
        loc = getattr(node, 'loc', 0)
        return pp.lineno(loc, self.text), pp.col(loc, self.text)

    def fail(self, node, message):
        line, col = self.position(node)
        raise PDDLSyntaxError(line, col, message)

    def expect_list(self, node, what):
        if not isinstance(node, list):
            self.fail(node, ''.join(['expected ', what]))
        return node

    def expect_name(self, node, what):
        if isinstance(node, list) or node.startswith('?') or node.startswith(':'):
            self.fail(node, ''.join(['expected ', what]))
        return str(node)

    def header(self, kind):
        tree = self.tree
        if len(tree) < 2 or tree[0] != 'define':
            self.fail(tree, 'expected (define ...)')
        head = self.expect_list(tree[1], ''.join(['(', kind, ' <name>)']))
        if len(head) != 2 or head[0] != kind:
            self.fail(head, ''.join(['expected (', kind, ' <name>)']))
        sections = []
        for section in tree[2:]:
            section = self.expect_list(section, 'a section')
            if not section or isinstance(section[0], list) or not section[0].startswith(':'):
                self.fail(section, 'expected a :keyword section')
            sections.append(section)
        return self.expect_name(head[1], 'a name'), sections

    def typed_list(self, items, variables):
        """ "?x ?y - type ?z" -> [(?x, type), (?y, type), (?z, object)] """
        result = []
        pending = []
        index = 0
        while index < len(items):
            item = items[index]
            if isinstance(item, list):
                raise UnsupportedFeature('either')
            if item == '-':
                if index + 1 >= len(items) or not pending:
                    self.fail(item, 'dangling "-" in typed list')
                type_name = items[index + 1]
                if isinstance(type_name, list):
                    raise UnsupportedFeature('either')
                result.extend((name, str(type_name)) for name in pending)
                pending = []
                index += 2
                continue
            if variables and not item.startswith('?'):
                self.fail(item, 'expected a ?variable')
            if not variables:
                self.expect_name(item, 'a name')
            pending.append(str(item))
            index += 1
        result.extend((name, ROOT_TYPE) for name in pending)
        return result

    def formula(self, node, effect):
        """ flatten an (and ...) of atoms; returns (positive, negative) atom lists """
        positive, negative = [], []
        node = self.expect_list(node, 'a formula')
        if not node:
            return positive, negative
        head = node[0]
        if isinstance(head, list):
            self.fail(node, 'expected a predicate or connective')
        if head == 'and':
            for child in node[1:]:
                pos, neg = self.formula(child, effect)
                positive.extend(pos)
                negative.extend(neg)
            return positive, negative
        if head == 'not':
            if not effect:
                raise UnsupportedFeature(':negative-preconditions')
            if len(node) != 2:
                self.fail(node, 'expected (not <atom>)')
            negative.append(self.atom(node[1]))
            return positive, negative
        if head in UNSUPPORTED_CONNECTIVES:
            raise UnsupportedFeature(UNSUPPORTED_CONNECTIVES[head])
        positive.append(self.atom(node))
        return positive, negative

    def atom(self, node):
        node = self.expect_list(node, 'an atom')
        if not node:
            self.fail(node, 'empty atom')
        for item in node:
            if isinstance(item, list):
                if node[0] in UNSUPPORTED_CONNECTIVES:
                    raise UnsupportedFeature(UNSUPPORTED_CONNECTIVES[node[0]])
                self.fail(item, 'nested term inside an atom')
        return Atom(str(node[0]), tuple(str(arg) for arg in node[1:]))


def _check_atom_against(dom, atom):
    decl = dom.predicate(atom.predicate)
    if decl is None:
        raise UndeclaredPredicate(atom.predicate)
    if decl.arity != atom.arity:
        raise ArityMismatch(atom.predicate, decl.arity, atom.arity)


def _check_types(types):
    """ every parent must itself be known, and the map must be free of cycles """
    for child in types:
        seen = set()
        current = child
        while current is not None:
            if current in seen:
                raise UnknownType(child)
            seen.add(current)
            if current not in types:
                raise UnknownType(current)
            current = types[current]


def parse_domain(text):
    reader = _Reader(text)
    name, sections = reader.header('domain')

    requirements = set()
    types = {ROOT_TYPE: None}
    predicates = []
    schemas = []

    for section in sections:
        key = section[0]

        if key == ':requirements':
            for flag in section[1:]:
                if isinstance(flag, list) or flag not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(str(flag))
                requirements.add(str(flag))

        elif key == ':types':
            for child, parent in reader.typed_list(section[1:], variables=False):
                if child == ROOT_TYPE:
                    continue
                types[child] = parent
                ## parents used without their own declaration hang off the root
                if parent not in types:
                    types[parent] = ROOT_TYPE

        elif key == ':predicates':
            for item in section[1:]:
                item = reader.expect_list(item, 'a predicate declaration')
                if not item:
                    reader.fail(item, 'empty predicate declaration')
                pred_name = reader.expect_name(item[0], 'a predicate name')
                params = tuple(reader.typed_list(item[1:], variables=True))
                variables = [var for var, _ in params]
                ## (in ?obj ?obj) in the stock logistics file; the names are placeholders only
                if len(set(variables)) != len(variables):
                    log.warning('predicate %s repeats a parameter name', pred_name)
                if any(p.name == pred_name for p in predicates):
                    raise DuplicateName('predicate', pred_name)
                predicates.append(PredicateDecl(pred_name, params))

        elif key == ':action':
            schemas.append(_parse_action(reader, section))

        else:
            raise UnsupportedFeature(str(key))

    _check_types(types)
    dom = Domain(name, frozenset(requirements), types, tuple(predicates), tuple(schemas))

    for decl in dom.predicates:
        for _, type_name in decl.params:
            if type_name not in types:
                raise UnknownType(type_name)

    seen = set()
    for schema in dom.schemas:
        if schema.name in seen:
            raise DuplicateName('action', schema.name)
        seen.add(schema.name)
        variables = set(schema.variables)
        for _, type_name in schema.params:
            if type_name not in types:
                raise UnknownType(type_name)
        for atom in schema.pre | schema.add | schema.delete:
            _check_atom_against(dom, atom)
            for arg in atom.args:
                if not arg.startswith('?'):
                    raise UndeclaredObject(arg)
                if arg not in variables:
                    raise UndeclaredVariable(schema.name, arg)
        both = schema.add & schema.delete
        if both:
            raise ContradictoryEffect(schema.name, canonical(both)[0])

    log.debug('parsed domain %s: %d schemas, %d predicates', dom.name, len(dom.schemas), len(dom.predicates))
    return dom


def _parse_action(reader, section):
    if len(section) < 2:
        reader.fail(section, 'expected an action name')
    name = reader.expect_name(section[1], 'an action name')
    params = ()
    pre, add, delete = [], [], []

    index = 2
    while index < len(section):
        key = section[index]
        if isinstance(key, list) or not key.startswith(':') or index + 1 >= len(section):
            reader.fail(key, 'expected :parameters, :precondition or :effect')
        value = section[index + 1]
        if key == ':parameters':
            params = tuple(reader.typed_list(reader.expect_list(value, 'a parameter list'), variables=True))
        elif key == ':precondition':
            pre, _ = reader.formula(value, effect=False)
        elif key == ':effect':
            add, delete = reader.formula(value, effect=True)
        else:
            raise UnsupportedFeature(str(key))
        index += 2

    variables = [var for var, _ in params]
    if len(set(variables)) != len(variables):
        raise DuplicateName('parameter', name)
    return ActionSchema(name, params, frozenset(pre), frozenset(add), frozenset(delete))


def parse_problem(text, dom, strict=False):
    reader = _Reader(text)
    name, sections = reader.header('problem')

    domain_name = None
    objects = {}
    init = []
    goal = []

    for section in sections:
        key = section[0]

        if key == ':domain':
            if len(section) != 2:
                reader.fail(section, 'expected (:domain <name>)')
            domain_name = reader.expect_name(section[1], 'a domain name')

        elif key == ':requirements':
            for flag in section[1:]:
                if isinstance(flag, list) or flag not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(str(flag))

        elif key == ':objects':
            for obj, type_name in reader.typed_list(section[1:], variables=False):
                if type_name not in dom.types:
                    raise UnknownType(type_name)
                if obj in objects and objects[obj] != type_name:
                    raise DuplicateName('object', obj)
                objects[obj] = type_name

        elif key == ':init':
            for item in section[1:]:
                item = reader.expect_list(item, 'an atom')
                if item and item[0] == 'not':
                    raise UnsupportedFeature(':negative-preconditions')
                if item and item[0] in UNSUPPORTED_CONNECTIVES:
                    raise UnsupportedFeature(UNSUPPORTED_CONNECTIVES[item[0]])
                init.append(reader.atom(item))

        elif key == ':goal':
            if len(section) != 2:
                reader.fail(section, 'expected a single goal formula')
            goal, _ = reader.formula(section[1], effect=False)

        else:
            raise UnsupportedFeature(str(key))

    if domain_name is None:
        reader.fail(reader.tree, 'missing (:domain ...)')
    if domain_name != dom.name:
        if strict:
            raise DomainNameMismatch(dom.name, domain_name)
        log.warning('problem %s names domain %s but is parsed against %s', name, domain_name, dom.name)

    for atom in init + goal:
        _check_atom_against(dom, atom)
        for arg in atom.args:
            if arg not in objects:
                raise UndeclaredObject(arg)

    return Problem(name, domain_name, objects, State.of(init), GoalSpec.of(goal))


def load_domain(path):
    with open(path, 'r') as handle:
        return parse_domain(handle.read())


def load_problem(path, dom, strict=False):
    with open(path, 'r') as handle:
        return parse_problem(handle.read(), dom, strict=strict)


### Instance Factory

def check_atom(atom, dom, objects):
    decl = dom.predicate(atom.predicate)
    if decl is None:
        raise InvalidAtom(atom, 'undeclared predicate')
    if decl.arity != atom.arity:
        raise InvalidAtom(atom, ''.join(['arity ', str(decl.arity), ' expected']))
    for arg in atom.args:
        if arg not in objects:
            raise InvalidAtom(atom, ''.join(['undeclared object ', arg]))


def _format_objects(dom, objects):
    if not dom.typed:
        return ' '.join(sorted(objects))
    by_type = {}
    for obj, type_name in objects.items():
        by_type.setdefault(type_name, []).append(obj)
    groups = []
    for type_name in sorted(by_type):
        groups.append(' '.join(sorted(by_type[type_name]) + ['-', type_name]))
    return ' '.join(groups)


def _join(head, items):
    return ' '.join([head] + [str(item) for item in items])


def serialize_problem(s, g, dom, objects, name):
    for atom in list(s.atoms) + list(g.atoms):
        check_atom(atom, dom, objects)

    lines = [
        ''.join(['(define (problem ', name, ')']),
        ''.join(['  (:domain ', dom.name, ')']),
        ''.join(['  (', _join(':objects', [_format_objects(dom, objects)] if objects else []), ')']),
        ''.join(['  (', _join(':init', canonical(s.atoms)), ')']),
        ''.join(['  (:goal (', _join('and', canonical(g.atoms)), '))']),
        ')',
    ]
    return '\n'.join(lines) + '\n'


def _format_formula(atoms, negated=()):
    parts = [str(atom) for atom in canonical(atoms)]
    parts += [''.join(['(not ', str(atom), ')']) for atom in canonical(negated)]
    return ''.join(['(', ' '.join(['and'] + parts), ')'])


def serialize_domain(dom):
    lines = [''.join(['(define (domain ', dom.name, ')'])]
    if dom.requirements:
        lines.append(''.join(['  (', _join(':requirements', sorted(dom.requirements)), ')']))

    if dom.typed:
        by_parent = {}
        for child, parent in dom.types.items():
            if parent is not None:
                by_parent.setdefault(parent, []).append(child)
        groups = [' '.join(sorted(by_parent[parent]) + ['-', parent]) for parent in sorted(by_parent)]
        lines.append(''.join(['  (', _join(':types', groups), ')']))

    lines.append(''.join(['  (', _join(':predicates', [str(decl) for decl in dom.predicates]), ')']))

    for schema in dom.schemas:
        signature = format_signature(schema.name, schema.params)
        lines.append(''.join(['  (:action ', schema.name]))
        lines.append(''.join(['    :parameters (', signature[len(schema.name) + 1:].lstrip()]))
        lines.append(''.join(['    :precondition ', _format_formula(schema.pre)]))
        lines.append(''.join(['    :effect ', _format_formula(schema.add, schema.delete), ')']))

    lines.append(')')
    return '\n'.join(lines) + '\n'


### Plan files

_PLAN_LINE = re.compile(r'^\((.*)\)$')


def parse_plan(text, dom, objects):
    """ One "(name arg ...)" per line. ';' lines are comments, the cost trailer included. """
    from .grounding import instantiate

    actions = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(';', 1)[0].strip().lower()
        if not line:
            continue
        match = _PLAN_LINE.match(line)
        if not match:
            raise PlanParseError(line_number, raw, 'expected (name arg ...)')
        tokens = match.group(1).replace(',', ' ').split()
        if not tokens:
            raise PlanParseError(line_number, raw, 'empty action')
        schema = dom.schema(tokens[0])
        if schema is None:
            raise PlanParseError(line_number, raw, 'unknown action')
        args = tuple(tokens[1:])
        if len(args) != len(schema.params):
            raise PlanParseError(line_number, raw, ''.join([str(len(schema.params)), ' argument(s) expected']))
        for arg in args:
            if arg not in objects:
                raise PlanParseError(line_number, raw, ''.join(['undeclared object ', arg]))
        actions.append(instantiate(schema, args))
    return actions


def format_plan(actions):
    lines = [str(action) for action in actions]
    lines.append(''.join(['; cost = ', str(len(actions)), ' (unit cost)']))
    return '\n'.join(lines) + '\n'
