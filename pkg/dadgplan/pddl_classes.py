#!/usr/bin/env python3
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

ROOT_TYPE = 'object'


@dataclass(frozen=True, order=True)
class Atom:
    """ predicate applied to objects (ground) or ?variables (lifted) """
    predicate: str
    args: Tuple[str, ...] = ()

    @property
    def ground(self):
        return not any(arg.startswith('?') for arg in self.args)

    @property
    def arity(self):
        return len(self.args)

    def substitute(self, binding):
        return Atom(self.predicate, tuple(binding.get(arg, arg) for arg in self.args))

    def __str__(self):
        if not self.args:
            return ''.join(['(', self.predicate, ')'])
        return ''.join(['(', self.predicate, ' ', ' '.join(self.args), ')'])


def canonical(atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
    return tuple(sorted(set(atoms)))


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: Tuple[Tuple[str, str], ...] = ()

    @property
    def arity(self):
        return len(self.params)

    def __str__(self):
        return format_signature(self.name, self.params)


@dataclass(frozen=True)
class ActionSchema:
    """ Lifted action model: name, typed parameters and the pre/add/del atom sets """
    name: str
    params: Tuple[Tuple[str, str], ...]
    pre: FrozenSet[Atom]
    add: FrozenSet[Atom]
    delete: FrozenSet[Atom]

    @property
    def variables(self):
        return tuple(var for var, _ in self.params)


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: FrozenSet[str]
    types: Dict[str, Optional[str]]
    predicates: Tuple[PredicateDecl, ...]
    schemas: Tuple[ActionSchema, ...]

    @property
    def typed(self):
        return ':typing' in self.requirements or len(self.types) > 1

    def predicate(self, name):
        for decl in self.predicates:
            if decl.name == name:
                return decl
        return None

    def schema(self, name):
        for schema in self.schemas:
            if schema.name == name:
                return schema
        return None

    def is_subtype(self, type_name, ancestor):
        """ walk the parent map up to the root """
        current = type_name
        while current is not None:
            if current == ancestor:
                return True
            current = self.types.get(current)
        return False

    def __hash__(self):
        return hash((self.name, self.predicates, self.schemas))


@dataclass(frozen=True)
class State:
    """ Set of ground atoms. Iteration and display follow the canonical order. """
    atoms: FrozenSet[Atom] = frozenset()

    @classmethod
    def of(cls, atoms):
        return cls(frozenset(atoms))

    def __iter__(self):
        return iter(canonical(self.atoms))

    def __len__(self):
        return len(self.atoms)

    def __contains__(self, atom):
        return atom in self.atoms

    def __str__(self):
        return ' '.join(str(atom) for atom in self)


@dataclass(frozen=True)
class GoalSpec:
    """ Conjunction of ground atoms. `order` keeps the goal file order, it takes no part in equality. """
    atoms: FrozenSet[Atom] = frozenset()
    order: Tuple[Atom, ...] = field(default=(), compare=False, hash=False)

    @classmethod
    def of(cls, atoms):
        atoms = tuple(dict.fromkeys(atoms))
        return cls(frozenset(atoms), atoms)

    def __post_init__(self):
        if not self.order and self.atoms:
            object.__setattr__(self, 'order', canonical(self.atoms))

    def __iter__(self):
        return iter(canonical(self.atoms))

    def __len__(self):
        return len(self.atoms)

    def satisfied_by(self, state):
        atoms = state.atoms if isinstance(state, State) else state
        return self.atoms <= atoms

    def missing(self, state):
        atoms = state.atoms if isinstance(state, State) else state
        return canonical(self.atoms - atoms)

    def __str__(self):
        return ' '.join(str(atom) for atom in self)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: Dict[str, str]
    init: State
    goal: GoalSpec

    def __hash__(self):
        return hash((self.name, self.domain_name, self.init, self.goal))


def format_signature(name, params):
    parts = [name]
    for var, type_name in params:
        parts.append(var)
        if type_name != ROOT_TYPE:
            parts.extend(['-', type_name])
    return ''.join(['(', ' '.join(parts), ')'])
