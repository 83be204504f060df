#!/usr/bin/env python3
""" Exception hierarchy for dadgplan. Every error raised on purpose derives from PlannerError. """


class PlannerError(Exception):
    pass


class ConfigError(PlannerError):
    """ Bad flags, config file entries or missing LLM client. CLI exit code 2. """


### PDDL model

class PDDLError(PlannerError):
    pass


class PDDLSyntaxError(PDDLError):

    def __init__(self, line, col, message='malformed s-expression'):
        self.line = line
        self.col = col
        super().__init__(''.join(['line ', str(line), ', col ', str(col), ': ', str(message)]))


class UnsupportedFeature(PDDLError):

    def __init__(self, name):
        self.name = name
        super().__init__(''.join(['unsupported PDDL feature: ', str(name)]))


class ArityMismatch(PDDLError):

    def __init__(self, predicate, expected, got):
        self.predicate = predicate
        self.expected = expected
        self.got = got
        super().__init__(''.join([str(predicate), ' takes ', str(expected), ' argument(s), got ', str(got)]))


class UnknownType(PDDLError):

    def __init__(self, type_name):
        self.type_name = type_name
        super().__init__(''.join(['unknown type: ', str(type_name)]))


class UndeclaredObject(PDDLError):

    def __init__(self, name):
        self.name = name
        super().__init__(''.join(['undeclared object: ', str(name)]))


class UndeclaredPredicate(PDDLError):

    def __init__(self, name):
        self.name = name
        super().__init__(''.join(['undeclared predicate: ', str(name)]))


class UndeclaredVariable(PDDLError):

    def __init__(self, schema, variable):
        self.schema = schema
        self.variable = variable
        super().__init__(''.join([str(schema), ': variable ', str(variable), ' is not a parameter']))


class DuplicateName(PDDLError):

    def __init__(self, kind, name):
        self.kind = kind
        self.name = name
        super().__init__(''.join(['duplicate ', str(kind), ': ', str(name)]))


class ContradictoryEffect(PDDLError):

    def __init__(self, schema, atom):
        self.schema = schema
        self.atom = atom
        super().__init__(''.join([str(schema), ': ', str(atom), ' is both added and deleted']))


class DomainNameMismatch(PDDLError):

    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(''.join(['problem is for domain ', str(got), ', parsed against ', str(expected)]))


class InvalidAtom(PDDLError):

    def __init__(self, atom, reason):
        self.atom = atom
        self.reason = reason
        super().__init__(''.join(['invalid atom ', str(atom), ': ', str(reason)]))


class PlanParseError(PDDLError):

    def __init__(self, line_number, text, reason):
        self.line_number = line_number
        self.text = text
        self.reason = reason
        super().__init__(''.join(['plan line ', str(line_number), ' "', str(text), '": ', str(reason)]))


### Grounding and state transitions

class GroundingError(PlannerError):
    pass


class NotApplicable(GroundingError):

    def __init__(self, action, missing):
        self.action = action
        self.missing = tuple(sorted(missing))
        missing_text = ' '.join(str(atom) for atom in self.missing)
        super().__init__(''.join([str(action), ' not applicable, missing ', str(missing_text)]))


class NotApplicableAt(GroundingError):

    def __init__(self, index, action, missing):
        self.index = index
        self.action = action
        self.missing = tuple(sorted(missing))
        missing_text = ' '.join(str(atom) for atom in self.missing)
        super().__init__(''.join(['step ', str(index), ': ', str(action), ' not applicable, missing ', str(missing_text)]))


### Decomposition

class DecompositionError(PlannerError):
    pass


class GoalCycle(DecompositionError):

    def __init__(self, nodes):
        self.nodes = frozenset(nodes)
        super().__init__('goal dependencies are cyclic over ' + ', '.join(sorted(self.nodes)))


class RuleError(DecompositionError, ConfigError):

    def __init__(self, line_number, reason):
        self.line_number = line_number
        self.reason = reason
        super().__init__(''.join(['dependency rule line ', str(line_number), ': ', str(reason)]))


### Solvers

class SolverError(PlannerError):
    pass


class ExternalFailure(SolverError):

    def __init__(self, exit_code, stderr):
        self.exit_code = exit_code
        self.stderr = stderr[-500:] if stderr else ''
        super().__init__(''.join(['external planner exited with ', str(exit_code), ': ', str(self.stderr)]))


class ExternalInvalidPlan(SolverError):

    def __init__(self, index, verdict):
        self.index = index
        self.verdict = verdict
        super().__init__(''.join(['external planner returned an invalid plan: ', str(verdict)]))


### LLM protocols

class LLMError(PlannerError):
    """ Transport-level failure of a completion client. """


class ResponseError(PlannerError):
    """ A completion that cannot be used. Always answered with a re-query. """


class ParseFailure(ResponseError):
    pass


class NotInApplicableSet(ResponseError):

    def __init__(self, action_text):
        self.action_text = action_text
        super().__init__(''.join([str(action_text), ' is not an applicable action']))


class TooManyAtoms(ResponseError):

    def __init__(self, count):
        self.count = count
        super().__init__(''.join(['intermediate state has ', str(count), ' atoms, at most 2 allowed']))


class UnknownPredicate(ResponseError):

    def __init__(self, name):
        self.name = name
        super().__init__(''.join(['unknown predicate: ', str(name)]))


class UnknownObject(ResponseError):

    def __init__(self, name):
        self.name = name
        super().__init__(''.join(['unknown object: ', str(name)]))


class DegenerateState(ResponseError):
    pass


class InspireExhausted(PlannerError):

    def __init__(self, attempts, last_error):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(''.join(['no usable action after ', str(attempts), ' responses: ', str(last_error)]))


class PredictExhausted(PlannerError):

    def __init__(self, attempts, last_error):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(''.join(['no usable intermediate state after ', str(attempts), ' responses: ', str(last_error)]))
