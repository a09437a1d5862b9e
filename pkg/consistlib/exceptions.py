"""Common consistlab exceptions. Store them in this central place to
avoid circular imports
"""


class ConsistlabError(Exception):
    """Base class for every error raised by the library"""
    pass


class ConsistlabFatalError(ConsistlabError):
    """A broad exception for errors that abort a command"""
    pass


class DimensionMismatchError(ConsistlabError, ValueError):
    """Vectors, matrices or spaces do not share a coordinate dimension"""

    def __init__(self, expected, got, what="vector"):
        super(DimensionMismatchError, self).__init__(
            "{} has dimension {}, expected {}".format(what, got, expected))
        self.expected = expected
        self.got = got


class ParameterRangeError(ConsistlabError, ValueError):
    """A parameter lies outside its admissible range"""

    def __init__(self, name, value, constraint):
        super(ParameterRangeError, self).__init__(
            "{}={!r} violates constraint {}".format(name, value, constraint))
        self.name = name
        self.value = value
        self.constraint = constraint


class ConvergenceError(ConsistlabError):
    """An optimizer stopped without certifying its result"""

    def __init__(self, msg, best_bound=None, status=None):
        super(ConvergenceError, self).__init__(msg)
        self.best_bound = best_bound
        self.status = status


class IllConditionedError(ConsistlabError):
    """A linear system is singular or too badly conditioned to trust"""

    def __init__(self, msg, condition=None):
        super(IllConditionedError, self).__init__(msg)
        self.condition = condition


class SingularShiftError(IllConditionedError):
    """A shifted operator A + lambda I (or I + hA) could not be factorized"""
    pass


class SemigroupOverflowError(ConsistlabError, OverflowError):
    """The matrix exponential overflowed for the requested t * ||A||"""
    pass


class FunctorRefusedError(ConsistlabError):
    """The interpolation functor lacks a property required by the operation"""

    def __init__(self, msg, citation):
        super(FunctorRefusedError, self).__init__("{} ({})".format(msg, citation))
        self.citation = citation


class UnsupportedNormError(ConsistlabError):
    """The requested evaluation path is not available for this kind of space"""
    pass


class ConsistencyError(ConsistlabError):
    """Two realizations expected to be consistent are not"""
    pass


class ScenarioError(ConsistlabError):
    """A scenario file failed to parse or validate"""

    def __init__(self, msg, path=None, line=None, column=None):
        location = ""
        if path is not None:
            location = str(path)
            if line is not None:
                # marks are 0-based
                location += ":{}:{}".format(line + 1, (column or 0) + 1)
            location += ": "
        super(ScenarioError, self).__init__(location + msg)
        self.msg = msg
        self.path = path
        self.line = line
        self.column = column


class DanglingReferenceError(ScenarioError):
    """A scenario entry references an undeclared object"""

    def __init__(self, name, section, path=None, line=None, column=None):
        super(DanglingReferenceError, self).__init__(
            "reference to undeclared {} '{}'".format(section, name), path, line, column)
        self.name = name
        self.section = section
