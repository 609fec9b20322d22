"""Exception types shared across the package."""


class FaircapError(Exception):
    """Base class for all package errors."""


class UnknownAttribute(FaircapError):
    """A predicate or schema reference names an attribute that does not exist."""


class PatternError(FaircapError):
    """A pattern violates a structural constraint (duplicate predicate, bad op)."""


class CyclicGraph(FaircapError):
    """The causal graph contains a directed cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle: " + " -> ".join(self.cycle))


class UnknownNode(FaircapError):
    """A graph node does not name a schema attribute or the outcome."""


class OutcomeInTreatment(FaircapError):
    """The outcome attribute was used as a treatment."""


class PositivityViolation(FaircapError):
    """Treated or control subgroup is smaller than the configured minimum."""

    def __init__(self, n_treated, n_control, min_group_size):
        self.n_treated = n_treated
        self.n_control = n_control
        self.min_group_size = min_group_size
        super().__init__(
            f"treated={n_treated}, control={n_control}, need >= {min_group_size} each"
        )


class SingularDesign(FaircapError):
    """The regression design stays unusable after dropping collinear columns."""


class NoPatterns(FaircapError):
    """No single item reaches the Apriori support threshold."""


class EmptyProtectedGroup(FaircapError):
    """A fairness constraint is configured but the protected pattern covers no rows."""


class TooManyCandidates(FaircapError):
    """Exhaustive subset search refused above the candidate cap."""


class Infeasible(FaircapError):
    """Selection ended with configured constraints still violated."""

    def __init__(self, violations, ruleset=None, metrics=None, trace=None):
        self.violations = list(violations)
        self.ruleset = list(ruleset) if ruleset is not None else []
        self.metrics = metrics
        self.trace = list(trace) if trace is not None else []
        detail = "; ".join(v.describe() for v in self.violations)
        super().__init__(f"no feasible ruleset: {detail}")


class ConfigError(FaircapError):
    """A run configuration file or flag set is invalid."""
