"""Exception types shared across the package."""


class RuleEvoError(Exception):
    pass


class PolicySyntaxError(RuleEvoError, ValueError):
    """Policy text does not match the grammar. Carries 1-based line/column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class PolicyValidationError(RuleEvoError, ValueError):
    """Policy is well-formed text but violates a structural invariant."""


class StructuralError(RuleEvoError, IndexError):
    """A predicate refers to a state dimension the input does not have."""


class EnvUsageError(RuleEvoError, RuntimeError):
    pass


class ConfigError(RuleEvoError, ValueError):
    pass


class ArchiveError(RuleEvoError, ValueError):
    """Malformed archive document or query on an empty archive."""
