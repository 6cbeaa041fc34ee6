"""Error taxonomy shared by all modules.

Three failure classes map onto the CLI exit codes: configuration problems
(bad parameters, infeasible ladders) exit 2, resource problems (sieve or
enumeration caps) exit 3.  Domain errors are plain misuse of an operation
and also exit 2 when they escape to the CLI.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConfigurationError(ValueError):
    """A configuration is syntactically valid but infeasible or inconsistent."""


class ResourceError(RuntimeError):
    """A computation would exceed a configured cap (sieve limit, enumeration budget)."""
