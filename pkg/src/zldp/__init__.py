"""zldp: a desk-scale Monte Carlo laboratory for large-deviation statistics
of the Riemann zeta function on the critical line."""

__version__ = "0.1.0"

from .errors import ConfigurationError, DomainError, ResourceError

__all__ = ["ConfigurationError", "DomainError", "ResourceError", "__version__"]
