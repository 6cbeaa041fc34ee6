"""Registry of the method's literal constants, with two resolution profiles.

The barrier-ladder construction is specified with constants sized for
astronomically large heights (factors of 1e6, exponents of 1e5).  Those
choices make every cap and error term vacuous at heights reachable on a
workstation, so the ledger carries two profiles:

* ``paper``  -- the literal constants.  Used for the exact constraint
  arithmetic, which is scale-free.
* ``desk``   -- the same formulas with the large magnitudes rescaled so
  that ladders are feasible at T ~ 1e6..1e7 and the caps actually bind.
  Only magnitudes change; every inequality keeps its form.

All sampling experiments take an explicit ledger so runs are reproducible
from their manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

from .errors import ConfigurationError


@dataclass(frozen=True)
class ConstantsLedger:
    profile: str
    # common factor in s_frak / B / C (1e6 in the paper profile)
    scale: float
    # event constants
    A_const: float
    D_const: float
    # exponents: mollifier Omega cap, mollifier comparison error term,
    # well-factorable Omega cap, ladder-depth cap factor
    E_Omega: float
    E_M: float
    E_Q: float
    E_c: float
    # ladder depth inequality compares against T**ell_cap_frac
    ell_cap_frac: float
    # band-limited majorant parameters
    majorant_A: float
    nu_exponent: float
    # resource caps
    sieve_hard_cap: int
    tuple_cap: int
    mollifier_value_cap: int
    mollifier_term_cap: int
    # minimum Omega cap for ladder-derived mollifiers: desk block widths are
    # below 1 so floor(width**E_Omega) alone would zero out the mollifier
    omega_cap_floor: int
    # well-factorable coefficient bound exp(e^t / coeff_bound_denom)
    coeff_bound_denom: float
    wf_omega_mult: float

    def s_frak(self, alpha: float) -> float:
        """Ladder step scale, symmetric in alpha <-> 2-alpha."""
        _check_alpha(alpha)
        return 2.0 * self.scale / ((2.0 - alpha) ** 2 * alpha**2)

    def upper_barrier_const(self, alpha: float) -> float:
        _check_alpha(alpha)
        return 3.0 * self.scale / (2.0 * alpha * (2.0 - alpha) ** 2) + 1.0 / (4.0 * alpha)

    def lower_barrier_const(self, alpha: float) -> float:
        _check_alpha(alpha)
        return 3.0 * self.scale / (2.0 * alpha**2 * (2.0 - alpha)) + 1.0 / (4.0 * (2.0 - alpha))

    def nu_default(self, delta: float) -> int:
        import math

        return int(math.ceil(delta ** (self.nu_exponent * self.majorant_A)))

    def as_dict(self) -> dict:
        return asdict(self)


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 2.0):
        raise ConfigurationError(f"alpha must lie in (0, 2), got {alpha}")


PAPER = ConstantsLedger(
    profile="paper",
    scale=1.0e6,
    A_const=1.0e3,
    D_const=1.0e4,
    E_Omega=1.0e5,
    E_M=1.0e5,
    E_Q=1.0e4,
    E_c=1.0e6,
    ell_cap_frac=0.01,
    majorant_A=20.0,
    nu_exponent=10.0,
    sieve_hard_cap=2**34,
    tuple_cap=1_000_000,
    mollifier_value_cap=10**7,
    mollifier_term_cap=2_000_000,
    omega_cap_floor=3,
    coeff_bound_denom=500.0,
    wf_omega_mult=10.0,
)

DESK = ConstantsLedger(
    profile="desk",
    scale=1.0,
    A_const=1.0e3,
    D_const=1.0e4,
    E_Omega=3.0,
    E_M=5.0,
    E_Q=2.0,
    E_c=1.0e-3,
    ell_cap_frac=0.01,
    majorant_A=2.0,
    nu_exponent=5.0,
    sieve_hard_cap=2**34,
    tuple_cap=1_000_000,
    mollifier_value_cap=10**7,
    mollifier_term_cap=2_000_000,
    omega_cap_floor=3,
    coeff_bound_denom=500.0,
    wf_omega_mult=10.0,
)


def ledger_for(profile: str) -> ConstantsLedger:
    if profile == "paper":
        return PAPER
    if profile == "desk":
        return DESK
    raise ConfigurationError(f"unknown ledger profile {profile!r} (expected 'paper' or 'desk')")
