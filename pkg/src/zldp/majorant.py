"""Band-limited majorant of an interval indicator, and its polynomial proxy.

The majorant G is the convolution of the indicator of the slightly enlarged
interval [-d/2, 1/Delta + d/2], d = Delta^(-A/2), with a nonnegative unit-
mass kernel (sin(pi g x)/(pi g x))^(2m) whose Fourier transform -- a 2m-fold
rectangle convolution, i.e. a cardinal B-spline -- is supported well inside
the band [-Delta^(2A), Delta^(2A)].  This construction gives, with
computable constants,

    (1) supp(G^) inside the band            (exact, by the kernel choice)
    (2) 0 <= G <= 1                          (convolution of [0,1] functions)
    (3) indicator <= G (1 + c e^{-Delta^(A-1)})   on [0, 1/Delta]
    (4) G <= enlarged indicator + c e^{-Delta^(A-1)}
    (5) int |G^| <= 2 Delta^(2A)

The absolute constant c is never pinned down abstractly; it is measured on
a dense grid at build time and carried in the spec.

Truncating exp(2 pi i xi x) at order nu inside the Fourier integral yields
the polynomial proxy D(x) = sum_{k<=nu} c_k x^k.  Its coefficients are
computed from the same quadrature with log-scaled integrands, so orders far
beyond the float64 moment range simply underflow to zero instead of
overflowing; once nu exceeds the last numerically nonzero order, D is
evaluated through the integral form (the identical polynomial, summed
stably), which keeps large arguments finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .constants import ConstantsLedger, ledger_for
from .errors import ConfigurationError, DomainError, ResourceError

TWO_PI = 2.0 * np.pi
_MOMENT_STORE_CAP = 256
_MAX_BAND = 1.0e6
_QUAD_NODES = 1600


def bspline(u, n: int):
    """M_n(u), the n-fold autoconvolution of the unit rectangle, centered.

    de Boor triangle on the uncentered spline N_n over [0, n]: all blend
    coefficients are nonnegative on the support, so the evaluation is
    stable for any order (the closed alternating sum is not).
    """
    u = np.asarray(u, dtype=float)
    x = u + n / 2.0
    j = np.arange(n, dtype=float)
    xj = x[..., None] - j  # N_k evaluated at x - j
    vals = ((xj >= 0.0) & (xj < 1.0)).astype(float)
    for k in range(2, n + 1):
        cur = xj[..., : n - k + 1]
        vals = (cur * vals[..., : n - k + 1] + (k - cur) * vals[..., 1 : n - k + 2]) / (k - 1.0)
    return vals[..., 0]


@dataclass
class MajorantSpec:
    Delta: float
    A: float
    nu: int
    band_limit: float
    window: tuple[float, float]  # the enlarged interval J = [a, b]
    kernel_m: int
    kernel_gamma: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    ghat: np.ndarray = field(repr=False)  # complex G^ at the nodes
    fourier_moments: np.ndarray = field(repr=False)
    c_indicator: float = 0.0  # measured c in property (3)
    c_upper: float = 0.0  # measured c in property (4)
    abs_ghat_integral: float = 0.0
    residuals: dict = field(default_factory=dict)

    @property
    def c_measured(self) -> float:
        return max(self.c_indicator, self.c_upper)

    @property
    def delta_pad(self) -> float:
        return self.Delta ** (-self.A / 2.0)

    def evaluate(self, x, chunk: int = 2048) -> np.ndarray:
        """G(x) through the Fourier quadrature."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        wg = self.weights * self.ghat
        for i in range(0, x.size, chunk):
            sl = slice(i, min(i + chunk, x.size))
            out[sl] = (np.exp(TWO_PI * 1j * np.outer(x[sl], self.nodes)) @ wg).real
        return out


def build_majorant(Delta: float, A: float | None = None, ledger=None) -> MajorantSpec:
    """Construct the majorant and verify its properties at build time.

    Properties (1), (2), (5) must hold to tolerance or the build fails;
    the measured constants for (3), (4) are stored in the spec.
    """
    if isinstance(ledger, str) or ledger is None:
        ledger = ledger_for(ledger or "desk")
    if A is None:
        A = ledger.majorant_A
    if Delta < 3.0:
        raise DomainError(f"need Delta >= 3, got {Delta}")
    min_A = 10.0 if ledger.profile == "paper" else 2.0
    if A < min_A:
        raise DomainError(f"need A >= {min_A} under the {ledger.profile} profile, got {A}")
    band = Delta ** (2.0 * A)
    if band > _MAX_BAND:
        raise ResourceError(
            f"band limit Delta^(2A) = {band:.3g} is numerically unworkable; "
            f"use the desk ledger (A = {ledger_for('desk').majorant_A:g})"
        )
    pad = Delta ** (-A / 2.0)
    a, b = -pad / 2.0, 1.0 / Delta + pad / 2.0
    m = int(math.ceil(Delta**A))
    gamma = band / (2.0 * m)  # kernel transform supported in [-band/2, band/2]

    x_gl, w_gl = np.polynomial.legendre.leggauss(_QUAD_NODES)
    half = band / 2.0
    nodes = x_gl * half
    weights = w_gl * half

    khat = bspline(nodes / gamma, 2 * m)
    khat = khat / bspline(np.array([0.0]), 2 * m)[0]  # unit-mass kernel
    with np.errstate(divide="ignore", invalid="ignore"):
        ind_hat = (np.exp(-TWO_PI * 1j * nodes * a) - np.exp(-TWO_PI * 1j * nodes * b)) / (
            TWO_PI * 1j * nodes
        )
    ind_hat = np.where(nodes == 0.0, b - a, ind_hat)
    ghat = ind_hat * khat

    kmax = min(_MOMENT_STORE_CAP, 8 * _QUAD_NODES)
    moments = np.empty(kmax + 1)
    abs_nodes = np.abs(nodes)
    for k in range(kmax + 1):
        mom = np.sum(weights * nodes**k * ghat)
        moments[k] = mom.real if k % 2 == 0 else mom.imag
        if not np.isfinite(moments[k]):
            moments = moments[:k]
            break

    spec = MajorantSpec(
        Delta=float(Delta),
        A=float(A),
        nu=ledger.nu_default(Delta),
        band_limit=band,
        window=(a, b),
        kernel_m=m,
        kernel_gamma=gamma,
        nodes=nodes,
        weights=weights,
        ghat=ghat,
        fourier_moments=moments,
    )

    # property (1): kernel transform vanishes outside its half-band
    probe = np.linspace(band / 2.0 * 1.0001, band * 2.0, 64)
    band_leak = float(np.max(np.abs(bspline(probe / gamma, 2 * m))))
    spec.residuals["band_leak"] = band_leak
    if band_leak > 1e-10:
        raise ConfigurationError(f"property 1 failed: transform leaks {band_leak:.2e} past the band")

    # property (5)
    spec.abs_ghat_integral = float(np.sum(weights * np.abs(ghat)))
    spec.residuals["abs_ghat_integral"] = spec.abs_ghat_integral
    if spec.abs_ghat_integral > 2.0 * band:
        raise ConfigurationError(
            f"property 5 failed: int |G^| = {spec.abs_ghat_integral:.3g} > {2 * band:.3g}"
        )

    # property (2) on a wide grid
    span = 4.0 * Delta + 4.0
    grid = np.concatenate(
        [
            np.linspace(-span, a - pad / 2, 400),
            np.linspace(a - pad / 2, b + pad / 2, 1200),
            np.linspace(b + pad / 2, span, 400),
        ]
    )
    g_grid = spec.evaluate(grid)
    lo, hi = float(g_grid.min()), float(g_grid.max())
    spec.residuals["range_low"] = lo
    spec.residuals["range_high"] = hi
    if lo < -1e-9 or hi > 1.0 + 1e-9:
        raise ConfigurationError(f"property 2 failed: G ranges over [{lo:.2e}, {hi:.2e}]")

    # measured constants for (3) and (4)
    scale = math.exp(min(Delta ** (A - 1.0), 700.0))
    inside = np.linspace(0.0, 1.0 / Delta, 1200)
    g_in = np.maximum(spec.evaluate(inside), 1e-300)
    spec.c_indicator = float(np.max(np.maximum(1.0 / g_in - 1.0, 0.0))) * scale
    outer_mask = (grid < -pad) | (grid > 1.0 / Delta + pad)
    spec.c_upper = float(np.maximum(g_grid[outer_mask], 0.0).max()) * scale
    spec.residuals["c_indicator"] = spec.c_indicator
    spec.residuals["c_upper"] = spec.c_upper
    return spec


# ---------------------------------------------------------------------------
# the truncated-exponential polynomial


@dataclass
class TruncationPolynomial:
    """D(x) = sum_{k <= nu} c_k x^k with c_k = (2 pi i)^k / k! * int xi^k G^.

    `coeffs` holds every numerically nonzero coefficient; if that list is
    complete (complete_series), evaluation switches to the integral form of
    the same truncated series, which is the stable summation for large nu.
    """

    nu: int
    coeffs: np.ndarray
    complete_series: bool
    spec: MajorantSpec = field(repr=False)
    tail_bound_log10: float = math.inf

    @property
    def tail_bound(self) -> float:
        return 10.0**self.tail_bound_log10 if self.tail_bound_log10 < 300 else math.inf

    def evaluate(self, x, chunk: int = 2048) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.complete_series:
            return self.spec.evaluate(x, chunk=chunk)
        acc = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc


def truncate(spec: MajorantSpec, nu: int | None = None) -> TruncationPolynomial:
    """Polynomial proxy of order nu (defaults to the spec's ledger rule)."""
    if nu is None:
        nu = spec.nu
    if nu < 1:
        raise DomainError(f"need nu >= 1, got {nu}")
    abs_xi = np.abs(spec.nodes)
    log_abs = np.where(abs_xi > 0, np.log(np.maximum(TWO_PI * abs_xi, 1e-300)), -np.inf)
    sgn = np.sign(spec.nodes)
    coeffs = []
    zero_run = 0
    complete = False
    for k in range(nu + 1):
        logmag = k * log_abs - gammaln(k + 1)
        mag = np.exp(np.where(logmag < -700.0, -np.inf, logmag))
        term = np.sum(spec.weights * mag * sgn**k * (1j**k * spec.ghat))
        coeffs.append(float(term.real))
        if mag.max() == 0.0:
            zero_run += 1
            if zero_run >= 8 and k < nu:
                complete = True  # every later coefficient underflows too
                break
        else:
            zero_run = 0
    # paper-form error bound (100^nu / nu^nu) Delta^(3 A nu), kept in log10
    tail_log10 = nu * (2.0 - math.log10(nu)) + 3.0 * spec.A * nu * math.log10(spec.Delta)
    return TruncationPolynomial(
        nu=nu,
        coeffs=np.array(coeffs),
        complete_series=complete,
        spec=spec,
        tail_bound_log10=tail_log10,
    )


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class SandwichReport:
    n_points: int
    n_violations: int
    c_used: float
    worst_margin: float


def sandwich_check(spec: MajorantSpec, poly: TruncationPolynomial, xs) -> SandwichReport:
    """indicator(x in [0, 1/Delta]) <= D(x)^2 (1 + c e^{-Delta^(A-1)})."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    inflate = 1.0 + spec.c_measured * math.exp(-min(spec.Delta ** (spec.A - 1.0), 700.0))
    d2 = poly.evaluate(xs) ** 2
    ind = ((xs >= 0.0) & (xs <= 1.0 / spec.Delta)).astype(float)
    margin = d2 * inflate - ind
    viol = margin < 0.0
    return SandwichReport(
        n_points=xs.size,
        n_violations=int(viol.sum()),
        c_used=spec.c_measured,
        worst_margin=float(margin.min()),
    )


@dataclass(frozen=True)
class ReverseReport:
    lhs: float
    rhs: float
    holds: bool
    stderr: float
    chernoff_tail: float
    n_samples: int
    seed: int


def reverse_check(spec: MajorantSpec, block_ps, u: float, n_samples: int, seed: int) -> ReverseReport:
    """E[D(Y - u)^2] <= P(Y - u in [-pad, 1/Delta + pad]) + c e^{-Delta^(A-1)}.

    Y is a phase-model block sum; the Chernoff tail P(|Y - u| > Delta^(6A))
    is reported alongside (it is exactly zero at desk exponents).
    """
    from . import model

    if abs(u) >= 4.0 * spec.Delta + 2.0:
        raise DomainError(f"|u| = {abs(u)} outside the 4 Delta + 2 = {4 * spec.Delta + 2} window")
    poly = truncate(spec)
    ys = model.sample_block(block_ps, seed, n_samples) - u
    d2 = poly.evaluate(ys) ** 2
    lhs = float(np.mean(d2))
    se = float(np.std(d2, ddof=1) / math.sqrt(n_samples))
    pad = spec.delta_pad
    p_win = float(np.mean((ys >= -pad) & (ys <= 1.0 / spec.Delta + pad)))
    rhs = p_win + spec.c_measured * math.exp(-min(spec.Delta ** (spec.A - 1.0), 700.0))
    tail_cut = spec.Delta ** (6.0 * spec.A)
    chern = float(np.mean(np.abs(ys) > tail_cut))
    return ReverseReport(
        lhs=lhs,
        rhs=rhs,
        holds=bool(lhs <= rhs + 3.0 * se),
        stderr=se,
        chernoff_tail=chern,
        n_samples=n_samples,
        seed=seed,
    )
