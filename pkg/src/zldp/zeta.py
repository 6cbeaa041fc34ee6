"""Critical-line evaluation of the Riemann zeta function.

The working evaluator is the Riemann-Siegel formula

    Z(t) = 2 sum_{n<=N} cos(theta(t) - t log n)/sqrt(n)
           + (-1)^(N-1) (2pi/t)^(1/4) sum_k C_k(p) (2pi/t)^(k/2),

with N = floor(sqrt(t/2pi)), p the fractional part of sqrt(t/2pi), and five
correction terms C_0..C_4.  The C_k are the classical combinations of
derivatives of Psi(p) = cos(2pi(p^2 - p - 1/16))/cos(2pi p); Psi is entire,
so the derivatives are computed once by Cauchy-circle quadrature and the
C_k cached as Chebyshev series on [0, 1].  The truncation error decays like
t^(-11/4), which keeps the evaluator well below 1e-6 absolute error for
t >= 100.

An independent Euler-Maclaurin evaluator (the `checked` profile) serves as
the oracle below t = 1e5.  Both share the compensated phase reduction from
`ddmath`, so t*log n and theta(t) stay accurate to heights ~1e12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.special import loggamma

from . import ddmath
from .errors import DomainError, ResourceError

MIN_HEIGHT = 2.0
MAX_HEIGHT = 1.0e12
EM_MAX_HEIGHT = 1.0e5
NEAR_ZERO_FLOOR = 1.0e-12

TWO_PI = 2.0 * np.pi

# C_k(p) = sum over (d, c, w) of c * Psi^(d)(p) / pi^w
_CORRECTION_TABLE = {
    0: [(0, 1.0, 0)],
    1: [(3, -1.0 / 96, 2)],
    2: [(2, 1.0 / 64, 2), (6, 1.0 / 18432, 4)],
    3: [(1, -1.0 / 64, 2), (5, -1.0 / 3840, 4), (9, -1.0 / 5308416, 6)],
    4: [
        (0, 1.0 / 128, 2),
        (4, 19.0 / 24576, 4),
        (8, 11.0 / 5898240, 6),
        (12, 1.0 / 2038431744, 8),
    ],
}

_BERNOULLI = [
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
    43867.0 / 798,
    -174611.0 / 330,
    854513.0 / 138,
    -236364091.0 / 2730,
    8553103.0 / 6,
    -23749461029.0 / 870,
]


@dataclass(frozen=True)
class Height:
    t: float
    precision_profile: str = "fast"

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise DomainError(f"height must be finite, got {self.t}")
        if self.t < MIN_HEIGHT:
            raise DomainError(f"height {self.t} below the minimum {MIN_HEIGHT}")
        if self.t > MAX_HEIGHT:
            raise ResourceError(f"height {self.t} above the configured maximum {MAX_HEIGHT}")
        if self.precision_profile not in ("fast", "checked"):
            raise DomainError(f"unknown precision profile {self.precision_profile!r}")


@dataclass(frozen=True)
class ZetaValue:
    re: float
    im: float
    abs_log: float
    err_bound: float

    @property
    def near_zero(self) -> bool:
        return math.hypot(self.re, self.im) < max(self.err_bound, NEAR_ZERO_FLOOR)


def psi_function(z):
    """Psi(z) = cos(2pi(z^2 - z - 1/16))/cos(2pi z); entire, so the quotient
    of the two vanishing factors at z = 1/4 + k/2 is removable."""
    z = np.asarray(z)
    return np.cos(TWO_PI * (z * z - z - 1.0 / 16.0)) / np.cos(TWO_PI * z)


def psi_derivatives(p, kmax: int, n_circle: int = 64, radius: float = 0.2):
    """Psi^(0..kmax) at real points p via Cauchy-circle quadrature."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    m = np.arange(n_circle)
    ring = radius * np.exp(2j * np.pi * m / n_circle)
    vals = psi_function(p[..., None] + ring)
    out = []
    fact = 1.0
    for k in range(kmax + 1):
        if k:
            fact *= k
        coef = (vals * np.exp(-2j * np.pi * k * m / n_circle)).mean(axis=-1)
        out.append((fact / radius**k) * coef.real)
    return out


_cheb_tables: list[np.ndarray] | None = None


def _correction_chebs() -> list[np.ndarray]:
    global _cheb_tables
    if _cheb_tables is None:
        def make(k):
            def f(x):
                p = 0.5 * (np.asarray(x) + 1.0)
                derivs = psi_derivatives(p, 12)
                acc = np.zeros_like(p)
                for d, c, w in _CORRECTION_TABLE[k]:
                    acc += c * derivs[d] / np.pi**w
                return acc

            return _cheb.chebinterpolate(f, 96)

        _cheb_tables = [make(k) for k in range(5)]
    return _cheb_tables


def _correction_sum(p, tinv_2pi_sqrt):
    tables = _correction_chebs()
    x = 2.0 * p - 1.0
    acc = _cheb.chebval(x, tables[0])
    xp = np.ones_like(p)
    for k in range(1, 5):
        xp = xp * tinv_2pi_sqrt
        acc = acc + _cheb.chebval(x, tables[k]) * xp
    return acc


# lazily grown table of dd logs for 1..n
_log_table: tuple[np.ndarray, np.ndarray] = (np.zeros(1), np.zeros(1))


def _dd_logs(nmax: int) -> tuple[np.ndarray, np.ndarray]:
    global _log_table
    if nmax >= len(_log_table[0]):
        n = np.arange(1, max(nmax + 1, 2 * len(_log_table[0])), dtype=float)
        hi, lo = ddmath.dd_log(n)
        _log_table = (np.concatenate([[0.0], hi]), np.concatenate([[0.0], lo]))
    return _log_table


def theta_mod_2pi(t):
    """Riemann-Siegel theta mod 2pi.

    Stirling expansion in dd arithmetic for t >= 50 (absolute error < 1e-15
    up to 1e12); complex loggamma below, where magnitudes are harmless.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    small = t < 50.0
    if small.any():
        ts = t[small]
        th = np.imag(loggamma(0.25 + 0.5j * ts)) - 0.5 * ts * math.log(math.pi)
        out[small] = np.mod(th, TWO_PI)
    big = ~small
    if big.any():
        tb = t[big]
        l_hi, l_lo = ddmath.dd_log(tb)
        l_hi, l_lo = ddmath.dd_add(l_hi, l_lo, -ddmath.LOG_2PI_HI, -ddmath.LOG_2PI_LO)
        m_hi, m_lo = ddmath.dd_mul(l_hi, l_lo, 0.5 * tb, np.zeros_like(tb))
        m_hi, m_lo = ddmath.dd_add_d(m_hi, m_lo, -0.5 * tb)
        base = ddmath.reduce_mod_2pi(m_hi, m_lo)
        t2 = tb * tb
        corr = (
            -np.pi / 8.0
            + 1.0 / (48.0 * tb)
            + 7.0 / (5760.0 * tb * t2)
            + 31.0 / (80640.0 * tb * t2 * t2)
            + 127.0 / (430080.0 * tb * t2 * t2 * t2)
        )
        out[big] = np.mod(base + corr, TWO_PI)
    return out


def theta(t):
    """Raw theta(t) in float64 (loses the phase beyond ~1e8; use
    theta_mod_2pi for evaluation)."""
    t = np.asarray(t, dtype=float)
    return np.imag(loggamma(0.25 + 0.5j * t)) - 0.5 * t * math.log(math.pi)


def rs_err_bound(t):
    """Truncation-order estimate for the C0..C4 Riemann-Siegel evaluation."""
    t = np.asarray(t, dtype=float)
    return 0.02 * t**-2.75 + 5.0e-13


def z_batch(ts, chunk_elems: int = 4_000_000) -> np.ndarray:
    """Riemann-Siegel Z(t) for an array of heights."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if ts.size == 0:
        return np.empty(0)
    if not np.all(np.isfinite(ts)):
        raise DomainError("non-finite height in batch")
    if ts.min() < MIN_HEIGHT:
        raise DomainError(f"height {ts.min()} below the minimum {MIN_HEIGHT}")
    if ts.max() > MAX_HEIGHT:
        raise ResourceError(f"height {ts.max()} above the configured maximum {MAX_HEIGHT}")
    a = np.sqrt(ts / TWO_PI)
    N = np.floor(a).astype(np.int64)
    p = a - N
    th = theta_mod_2pi(ts)
    nmax = int(N.max())
    log_hi, log_lo = _dd_logs(max(nmax, 1))
    inv_sqrt = 1.0 / np.sqrt(np.arange(1, nmax + 1, dtype=float))
    out = np.empty_like(ts)
    rows = max(1, chunk_elems // max(nmax, 1))
    for i in range(0, ts.size, rows):
        sl = slice(i, min(i + rows, ts.size))
        tt = ts[sl][:, None]
        phases = ddmath.phase_mod_2pi(tt, log_hi[1 : nmax + 1], log_lo[1 : nmax + 1])
        terms = np.cos(th[sl][:, None] - phases) * inv_sqrt
        mask = np.arange(1, nmax + 1)[None, :] <= N[sl][:, None]
        out[sl] = 2.0 * np.sum(terms, axis=1, where=mask)
    corr = _correction_sum(p, np.sqrt(TWO_PI / ts))
    out += np.where(N % 2 == 1, 1.0, -1.0) * (TWO_PI / ts) ** 0.25 * corr
    return out


def euler_maclaurin_zeta(t, terms_factor: float = 1.8, bernoulli_terms: int = 12):
    """zeta(1/2 + it) by Euler-Maclaurin; the slow, checked oracle.

    Kept independent of the Riemann-Siegel path: no shared formula beyond
    the dd phase reduction.
    """
    t = float(t)
    if not math.isfinite(t):
        raise DomainError("non-finite height")
    if t < MIN_HEIGHT:
        raise DomainError(f"height {t} below the minimum {MIN_HEIGHT}")
    if t > EM_MAX_HEIGHT:
        raise ResourceError(f"Euler-Maclaurin oracle capped at t = {EM_MAX_HEIGHT}")
    N = int(max(32, math.ceil(terms_factor * t)))
    s = 0.5 + 1j * t
    log_hi, log_lo = _dd_logs(N)
    n = np.arange(1, N, dtype=float)
    phases = ddmath.phase_mod_2pi(t, log_hi[1:N], log_lo[1:N])
    total = np.sum(n**-0.5 * np.exp(-1j * phases))
    # N^{-s} and N^{1-s} with the same compensated phase
    phase_N = float(ddmath.phase_mod_2pi(t, log_hi[N], log_lo[N]))
    N_ms = N**-0.5 * np.exp(-1j * phase_N)
    total += N_ms * (float(N) / (s - 1.0) + 0.5)
    poch = s
    Npow = N_ms / N  # N^{-s-1}
    for k in range(1, bernoulli_terms + 1):
        total += _BERNOULLI[k - 1] / math.factorial(2 * k) * poch * Npow
        # advance s(s+1)...(s+2k) and N^{-s-2k-1}
        poch = poch * (s + (2 * k - 1)) * (s + 2 * k)
        Npow = Npow / (N * N)
    return complex(total)


def em_err_bound(t) -> float:
    # first omitted Bernoulli term dominates; padded by the phase floor
    return 1.0e-11 + 1.0e-16 * float(t)


def zeta_critical(h) -> ZetaValue:
    """zeta(1/2 + it) as a ZetaValue; `checked` uses the Euler-Maclaurin
    oracle up to t = 1e5 and falls back to Riemann-Siegel above."""
    if not isinstance(h, Height):
        h = Height(float(h))
    t = h.t
    if h.precision_profile == "checked" and t <= EM_MAX_HEIGHT:
        val = euler_maclaurin_zeta(t)
        err = em_err_bound(t)
        re, im = val.real, val.imag
    else:
        z = float(z_batch(np.array([t]))[0])
        th = float(theta_mod_2pi(np.array([t]))[0])
        re, im = z * math.cos(th), -z * math.sin(th)
        err = float(rs_err_bound(t))
    mod = math.hypot(re, im)
    abs_log = math.log(mod) if mod > 0 else -math.inf
    return ZetaValue(re=re, im=im, abs_log=abs_log, err_bound=err)


def log_abs_zeta(h) -> tuple[float, bool]:
    """log|zeta(1/2+it)| and a near-zero flag.

    Within err_bound of a zero the log is unreliable and tails to -inf, so
    the value is flagged rather than propagated into tail statistics.
    """
    v = zeta_critical(h)
    if v.near_zero:
        return math.log(max(v.err_bound, NEAR_ZERO_FLOOR)), True
    return v.abs_log, False


def log_abs_zeta_batch(ts, threads: int = 1, chunk: int = 2048):
    """log|zeta| for an array of heights via Riemann-Siegel.

    Returns (values, near_zero mask).  Work is split into fixed-size chunks
    evaluated independently, so results are bit-identical for any thread
    count.
    """
    ts = np.asarray(ts, dtype=float)
    nz_floor = np.maximum(rs_err_bound(ts), NEAR_ZERO_FLOOR)
    pieces = [slice(i, min(i + chunk, ts.size)) for i in range(0, ts.size, chunk)]
    zs = np.empty_like(ts)
    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for sl, res in zip(pieces, ex.map(lambda s: z_batch(ts[s]), pieces)):
                zs[sl] = res
    else:
        for sl in pieces:
            zs[sl] = z_batch(ts[sl])
    absz = np.abs(zs)
    near = absz < nz_floor
    vals = np.log(np.where(near, nz_floor, absz))
    return vals, near


def sample_tau(T: float, n: int, seed: int) -> np.ndarray:
    """n heights uniform on [T, 2T], reproducible from the seed."""
    if T < 10:
        raise DomainError(f"need T >= 10, got {T}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
    return T * (1.0 + rng.random(int(n)))
