"""Independent random-phase surrogate for the prime partial sums.

Each prime carries an angle theta_p, uniform on [0, 2pi) and independent
across primes; a ladder block contributes

    Y_j = sum over block primes of cos(theta_p)/sqrt(p) + cos^2(theta_p)/(2p).

The square term gives the block a mean of sum 1/(4p) and a variance of
sum 1/(2p) + 1/(32 p^2) (the exact expectations of cos^2 theta / (2p) over
a uniform angle), so the Gaussian surrogate here carries that exact mean
and variance rather than the idealized centered half-width.

Angles come from a counter-based hash of (seed, sample, prime), not from a
consumed stream: any subset of primes can be sampled for any subset of
samples, in any order and from any worker, with identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import primes
from .errors import DomainError, ResourceError

TWO_PI = 2.0 * np.pi

_K1 = np.uint64(0x9E3779B97F4A7C15)
_K2 = np.uint64(0xD1342543DE82EF95)


def _mix(x):
    x = np.asarray(x, dtype=np.uint64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _phases(seed: int, sample_idx, ps):
    """theta in [0, 2pi) for the outer product of samples and primes."""
    s = _mix(np.asarray(sample_idx, dtype=np.uint64) * _K1 + np.uint64(seed & (2**64 - 1)))
    p = _mix(np.asarray(ps, dtype=np.uint64) * _K2)
    u = _mix(s[..., None] ^ p[None, :])
    return (u >> np.uint64(11)).astype(np.float64) * (TWO_PI / 2**53)


@dataclass(frozen=True)
class PhaseAssignment:
    """One realization of all the angles, addressed by (seed, prime)."""

    seed: int

    def theta(self, ps) -> np.ndarray:
        ps = np.atleast_1d(np.asarray(ps, dtype=np.int64))
        return _phases(self.seed, np.array([0]), ps)[0]


def block_primes(j: int, ladder) -> np.ndarray:
    if not 1 <= j <= ladder.L_count:
        raise DomainError(f"block {j} outside 1..{ladder.L_count}")
    return primes.primes_in_range(primes.PrimeRange(ladder.points[j - 1], ladder.points[j]))


@dataclass(frozen=True)
class BlockStats:
    """Exact first and second moments of a block sum."""

    mean: float
    variance: float

    @property
    def r_scale(self) -> float:
        """Variance scale r with exp(-v^2/r) the matching Gaussian decay."""
        return 2.0 * self.variance

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


def block_stats(ps, include_second_order: bool = True) -> BlockStats:
    p = np.asarray(ps, dtype=float)
    var = float(np.sum(1.0 / (2.0 * p)))
    if include_second_order:
        var += float(np.sum(1.0 / (32.0 * p * p)))
    return BlockStats(mean=float(np.sum(1.0 / (4.0 * p))), variance=var)


@dataclass(frozen=True)
class GaussianSurrogate:
    """Normal stand-in for a block sum, with the block's exact moments."""

    j: int
    mean: float
    variance: float

    @classmethod
    def for_block(cls, j: int, ladder, include_second_order: bool = True):
        st = block_stats(block_primes(j, ladder), include_second_order)
        return cls(j=j, mean=st.mean, variance=st.variance)

    def interval_prob(self, a: float, b: float) -> float:
        s = math.sqrt(self.variance)
        return float(norm.cdf((b - self.mean) / s) - norm.cdf((a - self.mean) / s))


def _summand(theta, p_row):
    c = np.cos(theta)
    return c * (1.0 / np.sqrt(p_row)) + c * c * (1.0 / (2.0 * p_row))


def sample_block(ps, seed: int, n: int, chunk_elems: int = 8_000_000) -> np.ndarray:
    """n independent block sums over the given primes."""
    ps = np.atleast_1d(np.asarray(ps, dtype=np.int64))
    if len(ps) == 0:
        return np.zeros(int(n))
    p_row = ps.astype(float)[None, :]
    out = np.empty(int(n))
    rows = max(1, chunk_elems // len(ps))
    for i in range(0, int(n), rows):
        m = min(rows, int(n) - i)
        th = _phases(seed, np.arange(i, i + m), ps)
        out[i : i + m] = _summand(th, p_row).sum(axis=1)
    return out


def sample_Y(j: int, ladder, assignment: PhaseAssignment) -> float:
    """Exact block sum under one phase assignment."""
    ps = block_primes(j, ladder)
    if len(ps) == 0:
        return 0.0
    th = assignment.theta(ps)
    return float(_summand(th, ps.astype(float)).sum())


def sample_Zn(n: int, assignment: PhaseAssignment) -> complex:
    """Multiplicative unit-modulus variable: product of exp(i a_j theta_{p_j})."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if n == 1:
        return 1.0 + 0.0j
    fac = primes.factorize(n)
    ths = assignment.theta(np.array([p for p, _ in fac]))
    return complex(np.exp(1j * float(sum(a * th for (_, a), th in zip(fac, ths)))))


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class ModelReport:
    name: str
    estimate: float
    reference: float
    ratio: float
    stderr: float
    n_samples: int
    seed: int
    extras: dict


def mgf_check(j: int, lam: float, ladder, n_samples: int, seed: int) -> ModelReport:
    """MC moment generating function of a block against exp(lam^2 width / 4)."""
    ps = block_primes(j, ladder)
    width = ladder.points[j] - ladder.points[j - 1]
    if abs(lam) >= math.exp(min(math.exp(ladder.points[j]) / 2.0, 700.0)):
        raise DomainError(f"lambda={lam} outside the MGF domain for block {j}")
    ys = sample_block(ps, seed, n_samples)
    vals = np.exp(lam * ys)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n_samples))
    ref = math.exp(lam * lam * width / 4.0)
    return ModelReport(
        name="mgf",
        estimate=est,
        reference=ref,
        ratio=est / ref,
        stderr=se / ref,
        n_samples=n_samples,
        seed=seed,
        extras={"j": j, "lambda": lam, "width": width},
    )


def berry_esseen_distance(j: int, interval_grid, ladder, n_samples: int, seed: int) -> ModelReport:
    """Worst interval-probability gap between a block sum and its Gaussian
    surrogate.  j = 1 is allowed but flagged: the first block is the
    saddle-point regime, not the Berry-Esseen one."""
    ps = block_primes(j, ladder)
    surrogate = GaussianSurrogate.for_block(j, ladder)
    ys = sample_block(ps, seed, n_samples)
    worst = 0.0
    worst_iv = None
    for a, b in interval_grid:
        if not a < b:
            raise DomainError(f"bad interval ({a}, {b})")
        emp = float(np.mean((ys >= a) & (ys < b)))
        ref = surrogate.interval_prob(a, b)
        gap = abs(emp - ref)
        if gap > worst:
            worst, worst_iv = gap, (a, b)
    mc_err = 0.5 / math.sqrt(n_samples)
    return ModelReport(
        name="berry_esseen",
        estimate=worst,
        reference=0.0,
        ratio=math.inf,
        stderr=mc_err,
        n_samples=n_samples,
        seed=seed,
        extras={
            "j": j,
            "worst_interval": worst_iv,
            "saddle_point_regime": j == 1,
            "surrogate_mean": surrogate.mean,
            "surrogate_variance": surrogate.variance,
        },
    )


def saddle_density_check(
    v: float, Delta: float, block_ps, n_samples: int, seed: int
) -> ModelReport:
    """MC P(Y - mean in [v, v + 1/Delta]) against (1/Delta)(1/sqrt r)exp(-v^2/r).

    r = 2 Var(Y) is the block's variance scale; v is measured from the exact
    block mean, the model's analogue of the centered statement.
    """
    ps = np.atleast_1d(np.asarray(block_ps, dtype=np.int64))
    st = block_stats(ps)
    r = st.r_scale
    if Delta < 1.0:
        raise DomainError(f"need Delta >= 1, got {Delta}")
    if abs(v) > 100.0 * r:
        raise DomainError(f"|v|={abs(v)} beyond the 100 r = {100 * r:.2f} window")
    ys = sample_block(ps, seed, n_samples) - st.mean
    hits = (ys >= v) & (ys < v + 1.0 / Delta)
    p_hat = float(np.mean(hits))
    se = math.sqrt(max(p_hat * (1 - p_hat), 1e-300) / n_samples)
    ref = (1.0 / Delta) / math.sqrt(r) * math.exp(-v * v / r)
    ratio = p_hat / ref if p_hat > 0 else 0.0
    return ModelReport(
        name="saddle_density",
        estimate=p_hat,
        reference=ref,
        ratio=ratio,
        stderr=se,
        n_samples=n_samples,
        seed=seed,
        extras={"v": v, "Delta": Delta, "r": r, "mean": st.mean, "n_hits": int(hits.sum())},
    )


# ---------------------------------------------------------------------------
# exponential tilting


def _theta_grid(n_theta: int = 512) -> np.ndarray:
    return (np.arange(n_theta) + 0.5) * (TWO_PI / n_theta)


def _summand_grid(ps, n_theta: int = 512) -> np.ndarray:
    c = np.cos(_theta_grid(n_theta))[None, :]
    p = np.asarray(ps, dtype=float)[:, None]
    return c / np.sqrt(p) + c * c / (2.0 * p)


def _tilt_norms(ps, lam: float) -> np.ndarray:
    """Z_p(lam) = E[exp(lam X_p)] by periodic trapezoid quadrature."""
    return np.exp(lam * _summand_grid(ps)).mean(axis=1)


def tilted_mean(ps, lam: float) -> float:
    """E[Y] under the per-prime exponential tilt, by quadrature."""
    x = _summand_grid(ps)
    w = np.exp(lam * x)
    return float(((x * w).mean(axis=1) / w.mean(axis=1)).sum())


def lambda_for_mean(ps, target: float, lo: float = -64.0, hi: float = 64.0) -> float:
    """Tilt strength whose tilted block mean matches the target (bisection)."""
    f_lo, f_hi = tilted_mean(ps, lo) - target, tilted_mean(ps, hi) - target
    if f_lo > 0 or f_hi < 0:
        raise DomainError(f"target mean {target} outside the reachable range")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if tilted_mean(ps, mid) - target <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TiltedSample:
    values: np.ndarray
    weights: np.ndarray
    lam: float

    def estimate(self, f) -> tuple[float, float]:
        """Unbiased untilted E[f(Y)] with its standard error."""
        vals = f(self.values) * self.weights
        n = len(vals)
        return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n))

    @property
    def effective_sample_size(self) -> float:
        w = self.weights
        return float(np.sum(w) ** 2 / np.sum(w * w)) if len(w) else 0.0


def tilted_sampler(
    ps, lam: float, seed: int, n: int, max_rounds: int = 256, chunk_primes: int = 64
) -> TiltedSample:
    """Block sums under per-prime exponential tilting, with likelihood weights.

    Each angle is drawn by acceptance-rejection against its tilted density
    (the tilt factorizes over primes); a sample's weight is
    prod_p Z_p(lam) * exp(-lam Y), making weighted means unbiased for
    untilted expectations.
    """
    ps = np.atleast_1d(np.asarray(ps, dtype=np.int64))
    n = int(n)
    if len(ps) == 0:
        return TiltedSample(values=np.zeros(n), weights=np.ones(n), lam=lam)
    log_Z_total = float(np.sum(np.log(_tilt_norms(ps, lam))))
    if not math.isfinite(log_Z_total):
        raise ResourceError(f"tilt normalization overflow at lambda={lam}")
    ys = np.zeros(n)
    idx = np.arange(n)
    round_no = 0
    for c0 in range(0, len(ps), chunk_primes):
        sub = ps[c0 : c0 + chunk_primes]
        p_f = sub.astype(float)
        # max over theta of lam*X_p: X_p is increasing in cos(theta)
        x_hi = 1.0 / np.sqrt(p_f) + 1.0 / (2.0 * p_f)
        x_lo = -1.0 / np.sqrt(p_f) + 1.0 / (2.0 * p_f)
        bound = lam * np.where(lam >= 0, x_hi, x_lo)
        acc = np.zeros((n, len(sub)))
        pending = np.ones((n, len(sub)), dtype=bool)
        for _ in range(max_rounds):
            if not pending.any():
                break
            th = _phases(seed + 2 * round_no + 1, idx, sub)
            u = _phases(seed + 2 * round_no + 2, idx, sub) / TWO_PI
            c = np.cos(th)
            x = c / np.sqrt(p_f)[None, :] + c * c / (2.0 * p_f)[None, :]
            take = pending & (u < np.exp(lam * x - bound[None, :]))
            acc[take] = x[take]
            pending &= ~take
            round_no += 1
        if pending.any():
            raise ResourceError(f"tilted rejection sampling stalled at lambda={lam}")
        ys += acc.sum(axis=1)
    log_w = log_Z_total - lam * ys
    if np.max(log_w) > 700.0:
        raise ResourceError(f"importance weights overflow at lambda={lam}")
    return TiltedSample(values=ys, weights=np.exp(log_w), lam=lam)
