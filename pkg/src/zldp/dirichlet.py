"""Prime partial sums, mollifiers, and Dirichlet-polynomial diagnostics.

The running random variables are the partial sums

    S_k      = sum_{2 <= p <= exp(e^k)} Re p^(-i tau)/sqrt(p) + Re p^(-2i tau)/(2p)
    S~_k     = the complex analogue,

with S_0 = S~_0 = 0 by convention, and the Moebius-weighted mollifiers
supported on one doubly-logarithmic block each.  The block product
M_1 ... M_ell tracks exp(-S_{t_ell}) on typical samples; the comparison
inequality check below quantifies how often, and with what margin.

The *_check operations are Monte Carlo diagnostics for the mean-value,
splitting, and moment estimates that power everything else.  They return
small report objects rather than asserting, so the CLI can emit them as
CSV rows and the tests can pin tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ddmath, primes, zeta
from .constants import ConstantsLedger
from .errors import DomainError, ResourceError

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# polynomials


@dataclass
class DirichletPolynomial:
    """Sparse coefficient map n -> a(n) with a declared prime-support range.

    support_range = None means unrestricted support (used by the generic
    mean-value diagnostics).
    """

    coeffs: dict[int, complex]
    length: int = 0
    support_range: primes.PrimeRange | None = None
    _ns: np.ndarray = field(default=None, repr=False)
    _vals: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.coeffs:
            raise DomainError("empty Dirichlet polynomial")
        ns = np.array(sorted(self.coeffs), dtype=np.int64)
        if ns[0] < 1:
            raise DomainError(f"coefficient index {ns[0]} < 1")
        vals = np.array([self.coeffs[int(n)] for n in ns], dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise DomainError("non-finite coefficient")
        self._ns = ns
        self._vals = vals
        if not self.length:
            self.length = int(ns[-1])

    @property
    def ns(self) -> np.ndarray:
        return self._ns

    @property
    def values(self) -> np.ndarray:
        return self._vals

    def sum_abs_sq(self) -> float:
        return float(np.sum(np.abs(self._vals) ** 2))

    def validate_support(self) -> bool:
        if self.support_range is None:
            return True
        return all(
            all(self.support_range.contains(p) for p, _ in primes.factorize(int(n)))
            for n in self._ns
            if n > 1
        )


def _dd_logs_of(ns: np.ndarray):
    return ddmath.dd_log(ns.astype(float))


def evaluate_batch(poly: DirichletPolynomial, taus, sigma: float = 0.5, chunk_elems: int = 4_000_000):
    """sum a(n) n^(-sigma - i tau) for an array of taus."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    ns = poly.ns
    log_hi, log_lo = _dd_logs_of(ns)
    amp = poly.values * ns.astype(float) ** (-sigma)
    out = np.empty(taus.shape, dtype=complex)
    rows = max(1, chunk_elems // max(len(ns), 1))
    for i in range(0, taus.size, rows):
        sl = slice(i, min(i + rows, taus.size))
        ph = ddmath.phase_mod_2pi(taus[sl][:, None], log_hi, log_lo)
        out[sl] = np.exp(-1j * ph) @ amp
    return out


def evaluate(poly: DirichletPolynomial, tau: float, sigma: float = 0.5) -> complex:
    return complex(evaluate_batch(poly, np.array([tau]), sigma=sigma)[0])


def convolve(a: DirichletPolynomial, b: DirichletPolynomial) -> DirichletPolynomial:
    """Coefficient-wise product polynomial (Dirichlet convolution)."""
    out: dict[int, complex] = {}
    for n, an in a.coeffs.items():
        for m, bm in b.coeffs.items():
            k = int(n) * int(m)
            out[k] = out.get(k, 0) + an * bm
    return DirichletPolynomial(out)


# ---------------------------------------------------------------------------
# partial sums


def _prime_terms(taus, ps, include_prime_squares: bool):
    """Per-(tau, prime) real and complex summands; taus is a column chunk."""
    log_hi, log_lo = _dd_logs_of(ps)
    ph = ddmath.phase_mod_2pi(taus[:, None], log_hi, log_lo)
    inv_sqrt = 1.0 / np.sqrt(ps.astype(float))
    z = np.exp(-1j * ph) * inv_sqrt
    if include_prime_squares:
        # ph is already reduced, so doubling costs only one ulp of 2pi
        ph2 = np.mod(2.0 * ph, TWO_PI)
        inv_2p = 1.0 / (2.0 * ps.astype(float))
        z = z + np.exp(-1j * ph2) * inv_2p
    return z


def partial_sum(tau: float, k: float, include_prime_squares: bool = True):
    """(S_k, S~_k) at a single tau; empty sum below the first prime."""
    s, st = partial_sums_batch(np.array([float(tau)]), [k], include_prime_squares)
    return float(s[0, 0]), complex(st[0, 0])


def partial_sums_batch(taus, ks, include_prime_squares: bool = True, chunk_elems: int = 4_000_000):
    """Partial sums at several cutoffs for an array of taus.

    Returns (S, S~) of shape (len(taus), len(ks)); ks need not be sorted.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    ks = list(ks)
    uppers = [math.exp(math.exp(k)) if math.exp(k) < 700 else math.inf for k in ks]
    for k, u in zip(ks, uppers):
        if not math.isfinite(u):
            raise ResourceError(f"cutoff exp(e^{k}) is not representable")
    hi = int(max([2] + [math.floor(u) for u in uppers]))
    ps = primes.sieve_primes(hi)
    bounds = np.array([np.searchsorted(ps, math.floor(u), side="right") for u in uppers])
    S = np.zeros((taus.size, len(ks)))
    St = np.zeros((taus.size, len(ks)), dtype=complex)
    if len(ps) == 0:
        return S, St
    rows = max(1, chunk_elems // len(ps))
    for i in range(0, taus.size, rows):
        sl = slice(i, min(i + rows, taus.size))
        z = _prime_terms(taus[sl], ps, include_prime_squares)
        cum = np.cumsum(z, axis=1)
        for j, b in enumerate(bounds):
            if b > 0:
                St[sl, j] = cum[:, b - 1]
    S = St.real.copy()
    return S, St


def increment(tau: float, j: int, ladder) -> float:
    """Y_j = S_{t_j} - S_{t_{j-1}}, with S at the ladder origin taken as 0."""
    if not 1 <= j <= ladder.L_count:
        raise DomainError(f"increment level {j} outside 1..{ladder.L_count}")
    s, _ = partial_sums_batch(np.array([tau]), [ladder.points[j]])
    if j == 1:
        return float(s[0, 0])
    s0, _ = partial_sums_batch(np.array([tau]), [ladder.points[j - 1]])
    return float(s[0, 0] - s0[0, 0])


# ---------------------------------------------------------------------------
# mollifiers


@dataclass(frozen=True)
class MollifierSpec:
    """Recipe for one block mollifier.

    omega_cap bounds the number of prime factors of the enumerated
    squarefree integers; length_cap bounds their value, and term_cap the
    enumeration size.  Ladder-derived specs keep omega_cap at least
    omega_cap_floor: desk-profile blocks are narrower than 1, where the
    bare floor(width^E_Omega) would degenerate to the constant polynomial
    and the comparison inequality loses all content.
    """

    ell: int
    range: primes.PrimeRange
    omega_cap: int
    length_cap: int = 10**7
    term_cap: int = 2_000_000

    @classmethod
    def from_ladder(cls, ladder, ell: int, ledger: ConstantsLedger | None = None):
        led = ledger if ledger is not None else ladder.ledger
        if not 1 <= ell <= ladder.L_count:
            raise DomainError(f"mollifier level {ell} outside 1..{ladder.L_count}")
        lo, hi = ladder.points[ell - 1], ladder.points[ell]
        width = hi - lo
        cap = max(led.omega_cap_floor, int(math.floor(width**led.E_Omega)))
        return cls(
            ell=ell,
            range=primes.PrimeRange(lo, hi),
            omega_cap=cap,
            length_cap=led.mollifier_value_cap,
            term_cap=led.mollifier_term_cap,
        )


def mollifier(spec: MollifierSpec) -> DirichletPolynomial:
    """Moebius coefficients on squarefree integers with prime support in the
    block and at most omega_cap factors; a(1) = 1 always."""
    ps = [int(p) for p in primes.primes_in_range(spec.range)]
    cap = min(spec.omega_cap, len(ps))
    n_terms = sum(math.comb(len(ps), r) for r in range(cap + 1))
    if n_terms > spec.term_cap:
        raise ResourceError(
            f"mollifier enumeration needs {n_terms} terms, over the cap {spec.term_cap}"
        )
    if cap > 0 and ps:
        largest = 1
        for p in ps[-cap:]:
            largest *= p
        if largest > spec.length_cap:
            raise ResourceError(
                f"mollifier support reaches {largest}, over the length cap {spec.length_cap}"
            )
    coeffs: dict[int, complex] = {}

    def rec(idx: int, value: int, nfac: int):
        coeffs[value] = complex(-1.0 if nfac % 2 else 1.0)
        if nfac == cap:
            return
        for i in range(idx, len(ps)):
            rec(i + 1, value * ps[i], nfac + 1)

    rec(0, 1, 0)
    return DirichletPolynomial(coeffs, support_range=spec.range)


def mollifier_product_batch(polys, taus):
    """|M_1 ... M_ell(tau)| evaluated cumulatively; shape (n_tau, ell)."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    acc = np.ones(taus.size, dtype=complex)
    out = np.empty((taus.size, len(polys)))
    cols = []
    for poly in polys:
        acc = acc * evaluate_batch(poly, taus)
        cols.append(np.abs(acc))
    for j, c in enumerate(cols):
        out[:, j] = c
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class CheckReport:
    name: str
    estimate: float
    reference: float
    ratio: float
    stderr: float
    n_samples: int
    seed: int
    extras: dict = field(default_factory=dict)

    @property
    def rel_err(self) -> float:
        return abs(self.estimate / self.reference - 1.0) if self.reference else math.inf


def _mc_mean(values: np.ndarray):
    m = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return m, se


def mean_value_check(poly: DirichletPolynomial, T: float, n_samples: int, seed: int) -> CheckReport:
    """Monte Carlo E_tau |sum a(n) n^{i tau}|^2 against sum |a(n)|^2.

    The deterministic error is O(N/T); the report folds it into `extras`
    with the empirically calibrated constant 5.
    """
    N = poly.length
    if N > T:
        raise DomainError(f"polynomial length {N} exceeds T={T}; the bound is vacuous")
    taus = zeta.sample_tau(T, n_samples, seed)
    vals = np.abs(evaluate_batch(poly, -taus, sigma=0.0)) ** 2
    lhs, se = _mc_mean(vals)
    rhs = poly.sum_abs_sq()
    return CheckReport(
        name="mean_value",
        estimate=lhs,
        reference=rhs,
        ratio=lhs / rhs if rhs else math.inf,
        stderr=se,
        n_samples=n_samples,
        seed=seed,
        extras={"N": N, "T": T, "length_bound": 5.0 * N / T, "long": N > T / 10},
    )


def splitting_check(
    A: DirichletPolynomial, B: DirichletPolynomial, T: float, n_samples: int, seed: int
) -> CheckReport:
    """E[|A|^2 |B|^2] against E[|A|^2] E[|B|^2] for split prime supports."""
    a_max_p = max((p for n in A.ns if n > 1 for p, _ in primes.factorize(int(n))), default=1)
    b_min_p = min((p for n in B.ns if n > 1 for p, _ in primes.factorize(int(n))), default=None)
    if b_min_p is not None and b_min_p <= a_max_p:
        raise DomainError(f"supports overlap: A reaches prime {a_max_p}, B starts at {b_min_p}")
    quarter = T**0.25
    if A.length > quarter or B.length > quarter:
        raise DomainError(
            f"lengths ({A.length}, {B.length}) exceed T^(1/4) = {quarter:.1f}"
        )
    taus = zeta.sample_tau(T, n_samples, seed)
    a2 = np.abs(evaluate_batch(A, taus)) ** 2
    b2 = np.abs(evaluate_batch(B, taus)) ** 2
    joint, se_joint = _mc_mean(a2 * b2)
    ma, _ = _mc_mean(a2)
    mb, _ = _mc_mean(b2)
    split = ma * mb
    ratio = joint / split if split else math.inf
    return CheckReport(
        name="splitting",
        estimate=joint,
        reference=split,
        ratio=ratio,
        stderr=se_joint / split if split else math.inf,
        n_samples=n_samples,
        seed=seed,
        extras={"T": T, "t_half_bound": T**-0.5},
    )


def gaussian_tail_exponent(V: float, j: float, k: float, variant: str = "complex") -> int:
    """Moment order used in the Chernoff-type tail bound for |S_k - S_j| > V."""
    if variant == "complex":
        return int(math.ceil(V * V / (k - j + 1.0)))
    return int(math.ceil(V * V / (2.0 * (k - j + 1.0))))


def moment_bound_check(
    j: float,
    k: float,
    q: int,
    T: float,
    n_samples: int,
    seed: int,
    variant: str = "complex",
) -> CheckReport:
    """MC moments of the increment S_k - S_j against the Gaussian reference.

    complex: E|S~_k - S~_j|^{2q} vs q! (k-j+1)^q
    real:    E|S_k - S_j|^{2q}   vs (2q)!/(2^q q!) ((k-j)/2)^q
    """
    t = math.log(math.log(T))
    if not t / 2 <= j < k:
        raise DomainError(f"need t/2 <= j < k with t={t:.3f}, got j={j}, k={k}")
    if 2 * q > math.exp(t - k):
        raise DomainError(f"q={q} violates 2q <= e^(t-k) = {math.exp(t - k):.2f}")
    if variant not in ("complex", "real"):
        raise DomainError(f"unknown variant {variant!r}")
    taus = zeta.sample_tau(T, n_samples, seed)
    s, st = partial_sums_batch(taus, [j, k])
    if variant == "complex":
        incr = np.abs(st[:, 1] - st[:, 0])
        ref = math.factorial(q) * (k - j + 1.0) ** q
    else:
        incr = np.abs(s[:, 1] - s[:, 0])
        ref = (
            math.factorial(2 * q) / (2.0**q * math.factorial(q)) * ((k - j) / 2.0) ** q
        )
    est, se = _mc_mean(incr ** (2 * q)) if q > 0 else (1.0, 0.0)
    return CheckReport(
        name=f"moment_{variant}",
        estimate=est,
        reference=ref,
        ratio=est / ref,
        stderr=se,
        n_samples=n_samples,
        seed=seed,
        extras={"j": j, "k": k, "q": q, "T": T,
                "tail_q_at_1sigma": gaussian_tail_exponent(math.sqrt((k - j) / 2), j, k, variant)},
    )


# ---------------------------------------------------------------------------
# mollifier comparison inequality


@dataclass(frozen=True)
class ComparisonSample:
    tau: float
    lhs: float
    rhs: float
    holds: bool
    precondition_met: bool


def mollifier_inequality_check(tau, ell: int, ladder, ledger: ConstantsLedger | None = None):
    """Per-sample check of  e^{-(S_{t_{l+1}} - S_{t_l})} <= (1 + e^{-t_l}) |M_{l+1}| + e^{-E_M (t_{l+1}-t_l)}.

    ell >= 0; the increment is the partial-sum difference, with the value at
    the ladder origin t_0 = 0 taken literally (primes up to e), matching the
    mollifier's block support.  Samples violating the a-priori increment
    bound |S~ increment| <= A (t_{l+1}-t_l) are flagged, not counted.
    """
    led = ledger if ledger is not None else ladder.ledger
    if not 0 <= ell <= ladder.L_count - 1:
        raise DomainError(f"need 0 <= ell <= L-1 = {ladder.L_count - 1}, got {ell}")
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    lo, hi = ladder.points[ell], ladder.points[ell + 1]
    width = hi - lo
    spec = MollifierSpec.from_ladder(ladder, ell + 1, led)
    poly = mollifier(spec)
    s, st = partial_sums_batch(taus, [lo, hi])
    ds = s[:, 1] - s[:, 0]
    dst = np.abs(st[:, 1] - st[:, 0])
    moll_abs = np.abs(evaluate_batch(poly, taus))
    lhs = np.exp(-ds)
    rhs = (1.0 + math.exp(-lo)) * moll_abs + math.exp(-led.E_M * width)
    pre = dst <= led.A_const * width
    out = [
        ComparisonSample(
            tau=float(taus[i]),
            lhs=float(lhs[i]),
            rhs=float(rhs[i]),
            holds=bool(lhs[i] <= rhs[i]),
            precondition_met=bool(pre[i]),
        )
        for i in range(taus.size)
    ]
    return out[0] if np.isscalar(tau) or np.asarray(tau).ndim == 0 else out


# ---------------------------------------------------------------------------
# well-factorable products and the twisted fourth-moment probe


def well_factorable_check(polys, ladder, ledger: ConstantsLedger | None = None) -> bool:
    """True iff slot lambda is supported on the lambda-th ladder block with
    capped factor counts and coefficients below exp(e^t / denom)."""
    led = ledger if ledger is not None else ladder.ledger
    bound_log = math.exp(min(ladder.t, 700.0)) / led.coeff_bound_denom
    for lam, poly in enumerate(polys, start=1):
        if lam > ladder.L_count:
            return False
        rng = primes.PrimeRange(ladder.points[lam - 1], ladder.points[lam])
        width = ladder.points[lam] - ladder.points[lam - 1]
        cap = led.wf_omega_mult * width**led.E_Q
        for n, a in poly.coeffs.items():
            n = int(n)
            if abs(a) > math.exp(min(bound_log, 700.0)):
                return False
            if n == 1:
                continue
            fac = primes.factorize(n)
            if any(not rng.contains(p) for p, _ in fac):
                return False
            if sum(e for _, e in fac) > cap:
                return False
    return True


def twisted_fourth_moment_probe(
    polys, ell: int, ladder, T: float, n_samples: int, seed: int
) -> CheckReport:
    """MC probe of E[|zeta M_1..M_{l+1}|^4 |Q|^2] against e^{4(t - t_{l+1})} E[|Q|^2]."""
    if not 0 <= ell <= ladder.L_count - 1:
        raise DomainError(f"need 0 <= ell <= L-1, got {ell}")
    if not well_factorable_check(polys, ladder):
        raise DomainError("Q is not well-factorable for this ladder")
    led = ladder.ledger
    taus = zeta.sample_tau(T, n_samples, seed)
    logz, near = zeta.log_abs_zeta_batch(taus)
    molls = [mollifier(MollifierSpec.from_ladder(ladder, m, led)) for m in range(1, ell + 2)]
    prod = np.abs(np.exp(logz))
    for poly in molls:
        prod = prod * np.abs(evaluate_batch(poly, taus))
    q_abs2 = np.ones(taus.size)
    for poly in polys:
        q_abs2 = q_abs2 * np.abs(evaluate_batch(poly, taus)) ** 2
    lhs_vals = prod**4 * q_abs2
    lhs_vals[near] = 0.0
    lhs, se = _mc_mean(lhs_vals)
    eq, _ = _mc_mean(q_abs2)
    rhs = math.exp(4.0 * (ladder.t - ladder.points[ell + 1])) * eq
    return CheckReport(
        name="twisted_fourth_moment",
        estimate=lhs,
        reference=rhs,
        ratio=lhs / rhs if rhs else math.inf,
        stderr=se / rhs if rhs else math.inf,
        n_samples=n_samples,
        seed=seed,
        extras={"ell": ell, "T": T, "n_near_zero": int(near.sum())},
    )
