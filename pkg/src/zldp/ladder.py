"""Barrier-ladder skeleton: time points, barrier constants, event cascade.

The ladder approaches t = loglog T through iterated logarithms,
t_ell = t - s * log_ell t, and confines the partial sums S_{t_ell} to a
corridor [kappa t_ell - C log_ell t, kappa t_ell + B log_ell t] around the
linear interpolation kappa t_ell, kappa = V/t.  Four cumulative event
families gate each level:

    A: the complex increment is a-priori bounded,
    B: the sum stays below the upper barrier,
    C: the sum stays above the lower barrier,
    D: exp(-S) is tracked by the mollifier product.

The depth L is capped both by the iterated-log domain guard (desk heights
run out of logarithms after one or two levels) and by the growth inequality
exp(E_c (t - t_ell)^E_Omega e^{t_{ell+1}}) <= T^(1/100); at the last
constructible level, where t_{ell+1} does not exist, e^t stands in for
e^{t_{ell+1}} as the natural endpoint of the point sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ConstantsLedger, ledger_for
from .errors import ConfigurationError, DomainError

MAX_LEVELS = 64


def iterated_log(t: float, ell: int) -> float:
    """log applied ell times; DomainError when an iterate leaves (0, inf)."""
    if ell < 0:
        raise DomainError(f"iterated_log needs ell >= 0, got {ell}")
    y = float(t)
    for _ in range(ell):
        if y <= 0.0:
            raise DomainError(f"log_{ell} of {t} undefined: iterate hit {y} <= 0")
        y = math.log(y)
    return y


@dataclass(frozen=True)
class LadderConfig:
    T: float
    t: float
    alpha: float
    V: float
    kappa: float
    s_frak: float
    points: tuple[float, ...]  # t_0 = 0, t_1, ..., t_L
    L_count: int
    ledger: ConstantsLedger

    def widths(self) -> np.ndarray:
        """Delta_j = t_j - t_{j-1} for j = 1..L."""
        pts = np.array(self.points)
        return np.diff(pts)

    def log_ell(self, ell: int) -> float:
        return iterated_log(self.t, ell)


def build_ladder(T: float, alpha: float, V: float | None = None, ledger=None) -> LadderConfig:
    """Points, depth, and slope for the given height and tail level.

    V defaults to alpha * loglog T.  Fails with a configuration error when
    no level survives the feasibility inequality (the usual cause: paper
    profile at desk heights).
    """
    if isinstance(ledger, str) or ledger is None:
        ledger = ledger_for(ledger or "desk")
    if not (0.0 < alpha < 2.0):
        raise ConfigurationError(f"alpha must lie in (0, 2), got {alpha}")
    if T <= math.e:
        raise ConfigurationError(f"need T > e for t = loglog T, got T={T}")
    t = math.log(math.log(T))
    if t <= 1.0:
        raise ConfigurationError(f"loglog T = {t:.4f} <= 1; the ladder has no levels")
    V = alpha * t if V is None else float(V)
    s = ledger.s_frak(alpha)

    # iterate logs while they stay positive and the points stay above 0
    raw_points = [0.0]
    y = t
    for _ in range(MAX_LEVELS):
        y = math.log(y)
        if y <= 0.0:
            break
        pt = t - s * y
        if pt <= raw_points[-1]:
            break
        raw_points.append(pt)
        if y <= 1.0:
            break  # next iterate would be <= 0

    n_raw = len(raw_points) - 1
    if n_raw < 1:
        raise ConfigurationError(
            f"no ladder level for T={T:g}, alpha={alpha} under the {ledger.profile} "
            f"profile (t_1 = {t - s * math.log(t):.4f}); try the desk ledger or a "
            f"smaller step scale"
        )

    cap_log = ledger.ell_cap_frac * math.exp(t)  # log of T^(1/100)
    L = 0
    for ell in range(1, n_raw + 1):
        t_next = raw_points[ell + 1] if ell + 1 <= n_raw else t
        lhs_log = ledger.E_c * (t - raw_points[ell]) ** ledger.E_Omega * math.exp(t_next)
        if lhs_log <= cap_log:
            L = ell
    if L == 0:
        raise ConfigurationError(
            f"depth inequality rejects every level at T={T:g}, alpha={alpha} "
            f"({ledger.profile} profile); try the desk ledger or a smaller step scale"
        )
    return LadderConfig(
        T=float(T),
        t=t,
        alpha=float(alpha),
        V=V,
        kappa=V / t,
        s_frak=s,
        points=tuple(raw_points[: L + 1]),
        L_count=L,
        ledger=ledger,
    )


@dataclass(frozen=True)
class BarrierParams:
    A_const: float
    B_const: float
    C_const: float
    D_const: float
    # per-level barriers and mollifier-comparison products, when built
    # against a concrete ladder
    U: tuple[float, ...] = ()
    L: tuple[float, ...] = ()
    c: tuple[float, ...] = ()


def barrier_params(alpha: float, ledger=None, config: LadderConfig | None = None) -> BarrierParams:
    """Barrier constants; per-level barriers are attached when a ladder is given."""
    if isinstance(ledger, str) or ledger is None:
        ledger = ledger_for(ledger or "paper")
    if not (0.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    B = ledger.upper_barrier_const(alpha)
    C = ledger.lower_barrier_const(alpha)
    U: tuple[float, ...] = ()
    Lb: tuple[float, ...] = ()
    c: tuple[float, ...] = ()
    if config is not None:
        kappa = config.kappa
        us, ls, cs = [], [], []
        acc = 1.0
        for ell in range(1, config.L_count + 1):
            lg = config.log_ell(ell)
            us.append(kappa * config.points[ell] + B * lg)
            ls.append(kappa * config.points[ell] - C * lg)
            acc *= 1.0 + math.exp(-config.points[ell - 1])
            cs.append(acc)
        U, Lb, c = tuple(us), tuple(ls), tuple(cs)
    return BarrierParams(
        A_const=ledger.A_const, B_const=B, C_const=C, D_const=ledger.D_const, U=U, L=Lb, c=c
    )


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    residual: float


def check_constraints(params: BarrierParams, alpha: float, s_frak: float) -> list[ConstraintCheck]:
    """The six admissibility inequalities for (A, B, C) given the step scale."""
    A, B, C = params.A_const, params.B_const, params.C_const
    checks = [
        ("B_growth", 1.0 + alpha**2 * s_frak - 2.0 * alpha * B, "neg"),
        ("B_below_alpha_s", B - alpha * s_frak, "neg"),
        ("C_lower", C - (1.0 + (2.0 - alpha) ** 2 * s_frak) / (2.0 * (2.0 - alpha)), "pos"),
        ("C_upper", (2.0 - alpha) * s_frak - C, "pos"),
        ("A_linear", A - (alpha**2 / 4.0 + alpha * C / (2.0 * s_frak) + 2.0), "pos"),
        ("A_squared", A**2 - (alpha**2 + 2.0 * alpha * C / s_frak + 4.0), "pos"),
    ]
    return [
        ConstraintCheck(name, (r < 0.0) if sense == "neg" else (r > 0.0), r)
        for name, r, sense in checks
    ]


# ---------------------------------------------------------------------------
# event classification


@dataclass(frozen=True)
class EventTrace:
    tau: float
    log_abs_zeta: float
    S: tuple[float, ...]
    S_delta_abs: tuple[float, ...]
    moll_abs: tuple[float, ...]
    A: tuple[bool, ...]
    B: tuple[bool, ...]
    C: tuple[bool, ...]
    D: tuple[bool, ...]
    G: tuple[bool, ...]
    H: bool
    near_zero: bool = False


def classify(
    tau: float,
    log_abs_zeta: float,
    S,
    S_delta_abs,
    moll_abs,
    config: LadderConfig,
    params: BarrierParams,
    near_zero: bool = False,
) -> EventTrace:
    """Cumulative membership of the four event families and their meet G.

    S, S_delta_abs and moll_abs carry one entry per level 1..L; barrier ties
    use the defining <= / >= with no epsilon slack.
    """
    Lc = config.L_count
    for name, arr in (("S", S), ("S_delta_abs", S_delta_abs), ("moll_abs", moll_abs)):
        if len(arr) != Lc:
            raise DomainError(f"{name} carries {len(arr)} levels, ladder has {Lc}")
    if not params.U:
        params = barrier_params(config.alpha, config.ledger, config)
    widths = config.widths()
    absz = math.exp(log_abs_zeta)
    A, B, C, D, G = [], [], [], [], []
    okA = okB = okC = okD = True
    for ell in range(Lc):
        okA = okA and (S_delta_abs[ell] <= params.A_const * widths[ell])
        okB = okB and (S[ell] <= params.U[ell])
        okC = okC and (S[ell] >= params.L[ell])
        okD = okD and (
            absz * math.exp(-S[ell])
            <= params.c[ell] * absz * moll_abs[ell]
            + math.exp(-params.D_const * (config.t - config.points[ell]))
        )
        A.append(okA)
        B.append(okB)
        C.append(okC)
        D.append(okD)
        G.append(okA and okB and okC and okD)
    return EventTrace(
        tau=float(tau),
        log_abs_zeta=float(log_abs_zeta),
        S=tuple(float(x) for x in S),
        S_delta_abs=tuple(float(x) for x in S_delta_abs),
        moll_abs=tuple(float(x) for x in moll_abs),
        A=tuple(A),
        B=tuple(B),
        C=tuple(C),
        D=tuple(D),
        G=tuple(G),
        H=bool(log_abs_zeta > config.V) and not near_zero,
        near_zero=near_zero,
    )


@dataclass(frozen=True)
class DecompositionReport:
    n_traces: int
    n_H: int
    pieces: tuple[int, ...]  # H & !G1, H & G_l \ G_{l+1} for l=1..L-1, H & G_L
    labels: tuple[str, ...]

    def probabilities(self) -> tuple[float, ...]:
        return tuple(c / self.n_traces for c in self.pieces) if self.n_traces else ()


def decompose(traces) -> DecompositionReport:
    """Exact partition of the exceedance event over the ladder levels."""
    traces = list(traces)
    if not traces:
        return DecompositionReport(0, 0, (), ())
    Lc = len(traces[0].G)
    n_H = sum(tr.H for tr in traces)
    pieces = [sum(tr.H and not tr.G[0] for tr in traces)]
    labels = ["H&!G1"]
    for ell in range(Lc - 1):
        pieces.append(sum(tr.H and tr.G[ell] and not tr.G[ell + 1] for tr in traces))
        labels.append(f"H&G{ell + 1}\\G{ell + 2}")
    pieces.append(sum(tr.H and tr.G[Lc - 1] for tr in traces))
    labels.append(f"H&G{Lc}")
    if sum(pieces) != n_H:
        raise AssertionError(
            f"partition identity violated: pieces sum to {sum(pieces)}, count(H) = {n_H}"
        )
    return DecompositionReport(len(traces), n_H, tuple(pieces), tuple(labels))


# ---------------------------------------------------------------------------
# the grid tuple set


@dataclass(frozen=True)
class TupleSet:
    ell: int
    w: float
    widths: tuple[float, ...]
    tuples: tuple[tuple[float, ...], ...]
    bound_violations: int


def tuple_set(ell: int, w: float, config: LadderConfig, params: BarrierParams | None = None) -> TupleSet:
    """Grid tuples (u_1..u_ell), u_j on the lattice of spacing 1/Delta_j,
    whose running sums stay inside the widened barrier windows and whose
    total lands within 1 of w."""
    if not 1 <= ell <= config.L_count:
        raise DomainError(f"ell={ell} outside 1..{config.L_count}")
    if params is None or not params.U:
        params = barrier_params(config.alpha, config.ledger, config)
    if not (params.L[ell - 1] <= w <= params.U[ell - 1]):
        raise DomainError(
            f"w={w} outside the level-{ell} corridor [{params.L[ell-1]:.4f}, {params.U[ell-1]:.4f}]"
        )
    widths = config.widths()[:ell]
    cap = config.ledger.tuple_cap
    out: list[tuple[float, ...]] = []
    violations = 0

    class _CapHit(Exception):
        pass

    def windows(j: int) -> tuple[float, float]:
        lo, hi = params.L[j] - 1.0, params.U[j] + 1.0
        if j == ell - 1:
            lo, hi = max(lo, w - 1.0), min(hi, w + 1.0)
        return lo, hi

    def rec(j: int, prefix: list[float], total: float):
        nonlocal violations
        step = 1.0 / widths[j]
        lo, hi = windows(j)
        k_lo = math.ceil((lo - total) / step - 1e-12)
        k_hi = math.floor((hi - total) / step + 1e-12)
        for k in range(k_lo, k_hi + 1):
            u = k * step
            if abs(u) >= 4.0 * widths[j] + 2.0:
                violations += 1
            prefix.append(u)
            if j == ell - 1:
                if len(out) >= cap:
                    prefix.pop()
                    raise _CapHit
                out.append(tuple(prefix))
            else:
                rec(j + 1, prefix, total + u)
            prefix.pop()

    try:
        rec(0, [], 0.0)
    except _CapHit:
        from .errors import ResourceError

        raise ResourceError(f"tuple enumeration exceeded the cap {cap}") from None
    return TupleSet(ell=ell, w=w, widths=tuple(widths), tuples=tuple(out), bound_violations=violations)


def tuple_cell_of(increments, w: float, ell: int, config: LadderConfig, params: BarrierParams | None = None):
    """Lattice corner of the cell holding an increment vector, plus whether
    that corner satisfies the tuple-set constraints (the inclusion check)."""
    if params is None or not params.U:
        params = barrier_params(config.alpha, config.ledger, config)
    widths = config.widths()[:ell]
    u = [math.floor(float(increments[j]) * widths[j]) / widths[j] for j in range(ell)]
    total = 0.0
    ok = True
    for j in range(ell):
        total += u[j]
        if not (params.L[j] - 1.0 <= total <= params.U[j] + 1.0):
            ok = False
    if not (w - 1.0 <= total <= w + 1.0):
        ok = False
    return tuple(u), ok
