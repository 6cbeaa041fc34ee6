"""Two-term compensated (double-double) arithmetic for phase reduction.

Evaluating cos(t*log n mod 2pi) at heights t up to ~1e12 needs the product
t*log n (magnitude up to ~3e13) to absolute accuracy well below 1e-9, which
is beyond plain float64.  We carry log n and the Riemann-Siegel theta angle
as unevaluated hi+lo pairs with ~106 significant bits and reduce mod 2pi in
that representation.  All routines are numpy-vectorized and pure.

The error-free transforms (two_sum, two_prod via Dekker splitting) are the
textbook ones; exp is the usual reduce-by-ln2 / scaled Taylor / repeated
squaring scheme, and log is one Newton step off float64 through that exp.
"""

from __future__ import annotations

import numpy as np

TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16
LN2_HI = 0.6931471805599453
LN2_LO = 2.3190468138462996e-17
LOG_2PI_HI = 1.8378770664093456
LOG_2PI_LO = -7.756588316134483e-17

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    v = s - a
    e = (a - (s - v)) + (b - v)
    return s, e


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    e = b - (s - a)
    return s, e


def two_prod(a, b):
    p = a * b
    aa = _SPLITTER * a
    a_hi = aa - (aa - a)
    a_lo = a - a_hi
    bb = _SPLITTER * b
    b_hi = bb - (bb - b)
    b_lo = b - b_hi
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


def dd_add(a_hi, a_lo, b_hi, b_lo):
    s, e = two_sum(a_hi, b_hi)
    e = e + a_lo + b_lo
    return quick_two_sum(s, e)


def dd_add_d(a_hi, a_lo, b):
    s, e = two_sum(a_hi, b)
    e = e + a_lo
    return quick_two_sum(s, e)


def dd_mul(a_hi, a_lo, b_hi, b_lo):
    p, e = two_prod(a_hi, b_hi)
    e = e + a_hi * b_lo + a_lo * b_hi
    return quick_two_sum(p, e)


def dd_mul_d(a_hi, a_lo, b):
    p, e = two_prod(a_hi, b)
    e = e + a_lo * b
    return quick_two_sum(p, e)


def dd_exp(x):
    """exp(x) for a float64 array x, returned as a (hi, lo) pair.

    Valid for |x| < ~700; accuracy ~1e-31 relative.
    """
    x = np.asarray(x, dtype=float)
    k = np.rint(x / LN2_HI)
    # r = x - k*ln2 in dd
    p_hi, p_lo = two_prod(k, LN2_HI)
    r_hi, r_lo = dd_add_d(-p_hi, -p_lo, x)
    r_hi, r_lo = dd_add_d(r_hi, r_lo, -(k * LN2_LO))
    # scale down by 2**9 and run the Taylor series
    u_hi, u_lo = r_hi / 512.0, r_lo / 512.0
    s_hi = np.ones_like(x)
    s_lo = np.zeros_like(x)
    t_hi = np.ones_like(x)
    t_lo = np.zeros_like(x)
    for j in range(1, 11):
        t_hi, t_lo = dd_mul(t_hi, t_lo, u_hi, u_lo)
        t_hi, t_lo = dd_mul_d(t_hi, t_lo, 1.0 / j)
        s_hi, s_lo = dd_add(s_hi, s_lo, t_hi, t_lo)
    for _ in range(9):
        s_hi, s_lo = dd_mul(s_hi, s_lo, s_hi, s_lo)
    scale = np.ldexp(1.0, k.astype(np.int64))
    return s_hi * scale, s_lo * scale


def dd_log(x):
    """log(x) for a positive float64 array x, as a (hi, lo) pair.

    One Newton correction of the float64 log through dd_exp:
    log x = y0 + (x*exp(-y0) - 1) - (...)^2/2.
    """
    x = np.asarray(x, dtype=float)
    y0 = np.log(x)
    e_hi, e_lo = dd_exp(-y0)
    r_hi, r_lo = dd_mul_d(e_hi, e_lo, x)
    w_hi, w_lo = dd_add_d(r_hi, r_lo, -1.0)
    c_hi, c_lo = dd_add_d(w_hi, w_lo, -0.5 * w_hi * w_hi)
    return dd_add_d(c_hi, c_lo, y0)


def reduce_mod_2pi(hi, lo):
    """Reduce a dd angle to [0, 2pi) as plain float64."""
    k = np.rint(hi / TWO_PI_HI)
    d_hi, d_lo = two_prod(k, TWO_PI_HI)
    s_hi, s_lo = dd_add(hi, lo, -d_hi, -d_lo)
    s_hi, s_lo = dd_add_d(s_hi, s_lo, -(k * TWO_PI_LO))
    phase = s_hi + s_lo
    return np.mod(phase, 2.0 * np.pi)


def phase_mod_2pi(t, log_hi, log_lo):
    """t * log n mod 2pi, with log n given as a dd pair.

    t may broadcast against the log arrays.  Absolute phase error stays
    below ~1e-15 for t up to 1e12.
    """
    p_hi, p_lo = two_prod(t, log_hi)
    p_lo = p_lo + t * log_lo
    return reduce_mod_2pi(p_hi, p_lo)
