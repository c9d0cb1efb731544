"""Double-double complex arithmetic for ill-conditioned node decodes.

Aliased tree-node systems can be Vandermonde systems with clustered
unit-circle nodes; their condition numbers at bench scale reach 1e12..1e15,
where plain float64 measurement noise alone destroys the recovered
coefficients.  The escalation path re-measures and re-solves the affected
node in ~31-digit double-double arithmetic, which restores the exact-
arithmetic behaviour the complexity model assumes.  None of this affects
operation counting; it changes word size, not the algorithm.

Representation: a real double-double is a pair (hi, lo) of float64 (scalars
or same-shape ndarrays); a complex double-double is ((re_hi, re_lo),
(im_hi, im_lo)).
"""

from __future__ import annotations

from functools import lru_cache

import mpmath as mp
import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1, Dekker splitting constant


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    s = a + b
    err = b - (s - a)
    return s, err


def _two_prod(a, b):
    p = a * b
    ta = _SPLITTER * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLITTER * b
    bhi = tb - (tb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def dd(hi, lo=0.0):
    return (hi, lo)


def dd_add(x, y):
    s, e = _two_sum(x[0], y[0])
    e = e + x[1] + y[1]
    return _quick_two_sum(s, e)


def dd_neg(x):
    return (-x[0], -x[1])


def dd_sub(x, y):
    return dd_add(x, dd_neg(y))


def dd_mul(x, y):
    p, e = _two_prod(x[0], y[0])
    e = e + x[0] * y[1] + x[1] * y[0]
    return _quick_two_sum(p, e)


def dd_mul_f(x, f):
    p, e = _two_prod(x[0], f)
    e = e + x[1] * f
    return _quick_two_sum(p, e)


def dd_div(x, y):
    q1 = x[0] / y[0]
    r = dd_sub(x, dd_mul_f(y, q1))
    q2 = r[0] / y[0]
    r = dd_sub(r, dd_mul_f(y, q2))
    q3 = r[0] / y[0]
    s, e = _quick_two_sum(q1, q2)
    return dd_add((s, e), (q3, 0.0))


def dd_to_float(x):
    return x[0] + x[1]


# complex double-double -------------------------------------------------------


def cdd(re, im):
    return (re, im)


def cdd_from_complex(z):
    z = complex(z)
    return ((z.real, 0.0), (z.imag, 0.0))


def cdd_zero(shape=None):
    if shape is None:
        return ((0.0, 0.0), (0.0, 0.0))
    z = np.zeros(shape)
    return ((z.copy(), z.copy()), (z.copy(), z.copy()))


def cdd_add(u, v):
    return (dd_add(u[0], v[0]), dd_add(u[1], v[1]))


def cdd_sub(u, v):
    return (dd_sub(u[0], v[0]), dd_sub(u[1], v[1]))


def cdd_mul(u, v):
    re = dd_sub(dd_mul(u[0], v[0]), dd_mul(u[1], v[1]))
    im = dd_add(dd_mul(u[0], v[1]), dd_mul(u[1], v[0]))
    return (re, im)


def cdd_mul_complex(u, z):
    """Multiply by an exact float complex scalar."""
    a, b = float(z.real), float(z.imag)
    re = dd_sub(dd_mul_f(u[0], a), dd_mul_f(u[1], b))
    im = dd_add(dd_mul_f(u[0], b), dd_mul_f(u[1], a))
    return (re, im)


def cdd_div(u, v):
    den = dd_add(dd_mul(v[0], v[0]), dd_mul(v[1], v[1]))
    re = dd_add(dd_mul(u[0], v[0]), dd_mul(u[1], v[1]))
    im = dd_sub(dd_mul(u[1], v[0]), dd_mul(u[0], v[1]))
    return (dd_div(re, den), dd_div(im, den))


def cdd_to_complex(u):
    re = dd_to_float(u[0])
    im = dd_to_float(u[1])
    if isinstance(re, np.ndarray):
        return re + 1j * im
    return complex(re, im)


class RootTable:
    """Double-double values of e^{+2 pi i t / N} for all t in [0, N), N = 2^M.

    Built once per modulus from two mpmath-seeded quarter tables (coarse and
    fine angle factors); an arbitrary root is one dd complex multiply.
    """

    def __init__(self, N: int):
        if N <= 0 or N & (N - 1):
            raise ValueError("N must be a power of two")
        self.N = N
        M = N.bit_length() - 1
        self._h = M // 2
        self._mask = (1 << self._h) - 1
        self._fine = self._mp_table(1 << self._h, N)        # e^{2 pi i s / N}
        self._coarse = self._mp_table(N >> self._h, N >> self._h)

    @staticmethod
    def _mp_table(count: int, denom: int):
        rh = np.empty(count)
        rl = np.empty(count)
        ih = np.empty(count)
        il = np.empty(count)
        with mp.workdps(50):
            for t in range(count):
                z = mp.expjpi(mp.mpf(2 * t) / denom)
                re, im = z.real, z.imag
                rh[t] = float(re)
                rl[t] = float(re - mp.mpf(rh[t]))
                ih[t] = float(im)
                il[t] = float(im - mp.mpf(ih[t]))
        return ((rh, rl), (ih, il))

    def gather(self, t):
        """cdd arrays of e^{2 pi i t / N} for an int array t (taken mod N)."""
        t = np.asarray(t, dtype=np.int64) % self.N
        s = t & self._mask
        q = t >> self._h
        fine = (
            (self._fine[0][0][s], self._fine[0][1][s]),
            (self._fine[1][0][s], self._fine[1][1][s]),
        )
        coarse = (
            (self._coarse[0][0][q], self._coarse[0][1][q]),
            (self._coarse[1][0][q], self._coarse[1][1][q]),
        )
        return cdd_mul(coarse, fine)

    def get(self, t: int):
        out = self.gather(np.asarray([t]))
        return (
            (float(out[0][0][0]), float(out[0][1][0])),
            (float(out[1][0][0]), float(out[1][1][0])),
        )


@lru_cache(maxsize=8)
def root_table(N: int) -> RootTable:
    return RootTable(N)


def synthesize_dd(N: int, support: np.ndarray, coeffs: np.ndarray, locations: np.ndarray):
    """Samples f(loc) = (1/N) sum_l c_l e^{2 pi i loc l / N} in dd precision.

    Returns cdd arrays shaped like `locations`.  The stored float64
    coefficients are treated as exact.
    """
    tab = root_table(N)
    loc = np.asarray(locations, dtype=np.int64) % N
    acc = cdd_zero(loc.shape)
    for l, c in zip(support, coeffs):
        roots = tab.gather(loc * int(l))
        acc = cdd_add(acc, cdd_mul_complex(roots, complex(c)))
    return cdd_mul_complex(acc, complex(1.0 / N))


def cdd_index(u, i: int):
    """Scalar cdd at position i of vector cdd arrays."""
    return (
        (float(u[0][0][i]), float(u[0][1][i])),
        (float(u[1][0][i]), float(u[1][1][i])),
    )


def solve_vandermonde_dd(node_exponents, N: int, rhs_cdd_list):
    """Solve sum_m c_m x_m^j = y_j in dd, x_m = e^{-2 pi i l_m / N}.

    Same Bjorck-Pereyra sweep as the float64 solver (no Leja needed at this
    precision for the sizes involved).  Returns complex128 coefficients.
    """
    ls = [int(l) for l in node_exponents]
    n = len(ls)
    tab = root_table(N)
    x = [tab.get((-l) % N) for l in ls]
    c = list(rhs_cdd_list)
    for k in range(0, n - 1):
        for j in range(n - 1, k, -1):
            c[j] = cdd_sub(c[j], cdd_mul(x[k], c[j - 1]))
    for k in range(n - 2, -1, -1):
        for j in range(k + 1, n):
            c[j] = cdd_div(c[j], cdd_sub(x[j], x[j - k - 1]))
        for j in range(k, n - 1):
            c[j] = cdd_sub(c[j], c[j + 1])
    return np.asarray([cdd_to_complex(v) for v in c], dtype=np.complex128)
