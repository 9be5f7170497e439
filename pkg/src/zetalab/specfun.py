"""Complex special functions underpinning the laboratory.

All routines accept scalars or numpy arrays and evaluate in double precision:

* :func:`log_gamma` -- principal-branch log Gamma (Stirling series plus upward
  recurrence).
* :func:`exp_integral_e1` -- exponential integral E1 with the cut along the
  negative real axis.
* :func:`riemann_siegel_theta` -- Im log Gamma(1/4 + it/2) - (t/2) log pi.
* :func:`zeta_and_deriv` -- zeta and zeta' by Euler-Maclaurin with an analytic
  term-by-term derivative (no numerical differentiation).
* :func:`hardy_z` -- the real-valued rotation of zeta on the critical line.

Everything here is pure and reentrant; there is no shared mutable state.
"""

import math

import numpy as np

from .errors import BranchCutError, CapabilityError, DomainError, PoleError

# Euler's constant and the first Stieltjes constant, stored to 15 digits and
# revalidated at import against the Euler-Maclaurin oracle below.
GAMMA0 = 0.577215664901533
GAMMA1 = -0.072815845483677

# B_{2j} for j = 1..8, used by the zeta Euler-Maclaurin correction terms.
_BERNOULLI_2J = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)

# B_{2j} / (2j (2j-1)) for j = 1..12: coefficients of z^{1-2j} in the Stirling
# series for log Gamma.
_STIRLING = tuple(
    b / ((2 * j) * (2 * j - 1))
    for j, b in enumerate(
        (
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
            -3617.0 / 510.0,
            43867.0 / 798.0,
            -174611.0 / 330.0,
            854513.0 / 138.0,
            -236364091.0 / 2730.0,
        ),
        start=1,
    )
)

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_IM_S_LIMIT = 1.0e5


def _asarray_complex(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _stirling_log_gamma(z):
    """Stirling series, valid for Re(z) >= 10 (or |z| large with |arg z| < pi/2)."""
    out = (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI
    zinv2 = 1.0 / (z * z)
    corr = np.zeros_like(z)
    power = 1.0 / z
    for c in _STIRLING:
        corr = corr + c * power
        power = power * zinv2
    return out + corr


def log_gamma(z):
    """Principal branch of log Gamma(z).

    Satisfies exp(log_gamma(z)) = Gamma(z) and the recurrence
    log_gamma(z+1) = log_gamma(z) + log z away from the cut (-inf, 0].

    Raises:
        PoleError: if z is a non-positive integer (a pole of Gamma).
    """
    arr, scalar = _asarray_complex(z)
    on_pole = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.floor(arr.real))
    if np.any(on_pole):
        bad = arr[on_pole].flat[0]
        raise PoleError(f"Gamma has a pole at z = {bad.real:g}")

    work = arr.copy()
    shift = np.zeros_like(work)
    # Upward recurrence into the Stirling region.  log_gamma(z) =
    # log_gamma(z + n) - sum log(z + i) reproduces the principal branch because
    # both sides are analytic off (-inf, 0] and agree on the positive reals.
    while True:
        need = work.real < 10.0
        if not np.any(need):
            break
        shift = np.where(need, shift + np.log(work), shift)
        work = np.where(need, work + 1.0, work)
    out = _stirling_log_gamma(work) - shift
    return out.item() if scalar else out


def _e1_series(z, n_terms):
    """Power series E1(z) = -gamma - log z - sum (-z)^m / (m! m).

    Alternating (hence cancellation-prone) for Re z > 0, but term signs align
    in the left half-plane, which makes it the accurate route near the cut.
    """
    acc = np.zeros_like(z)
    term = np.ones_like(z)
    for m in range(1, n_terms + 1):
        term = term * (-z) / m
        acc = acc + term / m
    return -GAMMA0 - np.log(z) - acc


def _e1_continued_fraction(z, max_iter=600):
    """Modified Lentz evaluation of E1(z) = e^{-z}/(z+1- 1/(z+3- 4/(z+5- ...))).

    Iterates on the shrinking active set of unconverged elements; convergence
    takes ~10 iterations at |z| ~ 30 and ~60 near the crossover.
    """
    tiny = 1e-300
    flat = z.reshape(-1)
    out = np.empty_like(flat)
    active = np.arange(flat.size)
    b = flat + 1.0
    c = np.full_like(flat, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, max_iter):
        a = -float(i * i)
        b = b + 2.0
        d = b + a * d
        d[d == 0] = tiny
        c = b + a / c
        c[c == 0] = tiny
        d = 1.0 / d
        delta = c * d
        h = h * delta
        done = np.abs(delta - 1.0) < 1e-16
        if done.any():
            out[active[done]] = h[done]
            keep = ~done
            if not keep.any():
                break
            active, b, c, d, h = active[keep], b[keep], c[keep], d[keep], h[keep]
    else:
        out[active] = h  # unconverged leftovers keep the best estimate
    return np.exp(-z) * out.reshape(z.shape)


def _e1_asymptotic(z, terms=16):
    """Large-|z| expansion e^{-z}/z * sum_m (-1)^m m! / z^m.

    Nested Horner form: 16 terms give <5e-13 relative error for |z| >= 40.
    """
    w = 1.0 / z
    acc = np.ones_like(z)
    for m in range(terms, 0, -1):
        acc = 1.0 - float(m) * w * acc
    return np.exp(-z) * w * acc


# |z| below which the power series is the production route everywhere.
_E1_CROSSOVER = 4.0
# |z| above which the divergent asymptotic expansion beats the fraction.
_E1_ASYMPTOTIC_MIN = 40.0
# Largest |arg z| for which the continued fraction / asymptotic expansion is
# used above the crossover.  The fraction converges for |arg z| < pi but
# impractically slowly near the cut, where the series has aligned term signs
# and stays accurate instead.
_E1_CF_ARG_MAX = 2.0


def exp_integral_e1(z):
    """Exponential integral E1(z), principal branch, cut along (-inf, 0].

    Power series for |z| < 4; modified continued fraction above (asymptotic
    expansion from |z| >= 40), except in the near-cut sector |arg z| > 2 where
    the (cancellation-free) series is kept.

    Raises:
        DomainError: if z = 0 (logarithmic singularity).
        BranchCutError: if z lies on the negative real axis.
    """
    arr, scalar = _asarray_complex(z)
    if np.any(arr == 0):
        raise DomainError("E1 has a logarithmic singularity at z = 0")
    on_cut = (arr.imag == 0) & (arr.real < 0)
    if np.any(on_cut):
        raise BranchCutError("E1 is not defined on the negative real axis (branch cut)")

    absz = np.abs(arr)
    out = np.empty_like(arr)

    small = absz < _E1_CROSSOVER
    if np.any(small):
        out[small] = _e1_series(arr[small], 64)

    large = ~small
    if np.any(large):
        zl = arr[large]
        res = np.empty_like(zl)
        near_cut = np.abs(np.angle(zl)) > _E1_CF_ARG_MAX
        if np.any(near_cut):
            zc = zl[near_cut]
            n_terms = int(3.2 * np.abs(zc).max()) + 48
            res[near_cut] = _e1_series(zc, n_terms)
        mid = ~near_cut & (np.abs(zl) < _E1_ASYMPTOTIC_MIN)
        if np.any(mid):
            res[mid] = _e1_continued_fraction(zl[mid])
        far = ~near_cut & ~mid
        if np.any(far):
            res[far] = _e1_asymptotic(zl[far])
        out[large] = res

    return out.item() if scalar else out


def riemann_siegel_theta(t):
    """theta(t) = Im log Gamma(1/4 + it/2) - (t/2) log pi for t >= 2."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr < 2.0):
        raise DomainError("riemann_siegel_theta requires t >= 2")
    lg = log_gamma(0.25 + 0.5j * arr)
    out = np.imag(lg) - 0.5 * arr * math.log(math.pi)
    return float(out) if scalar else out


def _em_truncation(im_max):
    return max(30, int(math.ceil(1.6 * im_max)))


def _euler_maclaurin(s, truncation, bernoulli_terms, want_deriv):
    """Euler-Maclaurin zeta (and optional zeta') on an array of s values."""
    m_cut = truncation
    z = np.zeros(s.shape, dtype=complex)
    dz = np.zeros(s.shape, dtype=complex) if want_deriv else None
    # main sum over m = 1 .. M-1, chunked to bound the outer-product memory
    for lo in range(1, m_cut, 8192):
        hi = min(lo + 8192, m_cut)
        logm = np.log(np.arange(lo, hi, dtype=float))
        term = np.exp(-np.multiply.outer(s, logm))
        z += term.sum(axis=-1)
        if want_deriv:
            dz -= (term * logm).sum(axis=-1)

    log_m = math.log(m_cut)
    m_pow = np.exp(-s * log_m)  # M^{-s}
    sm1 = s - 1.0
    z += m_pow * m_cut / sm1 + 0.5 * m_pow
    if want_deriv:
        dz += m_pow * m_cut * (-log_m / sm1 - 1.0 / (sm1 * sm1)) - 0.5 * log_m * m_pow

    # correction terms B_{2j}/(2j)! (s)_{2j-1} M^{-s-2j+1}
    poch = s.copy()                   # rising factorial (s)_{2j-1}
    dpoch = np.ones_like(s)           # its s-derivative
    fact = 2.0                        # (2j)!
    i = 1
    for j in range(1, bernoulli_terms + 1):
        twoj = 2 * j
        while i < twoj - 1:
            dpoch = dpoch * (s + i) + poch
            poch = poch * (s + i)
            i += 1
        if j > 1:
            fact *= (twoj - 1) * twoj
        coeff = _BERNOULLI_2J[j - 1] / fact
        m_tail = np.exp(-(s + (twoj - 1)) * log_m)
        z += coeff * poch * m_tail
        if want_deriv:
            dz += coeff * m_tail * (dpoch - log_m * poch)
    return z, dz


def zeta_and_deriv(s, truncation=None, bernoulli_terms=8):
    """(zeta(s), zeta'(s)) by Euler-Maclaurin.

    The truncation M defaults to max(30, ceil(1.6 * max |Im s|)) and eight
    Bernoulli correction terms are used; the derivative is the term-by-term
    analytic derivative of the same expansion.  Accuracy is ~1e-9 relative or
    better for |Im s| <= 1e4.

    Args:
        s: complex scalar or array of points, none equal to 1.
        truncation: override for the main-sum cutoff M (used by consistency
            tests at two depths).
        bernoulli_terms: number of B_{2j} correction terms.

    Raises:
        PoleError: if any s equals 1.
        CapabilityError: if |Im s| exceeds 1e5.
    """
    arr, scalar = _asarray_complex(s)
    if np.any(arr == 1):
        raise PoleError("zeta has its pole at s = 1")
    im_max = float(np.abs(arr.imag).max()) if arr.size else 0.0
    if im_max > _IM_S_LIMIT:
        raise CapabilityError(
            f"zeta_and_deriv supports |Im s| <= {_IM_S_LIMIT:g} (got {im_max:g})"
        )
    m_cut = _em_truncation(im_max) if truncation is None else int(truncation)
    z, dz = _euler_maclaurin(arr, m_cut, bernoulli_terms, want_deriv=True)
    if scalar:
        return z.item(), dz.item()
    return z, dz


def zeta_only(s, truncation=None, bernoulli_terms=8):
    """zeta(s) alone (skips the derivative accumulation; hot path for zero scans)."""
    arr, scalar = _asarray_complex(s)
    if np.any(arr == 1):
        raise PoleError("zeta has its pole at s = 1")
    im_max = float(np.abs(arr.imag).max()) if arr.size else 0.0
    if im_max > _IM_S_LIMIT:
        raise CapabilityError(
            f"zeta evaluation supports |Im s| <= {_IM_S_LIMIT:g} (got {im_max:g})"
        )
    m_cut = _em_truncation(im_max) if truncation is None else int(truncation)
    z, _ = _euler_maclaurin(arr, m_cut, bernoulli_terms, want_deriv=False)
    return z.item() if scalar else z


def hardy_z(t):
    """Hardy's Z(t) = Re(e^{i theta(t)} zeta(1/2 + it)) for t >= 2.

    Z is real with |Z(t)| = |zeta(1/2+it)|; its sign changes locate the
    critical-line zeros.
    """
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr < 2.0):
        raise DomainError("hardy_z requires t >= 2")
    theta = riemann_siegel_theta(arr)
    zeta = zeta_only(0.5 + 1j * arr)
    out = np.real(np.exp(1j * theta) * zeta)
    return float(out) if scalar else out


def stieltjes_oracle(n_terms=20000):
    """High-precision (gamma0, gamma1) via Euler-Maclaurin tail corrections.

    gamma0 = lim sum_{n<=N} 1/n - log N;  gamma1 = lim sum_{n<=N} log n / n
    - (log N)^2 / 2.  With N = 2e4 and corrections through the third
    derivative both limits are accurate to well below 1e-13.
    """
    n = np.arange(1, n_terms + 1, dtype=float)
    log_n = math.log(n_terms)
    g0 = (
        math.fsum(1.0 / n)
        - log_n
        - 1.0 / (2.0 * n_terms)
        + 1.0 / (12.0 * n_terms**2)
        - 1.0 / (120.0 * n_terms**4)
    )
    # f(x) = log x / x: f' = (1-log x)/x^2, f''' = (11-6 log x)/x^4
    g1 = (
        math.fsum(np.log(n) / n)
        - 0.5 * log_n**2
        - log_n / (2.0 * n_terms)
        - (1.0 - log_n) / (12.0 * n_terms**2)
        + (11.0 - 6.0 * log_n) / (720.0 * n_terms**4)
    )
    return g0, g1


def _validate_constants():
    g0, g1 = stieltjes_oracle()
    if abs(g0 - GAMMA0) > 1e-12 or abs(g1 - GAMMA1) > 1e-12:
        raise RuntimeError(
            "stored Stieltjes constants disagree with the series oracle: "
            f"gamma0 {GAMMA0} vs {g0}, gamma1 {GAMMA1} vs {g1}"
        )


_validate_constants()
