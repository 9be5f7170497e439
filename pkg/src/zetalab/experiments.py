"""Zeta-side discrete sums over the computed zeros.

Each experiment pairs an empirical Kahan-compensated sum over zeros with the
closed-form prediction it is conjectured (or proven) to track:

* :func:`zeta_prime_moment` -- (1/N(T)) sum zeta'(rho)^k against
  (1/Gamma(k+2)) log(T/2pi)^k.
* :func:`landau_gonek` -- sum m^{-rho} against -(T/2pi) Lambda(m)/m.
* :func:`px_mean` -- sum P_X(rho)^k against N(T) minus the subsidiary
  (T/2pi) sum a_k(m) Lambda(m)/m term.
* :func:`twisted_first_moment` -- sum zeta'(rho) P_X(rho)^{-1} against the
  three-term polynomial main term plus the A1/B1 prime sums.

Main and subsidiary prediction pieces are always reported separately so
slow-convergence diagnostics stay visible, and running prefix ratios can be
emitted for plotting.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .arithmetic import factorize, p_x_pow, von_mangoldt
from .errors import DomainError
from .rmt import conjecture_rhs, require_admissible
from .specfun import GAMMA0, GAMMA1, zeta_and_deriv
from .zeros import expected_zero_count

_TWO_PI = 2.0 * math.pi

INTEGER_POWER = "integer-power"
RECIPROCAL = "reciprocal"
PRINCIPAL_LOG = "principal-log"


@dataclass(frozen=True)
class MomentResult:
    """One experiment outcome: empirical sum vs prediction."""

    k: object  # complex moment order, or None when not applicable
    t_height: float
    empirical: complex
    predicted: complex
    ratio: complex  # empirical / predicted (nan when predicted == 0)
    n_zeros: int
    branch: str = ""
    details: dict = field(default_factory=dict)


def resolve_branch(k):
    """integer-power for k in Z>=0, reciprocal for k in Z<0, else principal-log.

    The principal-log strategy is experimental: the model's branch for
    non-integer powers is defined through the hybrid product, not by
    continuous variation of log zeta', so it is excluded from acceptance.
    """
    k = complex(k)
    if k.imag == 0 and k.real == round(k.real):
        return INTEGER_POWER if k.real >= 0 else RECIPROCAL
    return PRINCIPAL_LOG


def _int_power(values, n):
    """Repeated-multiplication integer power (binary exponentiation), n >= 0."""
    out = np.ones_like(values)
    base = values.copy()
    n = int(n)
    while n:
        if n & 1:
            out = out * base
        base = base * base
        n >>= 1
    return out


def kahan_sum(values):
    """Kahan-compensated complex sum of a 1-D array."""
    total = 0j
    comp = 0j
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _zeta_prime_at_zeros(gammas, chunk=2048):
    """zeta'(1/2 + i*gamma) for ascending gammas, chunked by height."""
    out = np.empty(len(gammas), dtype=complex)
    for lo in range(0, len(gammas), chunk):
        g = gammas[lo : lo + chunk]
        _, dz = zeta_and_deriv(0.5 + 1j * g)
        out[lo : lo + chunk] = dz
    return out


def _branch_power(values, k, branch):
    if branch == INTEGER_POWER:
        return _int_power(values, int(k.real))
    if branch == RECIPROCAL:
        small = np.abs(values) < 1e-12
        if small.any():
            raise DomainError(
                "negative moment hit |zeta'(rho)| < 1e-12 (near-multiple zero); "
                f"first offender at index {int(np.nonzero(small)[0][0])}"
            )
        return 1.0 / _int_power(values, -int(k.real))
    return np.exp(k * np.log(values))


def _require_coverage(zeros, t_height):
    """A list covers (0, T] if t_max reaches T, or failing that (a loaded
    table's t_max is just its last ordinate) if it holds exactly the
    theta-predicted number of zeros up to T."""
    if zeros.t_max >= t_height:
        return
    if len(zeros.below(t_height)) == expected_zero_count(t_height):
        return
    raise DomainError(
        f"zero list covers only t <= {zeros.t_max:g} "
        f"({len(zeros.below(t_height))} zeros, expected "
        f"{expected_zero_count(t_height)} below {t_height:g})"
    )


def _running_rows(gammas, terms, predict_at, n_points=200):
    """Downsampled running prefix sums for ratio-vs-T plot data."""
    csum = np.cumsum(terms)
    idx = np.unique(np.linspace(0, len(gammas) - 1, min(n_points, len(gammas))).astype(int))
    rows = []
    for i in idx:
        t_prefix = float(gammas[i])
        pred = predict_at(t_prefix, i + 1)
        emp = complex(csum[i])
        rows.append(
            {
                "t": t_prefix,
                "n_zeros": int(i + 1),
                "empirical": emp,
                "predicted": complex(pred),
                "ratio": emp / pred if pred != 0 else complex("nan"),
            }
        )
    return rows


def zeta_prime_moment(zeros, t_height, k, branch=None, running=False):
    """(1/N(T)) sum_{gamma<=T} zeta'(1/2+i gamma)^k vs (1/Gamma(k+2)) log(T/2pi)^k.

    Args:
        zeros: a ZeroList covering (0, T].
        t_height: the height T.
        k: moment order, Re(k) > -3.
        branch: power strategy; defaults to :func:`resolve_branch`.
        running: include downsampled prefix-ratio rows in details["running"].
    """
    k = require_admissible(k)
    _require_coverage(zeros, t_height)
    gammas = zeros.below(t_height)
    n = len(gammas)
    branch = branch or resolve_branch(k)
    if k == 0:
        powers = np.ones(n, dtype=complex)
    else:
        zp = _zeta_prime_at_zeros(gammas)
        powers = _branch_power(zp, k, branch)
    empirical = kahan_sum(powers) / n
    predicted = conjecture_rhs(t_height, k)
    details = {
        "sum": kahan_sum(powers),
        "n_formula": (t_height / _TWO_PI) * math.log(t_height / (_TWO_PI * math.e)),
        "normalized_by_formula": kahan_sum(powers)
        / ((t_height / _TWO_PI) * math.log(t_height / (_TWO_PI * math.e))),
    }
    if running:
        details["running"] = _running_rows(gammas, powers, lambda t, m: m * conjecture_rhs(t, k))
    return MomentResult(
        k=k,
        t_height=float(t_height),
        empirical=complex(empirical),
        predicted=complex(predicted),
        ratio=complex(empirical / predicted) if predicted != 0 else complex("nan"),
        n_zeros=n,
        branch=branch,
        details=details,
    )


def landau_gonek(zeros, m, t_height, running=False):
    """sum_{0<gamma<=T} m^{-rho} vs the Landau-Gonek main term -(T/2pi) Lambda(m)/m.

    Raises:
        DomainError: for m < 2 -- the formula excludes m = 1, where the sum
            trivially equals N(T).
    """
    if m < 2:
        raise DomainError("Landau-Gonek requires m >= 2 (at m = 1 the sum is trivially N(T))")
    _require_coverage(zeros, t_height)
    gammas = zeros.below(t_height)
    terms = m**-0.5 * np.exp(-1j * gammas * math.log(m))
    empirical = kahan_sum(terms)
    predicted = complex(-(t_height / _TWO_PI) * von_mangoldt(m) / m)
    details = {"m": m}
    if running:
        details["running"] = _running_rows(
            gammas, terms, lambda t, _n: -(t / _TWO_PI) * von_mangoldt(m) / m
        )
    return MomentResult(
        k=None,
        t_height=float(t_height),
        empirical=complex(empirical),
        predicted=predicted,
        ratio=complex(empirical / predicted) if predicted != 0 else complex("nan"),
        n_zeros=len(gammas),
        details=details,
    )


def px_mean(zeros, t_height, k, poly, running=False):
    """sum_{gamma<=T} P_X(rho)^k vs N(T) - (T/2pi) sum a_k(m) Lambda(m)/m.

    Both the bare N(T) comparison and the two-term comparison are reported
    (details["predicted_bare"] vs the headline prediction).
    """
    k = require_admissible(k)
    if complex(poly.k) != k:
        raise DomainError("DirichletPoly was built for a different k")
    if poly.x_cutoff > 4.0 * math.log(t_height):
        warnings.warn(
            f"X = {poly.x_cutoff:g} strains the X = O(log T) growth condition at T = {t_height:g}",
            stacklevel=2,
        )
    _require_coverage(zeros, t_height)
    gammas = zeros.below(t_height)
    n = len(gammas)
    values = p_x_pow(0.5 + 1j * gammas, k, poly)
    empirical = kahan_sum(values)
    subsidiary = float(np.real(np.sum(poly.a * poly.lam / poly.m)))
    predicted = n - (t_height / _TWO_PI) * subsidiary
    details = {
        "predicted_bare": complex(n),
        "subsidiary_sum": subsidiary,
        "tail_bound": poly.tail_bound(),
    }
    if running:
        details["running"] = _running_rows(
            gammas,
            values,
            lambda t, m_count: m_count - (t / _TWO_PI) * subsidiary,
        )
    return MomentResult(
        k=k,
        t_height=float(t_height),
        empirical=complex(empirical),
        predicted=complex(predicted),
        ratio=complex(empirical / predicted) if predicted != 0 else complex("nan"),
        n_zeros=n,
        details=details,
    )


def cgg_main_term(t_height):
    """Three-term polynomial main term of sum_{gamma<=T} zeta'(rho).

    (T/4pi) [log^2(T/2pi) - 2(1-gamma0) log(T/2pi) + 2(1-gamma0-3*gamma1-gamma0^2)].
    """
    ell = math.log(t_height / _TWO_PI)
    return (t_height / (4.0 * math.pi)) * (
        ell * ell
        - 2.0 * (1.0 - GAMMA0) * ell
        + 2.0 * (1.0 - GAMMA0 - 3.0 * GAMMA1 - GAMMA0 * GAMMA0)
    )


def cgg_leading_term(t_height):
    """Bare leading term (T/4pi) log^2(T/2pi) of the same sum."""
    ell = math.log(t_height / _TWO_PI)
    return (t_height / (4.0 * math.pi)) * ell * ell


def a1_term(m):
    """A1(1, m): p (log p)^2 / (p-1)^2 on prime powers m = p^a, else 0."""
    if m < 2:
        raise DomainError("A1 requires m >= 2")
    fac = factorize(m)
    if len(fac) == 1:
        (p,) = fac.keys()
        lp = math.log(p)
        return p * lp * lp / (p - 1.0) ** 2
    return 0.0


def b1_term(m, t_height):
    """B1(m, T): the prime-power and two-prime cases of the twisted subsidiary term.

    m = p^a:          -(p/(p-1)) (log p (log(T/2pi) - 1 + gamma0) + (a - 1/2) log^2 p)
    m = p1^a1 p2^a2:  p1 p2 / ((p1-1)(p2-1)) log p1 log p2
    otherwise 0.
    """
    if m < 2:
        raise DomainError("B1 requires m >= 2")
    fac = factorize(m)
    if len(fac) == 1:
        ((p, a),) = fac.items()
        lp = math.log(p)
        return -(p / (p - 1.0)) * (
            lp * (math.log(t_height / _TWO_PI) - 1.0 + GAMMA0) + (a - 0.5) * lp * lp
        )
    if len(fac) == 2:
        (p1, p2) = fac.keys()
        return (
            p1 * p2 / ((p1 - 1.0) * (p2 - 1.0)) * math.log(p1) * math.log(p2)
        )
    return 0.0


def twisted_first_moment(zeros, t_height, poly, running=False):
    """sum_{gamma<=T} zeta'(rho) P_X(rho)^{-1} vs the twisted-moment expansion.

    ``poly`` must be the k = -1 coefficient set.  The prediction is the
    three-term polynomial main term plus (T/2pi) sum_{m>=2} (a_{-1}(m)/m)
    (A1(1,m) + B1(m,T)) over the Dirichlet support, where a_{-1} vanishes off
    X-smooth integers.
    """
    if complex(poly.k) != -1:
        raise DomainError("twisted first moment needs the k = -1 DirichletPoly")
    _require_coverage(zeros, t_height)
    gammas = zeros.below(t_height)
    n = len(gammas)
    zp = _zeta_prime_at_zeros(gammas)
    pxinv = p_x_pow(0.5 + 1j * gammas, -1, poly)
    terms = zp * pxinv
    empirical = kahan_sum(terms)

    main = cgg_main_term(t_height)
    msum = 0.0
    for m, a in zip(poly.m, poly.a):
        if m < 2:
            continue
        coeff = a.real  # a_{-1} is real for real k
        if coeff == 0.0:
            continue
        msum += coeff / m * (a1_term(int(m)) + b1_term(int(m), t_height))
    subsidiary = (t_height / _TWO_PI) * msum
    predicted = main + subsidiary
    details = {
        "main_term": main,
        "subsidiary_term": subsidiary,
        "predicted_without_msum": main,
    }
    if running:
        details["running"] = _running_rows(
            gammas,
            terms,
            lambda t, _m: cgg_main_term(t) + (t / _TWO_PI) * msum,
        )
    return MomentResult(
        k=-1,
        t_height=float(t_height),
        empirical=complex(empirical),
        predicted=complex(predicted),
        ratio=complex(empirical / predicted),
        n_zeros=n,
        branch=RECIPROCAL,
        details=details,
    )
