"""Haar-unitary sampling and moments of the characteristic polynomial derivative.

Implements the exact Haar average

    E_N[(1/N) sum_n Z'(theta_n, A)^k] = e^{i pi k / 2} Gamma(N+k+1) / (N! Gamma(k+2)),

its Monte-Carlo estimation with branch-correct complex powers, and a small-N
brute-force Weyl-measure quadrature oracle.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, CapabilityError, DegenerateSampleError, DomainError, PoleError
from .specfun import log_gamma

_COINCIDENCE_TOL = 1e-14
_MC_DIM_CAP = 512
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EigenAngles:
    """Sorted eigenangles of one sampled Haar-unitary matrix."""

    angles: np.ndarray  # shape (n,), ascending, in [0, 2*pi)
    n: int
    seed: object = None

    def __post_init__(self):
        if len(self.angles) != self.n:
            raise ValueError("angle count does not match the matrix dimension")


@dataclass(frozen=True)
class MomentEstimate:
    """Monte-Carlo mean with separate standard errors for the two components."""

    mean: complex
    se_re: float
    se_im: float
    samples: int
    seed: object = None

    def within(self, target, n_se=3.0):
        """True if target lies inside the n_se band componentwise."""
        t = complex(target)
        return (
            abs(self.mean.real - t.real) <= n_se * self.se_re
            and abs(self.mean.imag - t.imag) <= n_se * self.se_im
        )


def require_admissible(k):
    """Validate Re(k) > -3 (convergence region of the exact moment formula)."""
    k = complex(k)
    if k.real <= -3.0:
        raise AdmissibilityError(f"moment order must satisfy Re(k) > -3, got {k}")
    return k


def _rng_from(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _haar_angle_batch(n, count, rng):
    """Sorted eigenangle rows, shape (count, n), of Haar-distributed unitaries.

    QR of a complex Ginibre matrix with the triangular factor's diagonal
    phases divided out; without that correction the distribution is not Haar.
    """
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n)))
    q, r = np.linalg.qr(z)
    d = np.einsum("bii->bi", r)
    q = q * (d / np.abs(d))[:, None, :]
    eig = np.linalg.eigvals(q)
    return np.sort(np.mod(np.angle(eig), _TWO_PI), axis=1)


def sample_haar_eigenangles(n, rng):
    """One Haar sample of eigenangles for an n x n unitary matrix.

    Args:
        n: matrix dimension, n >= 1.
        rng: integer seed or numpy Generator.
    """
    if n < 1:
        raise DomainError("matrix dimension must be >= 1")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    gen = _rng_from(rng)
    angles = _haar_angle_batch(n, 1, gen)[0]
    return EigenAngles(angles=angles, n=n, seed=seed)


def charpoly_deriv_branched_log(angles, index=None):
    """Branch-accumulated log Z'(theta_r, A) = i*pi/2 + sum log(1 - e^{i(theta_n - theta_r)}).

    Each factor 1 - e^{i phi} has nonnegative real part, so the principal
    logarithm lands every summand's imaginary part in (-pi/2, pi/2) -- the
    branch under which complex powers Z'^k are defined throughout.

    Args:
        angles: an :class:`EigenAngles` sample.
        index: 0-based eigenangle index r; defaults to the last.

    Raises:
        DegenerateSampleError: if two eigenangles coincide within 1e-14
            (resample instead of trusting the factor logs).
    """
    th = angles.angles
    n = angles.n
    r = n - 1 if index is None else int(index)
    if not 0 <= r < n:
        raise DomainError(f"eigenangle index must be in [0, {n - 1}]")
    diffs = np.delete(th, r) - th[r]
    # wrap-aware coincidence check against neighbours
    if n > 1:
        gaps = np.diff(th)
        wrap = th[0] + _TWO_PI - th[-1]
        if min(gaps.min(initial=np.inf), wrap) < _COINCIDENCE_TOL:
            raise DegenerateSampleError("coincident eigenangles within 1e-14; resample")
    return 1j * (math.pi / 2.0) + np.sum(np.log(1.0 - np.exp(1j * diffs)))


def exact_moment(n, k):
    """e^{i pi k/2} Gamma(N+k+1) / (N! Gamma(k+2)) via log-Gamma arithmetic.

    Valid for complex k with k not in {-3, -4, ...}; no overflow for n up to
    1e6.  At k = -2 the reciprocal Gamma factor vanishes and the moment is 0.
    """
    if n < 1:
        raise DomainError("matrix dimension must be >= 1")
    k = complex(k)
    if k.imag == 0 and k.real == round(k.real) and k.real <= -3:
        raise PoleError(f"exact moment has poles at negative integers k <= -3 (got k={k.real:g})")
    if k == -2:
        return 0j
    log_val = (
        1j * math.pi * k / 2.0
        + log_gamma(n + k + 1.0)
        - log_gamma(n + 1.0)
        - log_gamma(k + 2.0)
    )
    return complex(np.exp(log_val))


def conjecture_rhs(t_height, k):
    """(1/Gamma(k+2)) (log(T/2pi))^k with the real positive branch of the log power."""
    if t_height <= _TWO_PI:
        raise DomainError("height T must exceed 2*pi")
    k = require_admissible(k)
    if k == -2:
        return 0j
    log_l = math.log(math.log(t_height / _TWO_PI))
    return complex(np.exp(k * log_l - log_gamma(k + 2.0)))


def _zprime_pow_rows(angle_rows, col_index, k):
    """exp(k log Z') for each row, evaluated at the given column per row.

    angle_rows: (B, n) sorted angles; col_index: (B,) integer indices.
    Rows with coincident angles return nan (caller resamples).
    """
    b, n = angle_rows.shape
    if n == 1:
        return np.full(b, np.exp(1j * math.pi * k / 2.0), dtype=complex)
    rows = np.arange(b)
    sel = angle_rows[rows, col_index]
    mask = np.ones_like(angle_rows, dtype=bool)
    mask[rows, col_index] = False
    diffs = angle_rows[mask].reshape(b, n - 1) - sel[:, None]
    fac = 1.0 - np.exp(1j * diffs)
    bad = np.abs(fac).min(axis=1) < _COINCIDENCE_TOL
    logs = 1j * (math.pi / 2.0) + np.log(fac).sum(axis=1)
    out = np.exp(k * logs)
    if bad.any():
        out[bad] = np.nan
    return out


def _mc_worker(args):
    n, k, count, child_seed, full_average = args
    rng = np.random.default_rng(child_seed)
    total = 0j
    total_sq = 0.0 + 0j  # sum of re^2 + i*sum of im^2
    done = 0
    batch_cap = max(1, min(32768, 4_000_000 // (n * n)))
    while done < count:
        b = min(batch_cap, count - done)
        ang = _haar_angle_batch(n, b, rng)
        if full_average:
            vals = np.zeros(b, dtype=complex)
            for col in range(n):
                vals += _zprime_pow_rows(ang, np.full(b, col), k)
            vals /= n
        else:
            # uniformly random eigenangle per sample: the label-exchangeable
            # realization of "no distinguished eigenvalues" (sorted-position
            # selection is gap-size-biased and would skew the estimate)
            cols = rng.integers(0, n, size=b)
            vals = _zprime_pow_rows(ang, cols, k)
        nan = np.isnan(vals)
        while nan.any():  # degenerate float collisions: resample those rows
            m = int(nan.sum())
            ang2 = _haar_angle_batch(n, m, rng)
            cols2 = rng.integers(0, n, size=m)
            vals[nan] = _zprime_pow_rows(ang2, cols2, k)
            nan = np.isnan(vals)
        total += vals.sum()
        total_sq += (vals.real**2).sum() + 1j * (vals.imag**2).sum()
        done += b
    return total, total_sq, done


def _merge_mc(pieces, seed):
    total = sum(p[0] for p in pieces)
    total_sq = sum(p[1] for p in pieces)
    count = sum(p[2] for p in pieces)
    mean = total / count
    var_re = max(total_sq.real / count - mean.real**2, 0.0) * count / (count - 1)
    var_im = max(total_sq.imag / count - mean.imag**2, 0.0) * count / (count - 1)
    return MomentEstimate(
        mean=complex(mean),
        se_re=math.sqrt(var_re / count),
        se_im=math.sqrt(var_im / count),
        samples=count,
        seed=seed,
    )


def mc_moment(n, k, samples, seed, workers=1, full_average=False):
    """Monte-Carlo estimate of E_N[(1/N) sum_n Z'(theta_n, A)^k].

    By rotation invariance the statistic is evaluated at a single uniformly
    chosen eigenangle per sample; ``full_average=True`` averages all N instead
    (same mean, used by the index-invariance test).

    Sampling splits deterministically into ``workers`` child streams spawned
    from the seed; the merged result is bit-reproducible for fixed
    (seed, workers).
    """
    if n < 1:
        raise DomainError("matrix dimension must be >= 1")
    if n > _MC_DIM_CAP:
        raise CapabilityError(f"Monte-Carlo dimension capped at {_MC_DIM_CAP}")
    k = require_admissible(k)
    if samples < 100:
        raise DomainError("need at least 100 samples")
    if k == 0:
        return MomentEstimate(mean=1.0 + 0j, se_re=0.0, se_im=0.0, samples=samples, seed=seed)

    workers = max(1, int(workers))
    counts = [samples // workers] * workers
    counts[-1] += samples - sum(counts)
    children = np.random.SeedSequence(seed).spawn(workers)
    jobs = [(n, k, c, ss, full_average) for c, ss in zip(counts, children)]
    if workers == 1:
        pieces = [_mc_worker(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pieces = list(pool.map(_mc_worker, jobs))
    return _merge_mc(pieces, seed)


def weyl_average(n, statistic, grid):
    """Tensor-grid quadrature of a statistic against the Weyl density on U(n).

    Args:
        n: 1, 2 or 3 (the cost explodes combinatorially by design).
        statistic: callable mapping broadcastable angle arrays (theta_1, ...,
            theta_n) to a complex array.
        grid: points per angle axis (rectangle rule; the integrand is
            2*pi-periodic in every variable).

    Raises:
        CapabilityError: for n > 3.
    """
    if n not in (1, 2, 3):
        raise CapabilityError("Weyl quadrature oracle supports n in {1, 2, 3} only")
    theta = (np.arange(grid) + 0.5) * (_TWO_PI / grid)
    norm = 1.0 / (math.factorial(n) * _TWO_PI**n) * (_TWO_PI / grid) ** n
    if n == 1:
        return complex(norm * np.sum(statistic(theta)))
    ephase = np.exp(1j * theta)
    if n == 2:
        acc = 0j
        for t1 in theta:  # row-chunked to bound memory at large grids
            dens = np.abs(np.exp(1j * t1) - ephase) ** 2
            acc += np.sum(dens * statistic(t1, theta))
        return complex(norm * acc)
    acc = 0j
    for t1 in theta:
        d1x = np.abs(np.exp(1j * t1) - ephase) ** 2  # |e^{i t1} - e^{i theta}|^2
        for i2, t2 in enumerate(theta):
            d2x = np.abs(np.exp(1j * t2) - ephase) ** 2
            dens = d1x[i2] * d1x * d2x
            acc += np.sum(dens * statistic(t1, t2, theta))
    return complex(norm * acc)


def _zprime_moment_statistic(k):
    """(1/N) sum_r Z'(theta_r)^k as a function of the angle tuple.

    Grid points with coincident angles are assigned 0: the Weyl density
    vanishes there to second order, so for Re(k) > -3 the (measure-zero)
    coincidence set contributes nothing to the integral.
    """

    def stat(*thetas):
        thetas = np.broadcast_arrays(*thetas)
        n = len(thetas)
        acc = 0j
        for r in range(n):
            log_sum = np.zeros(np.shape(thetas[0]), dtype=complex)
            coincident = np.zeros(np.shape(thetas[0]), dtype=bool)
            for m in range(n):
                if m == r:
                    continue
                fac = 1.0 - np.exp(1j * (thetas[m] - thetas[r]))
                coincident |= fac == 0
                log_sum = log_sum + np.log(np.where(fac == 0, 1.0, fac))
            term = np.exp(k * (1j * math.pi / 2.0 + log_sum))
            acc = acc + np.where(coincident, 0j, term)
        return acc / n

    return stat


def weyl_quadrature_oracle(n, k, grid):
    """Brute-force Weyl integral of (1/N) sum_r Z'(theta_r)^k for n <= 3.

    Converges to :func:`exact_moment` as the grid refines (spectrally for
    integer k; like grid^-(3+Re k) otherwise, from the algebraic coincidence
    singularity).
    """
    k = require_admissible(k)
    if n == 1:
        # single-point product: the integrand is the constant i^k
        return complex(np.exp(1j * math.pi * k / 2.0))
    return weyl_average(n, _zprime_moment_statistic(k), grid)
