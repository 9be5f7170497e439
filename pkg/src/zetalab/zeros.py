"""Nontrivial zero ordinates by Hardy-Z sign changes, with count verification.

The scan walks the critical line with a step of one quarter of the local mean
gap 2*pi / log(t/2*pi), brackets sign changes of Z, refines each bracket by
lockstep bisection, and reconciles the final count against
round(theta(t)/pi + 1).  A mismatch triggers rescans of the suspect gaps at
4x density before a hard failure is raised.

Computed lists are cached on disk (one ordinate per line, the same plain-text
format the loader ingests) under the directory named by the ``ZETALAB_CACHE``
environment variable.
"""

import hashlib
import math
import os
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, EmptyOverlapError, MissingZeroError, ZeroTableParseError
from .specfun import hardy_z, riemann_siegel_theta

_TWO_PI = 2.0 * math.pi
_SCAN_START = 10.0  # below the first zero at 14.134...
_BRACKET_WIDTH = 1e-11
CACHE_ENV = "ZETALAB_CACHE"


@dataclass(frozen=True)
class ZeroList:
    """Ordered zero ordinates up to a covered height, with provenance."""

    gammas: np.ndarray  # strictly increasing positive reals
    t_max: float
    source: str  # "computed" or "ingested:<path>"
    precision: float  # estimated ordinate accuracy

    def __post_init__(self):
        g = self.gammas
        if len(g) and (np.any(np.diff(g) <= 0) or g[0] <= 0):
            raise ValueError("zero ordinates must be strictly increasing and positive")
        if len(g) and g[-1] > self.t_max:
            raise ValueError("zero ordinates exceed the covered height")

    def below(self, t):
        """Ordinates with gamma <= t."""
        return self.gammas[self.gammas <= t]

    def __len__(self):
        return len(self.gammas)


def expected_zero_count(t):
    """round(theta(t)/pi + 1): the zero count under the |S(t)| < 1/2 heuristic."""
    return int(round(riemann_siegel_theta(t) / math.pi + 1.0))


def _scan_grid(t_lo, t_hi, density=1.0):
    """Scan points with step = local mean gap / (4 * density)."""
    pts = [t_lo]
    t = t_lo
    while t < t_hi:
        gap = _TWO_PI / max(math.log(t / _TWO_PI), 0.2)
        t = t + gap / (4.0 * density)
        pts.append(min(t, t_hi))
    return np.array(pts)


def _eval_z(points):
    """Hardy Z on ascending points, chunked so each chunk's truncation fits its heights."""
    out = np.empty(len(points))
    for lo in range(0, len(points), 2048):
        out[lo : lo + 2048] = hardy_z(points[lo : lo + 2048])
    return out


def _bisect_brackets(lo, hi, z_lo):
    """Lockstep bisection of sign-change brackets down to _BRACKET_WIDTH."""
    lo = lo.copy()
    hi = hi.copy()
    z_lo = z_lo.copy()
    while True:
        width = hi - lo
        if width.max() <= _BRACKET_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        z_mid = _eval_z(mid)
        left = np.signbit(z_lo) != np.signbit(z_mid)
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        z_lo = np.where(left, z_lo, z_mid)
    return 0.5 * (lo + hi)


def _find_brackets(t_lo, t_hi, density):
    grid = _scan_grid(t_lo, t_hi, density)
    z = _eval_z(grid)
    flips = np.nonzero(np.signbit(z[:-1]) != np.signbit(z[1:]))[0]
    return grid[flips], grid[flips + 1], z[flips]


def _cache_paths(cache_dir, t_max, density):
    base = Path(cache_dir) / f"zeros_t{t_max:g}_g{4 * density:g}.txt"
    return base, base.with_suffix(".sha256")


def _format_table(gammas):
    return "".join(f"{g:.11f}\n" for g in gammas)


def compute_zeros(t_max, cache_dir=None, max_rescans=6, density=1.0):
    """All zero ordinates in (0, t_max], bracketed to 1e-11 and count-verified.

    Args:
        t_max: covered height, between 10 and 1e4 (desk scale).
        cache_dir: directory for the on-disk cache; defaults to the
            ``ZETALAB_CACHE`` environment variable; pass ``False`` to disable
            caching outright.
        max_rescans: rescan rounds (each at doubled density) before a count
            mismatch becomes a hard failure.
        density: multiplier on the initial scan density (1.0 = quarter of the
            local mean gap); the result must not depend on it.

    Raises:
        MissingZeroError: if the scan count cannot be reconciled with
            round(theta(t_max)/pi + 1), carrying the suspect interval.
    """
    if not 10.0 <= t_max <= 1e4:
        raise DomainError("computed zeros support 10 <= t_max <= 1e4; ingest a table beyond that")
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV)
    if cache_dir:
        path, digest_path = _cache_paths(cache_dir, t_max, density)
        if path.exists():
            cached = load_zeros(path)
            return ZeroList(
                gammas=cached.gammas, t_max=float(t_max), source="computed", precision=_BRACKET_WIDTH
            )

    lo, hi, z_lo = _find_brackets(_SCAN_START, t_max, density=density)
    gammas = _bisect_brackets(lo, hi, z_lo)
    expected = expected_zero_count(t_max)

    rescan_density = 4.0 * density
    attempts = 0
    while len(gammas) != expected and attempts < max_rescans:
        # locate gaps whose theta-count drift suggests a missed pair
        edges = np.concatenate(([_SCAN_START], gammas, [t_max]))
        counts = riemann_siegel_theta(np.maximum(edges, _SCAN_START)) / math.pi + 1.0
        drift = np.diff(counts)
        suspects = np.nonzero(drift > 0.9)[0]
        if len(suspects) == 0:
            suspects = np.argsort(drift)[-3:]
        new = []
        for i in suspects:
            s_lo, s_hi = edges[i] + 1e-9, edges[i + 1] - 1e-9
            if s_hi <= s_lo:
                continue
            b_lo, b_hi, b_z = _find_brackets(s_lo, s_hi, rescan_density)
            if len(b_lo):
                found = _bisect_brackets(b_lo, b_hi, b_z)
                new.extend(g for g in found if not np.any(np.abs(gammas - g) < 1e-8))
        if new:
            gammas = np.sort(np.concatenate((gammas, new)))
        rescan_density *= 2.0
        attempts += 1

    if len(gammas) != expected:
        edges = np.concatenate(([_SCAN_START], gammas, [t_max]))
        counts = riemann_siegel_theta(np.maximum(edges, _SCAN_START)) / math.pi + 1.0
        worst = int(np.argmax(np.diff(counts)))
        raise MissingZeroError(
            f"found {len(gammas)} zeros below {t_max}, expected {expected} "
            f"(suspect interval near ({edges[worst]:.6f}, {edges[worst + 1]:.6f}))",
            interval=(float(edges[worst]), float(edges[worst + 1])),
        )

    result = ZeroList(
        gammas=np.sort(gammas), t_max=float(t_max), source="computed", precision=_BRACKET_WIDTH
    )
    if cache_dir:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        text = _format_table(result.gammas)
        path.write_text(text)
        digest_path.write_text(hashlib.sha256(text.encode()).hexdigest() + "\n")
    return result


def load_zeros(path):
    """Parse a zero table: one decimal ordinate per line, ascending, no header."""
    path = Path(path)
    gammas = []
    prev = 0.0
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                raise ZeroTableParseError(
                    f"{path}:{line_no}: not a decimal ordinate: {text!r}", line_number=line_no
                ) from None
            if value <= prev:
                raise ZeroTableParseError(
                    f"{path}:{line_no}: ordinates must be strictly ascending "
                    f"({value} after {prev})",
                    line_number=line_no,
                )
            gammas.append(value)
            prev = value
    arr = np.array(gammas)
    return ZeroList(
        gammas=arr,
        t_max=float(arr[-1]) if len(arr) else 0.0,
        source=f"ingested:{path}",
        precision=1e-6,
    )


@dataclass(frozen=True)
class CrossValidation:
    """Per-zero comparison of two lists on their common height range."""

    n_compared: int
    max_abs_diff: float
    count_a: int
    count_b: int
    overlap_t: float

    @property
    def counts_agree(self):
        return self.count_a == self.count_b


def cross_validate(a, b, tol=1e-6):
    """Compare two zero lists on the overlap of their covered ranges.

    Raises:
        EmptyOverlapError: if the ranges are disjoint (no common height).
    """
    overlap = min(a.t_max, b.t_max)
    ga, gb = a.below(overlap), b.below(overlap)
    if len(ga) == 0 and len(gb) == 0:
        raise EmptyOverlapError("zero lists share no populated height range")
    n = min(len(ga), len(gb))
    diffs = np.abs(ga[:n] - gb[:n])
    report = CrossValidation(
        n_compared=n,
        max_abs_diff=float(diffs.max()) if n else math.inf,
        count_a=len(ga),
        count_b=len(gb),
        overlap_t=float(overlap),
    )
    return report


def fetch_zeros(url, dest_path):
    """Download a published zero table to dest_path and record its checksum.

    No default endpoint is baked in; the caller supplies the URL explicitly.
    Returns the parsed ZeroList.
    """
    dest_path = Path(dest_path)
    dest_path.parent.mkdir(parents=True, exist_ok=True)
    with urllib.request.urlopen(url) as resp:
        data = resp.read()
    dest_path.write_bytes(data)
    dest_path.with_suffix(dest_path.suffix + ".sha256").write_text(
        hashlib.sha256(data).hexdigest() + "\n"
    )
    return load_zeros(dest_path)
