"""Sector counts and worst-case sector bias for points on the unit circle.

Positions live on the circle of unit length, encoded as fractional parts in
[0, 1).  A sector of aperture ``gamma`` starting at ``alpha`` is the arc
``{x : {x - alpha} <= gamma}``.  For a configuration of n points, the bias is
the supremum over all sectors of ``|count - gamma * n|``.

The supremum is computed exactly by candidate enumeration: on the excess side
it is attained by a closed arc whose two endpoints are occupied positions (a
degenerate zero-length arc at a point is allowed); on the deficiency side it
is approached in the limit by open arcs between occupied positions (the open
arc witness is a limit witness, which is legitimate because the sup does not
depend on whether sectors are taken closed, open or half-open).  Over the
candidate set the maximum factors into four per-position extremal quantities,
so a single sorted scan suffices.

Positions given as ints/Fractions are processed in exact integer arithmetic
(needed by the event-sweep optimizer, whose comparisons are boundary tight);
float positions take a float fast path with the same candidate semantics.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

Position = Union[int, float, Fraction]

__all__ = [
    "Position",
    "Sector",
    "BiasReport",
    "frac",
    "sector_count",
    "exact_bias",
    "aperture_bias",
    "count_range",
    "bias_of_rows",
]


def frac(x: Position) -> Position:
    """Fractional part {x} = x - floor(x), normalized into [0, 1)."""
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"position must be finite, got {x!r}")
    elif not isinstance(x, (int, Fraction)):
        raise TypeError(f"unsupported position type {type(x).__name__}")
    r = x - math.floor(x)
    # float subtraction can round up to 1.0 for tiny negative inputs
    if isinstance(r, float) and r >= 1.0:
        return 0.0
    return r


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class Sector:
    """Arc starting at ``alpha`` of length ``gamma``, both in circle units."""

    alpha: Position
    gamma: Position

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must be in [0,1), got {self.alpha}")
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must be in [0,1], got {self.gamma}")


@dataclass(frozen=True)
class BiasReport:
    """Worst sector deviation together with the sector that achieves it.

    ``side == "excess"`` means ``bias = witness_count - n*gamma`` with the
    closed-arc count; ``side == "deficiency"`` means ``bias = n*gamma -
    witness_count`` with the open-arc count (a limit witness).
    """

    bias: Position
    witness_sector: Sector
    witness_count: int
    side: str
    n: int


def sector_count(points: Sequence[Position], sector: Sector, mode: str = "closed") -> int:
    """Number of points inside the sector; mode is closed, open or half_open."""
    a, g = sector.alpha, sector.gamma
    total = 0
    for p in points:
        d = frac(p - a)
        if mode == "closed":
            inside = d <= g
        elif mode == "open":
            inside = 0 < d < g
        elif mode == "half_open":
            inside = d < g
        else:
            raise ValueError(f"unknown mode {mode!r}")
        total += inside
    return total


# ---------------------------------------------------------------------------
# candidate-arc extremal scan
#
# With sorted positions u_0 <= ... <= u_{n-1} (prefix count of index j is
# j+1), every candidate arc deviation separates into a difference of two
# per-index quantities:
#
#   closed arc u_i -> u_j   :  excess   = A_j - B_i,  A_j = (j+1) - n*u_j,
#                                          B_i = i - n*u_i
#   open  arc (u_i, u_j)    :  deficit  = C_j - D_i,  C_j = n*u_j - j,
#                                          D_i = n*u_i - (j..) = n*u_i - (i+1)
#
# and the identities hold for wrapped arcs as well (i == j encodes the
# degenerate point arc on the closed side and the full-circle-minus-point arc
# on the open side).  Hence max excess = max A - min B and max deficiency =
# max C - min D; duplicates need no collapsing because the extrema land on
# the correct end of each run of equal positions automatically.
# ---------------------------------------------------------------------------


def _extremal_scan(u, n, L):
    """Scan scaled sorted positions (circle length L). Returns both sides."""
    maxA = minB = maxC = minD = None
    jA = iB = jC = iD = 0
    for j in range(n):
        x = u[j]
        A = (j + 1) * L - n * x
        B = j * L - n * x
        C = n * x - j * L
        D = n * x - (j + 1) * L
        if maxA is None or A > maxA:
            maxA, jA = A, j
        if minB is None or B < minB:
            minB, iB = B, j
        if maxC is None or C > maxC:
            maxC, jC = C, j
        if minD is None or D < minD:
            minD, iD = D, j
    return (maxA - minB, iB, jA), (maxC - minD, iD, jC)


def _arc_witness(u, n, L, i, j, side):
    """Reconstruct (alpha, gamma, count) for the winning candidate arc."""
    ui, uj = u[i], u[j]
    if side == "excess":
        wrapped = i > j
        count = (j - i + 1) if not wrapped else (n - i + j + 1)
    else:
        wrapped = j <= i
        count = (j - i - 1) if not wrapped else (n - i - 1 + j)
    length = uj - ui + (L if wrapped else 0)
    return ui, length, count


def _common_denominator(pts):
    fr = [Fraction(p) for p in pts]
    den = 1
    for f in fr:
        den = den * f.denominator // math.gcd(den, f.denominator)
    return den, sorted(f.numerator * (den // f.denominator) for f in fr)


def exact_bias(points: Sequence[Position]) -> BiasReport:
    """Supremum over all sectors of |count - gamma*n|, with witness.

    Exact over rational inputs; float inputs get the same candidate sweep in
    float arithmetic.
    """
    pts = [frac(p) for p in points]
    n = len(pts)
    if n == 0:
        raise ValueError("empty configuration has no bias")
    if all(_is_exact(p) for p in pts):
        L, u = _common_denominator(pts)
        exact = True
    else:
        L, u = 1, sorted(float(p) for p in pts)
        exact = False
    (exc, ei, ej), (dfc, di, dj) = _extremal_scan(u, n, L)
    if exc >= dfc:
        side, best, i, j = "excess", exc, ei, ej
    else:
        side, best, i, j = "deficiency", dfc, di, dj
    a, g, count = _arc_witness(u, n, L, i, j, side)
    if exact:
        bias = Fraction(best, L)
        sector = Sector(Fraction(a, L), Fraction(g, L))
    else:
        bias = float(best)
        sector = Sector(float(a), float(g))
    return BiasReport(bias=bias, witness_sector=sector, witness_count=count, side=side, n=n)


def bias_of_rows(positions: np.ndarray) -> np.ndarray:
    """Vectorized float bias for a (T, n) array of positions in [0, 1).

    Row-wise equivalent of ``exact_bias`` on floats (no witness); used for
    time-grid scans.
    """
    P = np.asarray(positions, dtype=float)
    if P.ndim != 2:
        raise ValueError("expected a (T, n) array")
    n = P.shape[1]
    U = np.sort(P, axis=1)
    idx = np.arange(1, n + 1, dtype=float)
    A = idx - n * U
    B = (idx - 1.0) - n * U
    C = n * U - (idx - 1.0)
    D = n * U - idx
    excess = A.max(axis=1) - B.min(axis=1)
    deficit = C.max(axis=1) - D.min(axis=1)
    return np.maximum(excess, deficit)


# ---------------------------------------------------------------------------
# fixed-aperture bias
# ---------------------------------------------------------------------------


def _count_closed(u, n, alpha, gamma):
    if gamma >= 1:
        return n
    hi = alpha + gamma
    if hi < 1:
        return bisect_right(u, hi) - bisect_left(u, alpha)
    return (n - bisect_left(u, alpha)) + bisect_right(u, hi - 1)


def _count_open(u, n, alpha, gamma):
    if gamma <= 0:
        return 0
    hi = alpha + gamma
    if hi < 1:
        return max(0, bisect_left(u, hi) - bisect_right(u, alpha))
    return (n - bisect_right(u, alpha)) + bisect_left(u, hi - 1)


def _count_half_open(u, n, alpha, gamma):
    if gamma <= 0:
        return 0
    hi = alpha + gamma
    if hi < 1:
        return bisect_left(u, hi) - bisect_left(u, alpha)
    return (n - bisect_left(u, alpha)) + bisect_left(u, hi - 1)


_COUNTERS = {"closed": _count_closed, "open": _count_open, "half_open": _count_half_open}


def aperture_bias(points: Sequence[Position], gamma: Position) -> BiasReport:
    """Supremum over sectors of fixed aperture gamma of |count - gamma*n|.

    Candidate starts are the occupied positions and the positions exactly
    gamma before an occupied position; the closed count realizes the excess
    side, the open count the deficiency side.
    """
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must be in [0,1], got {gamma}")
    pts = [frac(p) for p in points]
    n = len(pts)
    if n == 0:
        raise ValueError("empty configuration has no bias")
    exact = all(_is_exact(p) for p in pts) and _is_exact(gamma)
    if not exact:
        pts = [float(p) for p in pts]
        gamma = float(gamma)
    u = sorted(pts)
    alphas = set(u)
    alphas.update(frac(x - gamma) for x in u)
    expected = gamma * n
    # At any start, closed count >= open count, so max(excess, deficiency)
    # is nonnegative and the scan below always yields bias >= 0.
    best = None
    for a in sorted(alphas):
        cc = _count_closed(u, n, a, gamma)
        oc = _count_open(u, n, a, gamma)
        for side, dev, cnt in (("excess", cc - expected, cc), ("deficiency", expected - oc, oc)):
            if best is None or dev > best[0]:
                best = (dev, side, a, cnt)
    dev, side, a, cnt = best
    return BiasReport(
        bias=dev,
        witness_sector=Sector(a, gamma),
        witness_count=cnt,
        side=side,
        n=n,
    )


def count_range(points: Sequence[Position], gamma: Position, mode: str = "closed"):
    """(min, max) over all sector starts of the aperture-gamma sector count.

    The count as a function of the start is piecewise constant with
    breakpoints where a point sits on either sector boundary, so evaluating
    at all breakpoints and at the midpoints between consecutive breakpoints
    is exhaustive (exact for rational inputs).
    """
    counter = _COUNTERS.get(mode)
    if counter is None:
        raise ValueError(f"unknown mode {mode!r}")
    pts = [frac(p) for p in points]
    n = len(pts)
    if n == 0:
        raise ValueError("empty configuration")
    u = sorted(pts)
    brk = set(u)
    brk.update(frac(x - gamma) for x in u)
    brk = sorted(brk)
    probes = list(brk)
    m = len(brk)
    for idx in range(m):
        lo = brk[idx]
        hi = brk[(idx + 1) % m] + (1 if idx + 1 == m else 0)
        if isinstance(lo, float) or isinstance(hi, float):
            probes.append(frac((float(lo) + float(hi)) / 2.0))
        else:
            probes.append(frac(Fraction(lo + hi, 2)))
    counts = [counter(u, n, a, gamma) for a in probes]
    return min(counts), max(counts)
