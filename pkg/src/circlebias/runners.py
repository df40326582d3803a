"""Runner systems: points moving on the unit circle with constant speeds.

A system is a list of starts s_i and speeds v_i; the position of runner i at
time t is {s_i + v_i t}.  The quantity of interest is the maximum over time
of the sector bias of the configuration.

For integer speeds and rational starts the maximum is computed exactly by an
event sweep: between two consecutive coincidence events the cyclic order of
the runners is fixed, every candidate-arc deviation is |count - n*len(t)|
with len affine in t, hence the bias is convex on each segment and attains
its maximum at segment endpoints.  Adding a common constant to all speeds is
a rigid rotation and does not change the bias, so speeds are normalized by a
common shift and gcd before events are enumerated.  The fixed-aperture
variant additionally needs the times at which the gap between two runners
equals the aperture, because a runner can cross the far boundary of a
candidate sector without any coincidence happening.

Real speeds fall back to a time-grid scan whose result is a certified lower
bound (every reported value is an actual evaluation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
import numpy as np

from .circle import BiasReport, Position, aperture_bias, bias_of_rows, exact_bias, frac

__all__ = [
    "RunnerSystem",
    "TimeWitness",
    "EventBudgetError",
    "positions_at",
    "max_bias_exact",
    "aperture_max_bias_exact",
    "max_bias_grid",
    "antipodal_pairs",
    "second_moment_estimate",
    "pair_moment_estimate",
    "delta_integral_check",
    "chernoff_experiment",
]

DEFAULT_EVENT_CAP = 10**6


class EventBudgetError(RuntimeError):
    """Raised when the crossing-event enumeration exceeds its cap."""


@dataclass(frozen=True)
class RunnerSystem:
    starts: tuple
    speeds: tuple

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(self.starts))
        object.__setattr__(self, "speeds", tuple(self.speeds))
        if len(self.starts) != len(self.speeds):
            raise ValueError("starts and speeds must have equal length")
        if not self.starts:
            raise ValueError("a runner system needs at least one runner")

    @property
    def n(self) -> int:
        return len(self.starts)

    @property
    def k(self) -> int:
        """Number of distinct speeds."""
        return len(set(self.speeds))


@dataclass(frozen=True)
class TimeWitness:
    t: Position
    report: BiasReport


def positions_at(sys: RunnerSystem, t) -> list:
    """Configuration {s_i + v_i t} at time t."""
    return [frac(s + v * t) for s, v in zip(sys.starts, sys.speeds)]


# ------------------------------------------------------------- exact sweep ----


def _as_int_speed(v):
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise ValueError(
        f"exact optimization needs integer speeds, got {v!r}; use max_bias_grid for real speeds"
    )


def _as_rational_start(s):
    if isinstance(s, (int, Fraction)):
        return frac(Fraction(s))
    raise ValueError(
        f"exact optimization needs rational starts, got {s!r}; use max_bias_grid instead"
    )


def _normalized(sys: RunnerSystem):
    """Rational starts plus shift/gcd-normalized integer speeds.

    Shifting all speeds by a constant rotates the configuration rigidly and
    dividing by the gcd rescales time, neither changes the max bias; the
    original witness time is the normalized one divided by the gcd.
    """
    starts = [_as_rational_start(s) for s in sys.starts]
    v = [_as_int_speed(x) for x in sys.speeds]
    vmin = min(v)
    w = [x - vmin for x in v]
    g = 0
    for x in w:
        g = math.gcd(g, x)
    g = g or 1
    return starts, [x // g for x in w], g


def _event_times(starts, w, offsets, cap):
    """Times in [0,1) where the gap of some ordered pair equals an offset."""
    pairs = []
    total = 0
    for i in range(len(w)):
        for j in range(len(w)):
            if i < j and w[i] != w[j]:
                a, b = (i, j) if w[j] > w[i] else (j, i)
                d = w[b] - w[a]
                pairs.append((a, b, d))
                total += d * len(offsets)
    if total > cap:
        raise EventBudgetError(
            f"{total} crossing events exceed the cap of {cap}; raise event_cap"
        )
    events = {Fraction(0)}
    for a, b, d in pairs:
        base = starts[a] - starts[b]
        for off in offsets:
            # pos_b - pos_a = off (mod 1)  =>  t = (off + m + s_a - s_b)/d
            first = math.ceil(-off - base)
            for m in range(first, first + d):
                t = Fraction(off + m + base, d)
                if 0 <= t < 1:
                    events.add(t)
    return sorted(events)


def max_bias_exact(sys: RunnerSystem, event_cap: int = DEFAULT_EVENT_CAP) -> TimeWitness:
    """Exact max over t in [0,1) of the bias, for integer speeds."""
    starts, w, g = _normalized(sys)
    events = _event_times(starts, w, (Fraction(0),), event_cap)
    best_t, best = None, None
    for t in events:
        rep = exact_bias([frac(s + wi * t) for s, wi in zip(starts, w)])
        if best is None or rep.bias > best:
            best, best_t = rep.bias, t
    t0 = best_t / g
    return TimeWitness(t=t0, report=exact_bias(positions_at(sys, t0)))


def aperture_max_bias_exact(
    sys: RunnerSystem, gamma, event_cap: int = DEFAULT_EVENT_CAP
) -> TimeWitness:
    """Exact max over t of the aperture-gamma bias, for integer speeds."""
    gamma = Fraction(gamma)
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must be in [0,1], got {gamma}")
    starts, w, g = _normalized(sys)
    offsets = {Fraction(0), frac(gamma), frac(-gamma)}
    events = _event_times(starts, w, sorted(offsets), event_cap)
    best_t, best = None, None
    for t in events:
        rep = aperture_bias([frac(s + wi * t) for s, wi in zip(starts, w)], gamma)
        if best is None or rep.bias > best:
            best, best_t = rep.bias, t
    t0 = best_t / g
    return TimeWitness(t=t0, report=aperture_bias(positions_at(sys, t0), gamma))


# ------------------------------------------------------------- grid search ----


def _float_bias_at(starts, speeds, t):
    return exact_bias([(s + v * t) % 1.0 for s, v in zip(starts, speeds)]).bias


def max_bias_grid(
    sys: RunnerSystem,
    t_range=(0.0, 1.0),
    steps: int = 4096,
    refine_iters: int = 40,
    gamma=None,
) -> TimeWitness:
    """Max bias over a uniform t-grid plus local ternary refinement.

    The reported value is a certified lower bound on the true maximum (every
    candidate is an actual evaluation).  With ``gamma`` set, the aperture-
    constrained bias is optimized instead.  This is the only path offered
    for non-integer speeds: no rational-approximation reduction is applied,
    so irrational-speed maxima are approached, not certified.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    t0, t1 = float(t_range[0]), float(t_range[1])
    starts = np.array([float(s) for s in sys.starts])
    speeds = np.array([float(v) for v in sys.speeds])
    ts = t0 + (t1 - t0) * np.arange(steps) / steps

    if gamma is None:
        P = (starts[None, :] + ts[:, None] * speeds[None, :]) % 1.0
        vals = bias_of_rows(P)
        evaluate = lambda t: _float_bias_at(starts, speeds, t)
    else:
        gamma = float(gamma)
        evaluate = lambda t: aperture_bias(
            [(s + v * t) % 1.0 for s, v in zip(starts, speeds)], gamma
        ).bias
        vals = np.array([evaluate(t) for t in ts])

    i = int(np.argmax(vals))
    best_t, best = float(ts[i]), float(vals[i])
    lo = float(ts[max(i - 1, 0)])
    hi = float(ts[min(i + 1, steps - 1)])
    for _ in range(max(refine_iters, 0)):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1, f2 = evaluate(m1), evaluate(m2)
        if f1 > best:
            best, best_t = f1, m1
        if f2 > best:
            best, best_t = f2, m2
        if f1 < f2:
            lo = m1
        else:
            hi = m2
    if gamma is None:
        report = exact_bias(positions_at(sys, best_t))
    else:
        report = aperture_bias(positions_at(sys, best_t), gamma)
    return TimeWitness(t=best_t, report=report)


# --------------------------------------------------------------- families ----


def antipodal_pairs(k: int) -> RunnerSystem:
    """k antipodal pairs: pair j sits at distance 1/2 and moves at speed j+1.

    Every half-open half-circle contains exactly one runner of each pair at
    every time, so the aperture-1/2 counts stay pinned near k regardless of
    t; this is the family showing that distinct speeds are needed for the
    aperture-constrained lower bound.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    starts, speeds = [], []
    half = Fraction(1, 2)
    for j in range(k):
        s = Fraction(j, 2 * k)
        starts += [s, frac(s + half)]
        speeds += [j + 1, j + 1]
    return RunnerSystem(tuple(starts), tuple(speeds))


# ------------------------------------------------------------- quadrature ----


def _covered_midpoints(p, gamma, M):
    """Index ranges of alpha midpoints (j+0.5)/M with {p - alpha} <= gamma."""
    lo = (p - gamma) % 1.0
    hi = p
    j_lo = math.ceil(lo * M - 0.5)
    j_hi = math.floor(hi * M - 0.5)
    if lo <= hi:
        if j_lo <= j_hi:
            yield max(j_lo, 0), min(j_hi, M - 1)
    else:
        if j_hi >= 0:
            yield 0, min(j_hi, M - 1)
        if j_lo <= M - 1:
            yield max(j_lo, 0), M - 1


def second_moment_estimate(sys: RunnerSystem, gamma, quadrature_steps: int = 400) -> float:
    """Midpoint product-quadrature estimate of E_{alpha,t}[(N - gamma*n)^2].

    For distinct integer speeds the exact value is (gamma - gamma^2) * n.
    """
    for v in sys.speeds:
        _as_int_speed(v)
    M = int(quadrature_steps)
    if M < 1:
        raise ValueError("quadrature_steps must be >= 1")
    g = float(gamma)
    n = sys.n
    starts = np.array([float(frac(s)) for s in sys.starts])
    speeds = np.array([float(v) for v in sys.speeds])
    gn = g * n
    total = 0.0
    diff = np.zeros(M + 1)
    for ti in range(M):
        t = (ti + 0.5) / M
        diff[:] = 0.0
        for p in (starts + speeds * t) % 1.0:
            for a, b in _covered_midpoints(p, g, M):
                diff[a] += 1.0
                diff[b + 1] -= 1.0
        N = np.cumsum(diff[:M])
        total += float(np.sum((N - gn) ** 2))
    return total / (M * M)


def pair_moment_estimate(s1, v1, s2, v2, gamma, quadrature_steps: int = 400) -> float:
    """Midpoint quadrature of E_{alpha,t}[chi(s1+v1*t) * chi(s2+v2*t)].

    Equals gamma^2 for distinct integer speeds and gamma for equal arguments.
    """
    M = int(quadrature_steps)
    g = float(gamma)
    total = 0.0
    ind1 = np.zeros(M, dtype=bool)
    ind2 = np.zeros(M, dtype=bool)
    for ti in range(M):
        t = (ti + 0.5) / M
        ind1[:] = False
        ind2[:] = False
        for ind, s, v in ((ind1, s1, v1), (ind2, s2, v2)):
            p = (float(s) + float(v) * t) % 1.0
            for a, b in _covered_midpoints(p, g, M):
                ind[a : b + 1] = True
        total += float(np.sum(ind1 & ind2))
    return total / (M * M)


@dataclass(frozen=True)
class DeltaIntegralResult:
    exact: Fraction
    estimate: float


def delta_integral_check(m: int, quadrature_steps: int = 100_000) -> DeltaIntegralResult:
    """Closed form and quadrature for the mean square distance-to-integer.

    With D(z) the distance of z from the closest integer, the integral of
    D(gamma*m)^2 over gamma in [0,1] is 1/12 for every m >= 1: the integrand
    is 1/m-periodic and symmetric about 1/(2m), where it equals (gamma*m)^2,
    so the integral is 2m * m^2 / (3 * (2m)^3).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    exact = Fraction(2 * m * m * m, 3 * (2 * m) ** 3)
    M = int(quadrature_steps)
    z = ((np.arange(M) + 0.5) / M) * m
    fz = z % 1.0
    d = np.minimum(fz, 1.0 - fz)
    return DeltaIntegralResult(exact=exact, estimate=float(np.mean(d * d)))


# ------------------------------------------------------- random construction ----

RNG_NAME = "numpy-pcg64"


def chernoff_experiment(n: int, trials: int, seed: int) -> dict:
    """Random-starts experiment against the grid concentration bound.

    Draws starts uniformly with speeds 1..n, builds the sector grid with
    m = floor(n / (4 log2 n)) steps of size gamma0 = 1/m and the n*m + 2 grid
    times k/(n*m), and checks |N_S - |S|*n| <= 4*sqrt(n*|S|*log2(n)) for all
    grid sectors S and grid times.  Reports the fraction of trials where the
    bound holds for every (S, t) pair and the largest observed ratio
    |N_S - |S|*n| / sqrt(n*|S|*log2(n)).
    """
    if n < 16:
        raise ValueError("n too small: need n >= 16 so that m >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    log2n = math.log2(n)
    m = int(n / (4 * log2n))
    if m < 1:
        raise ValueError(f"n={n} gives an empty sector grid")
    gamma0 = 1.0 / m
    rng = np.random.default_rng(seed)
    speeds = np.arange(1, n + 1, dtype=float)
    times = np.arange(n * m + 2, dtype=float) / (n * m)
    boundaries = np.arange(m) * gamma0
    j = np.arange(m, dtype=float)
    apertures = j * gamma0
    bounds = 4.0 * np.sqrt(n * apertures * log2n)
    scale = np.sqrt(n * apertures[1:] * log2n)  # j >= 1 only, for the ratio
    ii = np.arange(m)[:, None]
    jj = np.arange(m)[None, :]
    e_mod = (ii + jj) % m
    wrap = (ii + jj) >= m

    per_trial = []
    for trial in range(trials):
        starts = rng.random(n)
        all_pass = True
        max_ratio = 0.0
        for t in times:
            pos = np.sort((starts + speeds * t) % 1.0)
            bl = np.searchsorted(pos, boundaries, side="left")
            br = np.searchsorted(pos, boundaries, side="right")
            N = np.where(wrap, n - bl[ii] + br[e_mod], br[e_mod] - bl[ii])
            dev = np.abs(N - apertures[None, :] * n)
            if np.any(dev > bounds[None, :] + 1e-9):
                all_pass = False
            if m > 1:
                r = float(np.max(dev[:, 1:] / scale[None, :]))
                if r > max_ratio:
                    max_ratio = r
        per_trial.append({"trial": trial, "all_pass": all_pass, "max_ratio": max_ratio})
    passed = sum(1 for row in per_trial if row["all_pass"])
    return {
        "n": n,
        "m": m,
        "gamma0": gamma0,
        "trials": trials,
        "seed": seed,
        "rng": RNG_NAME,
        "pass_fraction": passed / trials,
        "max_ratio": max(row["max_ratio"] for row in per_trial),
        "per_trial": per_trial,
    }
