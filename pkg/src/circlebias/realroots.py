"""Sign variations along the lower chain and the many-real-roots driver.

The driver turns a sparse bivariate polynomial into a substitution point
a = r e^{i phi} such that the real part of f(x, a) provably has many distinct
real roots.  The mechanism: write the lower-chain vertex coefficients as
rho_i e^{i alpha_i} at (a_i, b_i); a phase phi is chosen so that the sequence
cos(alpha_i + b_i phi) has many adjacent sign changes; each sign-opposed pair
spans a lower edge whose real-weighted edge polynomial then changes sign on
an interval (d r^{-q}, d' r^{-q}), and for r small enough the remaining terms
are dominated there, so the full real part must cross zero inside.  Distinct
gradients push the intervals apart as r shrinks, making the bracketed roots
distinct.

The interval endpoints d < d' are located constructively by a geometric sign
scan of the weighted edge polynomial at y = 1 (the opposite end-coefficient
signs guarantee a crossing exists).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .newton import (
    SparseBivariatePoly,
    _maybe_flip,
    lower_chain,
    lower_edges,
    newton_polytope,
    substitute_y,
)
from .unipoly import distinct_real_roots, re_part, stable_sign

__all__ = [
    "VertexPhases",
    "RealRootsResult",
    "PhaseSearchError",
    "BracketingError",
    "sign_variations",
    "phase_curve",
    "find_phase",
    "vertex_phases",
    "reduced_phase_inputs",
    "real_roots_driver",
]

DEFAULT_R_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


class PhaseSearchError(RuntimeError):
    """The phase scan did not produce enough sign variations."""


class BracketingError(RuntimeError):
    """No radius in the schedule yielded disjoint sign-change brackets."""


@dataclass(frozen=True)
class VertexPhases:
    """Polar data of the lower-chain vertex coefficients."""

    alphas: tuple  # arguments in [0, 2*pi)
    magnitudes: tuple  # moduli; positive
    y_exponents: tuple  # b_i; adjacent entries differ except at most once


def sign_variations(seq: Sequence[float]) -> int:
    """Adjacent strict sign changes; a zero entry produces no variation."""
    return sum(1 for a, b in zip(seq, seq[1:]) if a * b < 0)


def phase_curve(alphas, ns, grid_steps: Optional[int] = None):
    """(phis, V(phi)) over a uniform grid: variations of cos(alpha_i + phi n_i)."""
    alphas = [float(a) for a in alphas]
    ns = [int(n) for n in ns]
    if len(alphas) != len(ns):
        raise ValueError("alphas and ns must have equal length")
    if any(n < 0 for n in ns):
        raise ValueError("frequencies must be nonnegative integers")
    if any(a == b for a, b in zip(ns, ns[1:])):
        raise ValueError("adjacent frequencies must differ")
    k = len(ns)
    maxn = max(max(ns, default=0), 1)
    if grid_steps is None:
        grid_steps = max(2048, 16 * k * maxn)
    if grid_steps < 8 * maxn:
        raise ValueError(f"grid_steps={grid_steps} is too coarse; need >= {8 * maxn}")
    phis = 2.0 * math.pi * np.arange(grid_steps) / grid_steps
    if k <= 1:
        return phis, np.zeros(grid_steps, dtype=int)
    C = np.cos(np.asarray(alphas)[None, :] + phis[:, None] * np.asarray(ns, float)[None, :])
    V = np.sum(C[:, :-1] * C[:, 1:] < 0, axis=1)
    return phis, V


def find_phase(alphas, ns, grid_steps: Optional[int] = None):
    """Scan phi in [0, 2*pi) maximizing V(cos(alpha_1 + phi n_1), ...).

    For adjacent-distinct nonnegative integers n_i there always is a phi
    with V >= (k-1)/8, so the returned integer count meets ceil((k-1)/8).
    Each cosine has at most 2 n_i sign changes in phi, hence the grid must
    be finer than 8 * max(n).
    """
    phis, V = phase_curve(alphas, ns, grid_steps)
    best = int(np.argmax(V))
    return float(phis[best]), int(V[best])


def vertex_phases(f: SparseBivariatePoly) -> VertexPhases:
    """Polar coefficients along the lower chain of the polytope of f."""
    chain = lower_chain(newton_polytope(f))
    if not chain:
        raise ValueError("polytope has no lower edges")
    alphas, mags, bs = [], [], []
    for v in chain:
        c = f.terms[v]
        alphas.append(float(np.angle(c) % (2.0 * math.pi)))
        mags.append(abs(c))
        bs.append(v[1])
    return VertexPhases(tuple(alphas), tuple(mags), tuple(bs))


def reduced_phase_inputs(vp: VertexPhases):
    """Drop the second member of the single equal-adjacent y-exponent pair.

    Lower-edge gradients are distinct, so at most one edge is horizontal;
    removing one of its endpoints makes the sequence adjacent-distinct,
    which the phase search requires.
    """
    bs = list(vp.y_exponents)
    exceptions = [i for i in range(len(bs) - 1) if bs[i] == bs[i + 1]]
    if len(exceptions) > 1:
        raise RuntimeError("more than one horizontal lower edge is impossible")
    keep = [i for i in range(len(bs)) if not (exceptions and i == exceptions[0] + 1)]
    return [vp.alphas[i] for i in keep], [bs[i] for i in keep]


# ---------------------------------------------------------------- bracketing ----


def _weighted_profile(f, e, phi):
    """Exponents and real weights of the edge terms, evaluated at y = 1.

    Term c x^u y^v contributes Re(c e^{i v phi}) x^u; the substitution
    radius r only rescales these weights by r^v later, which cannot change
    the endpoint sign opposition.
    """
    exps, weights = [], []
    x1, y1 = e.start
    x2, y2 = e.end
    for (u, v), c in f.terms.items():
        if (u - x1) * (y2 - y1) == (v - y1) * (x2 - x1) and x1 <= u <= x2:
            exps.append(u)
            weights.append((c * complex(math.cos(v * phi), math.sin(v * phi))).real)
    order = np.argsort(exps)
    return [exps[i] for i in order], [weights[i] for i in order]


def _dense(exps, weights):
    c = np.zeros(max(exps) + 1)
    for u, w in zip(exps, weights):
        c[u] += w
    return c


def _first_flip(coeffs, grid):
    """First adjacent pair of opposite nonzero signs along the grid.

    Points where the sign is ambiguous (a grid point can sit exactly on a
    root) are skipped, so a crossing sitting on the grid is still bracketed
    by its flanks.
    """
    prev = None
    for x in grid:
        s = stable_sign(coeffs, float(x))
        if s == 0:
            continue
        if prev is not None and prev[1] * s < 0:
            return prev[0], float(x)
        prev = (float(x), s)
    return None


def _bracket_positive_root(coeffs, lo=1e-3, hi=1e3, per_decade=4):
    """Geometric sign scan for d < d' with opposite polynomial signs.

    The grid is deliberately coarse: the bracket endpoints should stay well
    away from the crossing so the higher terms, which the small-radius
    substitution suppresses, cannot flip the endpoint signs.
    """
    for expand in range(4):
        a, b = lo * 10.0 ** (-3 * expand), hi * 10.0 ** (3 * expand)
        npts = int(per_decade * math.log10(b / a)) + 1
        flip = _first_flip(coeffs, np.geomspace(a, b, npts))
        if flip is not None:
            return flip
    raise BracketingError("no sign change of the weighted edge polynomial found")


@dataclass(frozen=True)
class RealRootsResult:
    a: complex
    phi: float
    r: float
    count: int
    intervals: tuple  # disjoint (lo, hi) with a sign change of Re(poly(x, a)) inside
    s: int  # lower-edge count after the optimal flip
    bound: int  # ceil((s-1)/8)
    variations: int  # sign variations delivered by the phase search
    flipped: bool
    fallback: bool
    poly: SparseBivariatePoly  # the polynomial the result refers to


def real_roots_driver(
    f: SparseBivariatePoly,
    r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
    grid_steps: Optional[int] = None,
    scan_points: int = 33,
) -> RealRootsResult:
    """Find a = r e^{i phi} so that Re(poly(x, a)) has many distinct real roots.

    The result's `poly` field records which polynomial the count refers to:
    the input, or its y-flip when that exposes more lower edges (flipping
    changes the real part, so the certificate is stated for the flipped
    polynomial).  With fewer than two lower edges the driver degrades to a
    direct numeric real-root count at the first scheduled radius.
    """
    if not f.terms:
        raise ValueError("empty polynomial")
    g, P, flipped = _maybe_flip(f)
    les = lower_edges(P)
    s = len(les)
    if s < 2:
        r0 = float(r_schedule[0])
        p = re_part(substitute_y(g, complex(r0)))
        count = 0 if p.is_zero else distinct_real_roots(p)
        return RealRootsResult(
            a=complex(r0),
            phi=0.0,
            r=r0,
            count=count,
            intervals=(),
            s=s,
            bound=0,
            variations=0,
            flipped=flipped,
            fallback=True,
            poly=g,
        )

    vp = vertex_phases(g)
    red_alphas, red_bs = reduced_phase_inputs(vp)
    phis, V = phase_curve(red_alphas, red_bs, grid_steps)
    variations = int(V.max())
    # among the phases achieving the maximal variation count, prefer the one
    # whose vertex cosines stay farthest from zero: a near-vanishing weight
    # makes the sign-change bracket numerically hopeless
    cand = phis[V == variations]
    C = np.abs(
        np.cos(
            np.asarray(vp.alphas)[None, :]
            + cand[:, None] * np.asarray(vp.y_exponents, dtype=float)[None, :]
        )
    )
    phi = float(cand[int(np.argmax(C.min(axis=1)))])

    cosines = [math.cos(a + b * phi) for a, b in zip(vp.alphas, vp.y_exponents)]
    usable = [i for i in range(s) if cosines[i] * cosines[i + 1] < 0]
    bound = math.ceil((s - 1) / 8)
    if len(usable) < bound:
        raise PhaseSearchError(
            f"phase phi={phi:.6f} yields {len(usable)} sign-opposed edges, "
            f"fewer than the guaranteed {bound}"
        )

    brackets = []
    for i in usable:
        exps, weights = _weighted_profile(g, les[i], phi)
        d, dp = _bracket_positive_root(_dense(exps, weights))
        brackets.append((i, float(les[i].gradient), d, dp))

    last_failure = None
    for r in r_schedule:
        r = float(r)
        a = r * complex(math.cos(phi), math.sin(phi))
        pr = re_part(substitute_y(g, a))
        if pr.is_zero:
            last_failure = f"Re part vanished at r={r}"
            continue
        coeffs = pr.coeffs.real
        witnesses = []
        ok = True
        for i, q, d, dp in brackets:
            lo, hi = d * r ** (-q), dp * r ** (-q)
            found = _first_flip(coeffs, np.geomspace(lo, hi, scan_points))
            if found is None:
                ok = False
                last_failure = f"edge {i}: no sign change in ({lo:.3e}, {hi:.3e}) at r={r}"
                break
            witnesses.append(found)
        if not ok:
            continue
        witnesses.sort()
        disjoint = all(a2 > b1 for (_, b1), (a2, _) in zip(witnesses, witnesses[1:]))
        if not disjoint:
            last_failure = f"witness intervals overlap at r={r}"
            continue
        count = len(witnesses)
        if count < bound:
            raise PhaseSearchError(f"bracketed {count} roots, below the bound {bound}")
        return RealRootsResult(
            a=a,
            phi=phi,
            r=r,
            count=count,
            intervals=tuple(witnesses),
            s=s,
            bound=bound,
            variations=variations,
            flipped=flipped,
            fallback=False,
            poly=g,
        )
    raise BracketingError(
        f"radius schedule exhausted without disjoint brackets (last: {last_failure})"
    )
