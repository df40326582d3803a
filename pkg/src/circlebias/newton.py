"""Sparse bivariate polynomials, their Newton polytopes, and edge analysis.

The polytope of f is the convex hull of the exponent pairs of its nonzero
terms, computed in exact integer arithmetic (orientation by cross products,
monotone chain); misclassifying an edge would corrupt everything downstream.
Edges are classified lower / upper / vertical: a lower edge supports the
polytope from below, and the lower-edge gradients strictly increase left to
right.

For small |y|, the nonzero roots in x of f(x, y) split into annuli, one per
lower edge with gradient q: the edge polynomial f_e (terms on the edge, with
f_e* its x-shift to start at x^0) has roots of magnitude ~ |y|^(-q), and the
product f* of the f_e* over all lower edges reproduces the root angles of f
up to a vanishing error.  ``bias_search`` exploits this to look for a
substitution point a with large root-angle bias, and ``edge_approx_check``
verifies the annulus structure and the angle matching directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .circle import BiasReport
from .runners import RunnerSystem
from .unipoly import DensePoly, bias_of_poly, roots

__all__ = [
    "SparseBivariatePoly",
    "Edge",
    "NewtonPolytope",
    "newton_polytope",
    "lower_edges",
    "upper_edges",
    "lower_chain",
    "edge_poly",
    "star_poly",
    "f_star",
    "y_power_substitute",
    "y_invert",
    "substitute_y",
    "runner_poly",
    "select_radius",
    "bias_search",
    "BiasSearchResult",
    "edge_approx_check",
]

MUL_DROP_TOL = 1e-12
MAX_RUNNERS = 64


class SparseBivariatePoly:
    """Map (i, j) -> nonzero complex coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        clean = {}
        for (i, j), c in dict(terms).items():
            if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
                raise ValueError(f"exponents must be integers, got ({i!r}, {j!r})")
            c = complex(c)
            if c != 0:
                clean[(int(i), int(j))] = c
        self.terms = clean

    @property
    def support(self):
        return set(self.terms)

    @property
    def x_degree(self) -> int:
        return max(i for i, _ in self.terms) if self.terms else 0

    @property
    def x_valuation(self) -> int:
        return min(i for i, _ in self.terms) if self.terms else 0

    @property
    def y_degree(self) -> int:
        return max(j for _, j in self.terms) if self.terms else 0

    def __eq__(self, other):
        return isinstance(other, SparseBivariatePoly) and self.terms == other.terms

    def __repr__(self):
        return f"SparseBivariatePoly({len(self.terms)} terms)"

    def __mul__(self, other):
        return SparseBivariatePoly.product([self, other])

    @classmethod
    def product(cls, factors, drop_tol: float = MUL_DROP_TOL):
        """Expanded product via a dense 2-d accumulator.

        Coefficients whose magnitude falls below drop_tol times the largest
        one are dropped: they are cancellation residue, and keeping them
        would pollute the support and hence the polytope.
        """
        mats = []
        for f in factors:
            t = f.terms if isinstance(f, cls) else dict(f)
            if not t:
                return cls({})
            mats.append(t)
        xo = sum(min(i for i, _ in t) for t in mats)
        yo = sum(min(j for _, j in t) for t in mats)
        xd = sum(max(i for i, _ in t) for t in mats) - xo
        yd = sum(max(j for _, j in t) for t in mats) - yo
        A = np.zeros((xd + 1, yd + 1), dtype=complex)
        A[0, 0] = 1.0
        cx = cy = 0
        for t in mats:
            fx = min(i for i, _ in t)
            fy = min(j for _, j in t)
            B = np.zeros_like(A)
            for (i, j), c in t.items():
                B[i - fx : i - fx + cx + 1, j - fy : j - fy + cy + 1] += c * A[: cx + 1, : cy + 1]
            A = B
            cx += max(i for i, _ in t) - fx
            cy += max(j for _, j in t) - fy
        mag = np.abs(A)
        cutoff = drop_tol * float(mag.max())
        ii, jj = np.nonzero(mag > cutoff)
        return cls({(int(i) + xo, int(j) + yo): complex(A[i, j]) for i, j in zip(ii, jj)})


@dataclass(frozen=True)
class Edge:
    """Polytope edge; lower/upper edges run left to right, verticals upward."""

    start: tuple
    end: tuple
    kind: str  # "lower" | "upper" | "vertical"
    gradient: Optional[Fraction]

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("degenerate edge")


@dataclass(frozen=True)
class NewtonPolytope:
    vertices: tuple  # extreme points, counterclockwise
    edges: tuple


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _chain(points):
    h = []
    for p in points:
        while len(h) >= 2 and _cross(h[-2], h[-1], p) <= 0:
            h.pop()
        h.append(p)
    return h


def _classify(a, b):
    dx = b[0] - a[0]
    if dx > 0:
        return Edge(a, b, "lower", Fraction(b[1] - a[1], dx))
    if dx < 0:
        return Edge(b, a, "upper", Fraction(a[1] - b[1], -dx))
    lo, hi = (a, b) if a[1] < b[1] else (b, a)
    return Edge(lo, hi, "vertical", None)


def newton_polytope(f: SparseBivariatePoly) -> NewtonPolytope:
    """Exact integer convex hull of the support, with classified edges."""
    if not f.terms:
        raise ValueError("empty polynomial has no polytope")
    lo, hi = {}, {}
    for i, j in f.terms:
        if i not in lo or j < lo[i]:
            lo[i] = j
        if i not in hi or j > hi[i]:
            hi[i] = j
    pts = sorted({(i, lo[i]) for i in lo} | {(i, hi[i]) for i in hi})
    if len(pts) == 1:
        return NewtonPolytope(vertices=(pts[0],), edges=())
    lower = _chain(pts)
    upper = _chain(pts[::-1])
    if len(lower) == 2 and len(upper) == 2 and lower[0] == upper[1] and lower[1] == upper[0]:
        # collinear support: a single segment edge
        return NewtonPolytope(vertices=tuple(lower), edges=(_classify(lower[0], lower[1]),))
    vertices = tuple(lower[:-1] + upper[:-1])
    edges = tuple(_classify(a, b) for a, b in zip(vertices, vertices[1:] + vertices[:1]))
    return NewtonPolytope(vertices=vertices, edges=edges)


def _is_segment(P: NewtonPolytope) -> bool:
    return len(P.vertices) == 2


def lower_edges(P: NewtonPolytope):
    """Lower chain left to right; gradients strictly increase."""
    return sorted((e for e in P.edges if e.kind == "lower"), key=lambda e: e.start[0])


def upper_edges(P: NewtonPolytope):
    """Upper chain left to right.

    A non-vertical segment polytope is supported by its own line from both
    sides, so its single edge counts as lower and upper alike.
    """
    if _is_segment(P) and P.edges[0].kind == "lower":
        return [P.edges[0]]
    return sorted((e for e in P.edges if e.kind == "upper"), key=lambda e: e.start[0])


def lower_chain(P: NewtonPolytope):
    """Vertices (a_1,b_1)..(a_{s+1},b_{s+1}) along the lower edges."""
    les = lower_edges(P)
    if not les:
        return []
    return [les[0].start] + [e.end for e in les]


# ------------------------------------------------------------ edge algebra ----


def _on_segment(pt, a, b):
    if _cross(a, b, pt) != 0:
        return False
    return min(a[0], b[0]) <= pt[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= pt[1] <= max(a[1], b[1])


def _require_edge(f, e):
    P = newton_polytope(f)
    for cand in P.edges:
        if (cand.start, cand.end) == (e.start, e.end):
            return
    raise ValueError(f"{e} is not an edge of the Newton polytope")


def edge_poly(f: SparseBivariatePoly, e: Edge) -> SparseBivariatePoly:
    """Restriction of f to the terms lying on edge e."""
    _require_edge(f, e)
    kept = {k: c for k, c in f.terms.items() if _on_segment(k, e.start, e.end)}
    return SparseBivariatePoly(kept)


def star_poly(f: SparseBivariatePoly, e: Edge) -> SparseBivariatePoly:
    """Edge polynomial divided by x^a, a the left endpoint, so x-support starts at 0."""
    fe = edge_poly(f, e)
    a = e.start[0]
    return SparseBivariatePoly({(i - a, j): c for (i, j), c in fe.terms.items()})


def _integral_gradients(les):
    dens = [e.gradient.denominator for e in les]
    m = 1
    for d in dens:
        m = m * d // math.gcd(m, d)
    return m


def f_star(f: SparseBivariatePoly) -> SparseBivariatePoly:
    """Product of the x-shifted edge polynomials over all lower edges.

    Requires integral lower-edge gradients; clear denominators first with
    y_power_substitute(f, m) for m the lcm of the gradient denominators.
    """
    P = newton_polytope(f)
    les = lower_edges(P)
    if not les:
        return SparseBivariatePoly({(0, 0): 1.0})
    m = _integral_gradients(les)
    if m != 1:
        raise ValueError(
            f"non-integral lower-edge gradient; apply y_power_substitute(f, {m}) first"
        )
    return SparseBivariatePoly.product([star_poly(f, e) for e in les])


def y_power_substitute(f: SparseBivariatePoly, m: int) -> SparseBivariatePoly:
    """y -> y^m on the exponents; bijective on terms."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return SparseBivariatePoly({(i, j * m): c for (i, j), c in f.terms.items()})


def y_invert(f: SparseBivariatePoly, m: int) -> SparseBivariatePoly:
    """y^m * f(x, 1/y): exponent flip j -> m - j; needs m >= max j."""
    if f.terms and m < f.y_degree:
        raise ValueError(f"m={m} is below the maximal y-exponent {f.y_degree}")
    return SparseBivariatePoly({(i, m - j): c for (i, j), c in f.terms.items()})


def substitute_y(f: SparseBivariatePoly, a: complex) -> DensePoly:
    """The univariate polynomial f(x, a), dense in x."""
    if not f.terms:
        return DensePoly([0])
    keys = np.array(list(f.terms.keys()), dtype=np.int64)
    vals = np.array(list(f.terms.values()), dtype=complex)
    I, J = keys[:, 0], keys[:, 1]
    if np.any(J < 0) and a == 0:
        raise ValueError("negative y-exponents cannot be evaluated at a=0")
    out = np.zeros(int(I.max()) + 1, dtype=complex)
    np.add.at(out, I, vals * np.power(complex(a), J))
    return DensePoly(out)


# ------------------------------------------------------------ runner bridge ----


def runner_poly(sys: RunnerSystem, real: bool = False) -> SparseBivariatePoly:
    """Expanded product of (x - e^(2 pi i s_j) y^(v_j)) over the runners.

    With real=True the conjugate-product sibling is built instead, factor
    (x^2 - 2 cos(2 pi s_j) x y^(v_j) + y^(2 v_j)), which has real
    coefficients.  The polytope has exactly 2k vertices for k distinct
    speeds.
    """
    if sys.n > MAX_RUNNERS:
        raise ValueError(f"n={sys.n} exceeds the expansion guard {MAX_RUNNERS}")
    factors = []
    for s, v in zip(sys.starts, sys.speeds):
        if not (isinstance(v, (int, np.integer)) or (isinstance(v, Fraction) and v.denominator == 1)):
            raise ValueError(f"speeds must be integers, got {v!r}")
        v = int(v)
        if v < 0:
            raise ValueError("speeds must be nonnegative")
        theta = 2.0 * math.pi * float(s)
        if real:
            factors.append({(2, 0): 1.0, (1, v): -2.0 * math.cos(theta), (0, 2 * v): 1.0})
        else:
            factors.append({(1, 0): 1.0, (0, v): -complex(math.cos(theta), math.sin(theta))})
    return SparseBivariatePoly.product(factors)


# -------------------------------------------------------- annulus structure ----


@dataclass(frozen=True)
class EdgeAnnulus:
    gradient: int
    degree: int  # expected root count = x-extent of the edge
    mod_min: float  # root magnitudes of f_e(x, re^(i phi)) lie in
    mod_max: float  # [mod_min * r^-q, mod_max * r^-q]
    angles: tuple  # root angles of f_e*(x, e^(i phi)) at phi = 0, i.e. arg(zeta_v)


def _edge_profile(f, e):
    """Coefficients c_u of the edge along its lattice step (1, q)."""
    fe = edge_poly(f, e)
    a1, b1 = e.start
    q = int(e.gradient)
    width = e.end[0] - a1
    prof = np.zeros(width + 1, dtype=complex)
    for (i, j), c in fe.terms.items():
        prof[i - a1] = c
    return prof, q


def edge_annuli(f: SparseBivariatePoly, tol: float = 1e-12):
    """Per lower edge: predicted root annulus and angle pattern.

    Factoring the edge polynomial as a polynomial in x*y^q shows its roots
    in x have magnitude |zeta| * |y|^(-q) and argument arg(zeta) - q*arg(y),
    with zeta running over the roots of the profile coefficients.
    """
    les = lower_edges(newton_polytope(f))
    if any(e.gradient.denominator != 1 for e in les):
        m = _integral_gradients(les)
        raise ValueError(
            f"non-integral lower-edge gradient; apply y_power_substitute(f, {m}) first"
        )
    out = []
    for e in les:
        prof, q = _edge_profile(f, e)
        zs = roots(DensePoly(prof), tol=max(tol, 1e-12)).roots
        mods = np.abs(zs)
        out.append(
            EdgeAnnulus(
                gradient=q,
                degree=len(prof) - 1,
                mod_min=float(mods.min()),
                mod_max=float(mods.max()),
                angles=tuple(float(t) for t in np.angle(zs)),
            )
        )
    return out


def select_radius(
    f: SparseBivariatePoly,
    start: float = 1e-2,
    floor: float = 1e-6,
    separation: float = 4.0,
) -> float:
    """Halve r from `start` until consecutive annuli are separated by
    `separation` in magnitude (or the floor is reached)."""
    try:
        ann = edge_annuli(f)
    except ValueError:
        return start
    if len(ann) < 2:
        return start
    r = start
    while r > floor:
        ok = True
        for a, b in zip(ann, ann[1:]):
            if b.mod_min * r ** (-b.gradient) < separation * a.mod_max * r ** (-a.gradient):
                ok = False
                break
        if ok:
            return r
        r *= 0.5
    return r


# ------------------------------------------------------------- bias search ----


@dataclass(frozen=True)
class BiasSearchResult:
    a: complex
    report: BiasReport
    rows: tuple  # (phi, bias of f(x, radius e^{i phi}), bias of f*(x, e^{i phi}))
    flipped: bool
    s: int  # lower-edge count after the optimal flip
    radius: float


def _maybe_flip(f):
    """Flip y -> 1/y when that exposes more lower edges.

    The flip multiplies by a power of y, which does not move the nonzero
    x-roots, and substituting a into the flipped polynomial is the same as
    substituting 1/a into the original.
    """
    P = newton_polytope(f)
    s = len(lower_edges(P))
    if not f.terms:
        return f, P, False
    flip = y_invert(f, f.y_degree)
    Pf = newton_polytope(flip)
    if len(lower_edges(Pf)) > s:
        return flip, Pf, True
    return f, P, False


def bias_search(
    f: SparseBivariatePoly,
    phi_steps: int = 64,
    radius: Optional[float] = None,
    threads: Optional[int] = None,
    tol: float = 1e-10,
) -> BiasSearchResult:
    """Scan substitution points a = radius * e^(i phi) for large root-angle bias.

    Radius defaults to the annulus-separating value of ``select_radius``;
    pass radius=1.0 for work on the unit circle (runner correspondence).
    Alongside the bias of f(x, a) the sweep records the bias of the
    edge-product approximation f*(x, e^(i phi)).  The returned point refers
    to the polynomial as given: if the search flipped y -> 1/y internally,
    the reported a is inverted back.
    """
    if phi_steps < 1:
        raise ValueError("phi_steps must be >= 1")
    if not f.terms:
        raise ValueError("empty polynomial")
    g, P, flipped = _maybe_flip(f)
    les = lower_edges(P)
    s = len(les)
    if radius is None:
        radius = select_radius(g)
    if radius <= 0:
        raise ValueError("radius must be positive")
    m = _integral_gradients(les) if les else 1
    gg = g if m == 1 else y_power_substitute(g, m)
    fs = f_star(gg)
    fs_has_roots = fs.x_degree > 0

    def one(l):
        phi = 2.0 * math.pi * l / phi_steps
        a = radius * complex(math.cos(phi), math.sin(phi))
        try:
            rep = bias_of_poly(substitute_y(g, a), tol=tol)
        except ValueError:
            rep = None
        star = None
        if fs_has_roots:
            u = complex(math.cos(phi), math.sin(phi))
            try:
                star = float(bias_of_poly(substitute_y(fs, u), tol=tol).bias)
            except ValueError:
                star = None
        return phi, a, rep, star

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(phi_steps)))
    else:
        results = [one(l) for l in range(phi_steps)]

    rows = tuple(
        (phi, None if rep is None else float(rep.bias), star) for phi, _, rep, star in results
    )
    best = None
    for phi, a, rep, star in results:
        if rep is not None and (best is None or rep.bias > best[2].bias):
            best = (phi, a, rep)
    if best is None:
        raise ValueError("no substitution point produced nonzero roots")
    _, a, rep = best
    if flipped:
        a = 1.0 / a
    return BiasSearchResult(a=a, report=rep, rows=rows, flipped=flipped, s=s, radius=radius)


# -------------------------------------------------------- annulus validation ----


def _wrap_angle(x):
    return abs((x + math.pi) % (2.0 * math.pi) - math.pi)


def _match_angles(observed, predicted):
    """Best cyclic matching of two equal-length circular angle lists."""
    obs = sorted(observed)
    pred = sorted(predicted)
    d = len(obs)
    if d == 0:
        return 0.0
    best = math.inf
    for shift in range(d):
        worst = max(_wrap_angle(obs[(v + shift) % d] - pred[v]) for v in range(d))
        best = min(best, worst)
    return best


def edge_approx_check(
    f: SparseBivariatePoly,
    phi: float,
    r: Optional[float] = None,
    eps: float = 0.5,
    tol: float = 1e-10,
) -> dict:
    """Compare the roots of f(x, r e^{i phi}) with the edge-product forecast.

    Groups the computed roots into the magnitude annuli predicted per lower
    edge, reports occupancy against the expected count, matches the roots
    within each annulus to the forecast angles, and reports the bias gap
    |B(f(x, re^{i phi})) - B(f*(x, e^{i phi}))|.  Occupancy mismatch is
    reported, not fatal: it signals that r is not small enough.
    """
    if not 0 < eps < math.pi:
        raise ValueError("eps must be in (0, pi)")
    ann = edge_annuli(f)  # raises on non-integral gradients
    if r is None:
        r = select_radius(f)
    if not 0 < r:
        raise ValueError("r must be positive")
    a = r * complex(math.cos(phi), math.sin(phi))
    rs = roots(substitute_y(f, a), tol=tol)
    zs = rs.roots
    bias_f = float(bias_of_poly(substitute_y(f, a), tol=tol).bias)
    fs = f_star(f)
    u = complex(math.cos(phi), math.sin(phi))
    bias_star = float(bias_of_poly(substitute_y(fs, u), tol=tol).bias)

    lo = [an.mod_min * r ** (-an.gradient) for an in ann]
    hi = [an.mod_max * r ** (-an.gradient) for an in ann]
    cuts = [math.sqrt(hi[i] * lo[i + 1]) for i in range(len(ann) - 1)]
    mods = np.abs(zs)
    assign = np.searchsorted(np.array(cuts), mods)
    annuli_report = []
    max_mismatch = 0.0
    occupancy_ok = True
    for idx, an in enumerate(ann):
        members = zs[assign == idx]
        ok = len(members) == an.degree
        occupancy_ok &= ok
        mismatch = None
        if ok:
            predicted = [t - an.gradient * phi for t in an.angles]
            mismatch = _match_angles(list(np.angle(members)), predicted)
            max_mismatch = max(max_mismatch, mismatch)
        annuli_report.append(
            {
                "gradient": an.gradient,
                "expected": an.degree,
                "observed": int(len(members)),
                "mod_lo": lo[idx],
                "mod_hi": hi[idx],
                "max_arg_mismatch": mismatch,
            }
        )
    return {
        "phi": phi,
        "r": r,
        "eps": eps,
        "bias_f": bias_f,
        "bias_star": bias_star,
        "gap": abs(bias_f - bias_star),
        "annuli": annuli_report,
        "occupancy_ok": bool(occupancy_ok),
        "max_arg_mismatch": max_mismatch if occupancy_ok else None,
        "eps_matched": bool(occupancy_ok and max_mismatch < eps),
    }
