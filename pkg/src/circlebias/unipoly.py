"""Univariate complex polynomials: roots, root-angle bias, real-root counts.

Roots come from a simultaneous Aberth-Ehrlich iteration whose starting points
are read off the Newton polygon of the coefficient moduli: the upper convex
hull of (k, log|a_k|) splits the index range into segments whose slopes
estimate the root moduli.  This keeps the iteration alive when coefficients
span many orders of magnitude, which is the normal situation for polynomials
obtained by substituting a small value into one variable of a sparse
bivariate polynomial.  Outside the unit disc the Newton correction is
evaluated through the reversed polynomial at 1/z, so huge roots never
overflow.

The bias of a polynomial is the sector bias of the normalized arguments of
its nonzero roots, computed by the exact sweep in :mod:`circlebias.circle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle import BiasReport, exact_bias

__all__ = [
    "DensePoly",
    "RootSet",
    "RootFindingError",
    "RootCountMismatch",
    "as_dense",
    "roots",
    "bias_of_poly",
    "re_part",
    "distinct_real_roots",
    "stable_sign",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 200
DEFAULT_CLUSTER_TOL = 1e-6


class RootFindingError(RuntimeError):
    """Aberth iteration ran out of iterations; carries the best state."""

    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


class RootCountMismatch(RuntimeError):
    """Sign-change evidence contradicts the clustered real-root count."""


class DensePoly:
    """Dense coefficient list a_0..a_d with exact trailing zeros stripped."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        nz = np.nonzero(c)[0]
        self.coeffs = c[: nz[-1] + 1].copy() if len(nz) else c[:1].copy()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __call__(self, z):
        return np.polyval(self.coeffs[::-1], z)

    def __repr__(self):
        return f"DensePoly(degree={self.degree})"


def as_dense(f) -> DensePoly:
    return f if isinstance(f, DensePoly) else DensePoly(f)


@dataclass(frozen=True)
class RootSet:
    """Nonzero roots, the multiplicity of the root at zero, and residuals.

    residuals[i] is |f(root_i)| / sum_k |a_k| |root_i|^k, the standard
    backward-error gauge.
    """

    roots: np.ndarray
    zero_multiplicity: int
    residuals: np.ndarray


# ----------------------------------------------------------- evaluation core ----


def _newton_state(p, abs_p, z):
    """Vectorized (p/p', residual) at points z, overflow-safe.

    For |z| > 1 everything is routed through the reversed polynomial at
    w = 1/z using p'/p = d/z - q'(w)/(q(w) z^2).
    """
    d = len(p) - 1
    q = p[::-1]
    abs_q = abs_p[::-1]
    ratio = np.zeros_like(z)
    resid = np.zeros(len(z))
    inner = np.abs(z) <= 1.0
    for sel, coeffs, acoeffs, reversed_form in (
        (inner, p, abs_p, False),
        (~inner, q, abs_q, True),
    ):
        if not sel.any():
            continue
        zz = z[sel] if not reversed_form else 1.0 / z[sel]
        b = np.full(zz.shape, coeffs[-1], dtype=complex)
        db = np.zeros(zz.shape, dtype=complex)
        s = np.full(zz.shape, acoeffs[-1], dtype=float)
        azz = np.abs(zz)
        for k in range(d - 1, -1, -1):
            db = db * zz + b
            b = b * zz + coeffs[k]
            s = s * azz + acoeffs[k]
        resid[sel] = np.abs(b) / s
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if not reversed_form:
                r = b / np.where(db == 0, 1e-300, db)
            else:
                zo = z[sel]
                inv = d / zo - (db / np.where(b == 0, 1e-300, b)) / (zo * zo)
                r = 1.0 / np.where(inv == 0, 1e-300, inv)
                r = np.where(b == 0, 0.0, r)
        ratio[sel] = np.where(b == 0, 0.0, r)
    return ratio, resid


def _initial_points(p):
    """Aberth starting points on the Newton-polygon annuli of |a_k|."""
    d = len(p) - 1
    ks = np.nonzero(p)[0]
    pts = [(int(k), math.log(abs(p[k]))) for k in ks]
    upper = []
    for pt in pts:
        while len(upper) >= 2:
            (ox, oy), (ax, ay) = upper[-2], upper[-1]
            if (ax - ox) * (pt[1] - oy) - (ay - oy) * (pt[0] - ox) >= 0:
                upper.pop()
            else:
                break
        upper.append(pt)
    z0 = np.empty(d, dtype=complex)
    pos = 0
    for seg, ((x1, y1), (x2, y2)) in enumerate(zip(upper, upper[1:])):
        cnt = x2 - x1
        radius = math.exp((y1 - y2) / cnt)
        for j in range(cnt):
            theta = 2.0 * math.pi * j / cnt + 0.7 + 0.25 * seg
            z0[pos] = radius * complex(math.cos(theta), math.sin(theta))
            pos += 1
    # leading "zeros within tolerance" may leave uncovered slots; spread them
    while pos < d:
        theta = 0.9 * pos
        z0[pos] = (1.0 + 0.1 * pos) * complex(math.cos(theta), math.sin(theta))
        pos += 1
    return z0


def _quadratic(p):
    c, b, a = p[0], p[1], p[2]
    disc = b * b - 4.0 * a * c
    s = np.sqrt(complex(disc))
    if (b.conjugate() * s).real < 0:
        s = -s
    q = -(b + s) / 2.0
    return np.array([q / a, c / q])


def _aberth(p, tol, max_iters):
    d = len(p) - 1
    abs_p = np.abs(p)
    z = _initial_points(p)
    converged = np.zeros(d, dtype=bool)
    for _ in range(max_iters):
        ratio, resid = _newton_state(p, abs_p, z)
        converged |= resid <= tol
        if converged.all():
            return z, resid
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            S = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - ratio * S
        denom = np.where(np.abs(denom) < 1e-30, 1e-30, denom)
        step = ratio / denom
        active = ~converged
        z[active] -= step[active]
        bad = ~np.isfinite(z)
        if bad.any():
            idx = np.nonzero(bad)[0]
            z[idx] = [(1.0 + 0.2 * i) * np.exp(0.9j * i) for i in idx]
    ratio, resid = _newton_state(p, abs_p, z)
    if (resid <= tol).all():
        return z, resid
    raise RootFindingError(
        f"no convergence after {max_iters} iterations "
        f"(worst residual {float(resid.max()):.3e})",
        roots=z,
        residuals=resid,
    )


def _derivative(c):
    return c[1:] * np.arange(1, len(c))


def _polish_clusters(p, abs_p, z, tol, radius=1e-4):
    """Replace root clusters by a Newton-polished multiple-root candidate.

    A residual-converged cluster of size mu around a true mu-fold root is
    only accurate to about tol^(1/mu); the mu-fold root itself is a simple
    root of the (mu-1)-th derivative, where Newton recovers it to machine
    accuracy.  The collapse is kept only when the replicated candidate still
    satisfies the residual contract, so genuinely distinct close roots are
    left alone.
    """
    d = len(z)
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(d):
        for j in range(i + 1, d):
            if abs(z[i] - z[j]) <= radius * max(abs(z[i]), abs(z[j])):
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    groups = {}
    for i in range(d):
        groups.setdefault(find(i), []).append(i)
    out = z.copy()
    for idx in groups.values():
        mu = len(idx)
        if mu < 2:
            continue
        q = p
        for _ in range(mu - 1):
            q = _derivative(q)
        if len(q) < 2:
            continue
        absq = np.abs(q)
        c = np.array([np.mean(z[idx])])
        for _ in range(60):
            ratio, _ = _newton_state(q, absq, c)
            c[0] -= ratio[0]
            if abs(ratio[0]) <= 1e-15 * (1.0 + abs(c[0])):
                break
        if not np.isfinite(c[0]):
            continue
        candidate = np.full(mu, c[0])
        _, resid = _newton_state(p, abs_p, candidate)
        if float(resid.max()) <= tol:
            out[idx] = c[0]
    return out


def _realify(z, p, abs_p, tol, pair_tol=1e-6):
    """For real-coefficient input, pair conjugates exactly and snap singles.

    Non-real roots of a real polynomial must come in conjugate pairs, so a
    near-real root without a partner is real.  A partner is accepted only
    when the conjugate mismatch is small relative to the distance from the
    real axis: two distinct real roots carrying opposite-sign imaginary dust
    must not be mistaken for a pair.  Matched pairs are symmetrized to exact
    conjugates; any adjustment that pushes a residual above tol is reverted.
    """
    z = z.copy()
    used = np.zeros(len(z), dtype=bool)
    order = np.argsort(-np.abs(z.imag))
    for i in order:
        if used[i] or z[i].imag == 0:
            continue
        best, best_d = -1, np.inf
        target = z[i].conjugate()
        for j in range(len(z)):
            if j == i or used[j] or z[j].imag * z[i].imag >= 0:
                continue
            dist = abs(z[j] - target)
            if dist < best_d:
                best, best_d = j, dist
        if best >= 0 and best_d <= 0.5 * abs(z[i].imag) + 1e-13 * (1.0 + abs(z[i])):
            mid = (z[i] + z[best].conjugate()) / 2.0
            adjusted = np.array([mid, mid.conjugate()])
            _, resid = _newton_state(p, abs_p, adjusted)
            if float(resid.max()) <= tol:
                z[i], z[best] = mid, mid.conjugate()
                used[i] = used[best] = True
    snapped = z.copy()
    for i in range(len(z)):
        if not used[i] and z[i].imag != 0 and abs(z[i].imag) <= pair_tol * (1.0 + abs(z[i])):
            snapped[i] = complex(z[i].real, 0.0)
    _, resid = _newton_state(p, abs_p, snapped)
    revert = resid > tol
    snapped[revert] = z[revert]
    return snapped


def roots(f, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> RootSet:
    """All roots of f: the power of x is factored out, the rest is found by
    the polygon-initialized Aberth iteration.

    The x^m factor counts exactly-zero low-order coefficients only: a tiny
    nonzero coefficient is a genuinely tiny root, not noise, on the
    small-substitution polynomials this is built for.  Every returned
    nonzero root satisfies |f(root)| <= tol * scale(root) with scale the
    coefficient-magnitude envelope; otherwise RootFindingError is raised
    with the best iterate attached.
    """
    c = as_dense(f).coeffs
    amax = float(np.max(np.abs(c)))
    if amax == 0.0:
        raise ValueError("zero polynomial has no root set")
    if len(c) - 1 < 1:
        raise ValueError("degree must be >= 1")
    m = 0
    while c[m] == 0:
        m += 1
    p = c[m:]
    if len(p) <= 1:
        return RootSet(np.array([], dtype=complex), m, np.array([], dtype=float))
    d = len(p) - 1
    abs_p = np.abs(p)
    if d == 1:
        z = np.array([-p[0] / p[1]])
        _, resid = _newton_state(p, abs_p, z)
    elif d == 2:
        z = _quadratic(p)
        _, resid = _newton_state(p, abs_p, z)
        if resid.max() > tol:
            z, resid = _aberth(p, tol, max_iters)
    else:
        z, resid = _aberth(p, tol, max_iters)
    if d >= 2:
        z = _polish_clusters(p, abs_p, z, tol)
    if np.all(c.imag == 0):
        z = _realify(z, p, abs_p, tol)
    order = np.lexsort((z.imag, z.real))
    z = z[order]
    _, resid = _newton_state(p, abs_p, z)
    return RootSet(roots=z, zero_multiplicity=m, residuals=resid)


# ---------------------------------------------------------------- bias of f ----


def bias_of_poly(f, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> BiasReport:
    """Sector bias of the normalized arguments of the nonzero roots of f."""
    rs = roots(f, tol=tol, max_iters=max_iters)
    if len(rs.roots) == 0:
        raise ValueError("polynomial has no nonzero root, bias undefined")
    angles = (np.angle(rs.roots) / (2.0 * math.pi)) % 1.0
    return exact_bias([float(a) for a in angles])


def re_part(f) -> DensePoly:
    """Coefficientwise real part (the degree may drop)."""
    return DensePoly(np.real(as_dense(f).coeffs))


# ------------------------------------------------------------- real roots ----


def stable_sign(coeffs, x: float, rel_eps: float = 1e-14) -> int:
    """Sign of sum_k c_k x^k for real c and real x, computed in log space.

    Safe for |x| far outside float range of x**deg; returns 0 when the sum
    is below rel_eps times the absolute-value sum (ambiguous).
    """
    c = np.asarray(coeffs, dtype=float)
    ks = np.nonzero(c)[0]
    if len(ks) == 0:
        return 0
    if x == 0.0:
        v = c[0]
        return 0 if v == 0 else (1 if v > 0 else -1)
    lx = math.log(abs(x))
    logs = np.log(np.abs(c[ks])) + ks * lx
    signs = np.sign(c[ks])
    if x < 0:
        signs = signs * np.where(ks % 2 == 0, 1.0, -1.0)
    mx = float(np.max(logs))
    w = np.exp(logs - mx)
    tot = float(np.sum(signs * w))
    if abs(tot) <= rel_eps * float(np.sum(w)):
        return 0
    return 1 if tot > 0 else -1


def distinct_real_roots(
    f,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> int:
    """Number of distinct real roots of a real polynomial, numerically.

    Near-real roots are selected with |Im| <= cluster_tol*(1+|Re|), merged
    within relative distance cluster_tol, and the count is cross-checked by
    sign evaluations bracketing each candidate; more sign changes than
    clusters means the root finder missed a real root and is reported as
    RootCountMismatch instead of being silently resolved.
    """
    poly = as_dense(f)
    if poly.is_zero:
        raise ValueError("polynomial is identically zero")
    if np.any(poly.coeffs.imag != 0):
        raise ValueError("real-root counting expects a real polynomial")
    if poly.degree == 0:
        return 0
    rs = roots(poly, tol=tol, max_iters=max_iters)
    cands = []
    if rs.zero_multiplicity >= 1:
        cands.append(0.0)
    for z in rs.roots:
        if abs(z.imag) <= cluster_tol * (1.0 + abs(z.real)):
            cands.append(float(z.real))
    cands.sort()
    reps = []
    for x in cands:
        # relative merge: roots an order of magnitude apart stay distinct
        # even when both are tiny
        if reps and abs(x - reps[-1][-1]) <= cluster_tol * max(abs(x), abs(reps[-1][-1])):
            reps[-1].append(x)
        else:
            reps.append([x])
    centers = [sum(cl) / len(cl) for cl in reps]
    count = len(centers)

    # cross-check: sign probes strictly between candidates and outside the
    # Cauchy root bound, so each candidate is bracketed by two probes
    re_coeffs = poly.coeffs.real
    bound = 1.0 + float(np.max(np.abs(poly.coeffs[:-1])) / abs(poly.coeffs[-1]))
    grid = [-bound - 1.0]
    grid += [(a + b) / 2.0 for a, b in zip(centers, centers[1:])]
    grid.append(bound + 1.0)
    signs = [stable_sign(re_coeffs, x) for x in grid]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)
    if changes > count:
        raise RootCountMismatch(
            f"sign scan finds {changes} crossings but clustering only {count} real roots"
        )
    return count
