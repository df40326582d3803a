"""Flat polynomials with unimodular coefficients via the DFT recursion.

For a prime p, a p-tuple of polynomials is built recursively: level 0 is the
all-ones tuple, and each level multiplies the vector of x-power-shifted
polynomials by the p x p DFT matrix D[j,k] = xi^(j*k) with xi = e^(2*pi*i/p).
Every coefficient of every level is a p-th root of unity, so the recursion is
carried out exactly on integer exponents mod p and only converted to complex
numbers at the end; p = 2 reproduces the classical +-1 flat pair.

The point of the family: the sum of |Q_i(x)|^2 over the tuple is constant
p^(r+1) on the unit circle, which pins every sup-norm below p^((r+1)/2), and
the same holds for coefficientwise k-th powers whenever p does not divide k.
Combined with the Erdos-Turan style bound this produces runner systems whose
bias stays small at every time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle import frac
from .runners import RunnerSystem

__all__ = [
    "UnimodularPoly",
    "ShapiroFamily",
    "is_prime",
    "shapiro_family",
    "hadamard_power",
    "sup_norm",
    "parseval_check",
    "flatness_check",
    "runner_config_from_poly",
    "erdos_turan_bound",
]

MAX_LENGTH = 1 << 20
UNIMODULAR_TOL = 1e-12


def is_prime(p: int) -> bool:
    """Trial-division primality check."""
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class UnimodularPoly:
    """Dense polynomial whose coefficients all have modulus one."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coefficients must be a nonempty 1-d array")
        if np.max(np.abs(np.abs(c) - 1.0)) > UNIMODULAR_TOL:
            raise ValueError("coefficients must all have modulus 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class ShapiroFamily:
    p: int
    r: int
    xi: complex
    exponents: np.ndarray  # (p, p**r) integer exponents of xi, exact
    polys: tuple


def _unit_roots(p: int) -> np.ndarray:
    if p == 2:
        return np.array([1.0 + 0.0j, -1.0 + 0.0j])
    return np.exp(2j * np.pi * np.arange(p) / p)


def shapiro_family(p: int, r: int) -> ShapiroFamily:
    """Build the level-r tuple for prime p.

    The recursion only ever multiplies coefficients by powers of xi and the
    shifted blocks never overlap, so the exponent of xi carried by each
    coefficient is tracked exactly as an integer mod p (no float drift to
    reproject away).
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if r < 0:
        raise ValueError("r must be >= 0")
    if p**r > MAX_LENGTH:
        raise ValueError(f"p**r exceeds the degree cap {MAX_LENGTH}")
    E = np.zeros((p, 1), dtype=np.int64)
    for level in range(r):
        blk = p**level
        new = np.empty((p, blk * p), dtype=np.int64)
        for i in range(p):
            for k in range(p):
                new[i, k * blk : (k + 1) * blk] = (i * k + E[k]) % p
        E = new
    table = _unit_roots(p)
    polys = tuple(UnimodularPoly(table[row]) for row in E)
    return ShapiroFamily(p=p, r=r, xi=complex(table[1 % p]), exponents=E, polys=polys)


# ------------------------------------------------------------- poly helpers ----


def _coeffs(f) -> np.ndarray:
    if isinstance(f, UnimodularPoly):
        return f.coeffs
    return np.asarray(f, dtype=complex)


def hadamard_power(f, k: int) -> np.ndarray:
    """Coefficientwise k-th power; zero coefficients stay zero."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _coeffs(f) ** k


def _golden_max(g, lo, hi, iters=60):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = g(x1), g(x2)
    best = max(f1, f2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = g(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = g(x1)
        best = max(best, f1, f2)
    return best


def sup_norm(f, oversample: int = 16) -> float:
    """Lower estimate of max |f| on the unit circle.

    Samples oversample*(deg+1) equispaced circle points via the FFT and then
    refines the best sample bracket by golden section.  Every value returned
    is an actual evaluation, so the estimate is one-sided (never above the
    true maximum).
    """
    if oversample < 4:
        raise ValueError("oversample must be >= 4")
    c = _coeffs(f)
    if len(c) == 0 or not np.any(c):
        return 0.0
    M = oversample * len(c)
    vals = np.abs(np.fft.fft(c, M))
    j = int(np.argmax(vals))
    theta0 = -2.0 * math.pi * j / M
    rev = c[::-1]

    def g(theta):
        return abs(np.polyval(rev, complex(math.cos(theta), math.sin(theta))))

    width = 2.0 * math.pi / M
    refined = _golden_max(g, theta0 - width, theta0 + width)
    return max(float(vals[j]), refined)


def parseval_check(fam: ShapiroFamily, samples: int = 1024) -> float:
    """Max over sampled circle points of |sum_i |Q_i(x)|^2 - p^(r+1)|."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    M = max(samples, len(fam.polys[0].coeffs))
    total = np.zeros(M)
    for q in fam.polys:
        total += np.abs(np.fft.fft(q.coeffs, M)) ** 2
    return float(np.max(np.abs(total - float(fam.p ** (fam.r + 1)))))


def flatness_check(fam: ShapiroFamily, oversample: int = 16) -> dict:
    """Sup-norms of all Hadamard powers against the flatness bound.

    For every polynomial of the family and every k <= p^r, the sampled
    sup-norm of the coefficientwise k-th power is compared with
    p^((r+1)/2) when p does not divide k; multiples of p are excluded by
    hypothesis and only reported.  A sampled norm above the bound is a hard
    violation (the sampler is one-sided); passing is evidence, not proof.
    """
    p, r = fam.p, fam.r
    bound = p ** ((r + 1) / 2)
    table = _unit_roots(p)
    rows = []
    violations = []
    for i in range(p):
        exps = fam.exponents[i]
        for k in range(1, p**r + 1):
            coeffs = table[(k * exps) % p]
            norm = sup_norm(coeffs, oversample)
            excluded = k % p == 0
            ok = None if excluded else bool(norm <= bound * (1.0 + 1e-9))
            rows.append(
                {"i": i, "k": k, "sup_norm": norm, "excluded": excluded, "ok": ok}
            )
            if ok is False:
                violations.append({"i": i, "k": k, "sup_norm": norm})
    return {
        "p": p,
        "r": r,
        "bound": bound,
        "oversample": oversample,
        "rows": rows,
        "violations": violations,
        "all_ok": not violations,
    }


def runner_config_from_poly(f) -> RunnerSystem:
    """Runner system whose start phases are the coefficient arguments.

    Coefficient j of a unimodular polynomial is e^(2*pi*i*s_j); the induced
    system has start s_j and speed j.
    """
    c = _coeffs(f)
    if np.max(np.abs(np.abs(c) - 1.0)) > 1e-9:
        raise ValueError("coefficients must all be unimodular")
    starts = tuple(frac(float(a)) for a in np.angle(c) / (2.0 * math.pi))
    return RunnerSystem(starts, tuple(range(len(c))))


def erdos_turan_bound(f, K: int, c: float = 1.0, oversample: int = 16) -> float:
    """c * (1 + sum_{k<=K} sup|f^(k)| / k), a bias upper-bound diagnostic.

    f^(k) is the coefficientwise power, so for the polynomial carrying a
    runner system this bounds the bias of the system at every time, up to
    the absolute constant c (exposed as a parameter, default 1).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if c <= 0:
        raise ValueError("c must be positive")
    coeffs = _coeffs(f)
    total = 0.0
    for k in range(1, K + 1):
        total += sup_norm(coeffs**k, oversample) / k
    return c * (1.0 + total)
