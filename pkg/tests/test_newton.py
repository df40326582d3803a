import math
import random
from fractions import Fraction

import pytest

from circlebias.circle import exact_bias
from circlebias.newton import (
    Edge,
    SparseBivariatePoly,
    bias_search,
    edge_approx_check,
    edge_poly,
    f_star,
    lower_chain,
    lower_edges,
    newton_polytope,
    runner_poly,
    select_radius,
    star_poly,
    substitute_y,
    upper_edges,
    y_invert,
    y_power_substitute,
)
from circlebias.runners import RunnerSystem, positions_at


def P(terms):
    return SparseBivariatePoly(terms)


def parabolic(k):
    """sum_{i<k} x^i y^(i^2): strictly convex support, k hull vertices."""
    return P({(i, i * i): 1.0 for i in range(k)})


def jarvis_vertices(points):
    """Gift-wrapping hull vertices (exact ints), independent oracle."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return set(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def far(o, a, b):
        da = (a[0] - o[0]) ** 2 + (a[1] - o[1]) ** 2
        db = (b[0] - o[0]) ** 2 + (b[1] - o[1]) ** 2
        return da > db

    start = min(pts, key=lambda p: (p[1], p[0]))
    hull, cur = [start], start
    while True:
        cand = pts[0] if pts[0] != cur else pts[1]
        for p in pts:
            if p == cur:
                continue
            c = cross(cur, cand, p)
            if c < 0 or (c == 0 and far(cur, p, cand)):
                cand = p
        if cand == start:
            break
        hull.append(cand)
        cur = cand
        if len(hull) > len(pts):
            raise RuntimeError("gift wrap failed to close")
    return set(hull)


# ------------------------------------------------------------- construction ----


def test_terms_normalized():
    f = P({(0, 0): 1.0, (1, 2): 0.0, (3, 1): 2j})
    assert f.support == {(0, 0), (3, 1)}
    with pytest.raises(ValueError):
        P({(0.5, 1): 1.0})


def test_product_small():
    f = P({(0, 0): 1.0, (1, 1): 1.0})
    g = P({(0, 1): 1.0, (1, 4): 1.0})
    h = f * g
    assert h.terms == {(0, 1): 1, (1, 4): 1, (1, 2): 1, (2, 5): 1}


def test_product_exact_cancellation():
    f = P({(1, 0): 1.0, (0, 1): 1.0})
    g = P({(1, 0): 1.0, (0, 1): -1.0})
    assert (f * g).support == {(2, 0), (0, 2)}  # the xy term cancels exactly


# ---------------------------------------------------------- newton_polytope ----


def test_polytope_parabolic():
    Pnt = newton_polytope(parabolic(5))
    assert len(Pnt.vertices) == 5
    grads = [e.gradient for e in lower_edges(Pnt)]
    assert grads == [1, 3, 5, 7]


def test_polytope_unit_square():
    Pnt = newton_polytope(P({(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}))
    assert len(Pnt.vertices) == 4
    kinds = sorted(e.kind for e in Pnt.edges)
    assert kinds == ["lower", "upper", "vertical", "vertical"]
    le = lower_edges(Pnt)
    assert len(le) == 1 and (le[0].start, le[0].end) == ((0, 0), (1, 0))
    assert le[0].gradient == 0


def test_polytope_monomial_and_segment():
    Pnt = newton_polytope(P({(2, 3): 1.0}))
    assert Pnt.vertices == ((2, 3),)
    assert Pnt.edges == ()
    seg = newton_polytope(P({(0, 0): 1.0, (1, 1): 2.0, (2, 2): 1.0}))
    assert set(seg.vertices) == {(0, 0), (2, 2)}
    assert len(seg.edges) == 1
    assert lower_edges(seg)[0].gradient == 1


def test_polytope_matches_gift_wrapping_oracle():
    rng = random.Random(2025)
    for _ in range(40):
        m = rng.randint(1, 12)
        support = {(rng.randint(0, 9), rng.randint(0, 9)) for _ in range(m)}
        f = P({k: 1.0 for k in support})
        mine = set(newton_polytope(f).vertices)
        assert mine == jarvis_vertices(support)


def test_lower_gradients_increase():
    rng = random.Random(7)
    for _ in range(30):
        support = {(rng.randint(0, 8), rng.randint(0, 8)) for _ in range(rng.randint(2, 10))}
        grads = [e.gradient for e in lower_edges(newton_polytope(P({k: 1.0 for k in support})))]
        assert grads == sorted(grads)
        assert len(set(grads)) == len(grads)


def test_lower_or_upper_covers_half_the_vertices():
    rng = random.Random(8)
    for _ in range(30):
        support = {(rng.randint(0, 8), rng.randint(0, 8)) for _ in range(rng.randint(3, 12))}
        f = P({k: 1.0 for k in support})
        Pnt = newton_polytope(f)
        k = len(Pnt.vertices)
        s = max(len(lower_edges(Pnt)), len(upper_edges(Pnt)))
        assert 2 * s >= k - 2


# ------------------------------------------------------------- edge algebra ----


def test_edge_and_star_polys():
    f = P({(0, 0): 1, (1, 1): 1, (2, 4): 1})
    low = lower_edges(newton_polytope(f))
    assert [(e.start, e.end) for e in low] == [((0, 0), (1, 1)), ((1, 1), (2, 4))]
    assert edge_poly(f, low[0]).terms == {(0, 0): 1, (1, 1): 1}
    assert star_poly(f, low[0]).terms == {(0, 0): 1, (1, 1): 1}
    assert edge_poly(f, low[1]).terms == {(1, 1): 1, (2, 4): 1}
    assert star_poly(f, low[1]).terms == {(0, 1): 1, (1, 4): 1}


def test_edge_validation():
    f = P({(0, 0): 1, (1, 1): 1, (2, 4): 1})
    with pytest.raises(ValueError):
        Edge((0, 0), (0, 0), "lower", Fraction(0))
    with pytest.raises(ValueError):
        edge_poly(f, Edge((0, 0), (2, 1), "lower", Fraction(1, 2)))


def test_f_star_product():
    f = P({(0, 0): 1, (1, 1): 1, (2, 4): 1})
    fs = f_star(f)
    assert fs.terms == {(0, 1): 1, (1, 4): 1, (1, 2): 1, (2, 5): 1}
    assert fs.x_degree == 2


def test_f_star_single_edge_is_star():
    f = P({(1, 2): 2.0, (3, 4): -1.0})
    le = lower_edges(newton_polytope(f))[0]
    assert f_star(f).terms == star_poly(f, le).terms


def test_f_star_degree_of_runner_polys():
    # x-degree of the edge product equals the x-degree of the source
    # polynomial (its x-valuation is zero for these products)
    rng = random.Random(5)
    for _ in range(10):
        n = rng.randint(1, 5)
        sys = RunnerSystem(
            tuple(Fraction(rng.randrange(32), 32) for _ in range(n)),
            tuple(rng.randint(0, 5) for _ in range(n)),
        )
        g = runner_poly(sys)
        assert f_star(g).x_degree == g.x_degree - g.x_valuation == n


def test_f_star_non_integral_gradient():
    f = P({(0, 0): 1, (2, 1): 1})
    with pytest.raises(ValueError, match="y_power_substitute"):
        f_star(f)
    fs = f_star(y_power_substitute(f, 2))
    assert fs.x_degree == 2


# --------------------------------------------------------------- y plumbing ----


def test_y_ops_examples():
    assert y_invert(P({(0, 0): 1, (1, 2): 1}), 2).terms == {(0, 2): 1, (1, 0): 1}
    assert y_power_substitute(P({(0, 0): 1, (1, 1): 1}), 3).terms == {(0, 0): 1, (1, 3): 1}
    with pytest.raises(ValueError):
        y_invert(P({(0, 3): 1}), 2)


def test_y_invert_involution_and_edge_swap():
    rng = random.Random(77)
    for _ in range(20):
        support = {(rng.randint(0, 7), rng.randint(0, 7)) for _ in range(rng.randint(2, 9))}
        f = P({k: complex(rng.random(), rng.random()) for k in support})
        m = f.y_degree
        flip = y_invert(f, m)
        assert y_invert(flip, m).terms == f.terms
        a = newton_polytope(f)
        b = newton_polytope(flip)
        assert len(lower_edges(a)) == len(upper_edges(b))
        assert len(upper_edges(a)) == len(lower_edges(b))


def test_minkowski_vertices_subset_of_pairwise_sums():
    rng = random.Random(31)
    for _ in range(15):
        s1 = {(rng.randint(0, 5), rng.randint(0, 5)) for _ in range(rng.randint(2, 6))}
        s2 = {(rng.randint(0, 5), rng.randint(0, 5)) for _ in range(rng.randint(2, 6))}
        g1 = P({k: complex(rng.random() + 0.2, rng.random()) for k in s1})
        g2 = P({k: complex(rng.random() + 0.2, rng.random()) for k in s2})
        v1 = newton_polytope(g1).vertices
        v2 = newton_polytope(g2).vertices
        sums = {(a[0] + b[0], a[1] + b[1]) for a in v1 for b in v2}
        assert set(newton_polytope(g1 * g2).vertices) <= sums


# -------------------------------------------------------------- substitution ----


def test_substitute_examples():
    f = P({(0, 0): 1, (1, 1): 1, (2, 4): 1})
    assert substitute_y(f, 1).coeffs.tolist() == [1, 1, 1]
    assert substitute_y(P({(1, 3): 1.0}), 2).coeffs.tolist() == [0, 8]


def test_substitute_parabolic_hutchinson_condition():
    f = parabolic(4)
    p = substitute_y(f, 0.05)
    c = p.coeffs.real
    assert c.tolist() == pytest.approx([0.05 ** (i * i) for i in range(4)], rel=1e-15)
    for i in range(1, 3):
        assert c[i] ** 2 > 4 * c[i - 1] * c[i + 1]


# -------------------------------------------------------------- runner_poly ----


def test_runner_poly_single():
    g = runner_poly(RunnerSystem((0,), (1,)))
    assert g.terms == {(1, 0): 1, (0, 1): -1}
    assert len(newton_polytope(g).vertices) == 2


def test_runner_poly_hexagon():
    sys = RunnerSystem((Fraction(1, 8), Fraction(3, 8), Fraction(5, 8)), (1, 2, 3))
    g = runner_poly(sys)
    assert len(newton_polytope(g).vertices) == 6


def test_runner_poly_vertex_count_random():
    rng = random.Random(13)
    for _ in range(20):
        n = rng.randint(1, 6)
        sys = RunnerSystem(
            tuple(Fraction(rng.randrange(32), 32) for _ in range(n)),
            tuple(rng.randint(0, 6) for _ in range(n)),
        )
        g = runner_poly(sys)
        assert len(newton_polytope(g).vertices) == 2 * sys.k


def test_runner_poly_real_sibling():
    sys = RunnerSystem((Fraction(1, 8), Fraction(3, 8)), (1, 2))
    g = runner_poly(sys)
    sib = runner_poly(sys, real=True)
    assert all(c.imag == 0 for c in sib.terms.values())
    # sibling = g * conj(g) pointwise
    for _ in range(5):
        x, y = complex(0.3, 0.7), complex(-0.2, 0.5)
        gv = sum(c * x**i * y**j for (i, j), c in g.terms.items())
        gb = sum(c.conjugate() * x**i * y**j for (i, j), c in g.terms.items())
        sv = sum(c * x**i * y**j for (i, j), c in sib.terms.items())
        assert sv == pytest.approx(gv * gb, rel=1e-12)


def test_runner_poly_guards():
    with pytest.raises(ValueError):
        runner_poly(RunnerSystem((0, 0), (1, -2)))
    with pytest.raises(ValueError):
        runner_poly(RunnerSystem(tuple([0] * 65), tuple(range(65))))


# --------------------------------------------------------------- bias_search ----


def test_bias_search_runner_correspondence():
    sys = RunnerSystem((Fraction(1, 8), Fraction(5, 8), Fraction(1, 4)), (1, 2, 3))
    g = runner_poly(sys)
    res = bias_search(g, phi_steps=16, radius=1.0, tol=1e-13)
    for l, (phi, bias_f, _) in enumerate(res.rows):
        t = l / 16
        expect = float(exact_bias([float(p) for p in positions_at(sys, t)]).bias)
        # coincident runners make a multiple root; accuracy is sqrt-limited there
        assert bias_f == pytest.approx(expect, abs=1e-6)


def test_bias_search_parabolic():
    res = bias_search(parabolic(6), phi_steps=32)
    s = res.s
    assert s == 5
    assert float(res.report.bias) >= math.sqrt(s / 12.0) - 1.0
    assert not res.flipped
    assert res.radius <= 1e-2


def test_bias_search_flip_applies_and_maps_back():
    # all the structure is in the upper chain: flipping exposes it
    f = y_invert(parabolic(6), 25)
    res = bias_search(f, phi_steps=8)
    assert res.flipped
    assert res.s == 5
    straight = bias_search(parabolic(6), phi_steps=8)
    assert float(res.report.bias) == pytest.approx(float(straight.report.bias), abs=1e-9)
    assert abs(res.a) == pytest.approx(1.0 / straight.radius, rel=1e-12)


def test_bias_search_monomial_rejected():
    with pytest.raises(ValueError):
        bias_search(P({(3, 2): 1.0}), phi_steps=4)


def test_bias_search_threads_deterministic():
    g = runner_poly(RunnerSystem((0, Fraction(1, 3)), (1, 2)))
    a = bias_search(g, phi_steps=12, radius=1.0)
    b = bias_search(g, phi_steps=12, radius=1.0, threads=4)
    assert a.rows == b.rows
    assert a.a == b.a


# ---------------------------------------------------------- edge_approx_check ----


def test_edge_approx_two_edges():
    f = P({(0, 0): 1, (1, 1): 1, (2, 4): 1})
    rep = edge_approx_check(f, phi=0.0, r=1e-3)
    assert rep["gap"] < 1.0
    assert rep["occupancy_ok"]
    assert [a["expected"] for a in rep["annuli"]] == [1, 1]
    assert [a["observed"] for a in rep["annuli"]] == [1, 1]
    assert rep["annuli"][0]["mod_lo"] == pytest.approx(1e3, rel=1e-6)
    assert rep["annuli"][1]["mod_lo"] == pytest.approx(1e9, rel=1e-6)


def test_edge_approx_mismatch_shrinks_with_r():
    f = P({(0, 0): 1, (1, 1): 1, (2, 4): 1})
    mism = []
    r = 1e-2
    for _ in range(6):
        rep = edge_approx_check(f, phi=0.7, r=r, eps=0.3)
        assert rep["occupancy_ok"]
        mism.append(rep["max_arg_mismatch"])
        r /= 2
    for a, b in zip(mism, mism[1:]):
        assert b <= a + 1e-12
    assert mism[-1] < 0.3
    assert edge_approx_check(f, phi=0.7, r=1e-4, eps=0.3)["eps_matched"]


def test_edge_approx_single_edge_exact():
    f = P({(1, 2): 1.0, (2, 3): 1.0, (3, 4): 1.0})  # all terms on one edge
    rep = edge_approx_check(f, phi=1.1, r=1e-2)
    assert rep["gap"] <= 1e-9


def test_select_radius_separates_annuli():
    f = P({(0, 0): 1, (1, 1): 1, (2, 4): 1})
    r = select_radius(f, start=0.5, separation=4.0)
    # consecutive annuli: 1*r^-1 and 1*r^-3, separated iff r^-2 >= 4
    assert r <= 0.5
    assert r ** (-2) >= 4.0


def test_lower_chain_vertices():
    f = parabolic(4)
    chain = lower_chain(newton_polytope(f))
    assert chain == [(0, 0), (1, 1), (2, 4), (3, 9)]


def test_random_start_sibling_stays_below_runner_bound():
    """Heavyweight integration: n=64 random starts, speeds 1..64.

    The real sibling's roots at a = e^(2 pi i t) are the runner positions
    together with their reflections, so its bias at every sampled time is at
    most twice the runner bias (subadditivity plus reflection invariance).
    Exercises the dense product expansion, the 128-root solver and the
    edge-product sweep in one go.
    """
    rng = random.Random(64)
    n = 64
    starts = tuple(Fraction(rng.randrange(1024), 1024) for _ in range(n))
    sys = RunnerSystem(starts, tuple(range(1, n + 1)))
    sib = runner_poly(sys, real=True)
    assert len(newton_polytope(sib).vertices) == 2 * n
    res = bias_search(sib, phi_steps=16, radius=1.0)
    for l, (phi, bias_f, _) in enumerate(res.rows):
        t = l / 16
        runner_bias = float(exact_bias([float(p) for p in positions_at(sys, t)]).bias)
        assert bias_f <= 2.0 * runner_bias + 1e-6
