import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainscope import (
    build_census,
    edge_zeros,
    enumerate_chains,
    extend_far_field,
    find_zeros,
    from_polynomial,
    hamiltonian,
    membership,
    order_chains,
    periodic_orbit_through,
    preset,
)
from chainscope.errors import HitsSaddle, NoReturn, WindowTooSmall
from oracles import first_return_ivp


def test_hamiltonian_anchors(cubic_f, quadratic_f):
    assert hamiltonian(cubic_f, 1.0, 0.0) == pytest.approx(0.25, abs=1e-10)
    assert hamiltonian(cubic_f, 0.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert hamiltonian(quadratic_f, 1.5, 0.0) == pytest.approx(0.0, abs=1e-10)


def test_orbit_symmetric_turning_points(cubic_f):
    orb = periodic_orbit_through(cubic_f, -0.5)
    assert orb.q == pytest.approx(0.5, abs=1e-10)
    assert orb.energy == pytest.approx(0.5**2 / 2 - 0.5**4 / 4, abs=1e-10)


def test_orbit_period_against_integration(cubic_f):
    orb = periodic_orbit_through(cubic_f, -0.5)
    q, t_half = first_return_ivp(lambda u: float(cubic_f(u)), -0.5)
    assert abs(orb.period - 2 * t_half) / (2 * t_half) < 1e-6


def test_orbit_hits_saddle(cubic_f):
    with pytest.raises(HitsSaddle):
        periodic_orbit_through(cubic_f, -1.0)


def test_orbit_no_return():
    f = preset("cubic_bistable", window=(-2.0, 3.0))  # no far-field extension
    with pytest.raises(NoReturn):
        periodic_orbit_through(f, 1.5)


def test_cubic_census(cubic_census):
    chains = cubic_census.chains
    assert len(chains) == 4
    nontrivial = [c for c in chains if not c.trivial]
    assert len(nontrivial) == 1
    big = nontrivial[0]
    assert big.energy == pytest.approx(0.25, abs=1e-9)
    assert big.saddles == pytest.approx((-1.0, 1.0), abs=1e-9)
    kinds = sorted(lp.kind for lp in big.loops)
    assert kinds == ["heteroclinic", "homoclinic", "homoclinic"]
    het = [lp for lp in big.loops if lp.kind == "heteroclinic"][0]
    assert het.interval == pytest.approx((-1.0, 1.0), abs=1e-9)


def test_quadratic_census(quadratic_census):
    big = [c for c in quadratic_census.chains if not c.trivial][0]
    assert big.energy == pytest.approx(0.0, abs=1e-9)
    assert big.q == pytest.approx(1.5, abs=1e-9)
    assert big.saddles == pytest.approx((0.0,), abs=1e-9)
    assert [lp.kind for lp in big.loops] == ["homoclinic", "homoclinic"]


def test_single_saddle_degenerate_census():
    f, _ = extend_far_field(from_polynomial([0.3, -1.0]), 2.0, 0.25)
    chains = enumerate_chains(f)
    nontrivial = [c for c in chains if not c.trivial]
    assert len(nontrivial) == 1
    assert [lp.kind for lp in nontrivial[0].loops] == ["homoclinic", "homoclinic"]
    assert len([c for c in chains if c.trivial]) == 2


def test_window_too_small():
    f, _ = extend_far_field(preset("cubic_bistable", window=(-2.5, 2.5)), 2.0, 0.25)
    with pytest.raises(WindowTooSmall):
        enumerate_chains(f)


def test_level_set_residual(cubic_census, quadratic_census):
    for census in (cubic_census, quadratic_census):
        for ch in census.chains:
            pts = census.boundary_points("chain", ch.id, n=500)
            H = 0.5 * pts[:, 1] ** 2 + census.potential.refined_vec(pts[:, 0])
            assert np.max(np.abs(H - ch.energy)) < 1e-10


def test_edge_zeros(cubic_census, quadratic_census):
    big = [c for c in cubic_census.chains if not c.trivial][0]
    lo, hi = edge_zeros(big, cubic_census.zeros)
    sat = max(z.value for z in cubic_census.zeros)
    assert lo == pytest.approx(-sat, abs=1e-9)
    assert hi == pytest.approx(sat, abs=1e-9)
    trivial = [c for c in cubic_census.chains if c.trivial and abs(c.p) < 1e-9][0]
    assert edge_zeros(trivial, cubic_census.zeros) == (trivial.p, trivial.p)
    # extreme zeros are unstable for the edge flow on every nontrivial chain
    qbig = [c for c in quadratic_census.chains if not c.trivial][0]
    qlo, qhi = edge_zeros(qbig, quadratic_census.zeros)
    for v in (qlo, qhi):
        z = min(quadratic_census.zeros, key=lambda z: abs(z.value - v))
        assert z.slope > 0
    assert qhi == pytest.approx(1.0, abs=1e-9)


def test_order_relations(cubic_census):
    order = cubic_census.order
    ids = {round(c.p, 3): c.id for c in cubic_census.chains if c.trivial}
    big = [c for c in cubic_census.chains if not c.trivial][0].id
    origin = ids[0.0]
    sat_pos = ids[max(k for k in ids)]
    sat_neg = ids[min(k for k in ids)]
    assert order.inside(origin, big)
    assert order.inside(sat_pos, big)
    assert order.relation(sat_pos, sat_neg) == "separated"
    assert order.relation(big, origin) == "contains"


def test_order_trichotomy(cubic_census, quadratic_census):
    for census in (cubic_census, quadratic_census):
        for ci in census.chains:
            for cj in census.chains:
                if ci.id == cj.id:
                    continue
                rel = census.order.relation(ci.id, cj.id)
                rev = census.order.relation(cj.id, ci.id)
                assert (rel, rev) in {
                    ("inside", "contains"),
                    ("contains", "inside"),
                    ("separated", "separated"),
                }


def test_membership_examples(cubic_f, cubic_census):
    origin_annulus = next(
        an
        for an in cubic_census.annuli
        if cubic_census.chain_by_id(an.inner_chain_id).trivial
        and abs(cubic_census.chain_by_id(an.inner_chain_id).p) < 1e-9
    )
    assert cubic_census.membership((0.0, 0.1), origin_annulus) == "inside"
    het = next(
        lp
        for ch in cubic_census.chains
        for lp in ch.loops
        if lp.kind == "heteroclinic"
    )
    assert cubic_census.membership((1.0, 0.0), het) == "on_boundary"
    big = [c for c in cubic_census.chains if not c.trivial][0]
    F05 = cubic_census.potential.refined(0.5)
    v = math.sqrt(2 * (0.25 - F05))
    assert cubic_census.membership((0.5, v), big) == "on_boundary"
    assert membership(cubic_f, (0.5, v), big, cubic_census) == "on_boundary"


def test_annuli_assignments(cubic_census):
    by_inner = {an.inner_chain_id: an for an in cubic_census.annuli}
    big = [c for c in cubic_census.chains if not c.trivial][0]
    origin = next(c for c in cubic_census.chains if c.trivial and abs(c.p) < 1e-9)
    sat_pos = next(c for c in cubic_census.chains if c.trivial and c.p > 1.5)
    # origin sits inside the heteroclinic loop
    out = cubic_census.loop_by_id(by_inner[origin.id].outer_loop_id)
    assert out.kind == "heteroclinic"
    # the satellite sits inside the right homoclinic lobe
    out2 = cubic_census.loop_by_id(by_inner[sat_pos.id].outer_loop_id)
    assert out2.kind == "homoclinic"
    assert out2.left_anchor == pytest.approx(1.0, abs=1e-9)
    # the big chain belongs to the unbounded component
    assert by_inner[big.id].outer_loop_id is None
    assert math.isinf(by_inner[big.id].u_min)


def test_annulus_nesting_invariant(cubic_census, quadratic_census):
    for census in (cubic_census, quadratic_census):
        for an in census.annuli:
            if an.outer_loop_id is None:
                continue
            inner = census.chain_by_id(an.inner_chain_id)
            outer = census.loop_by_id(an.outer_loop_id)
            orbits = census.sample_orbits(an, count=10)
            for orb in orbits:
                # closure(I(inner)) inside I(orbit) inside I(outer loop)
                assert orb.p < inner.p and inner.q < orb.q
                assert inner.energy < orb.energy < outer.energy
                assert outer.left_anchor < orb.p and orb.q < outer.right_anchor
            # orbit family is totally ordered by inclusion
            for a, b in zip(orbits[:-1], orbits[1:]):
                assert (a.p > b.p and a.q < b.q) or (b.p > a.p and b.q < a.q)


def test_unstable_zero_inside_every_orbit(cubic_census):
    # each annulus holds a zero with positive slope inside all its orbits
    for an in cubic_census.annuli:
        if an.outer_loop_id is None:
            continue
        orbits = cubic_census.sample_orbits(an, count=5)
        candidates = [z for z in cubic_census.zeros if z.slope > 0]
        assert any(
            all(orb.p < z.value < orb.q for orb in orbits) for z in candidates
        )


@settings(max_examples=20, deadline=None)
@given(
    roots=st.lists(
        st.floats(min_value=-1.6, max_value=1.6), min_size=1, max_size=3, unique=True
    )
)
def test_census_well_formed_for_random_roots(roots):
    roots = sorted(roots)
    if any(b - a < 0.2 for a, b in zip(roots, roots[1:])):
        return
    coeffs = np.polynomial.polynomial.polyfromroots(roots)
    if len(roots) % 2 == 0:
        coeffs = -coeffs  # keep the leading sign so f has saddles, not a dead end
    try:
        f, _ = extend_far_field(from_polynomial(list(coeffs), window=(-8.0, 8.0)), 2.5, 0.3)
        chains = enumerate_chains(f)
    except WindowTooSmall:
        return
    order = order_chains(chains)
    for ci in chains:
        for cj in chains:
            if ci.id == cj.id:
                continue
            rel = order.relation(ci.id, cj.id)
            rev = order.relation(cj.id, ci.id)
            assert (rel, rev) in {
                ("inside", "contains"),
                ("contains", "inside"),
                ("separated", "separated"),
            }
    # every chain contains an equilibrium; saddles carry negative slope
    zeros = find_zeros(f)
    for ch in chains:
        lo, hi = edge_zeros(ch, zeros)
        assert ch.p - 1e-9 <= lo <= hi <= ch.q + 1e-9
