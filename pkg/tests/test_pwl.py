import random

import pytest

from contpay.pwl import (
    ContractionError,
    DomainError,
    PiecewiseLinearMap,
    compose_pwl,
    eval_pwl,
    pwl_fixed_point,
)

BENT = PiecewiseLinearMap(
    [(0.0, 0.0), (0.26, 0.11), (0.49, 0.26), (1.0, 0.49)], contracting=True
)
HALF = PiecewiseLinearMap.affine(0.5, 0.0, 0.0, 1.0, contracting=True)
HALF_UP = PiecewiseLinearMap.affine(0.5, 0.5, 0.0, 1.0, contracting=True)


def random_contracting_map(rng, lo=0.0, hi=1.0):
    from contpay.randgen import random_map

    return random_map(rng, lo, hi)


def test_eval_at_breakpoint_is_exact():
    assert eval_pwl(BENT, 0.26) == 0.11


def test_eval_identity():
    ident = PiecewiseLinearMap.identity(0.0, 1.0)
    assert eval_pwl(ident, 0.5) == 0.5


def test_eval_interpolates_piece():
    # piece (0.49, 0.26)-(1, 0.49): midpoint argument 0.745 -> 0.26 + 0.5*0.23
    assert eval_pwl(BENT, 0.745) == pytest.approx(0.375, abs=1e-12)


def test_eval_domain_clamp_and_error():
    assert eval_pwl(HALF, 1.0 + 1e-13) == 0.5
    assert eval_pwl(HALF, -1e-13) == 0.0
    with pytest.raises(DomainError):
        eval_pwl(HALF, 1.0 + 1e-9)


def test_compose_affine_halves():
    c = compose_pwl(HALF, HALF)
    for x in (0.0, 0.3, 1.0):
        assert eval_pwl(c, x) == pytest.approx(x / 4, abs=1e-15)


def test_compose_affine_mixture():
    c = compose_pwl(HALF, HALF_UP)  # x/2 after x/2 + 1/2 gives x/4 + 1/4
    for x in (0.0, 0.5, 1.0):
        assert eval_pwl(c, x) == pytest.approx(x / 4 + 0.25, abs=1e-15)


def test_compose_with_identity_is_identity_law():
    ident = PiecewiseLinearMap.identity(0.0, 1.0)
    left = compose_pwl(BENT, ident)
    right = compose_pwl(ident, BENT)
    for x in (0.0, 0.13, 0.26, 0.7, 1.0):
        assert eval_pwl(left, x) == eval_pwl(BENT, x)
        assert eval_pwl(right, x) == eval_pwl(BENT, x)


def test_compose_breakpoint_budget():
    c = compose_pwl(BENT, HALF_UP)
    assert len(c.xs) <= len(BENT.xs) + len(HALF_UP.xs)


def test_compose_soundness_random():
    rng = random.Random(7)
    for _ in range(60):
        f = random_contracting_map(rng)
        g = random_contracting_map(rng)
        c = compose_pwl(f, g)
        for _ in range(12):
            x = rng.uniform(0.0, 1.0)
            assert eval_pwl(c, x) == pytest.approx(
                eval_pwl(f, eval_pwl(g, x)), abs=1e-12
            )


def test_compose_domain_mismatch():
    wide = PiecewiseLinearMap.identity(0.0, 2.0)
    with pytest.raises(DomainError):
        compose_pwl(HALF, wide)  # inner range [0, 2] exceeds outer domain [0, 1]


def test_fixed_point_shifted_half():
    assert pwl_fixed_point(HALF_UP) == 1.0


def test_fixed_point_half():
    assert pwl_fixed_point(HALF) == 0.0


def test_fixed_point_bent_is_origin():
    # the (0, 0) breakpoint sits on the diagonal
    assert pwl_fixed_point(BENT) == 0.0


def test_fixed_point_interior():
    f = PiecewiseLinearMap.affine(0.25, 0.3, 0.0, 1.0, contracting=True)
    x = pwl_fixed_point(f)
    assert x == pytest.approx(0.4, abs=1e-15)
    assert eval_pwl(f, x) == pytest.approx(x, abs=1e-15)


def test_fixed_point_requires_contraction():
    ident = PiecewiseLinearMap.identity(0.0, 1.0)
    with pytest.raises(ContractionError):
        pwl_fixed_point(ident)


def test_contracting_flag_rejects_steep_map():
    with pytest.raises(ContractionError):
        PiecewiseLinearMap([(0.0, 0.0), (1.0, 1.0)], contracting=True)


def test_decreasing_rejected():
    with pytest.raises(DomainError):
        PiecewiseLinearMap([(0.0, 0.5), (1.0, 0.1)])


def test_margin_recorded():
    assert BENT.margin == pytest.approx(1.0 - 0.15 / 0.23)
    assert HALF.margin == pytest.approx(0.5)


def test_random_maps_are_monotone_self_maps_and_contract():
    rng = random.Random(11)
    for _ in range(40):
        f = random_contracting_map(rng)
        assert f.is_self_map()
        pts = sorted(rng.uniform(0.0, 1.0) for _ in range(8))
        vals = [eval_pwl(f, x) for x in pts]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
        for x, y in zip(pts, pts[1:]):
            assert abs(eval_pwl(f, x) - eval_pwl(f, y)) <= (1.0 - f.margin) * abs(x - y) + 1e-15


def test_fixed_point_random_maps_satisfy_equation():
    rng = random.Random(13)
    for _ in range(40):
        f = random_contracting_map(rng)
        x = pwl_fixed_point(f)
        assert f.lo <= x <= f.hi
        assert eval_pwl(f, x) == pytest.approx(x, abs=1e-12)
