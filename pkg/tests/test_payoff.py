import json
import math
import random

import pytest

from contpay.payoff import (
    CanonicalMetric,
    ContractingBase,
    MultiDiscountedSpec,
    canonical_metric,
    compose_letters,
    diam_after,
    eval_multi_discounted,
    eval_payoff,
    eval_payoff_raw,
    from_multi_discounted,
    payoff_from_json,
    payoff_to_json,
    payoff_to_json_str,
)
from contpay.pwl import DomainError, PiecewiseLinearMap, eval_pwl, pwl_fixed_point
from contpay.randgen import random_base, random_multi_discounted, random_up_word
from contpay.words import Alphabet, UPWord, parse_word, prepend

AB = Alphabet(("1", "2"))


def halves_base() -> ContractingBase:
    f1 = PiecewiseLinearMap.affine(0.5, 0.0, 0.0, 1.0, contracting=True)
    f2 = PiecewiseLinearMap.affine(0.5, 0.5, 0.0, 1.0, contracting=True)
    return ContractingBase(AB, (f1, f2))


def test_counterexample_values(example_base, abc123):
    from contpay.fixtures import NON_MULTI_VALUES

    for text, pinned in NON_MULTI_VALUES:
        word = parse_word(text, abc123)
        assert eval_payoff(example_base, word) == pytest.approx(pinned, abs=1e-12)


def test_eval_payoff_uses_cycle_fixed_point(example_base, abc123):
    # (13)^w: fixed point of f1 o f3, i.e. x = (x/2 + 1/2)/2
    w = parse_word("(13)", abc123)
    assert eval_payoff(example_base, w) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_from_multi_discounted_zero_discount_is_constant():
    spec = MultiDiscountedSpec(AB, (0.0, 0.0), (0.7, 0.7))
    base = from_multi_discounted(spec)
    for f in base.maps:
        assert f.ys[0] == f.ys[-1] == 0.7


def test_from_multi_discounted_half_is_halving_map():
    spec = MultiDiscountedSpec(Alphabet(("1",)), (0.5,), (0.0,))
    base = from_multi_discounted(spec)
    f = base.maps[0]
    assert eval_pwl(f, 0.5) == 0.25
    assert (base.lo, base.hi) == (-1.0, 1.0)  # bound floored at 1


def test_from_multi_discounted_bound():
    spec = MultiDiscountedSpec(Alphabet(("a",)), (0.5,), (1.0,))
    base = from_multi_discounted(spec)
    assert (base.lo, base.hi) == (-2.0, 2.0)
    assert eval_pwl(base.maps[0], 0.0) == 1.0  # f(x) = x/2 + 1


def test_multi_discounted_truncates_at_zero_discount():
    spec = MultiDiscountedSpec(AB, (0.0, 0.0), (0.3, -0.8))
    assert eval_multi_discounted(spec, UPWord((1,), (0,))) == -0.8
    assert eval_multi_discounted(spec, UPWord((), (0, 1))) == 0.3


def test_multi_discounted_geometric_series():
    spec = MultiDiscountedSpec(Alphabet(("a",)), (0.5,), (1.0,))
    assert eval_multi_discounted(spec, UPWord((), (0,))) == pytest.approx(2.0, abs=1e-12)


def test_multi_discounted_cross_oracle(rng):
    alpha = Alphabet(("1", "2", "3"))
    for _ in range(25):
        spec = random_multi_discounted(rng, alpha)
        base = from_multi_discounted(spec)
        for _ in range(8):
            w = random_up_word(rng, alpha)
            assert eval_payoff(base, w) == pytest.approx(
                eval_multi_discounted(spec, w), abs=1e-12
            )


def test_shift_equation(rng):
    alpha = Alphabet(("1", "2", "3"))
    for _ in range(10):
        base = random_base(rng, alpha)
        for _ in range(8):
            w = random_up_word(rng, alpha)
            a = rng.randrange(alpha.size)
            lhs = eval_payoff_raw(base, prepend((a,), w))
            rhs = eval_pwl(base.maps[a], eval_payoff_raw(base, w))
            assert lhs == pytest.approx(rhs, abs=1e-12)


def test_prefix_append_scaling(rng):
    # value(u a) - value(u b) equals the product of the u-discounts times
    # value(a) - value(b)
    alpha = Alphabet(("1", "2"))
    for _ in range(20):
        spec = random_multi_discounted(rng, alpha)
        u = tuple(rng.randrange(2) for _ in range(rng.randint(1, 4)))
        wa = random_up_word(rng, alpha)
        wb = random_up_word(rng, alpha)
        lam = math.prod(spec.lam[c] for c in u)
        lhs = eval_multi_discounted(spec, prepend(u, wa)) - eval_multi_discounted(
            spec, prepend(u, wb)
        )
        rhs = lam * (eval_multi_discounted(spec, wa) - eval_multi_discounted(spec, wb))
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_diam_after_empty_word():
    base = halves_base()
    assert diam_after(base, ()) == 1.0


def test_diam_after_single_and_double():
    base = halves_base()
    assert diam_after(base, (0,)) == 0.5          # image [0, 1/2]
    assert diam_after(base, (1, 1)) == 0.25       # image [3/4, 1]


def test_diam_after_matches_composition(rng):
    alpha = Alphabet(("1", "2"))
    base = random_base(rng, alpha)
    for _ in range(10):
        w = tuple(rng.randrange(2) for _ in range(rng.randint(0, 5)))
        f = compose_letters(base, w)
        assert diam_after(base, w) == pytest.approx(f.ys[-1] - f.ys[0], abs=1e-12)


def test_vanishing_diameters(rng):
    alpha = Alphabet(("1", "2"))
    for _ in range(5):
        base = random_base(rng, alpha)
        letters = [rng.randrange(2) for _ in range(80)]
        target = 1e-6
        depth = math.ceil(math.log(target / (base.hi - base.lo))
                          / math.log(1.0 - base.margin))
        prev = base.hi - base.lo
        for n in range(1, min(depth, len(letters)) + 1):
            d = diam_after(base, letters[:n])
            assert d <= prev + 1e-15
            prev = d
        assert diam_after(base, letters[:depth]) < target


def test_metric_identical_points(example_base):
    assert canonical_metric(example_base, 0.3, 0.3, 0.01) == 0.0


def test_metric_halves_base_endpoints():
    # every composition of the two halving maps contracts the endpoint gap
    # by exactly its depth, so the empty-word term dominates
    base = halves_base()
    assert canonical_metric(base, 0.0, 1.0, 0.01) == 1.0


def test_metric_dominates_absolute_gap(rng):
    base = halves_base()
    for _ in range(30):
        x, y = rng.uniform(0, 1), rng.uniform(0, 1)
        assert canonical_metric(base, x, y, 0.05) >= abs(x - y)


def test_metric_properties_sampled(rng):
    alpha = Alphabet(("1", "2"))
    base = random_base(rng, alpha, max_slope=0.6)
    metric = base.metric(0.1)
    for _ in range(40):
        x, y, z = sorted(rng.uniform(0, 1) for _ in range(3))
        dxz = metric.distance(x, z)
        assert dxz == metric.distance(z, x)
        assert dxz <= metric.distance(x, y) + metric.distance(y, z) + 1e-12
        # monotone nesting: [x, y] and [y, z] sit inside [x, z]
        assert metric.distance(x, y) <= dxz + 1e-15
        assert metric.distance(y, z) <= dxz + 1e-15
        for a in range(alpha.size):
            fa = base.maps[a]
            if abs(x - z) > 1e-9:
                assert metric.distance(eval_pwl(fa, x), eval_pwl(fa, z)) < dxz


def test_metric_word_set_independent_of_points():
    base = halves_base()
    m1 = base.metric(0.05)
    m2 = base.metric(0.05)
    assert m1 is m2  # cached per (base, eps)
    assert m1.word_count >= 3


def test_metric_matrix_agrees_with_scalar(rng):
    base = halves_base()
    metric = base.metric(0.05)
    pts = [rng.uniform(0, 1) for _ in range(6)]
    mat = metric.values_matrix(pts)
    for i in range(len(pts)):
        for j in range(len(pts)):
            assert metric.distance_from_matrix(mat, i, j) == pytest.approx(
                metric.distance(pts[i], pts[j]), abs=1e-15
            )


def test_post_map_changes_reported_scale(abc123, example_base):
    post = PiecewiseLinearMap([(0.0, -1.0), (1.0, 3.0)])
    base = ContractingBase(abc123, example_base.maps, post)
    w = parse_word("1(3)", abc123)
    assert eval_payoff_raw(base, w) == 0.5
    assert eval_payoff(base, w) == pytest.approx(1.0, abs=1e-12)  # -1 + 4 * 0.5


def test_post_map_domain_must_cover_interval(abc123, example_base):
    small = PiecewiseLinearMap([(0.2, 0.0), (0.8, 1.0)])
    with pytest.raises(DomainError):
        ContractingBase(abc123, example_base.maps, small)


def test_mismatched_domains_rejected(abc123):
    f = PiecewiseLinearMap.affine(0.5, 0.0, 0.0, 1.0, contracting=True)
    g = PiecewiseLinearMap.affine(0.5, 0.0, 0.0, 2.0, contracting=True)
    with pytest.raises(DomainError):
        ContractingBase(Alphabet(("1", "2")), (f, g))


def test_value_bound(example_base):
    assert example_base.value_bound == 1.0
    spec = MultiDiscountedSpec(AB, (0.5, 0.0), (1.0, 0.0))
    assert spec.value_bound == 2.0


def test_payoff_json_roundtrip(example_base):
    obj = payoff_to_json(example_base)
    back = payoff_from_json(obj)
    assert payoff_to_json(back) == obj
    assert payoff_to_json_str(back) == payoff_to_json_str(example_base)


def test_payoff_json_roundtrip_multi():
    spec = MultiDiscountedSpec(AB, (0.25, 0.5), (1.0, -1.0))
    obj = payoff_to_json(spec)
    back = payoff_from_json(obj)
    assert isinstance(back, MultiDiscountedSpec)
    assert back.lam == spec.lam and back.w == spec.w
    assert json.dumps(payoff_to_json(back)) == json.dumps(obj)


def test_payoff_json_rejects_garbage():
    from contpay.payoff import PayoffFormatError

    with pytest.raises(PayoffFormatError):
        payoff_from_json({"kind": "nope"})
    with pytest.raises(PayoffFormatError):
        payoff_from_json({"kind": "multi_discounted", "lambda": {"a": 0.5}, "w": {"b": 1}})
    with pytest.raises(PayoffFormatError):
        payoff_from_json({"kind": "multi_discounted", "lambda": {"a": 1.5}, "w": {"a": 1}})


def test_picard_fallback_matches_exact_route(monkeypatch, abc123, example_base):
    import contpay.payoff as pay

    w = parse_word("12(321)", abc123)
    exact = eval_payoff(example_base, w)
    fresh = ContractingBase(abc123, example_base.maps)
    monkeypatch.setattr(pay, "PIECE_CAP", 2)
    assert eval_payoff(fresh, w) == pytest.approx(exact, abs=1e-8)
