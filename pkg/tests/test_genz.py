import numpy as np
import pytest

from quadcal.genz import (
    FAMILIES,
    GenzFunction,
    discontinuous_and_2d,
    evaluate_genz,
    generate_data,
    random_genz,
    two_dim_fixture,
)


def _reference(family, a, b, x):
    """Straightforward per-point re-implementation of each family."""
    d = len(a)
    if family == "oscillatory":
        return np.cos(2.0 * np.pi * b[0] + sum(a[i] * x[i] for i in range(d)))
    if family == "product_peak":
        out = 1.0
        for i in range(d):
            out *= 1.0 / (a[i] ** -2 + (x[i] - b[i]) ** 2)
        return out
    if family == "corner_peak":
        return (1.0 + sum(a[i] * x[i] for i in range(d))) ** (-(d + 1))
    if family == "gaussian":
        return np.exp(-sum(a[i] ** 2 * (x[i] - b[i]) ** 2 for i in range(d)))
    if family == "c0":
        return np.exp(-sum(a[i] * abs(x[i] - b[i]) for i in range(d)))
    if family == "discontinuous":
        if x[0] > b[0] or (d >= 2 and x[1] > b[1]):
            return 0.0
        return np.exp(sum(a[i] * x[i] for i in range(d)))
    raise AssertionError(family)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("d", [1, 3])
def test_families_match_reference(family, d, rng):
    a = rng.random(d) + 0.5
    b = rng.random(d)
    fn = GenzFunction(family, a=a, b=b)
    pts = rng.random((100, d))
    got = evaluate_genz(fn, pts)
    expected = np.array([_reference(family, a, b, x) for x in pts])
    assert np.allclose(got, expected, rtol=1e-14, atol=1e-14)


def test_discontinuous_or_condition():
    fn = GenzFunction("discontinuous", a=[1.0, 1.0], b=[0.5, 0.5])
    pts = np.array([[0.6, 0.1], [0.1, 0.6], [0.6, 0.6], [0.1, 0.1]])
    vals = evaluate_genz(fn, pts)
    assert vals[0] == 0.0 and vals[1] == 0.0 and vals[2] == 0.0
    assert vals[3] == pytest.approx(np.exp(0.2))


def test_discontinuous_and_variant():
    pts = np.array([[0.7, 0.1], [0.7, 0.7], [0.1, 0.7]])
    vals = discontinuous_and_2d(pts, b=0.6)
    assert vals[1] == 0.0
    assert vals[0] == pytest.approx(np.exp(0.8))
    assert vals[2] == pytest.approx(np.exp(0.8))


def test_corner_peak_monotone_decreasing(rng):
    fn = GenzFunction("corner_peak", a=rng.random(3) + 0.1, b=rng.random(3))
    x = rng.random((20, 3))
    lower = evaluate_genz(fn, x)
    higher = evaluate_genz(fn, x + 0.05)
    assert np.all(higher < lower)


def test_two_dim_fixtures():
    pp = two_dim_fixture("product_peak")
    assert np.allclose(pp.a, [2.0, 2.0]) and np.allclose(pp.b, [0.5, 0.5])
    # quarter-width peak: value at the center is (1/4)^-2 per factor
    assert evaluate_genz(pp, np.array([[0.5, 0.5]]))[0] == pytest.approx(16.0)
    c0 = two_dim_fixture("c0")
    assert evaluate_genz(c0, np.array([[0.5, 0.5]]))[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        two_dim_fixture("oscillatory")


def test_random_genz_scaling(rng):
    fn = random_genz("gaussian", 5, rng)
    assert np.linalg.norm(fn.a) == pytest.approx(2.5, abs=1e-12)
    assert np.all((fn.b >= 0.0) & (fn.b <= 1.0))
    fn2 = random_genz("gaussian", 3, rng, scale=7.0)
    assert np.linalg.norm(fn2.a) == pytest.approx(7.0, abs=1e-12)
    with pytest.raises(ValueError):
        random_genz("gaussian", 2, rng, scale=0.0)


def test_validation():
    with pytest.raises(ValueError):
        GenzFunction("nope", a=[1.0], b=[0.0])
    with pytest.raises(ValueError):
        GenzFunction("gaussian", a=[1.0, 2.0], b=[0.0])
    fn = GenzFunction("gaussian", a=[1.0], b=[0.0])
    with pytest.raises(ValueError):
        evaluate_genz(fn, np.ones((3, 2)))


def test_generate_data(rng):
    fn = GenzFunction("gaussian", a=[2.0, 2.0], b=[0.5, 0.5])
    ds = generate_data(fn, [0.5, 0.5], sigma=0.1, m=500, rng=np.random.default_rng(0))
    assert ds.z.shape == (500,)
    assert ds.z.mean() == pytest.approx(1.0, abs=0.02)  # u(x*) = 1 at the center
    again = generate_data(fn, [0.5, 0.5], sigma=0.1, m=500, rng=np.random.default_rng(0))
    assert np.array_equal(ds.z, again.z)
    # plain callables work too
    ds2 = generate_data(lambda p: p.sum(axis=1), [0.25, 0.25], 0.0, 3, rng)
    assert np.allclose(ds2.z, 0.5)
    with pytest.raises(ValueError):
        generate_data(fn, [0.5, 0.5], sigma=0.1, m=0, rng=rng)
    with pytest.raises(ValueError):
        generate_data(fn, [0.5, 0.5], sigma=-1.0, m=3, rng=rng)
