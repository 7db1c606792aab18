from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from conftest import kron_oracle
from ultrawalk.classical_walk import (
    DecayFitResult,
    classical_distribution,
    classical_grid,
    classical_oracle,
    excess_return,
    fit_decay,
    fit_decay_curve,
    generator,
    return_probability,
)
from ultrawalk.errors import DomainError, ValidationError
from ultrawalk.hamiltonian import Exponential, Linear
from ultrawalk.quantum_walk import WalkParams
from ultrawalk.ultrametric import TreeParams

WP = WalkParams.from_couplings(3, (2.0, 1.0))


def test_generator_is_a_rate_matrix():
    Q = generator(WP.es, WP.tp)
    np.testing.assert_allclose(Q.sum(axis=1), 0.0, atol=1e-12)
    off = Q[~np.eye(9, dtype=bool)]
    assert np.all(off > 0)
    with pytest.raises(ValidationError):
        generator(WP.es.with_eps0(0.0), WP.tp)


def test_non_default_diagonal_rejected():
    wp = WalkParams.from_couplings(3, (2.0, 1.0), eps0=3.0)
    with pytest.raises(ValidationError):
        classical_distribution(wp, 1.0)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 4), st.floats(0.0, 20.0))
def test_spectral_distribution_matches_expm(p, M, t):
    eps = [1.5 ** (M - k) for k in range(M)]
    wp = WalkParams.from_couplings(p, eps)
    dense = expm(t * kron_oracle(p, wp.es.eps0, eps))[:, 0]
    np.testing.assert_allclose(classical_distribution(wp, t).expand(), dense, atol=1e-10)


def test_library_oracle_agrees_with_expm():
    dense = expm(0.7 * kron_oracle(3, WP.es.eps0, [2.0, 1.0]))[:, 0]
    np.testing.assert_allclose(classical_oracle(WP, 0.7), dense, atol=1e-12)


def test_conservation_positivity_and_relaxation():
    wp = WalkParams.from_couplings(2, (4.0, 2.0, 1.0, 0.5))
    ts = np.linspace(0.0, 30.0, 1000)
    P = classical_grid(wp, ts)
    sizes = np.array(wp.tp.class_sizes())
    np.testing.assert_allclose(P @ sizes, 1.0, atol=1e-12)
    assert np.all(P >= 0.0)
    np.testing.assert_allclose(P[-1], 1 / 16, atol=1e-6)
    assert np.all(np.diff(P[:, 0]) <= 1e-15)


def test_return_probability_forms_agree():
    wp = WalkParams.from_landscape(Linear(1.0, 1.0, ref_level=0), TreeParams(2, 10))
    ts = np.array([0.0, 1.0, 10.0, 1e3])
    np.testing.assert_allclose(return_probability(wp, ts), classical_grid(wp, ts)[:, 0], rtol=1e-12)
    assert return_probability(wp, 0.0) == pytest.approx(1.0)
    assert excess_return(wp, 0.0) == pytest.approx(1.0 - 2.0**-10)
    with pytest.raises(DomainError):
        return_probability(wp, -1.0)


def test_fit_recovers_synthetic_laws():
    t = np.geomspace(1.0, 1e4, 100)
    res = fit_decay_curve(t, 3.0 * t**-0.7, "power")
    assert res.slope == pytest.approx(-0.7) and res.residual < 1e-12
    res = fit_decay_curve(t, np.exp(-0.5 * t**0.3), "stretched")
    assert res.slope == pytest.approx(0.3) and res.residual < 1e-12
    res = fit_decay_curve(t, 1.0 / (2.0 + 0.5 * np.log(t)), "logarithmic")
    assert res.slope == pytest.approx(0.5) and res.residual < 1e-12
    # each law is best fitted by its own model
    for model, P in [("power", t**-0.7), ("logarithmic", 1.0 / (2.0 + np.log(t)))]:
        resid = {m: fit_decay_curve(t, P, m).residual for m in ("power", "logarithmic")}
        assert min(resid, key=resid.get) == model


def test_fit_validation():
    t = np.geomspace(1.0, 10.0, 5)
    with pytest.raises(ValidationError):
        fit_decay_curve(t, t, "gaussian")
    with pytest.raises(ValidationError):
        fit_decay_curve(t[:2], t[:2], "power")
    with pytest.raises(ValidationError):
        fit_decay_curve(t, -t, "power")
    with pytest.raises(ValidationError):
        DecayFitResult("power", -1.0, 0.0, (5.0, 1.0), 0.1)
    with pytest.raises(ValidationError):
        fit_decay(Linear(1.0, 1.0), TreeParams(2, 10), (10.0, 1.0), "power")


def test_fit_rejects_plateau_windows():
    # literal reference level: rates O(1) so the walk equilibrates long before t = 1e6
    with pytest.raises(ValidationError, match="plateau"):
        fit_decay(Linear(1.0, 1.0), TreeParams(2, 40), (1e2, 1e6), "power")


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0, 3.0])
def test_linear_landscape_power_exponent(alpha):
    res = fit_decay(Linear(1.0, alpha, ref_level=0), TreeParams(2, 40), (1e2, 1e6), "power")
    assert res.slope == pytest.approx(-1.0 / alpha, rel=0.15)


def test_exponential_landscape_is_logarithmic_over_many_decades():
    # the logarithmic law only separates from a power law across several relaxation steps
    ls = Exponential(1.0, 1.0, ref_level=21)
    tp = TreeParams(2, 30)
    resid = {m: fit_decay(ls, tp, (1.0, 1e20), m).residual for m in ("power", "logarithmic")}
    assert resid["logarithmic"] < resid["power"]


def test_fit_result_serialises():
    res = fit_decay(Linear(1.0, 1.0, ref_level=0), TreeParams(2, 40), (1e2, 1e6), "power")
    d = res.to_dict()
    assert set(d) == {"model", "slope", "intercept", "window", "residual"}
    assert d["window"] == [100.0, 1e6] and math.isfinite(d["residual"])
