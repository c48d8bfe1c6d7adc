"""Invariants of the update maps, checked on generated inputs."""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from interplay.analysis import NotAnEquilibrium, classify_equilibrium, is_socially_balanced_triads
from interplay.core import sign_matrix
from interplay.dynamics import (
    SimulationConfig,
    appraisal_update,
    composite_map,
    equilibrium_matrix,
    influence_from_appraisal,
    opinion_update,
    simulate,
    step,
)

entries = st.floats(-1, 1, allow_nan=False, allow_subnormal=False)


@st.composite
def opinion_matrices(draw, max_n=8, max_m=5):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    Y = draw(arrays(np.float64, (n, m), elements=entries))
    assume(np.min(np.abs(Y).sum(axis=1)) > 1e-3)
    return Y


@st.composite
def equilibria(draw, nonzero=False):
    n = draw(st.integers(1, 8))
    m = draw(st.integers(1, 5))
    rho = draw(arrays(np.int8, n, elements=st.sampled_from([-1, 1])))
    lo = 0.05 if nonzero else 0.0
    mags = draw(arrays(np.float64, m, elements=st.floats(lo, 3, allow_subnormal=False)))
    signs = draw(arrays(np.int8, m, elements=st.sampled_from([-1, 1])))
    a = mags * signs
    assume(np.sum(a**2) > 1e-6)
    return a, rho


@given(opinion_matrices())
def test_chain_equals_composite_map(Y):
    np.testing.assert_allclose(step(Y).Y_next, composite_map(Y), atol=1e-12, rtol=0)


@given(opinion_matrices())
def test_appraisal_structure(Y):
    X = appraisal_update(Y)
    assert np.all(np.diag(X) > 0)
    # Exact signs only: X_ij and X_ji share a dot product but not a divisor,
    # so a tolerance can zero one and not the other.
    S = sign_matrix(X, 0.0)
    assert np.array_equal(S, S.T)
    # |X_ij| <= max_k |Y_jk|
    assert np.all(np.abs(X) <= np.abs(Y).max(axis=1)[None, :] * (1 + 1e-12))


@given(opinion_matrices())
def test_influence_rows_and_signs(Y):
    X = appraisal_update(Y)
    W = influence_from_appraisal(X)
    np.testing.assert_allclose(np.abs(W).sum(axis=1), 1.0, atol=1e-12, rtol=0)
    assert np.array_equal(np.sign(W), np.sign(X))


@given(opinion_matrices())
def test_opinion_update_is_column_convex(Y):
    res = step(Y)
    col_max = np.abs(Y).max(axis=0)
    assert np.all(np.abs(res.Y_next) <= col_max[None, :] * (1 + 1e-12))


@given(opinion_matrices())
def test_rows_never_reverse(Y):
    # Y+_i . Y_i = sum_j (Y_i . Y_j)^2 / const > 0, so no row can collapse in one step.
    Yn = step(Y).Y_next
    assert np.all(np.einsum("ij,ij->i", Yn, Y) > 0)


@given(equilibria())
def test_faction_form_is_fixed_point(eq):
    a, rho = eq
    Y = equilibrium_matrix(a, rho)
    np.testing.assert_allclose(step(Y).Y_next, Y, atol=1e-12, rtol=0)


@given(opinion_matrices(), st.sampled_from([0.5, 3.0, 7.25]))
@settings(max_examples=50)
def test_scale_equivariance(Y, c):
    cfg = SimulationConfig(max_steps=30, convergence_tolerance=0.0)
    base, scaled = simulate(Y, cfg), simulate(c * Y, cfg)
    last = max(base.final.t, scaled.final.t)
    for t in range(1, last + 1):
        a = base.at(min(t, base.final.t))
        b = scaled.at(min(t, scaled.final.t))
        np.testing.assert_allclose(b.Y, c * a.Y, atol=1e-9, rtol=0)
        np.testing.assert_allclose(b.X, c * a.X, atol=1e-9, rtol=0)
        np.testing.assert_allclose(b.W, a.W, atol=1e-9, rtol=0)


@st.composite
def sign_consensus_matrices(draw):
    n = draw(st.integers(1, 7))
    m = draw(st.integers(1, 5))
    rho = draw(arrays(np.int8, n, elements=st.sampled_from([-1, 1])))
    col_sign = draw(arrays(np.int8, m, elements=st.sampled_from([-1, 0, 1])))
    assume(np.any(col_sign != 0))
    mags = draw(arrays(np.float64, (n, m), elements=st.floats(0.01, 1, allow_subnormal=False)))
    return np.outer(rho, col_sign) * mags


@given(sign_consensus_matrices())
@settings(max_examples=60)
def test_sign_pattern_freezes(Y0):
    traj = simulate(Y0, SimulationConfig(max_steps=40, convergence_tolerance=0.0))
    ref = np.sign(Y0)
    prev_min = np.abs(Y0).min()
    for prev, cur in zip(traj.snapshots, traj.snapshots[1:]):
        assert np.array_equal(np.sign(cur.Y), ref)
        cur_min = np.abs(cur.Y).min()
        assert cur_min >= prev_min * (1 - 1e-12)
        assert np.all(np.abs(cur.X) >= np.abs(prev.Y).min() * (1 - 1e-12))
        assert is_socially_balanced_triads(cur.X)
        prev_min = cur_min


@given(equilibria(nonzero=True), st.booleans(), st.integers(0, 2**32 - 1))
@settings(max_examples=80)
def test_classification_matches_residual(eq, perturb, seed):
    a, rho = eq
    Y = np.array(equilibrium_matrix(a, rho))
    if perturb:
        rng = np.random.default_rng(seed)
        Y = Y + rng.uniform(-0.5, 0.5, Y.shape) * np.abs(a).min()
    assume(np.min(np.abs(appraisal_update(Y))) > 1e-3)
    residual = np.max(np.abs(composite_map(Y) - Y))
    assume(not 1e-9 < residual < 1e-6)  # stay clear of the tolerance edge
    try:
        classify_equilibrium(Y, 1e-9)
        ok = True
    except NotAnEquilibrium:
        ok = False
    assert ok == (residual <= 1e-9)
