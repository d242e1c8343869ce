import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import coin_matrix, compositions_brute, hyp2f1_series, r_matrix_paths
from qwq.closed_form import closed_form_state, composition_count, hyp2f1_terminating, r_matrix
from qwq.coin import CoinState, hadamard, identity, parameterized_coin, pauli_z
from qwq.engine import evolve_pure, position_marginal
from qwq.errors import InvalidC, NonTerminating, SingularCoin


def test_hyp2f1_examples():
    assert hyp2f1_terminating(0, 3, 2, 0.7) == 1
    assert hyp2f1_terminating(-1, -1, 1, 0.3 + 0.2j) == pytest.approx(1.3 + 0.2j)
    assert hyp2f1_terminating(-2, -2, 1, 0.5) == pytest.approx(3.25)


def test_hyp2f1_errors():
    with pytest.raises(NonTerminating):
        hyp2f1_terminating(1, 2, 1, 0.5)
    with pytest.raises(InvalidC):
        hyp2f1_terminating(-1, -1, 0, 0.5)


@pytest.mark.parametrize("a,b,c", [(-3, -5, 1), (-4, -2, 2), (-6, 3, 2), (2, -3, 1), (-7, -7, 2)])
@pytest.mark.parametrize("z", [-0.8, 0.25, 1.7])
def test_hyp2f1_against_pochhammer_series(a, b, c, z):
    assert hyp2f1_terminating(a, b, c, z) == pytest.approx(hyp2f1_series(a, b, c, z), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n_balls", range(0, 8))
@pytest.mark.parametrize("n_boxes", range(0, 6))
def test_composition_count(n_balls, n_boxes):
    if n_boxes == 0:
        assert composition_count(n_balls, n_boxes) == 0
    else:
        assert composition_count(n_balls, n_boxes) == compositions_brute(n_balls, n_boxes)


def test_r_matrix_tau_two():
    c = parameterized_coin(0.3, 0.8, 0.6)
    U = np.asarray(c.matrix)
    np.testing.assert_allclose(r_matrix(c, 2, 1), np.outer(U[:, 0], U[0, :]), atol=1e-15)


@pytest.mark.parametrize("n_plus", [0, 1, 2])
def test_r_matrix_hadamard_tau3(n_plus):
    U = np.asarray(hadamard().matrix)
    np.testing.assert_allclose(r_matrix(hadamard(), 3, n_plus), r_matrix_paths(U, 3, n_plus), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0.15, 1.42), st.integers(2, 12), st.data())
def test_r_matrix_matches_path_enumeration(a, b, th, tau, data):
    n_plus = data.draw(st.integers(0, tau - 1))
    c = parameterized_coin(a, b, th)
    ref = r_matrix_paths(coin_matrix(a, b, th), tau, n_plus)
    np.testing.assert_allclose(r_matrix(c, tau, n_plus), ref, atol=1e-11)


def test_hadamard_two_steps_closed_form():
    d, _ = position_marginal(closed_form_state(hadamard(), CoinState.pure(0), 2))
    assert d.as_dict() == pytest.approx({-2: 0.25, 0: 0.5, 2: 0.25}, abs=1e-15)


@pytest.mark.parametrize("tau", range(0, 31))
def test_coin_001_matches_engine(tau):
    c, s0 = parameterized_coin(0, 0, 1), CoinState.pure(0)
    a, b = closed_form_state(c, s0, tau), evolve_pure(c, s0, tau)
    np.testing.assert_allclose(a.psi_plus, b.psi_plus, atol=1e-10)
    np.testing.assert_allclose(a.psi_minus, b.psi_minus, atol=1e-10)


def test_hadamard_tau10_all_amplitudes():
    s0 = CoinState.pure(0.7, 2.1)
    a, b = closed_form_state(hadamard(), s0, 10), evolve_pure(hadamard(), s0, 10)
    np.testing.assert_allclose(a.vector(), b.vector(), atol=1e-10)


@pytest.mark.parametrize("coin", [identity(), pauli_z()])
def test_degenerate_coins_raise(coin):
    with pytest.raises(SingularCoin):
        closed_form_state(coin, CoinState.pure(0.3), 5)


def test_swap_like_coin_raises():
    # U00 = U11 = 0
    with pytest.raises(SingularCoin):
        r_matrix(parameterized_coin(0, 0, math.pi / 2), 4, 1)


def test_short_walks_do_not_need_the_generic_branch():
    # tau <= 2 never reaches the hypergeometric sums
    for tau in (0, 1, 2):
        a = closed_form_state(identity(), CoinState.pure(0.4), tau)
        b = evolve_pure(identity(), CoinState.pure(0.4), tau)
        np.testing.assert_allclose(a.vector(), b.vector(), atol=1e-15)
