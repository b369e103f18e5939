import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispkin.errors import InvalidStateError
from dispkin.macro import MacroPair, lambda_coeff, relax_exact, relax_temperatures

B = 1.0 / (8.0 * np.pi)


def test_lambda_examples():
    assert lambda_coeff(1.0, 1.0, B) == pytest.approx(0.25, rel=1e-15)
    assert lambda_coeff(3.0, 1.0, B) == pytest.approx(0.75, rel=1e-15)
    assert lambda_coeff(0.0) == 0.0
    with pytest.raises(ValueError):
        lambda_coeff(-1.0)


def test_equal_temperatures_constant():
    out = relax_temperatures(MacroPair(1.3, 1.3), 0.01, 2.0)
    assert np.all(out[:, 1] == 1.3) and np.all(out[:, 2] == 1.3)


def test_time_axis():
    out = relax_temperatures(MacroPair(3.0, 0.5), 0.01, 1.0)
    assert out.shape == (101, 3)
    assert out[0, 0] == 0.0 and out[-1, 0] == pytest.approx(1.0, abs=1e-12)
    short = relax_temperatures(MacroPair(3.0, 0.5), 0.3, 1.0)
    assert short[-1, 0] == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.2, 3), st.floats(0.2, 3))
def test_weighted_temperature_conserved(TL, TH, nL, nH):
    out = relax_temperatures(MacroPair(TL, TH, nL, nH), 0.01, 5.0)
    total = nL * out[:, 1] + nH * out[:, 2]
    assert np.abs(total - total[0]).max() <= 1e-10 * total[0]


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.2, 3), st.floats(0.2, 3))
def test_difference_monotone_no_sign_change(TL, TH, nL, nH):
    out = relax_temperatures(MacroPair(TL, TH, nL, nH), 0.01, 10.0)
    d = out[:, 1] - out[:, 2]
    assert np.all(np.sign(d) == np.sign(d[0]))
    assert np.all(np.diff(np.abs(d)) <= 0)


def test_rk4_matches_closed_form():
    init = MacroPair(3.0, 0.5, 1.0, 0.7)
    out = relax_temperatures(init, 1e-2, 10.0)
    ref = relax_exact(init, out[:, 0])
    assert np.abs(out[:, 1:] - ref[:, 1:]).max() <= 1e-8


def test_double_peak_data_relaxes_to_mean():
    out = relax_temperatures(MacroPair(3.0, 0.5), 0.01, 60.0)
    assert out[-1, 1] == pytest.approx(1.75, abs=1e-8)
    assert out[-1, 2] == pytest.approx(1.75, abs=1e-8)


def test_contraction_rate():
    # with unit densities the gap decays like exp(-8 pi B t) = exp(-t)
    out = relax_temperatures(MacroPair(2.0, 1.0), 0.01, 1.0)
    assert out[-1, 1] - out[-1, 2] == pytest.approx(np.exp(-1.0), rel=1e-9)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        MacroPair(-1.0, 1.0)
    with pytest.raises(ValueError):
        MacroPair(float("nan"), 1.0)
    with pytest.raises(ValueError):
        relax_temperatures(MacroPair(1.0, 1.0), 0.0, 1.0)


def test_negative_temperature_aborts():
    # an oversized RK4 step amplifies the gap instead of damping it
    with pytest.raises(InvalidStateError, match="negative temperature"):
        relax_temperatures(MacroPair(3.0, 0.0), 5.0, 10.0)
