import dataclasses
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mqwlink.config import load_config
from mqwlink.engine import LinkScenario, Trace
from mqwlink.errors import InsufficientData, MissingLevel
from mqwlink.metrics import (EyeDiagram, evaluate_eye, eye_metrics, eye_vs_bitrate, fold_eye,
                             max_error_free_bitrate)
from mqwlink.waveform import PrbsNrz, sample_array

DEFAULT_INI = Path(__file__).parents[1] / "configs" / "default.ini"


def synthetic_trace(clock, n_bits, per_ui, power):
    dt = 1.0 / clock.bit_rate / per_ui
    n = n_bits * per_ui
    z = np.zeros(n)
    t = dt * np.arange(n)
    p = power(t)
    return Trace(0.0, dt, z, z, z, p, z, p)


def square(clock, lo, hi):
    return lambda t: sample_array(dataclasses.replace(clock, low=lo, high=hi), t)


CLOCK = PrbsNrz(10e9, 7, 1, 0.0, 1.0)


def test_ideal_square_folds_to_two_levels_and_exact_means():
    tr = synthetic_trace(CLOCK, 127, 40, square(CLOCK, 1e-4, 1e-3))
    eye = fold_eye(tr, CLOCK)
    assert set(np.unique(eye.power)) == {1e-4, 1e-3}
    assert np.all((eye.ui_position >= 0) & (eye.ui_position < 2))
    m = eye_metrics(eye)
    assert m.level_one_mean == 1e-3 and m.level_zero_mean == 1e-4
    assert m.level_one_std == 0 and m.level_zero_std == 0
    assert m.eye_height == pytest.approx(9e-4)
    assert m.q_factor == pytest.approx(1e4)
    assert m.error_free and m.ber_estimate == 0.0
    assert m.extinction_ratio == pytest.approx(10.0)
    assert m.eye_width == pytest.approx(1e-10)


def test_constant_trace_has_closed_eye():
    tr = synthetic_trace(CLOCK, 64, 40, lambda t: np.full_like(t, 1e-3))
    m = eye_metrics(fold_eye(tr, CLOCK))
    assert m.eye_height == 0.0 and m.eye_width == 0.0
    assert m.q_factor == 0.0 and m.ber_estimate == 0.5 and not m.error_free
    assert m.extinction_ratio == 1.0


def test_gaussian_levels_q_monte_carlo():
    rng = np.random.default_rng(7)
    base = square(CLOCK, 1.0, 2.0)
    tr = synthetic_trace(CLOCK, 2000, 20, lambda t: base(t) + rng.normal(0, 0.05, t.shape))
    m = eye_metrics(fold_eye(tr, CLOCK))
    assert m.q_factor == pytest.approx(10.0, rel=0.03)
    assert m.level_one_mean == pytest.approx(2.0, abs=3e-3)
    assert m.eye_height <= m.level_one_mean - m.level_zero_mean


def test_preconditions():
    with pytest.raises(InsufficientData):
        fold_eye(synthetic_trace(CLOCK, 16, 40, square(CLOCK, 0, 1)), CLOCK)
    with pytest.raises(InsufficientData):
        fold_eye(synthetic_trace(CLOCK, 64, 10, square(CLOCK, 0, 1)), CLOCK)
    eye = fold_eye(synthetic_trace(CLOCK, 64, 40, square(CLOCK, 0, 1)), CLOCK)
    ones_only = EyeDiagram(eye.ui_position, eye.power, np.ones_like(eye.bit), eye.bit_rate,
                           eye.samples_per_ui)
    with pytest.raises(MissingLevel):
        eye_metrics(ones_only)


@settings(max_examples=50, deadline=None)
@given(c=st.floats(1e-3, 1e3), noise=st.one_of(st.just(0.0), st.floats(1e-6, 0.2)))
def test_scale_equivariance(c, noise):
    rng = np.random.default_rng(1)
    base = square(CLOCK, 1.0, 2.0)
    eye = fold_eye(synthetic_trace(CLOCK, 64, 20, lambda t: base(t)
                                   + noise * rng.standard_normal(t.shape)), CLOCK)
    a, b = eye_metrics(eye), eye_metrics(eye.scaled(c))
    for name in ("eye_height", "level_one_mean", "level_zero_mean", "level_one_std",
                 "level_zero_std"):
        assert getattr(b, name) == pytest.approx(c * getattr(a, name), rel=1e-9, abs=1e-300)
    assert b.q_factor == pytest.approx(a.q_factor, rel=1e-9)
    assert b.extinction_ratio == pytest.approx(a.extinction_ratio, rel=1e-9)
    assert b.error_free == a.error_free


@pytest.fixture(scope="module")
def default_scenario():
    return load_config(DEFAULT_INI).scenario()


def test_eye_height_against_fine_fold(default_scenario):
    coarse = dataclasses.replace(default_scenario, record_stride=20)
    fine = dataclasses.replace(default_scenario, record_stride=2)
    _, mc = evaluate_eye(coarse)
    _, mf = evaluate_eye(fine)
    oma = mf.level_one_mean - mf.level_zero_mean
    assert mf.eye_height < oma
    assert mc.eye_height == pytest.approx(mf.eye_height, rel=1e-2)
    assert mf.eye_height == pytest.approx(9.047063530241207e-04, rel=1e-9)


def test_eye_on_a_master_source_is_clean():
    sc = LinkScenario(source="constant_master", laser_drive=PrbsNrz(10e9, 7, 3, 0, 0),
                      mod_drive=PrbsNrz(10e9, 7, 3, 2.0, 1.0, 10e-12), eye_bits=64,
                      transient_skip=0.0)
    _, m = evaluate_eye(sc)
    assert m.error_free and m.q_factor == pytest.approx(1e4)


def test_low_rates_all_pass(default_scenario):
    rates = [1e9, 2e9, 4e9]
    assert max_error_free_bitrate(default_scenario, rates) == 4e9


def test_degraded_edges_exclude_top_rate(default_scenario):
    rates = [4e9, 8e9, 12e9]
    assert max_error_free_bitrate(default_scenario, rates) == 12e9
    slow_edges = {name: dataclasses.replace(getattr(default_scenario, name), t_edge=0.9 / 12e9)
                  for name in ("laser_drive", "mod_drive")}
    degraded = dataclasses.replace(default_scenario, **slow_edges)
    assert max_error_free_bitrate(degraded, rates) == 8e9


def test_none_pass_and_argument_checks(default_scenario):
    assert max_error_free_bitrate(default_scenario, [16e9, 20e9]) is None
    with pytest.raises(ValueError):
        max_error_free_bitrate(default_scenario, [])
    with pytest.raises(ValueError):
        max_error_free_bitrate(default_scenario, [4e9, 1e9])


def test_eye_vs_bitrate_parallel_matches_serial(default_scenario):
    rates = [2e9, 8e9]
    assert (eye_vs_bitrate(default_scenario, rates, max_workers=1)
            == eye_vs_bitrate(default_scenario, rates, max_workers=2))
