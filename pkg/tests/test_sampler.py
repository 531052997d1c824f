import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from levylab import (ConfigurationError, LatticeField, LatticeSpec,
                     LevyCharacteristic, ModelParams, SingularityError,
                     apply_forward_symbol, green_real_fft, read_ensemble,
                     sample_ensemble, sample_point_values, solve_spde,
                     write_ensemble)
from levylab.greens import green_momentum_sq, squared_momentum


def test_solve_spde_zero(model_half, small_spec):
    phi = solve_spde(model_half, LatticeField.zeros(small_spec))
    assert np.all(phi.values == 0.0)


def test_solve_spde_impulse_is_green(model_half, small_spec):
    eta = np.zeros(small_spec.shape)
    eta[0, 0, 0] = 1.0 / small_spec.cell_volume  # lattice delta
    phi = solve_spde(model_half, LatticeField(small_spec, eta))
    g = green_real_fft(model_half, small_spec)
    assert np.allclose(phi.values, g.values, atol=1e-12)


def test_solve_spde_plane_wave(model_half, small_spec):
    k_index = 3
    x = np.arange(small_spec.L)
    wave = np.cos(2 * np.pi * k_index * x / small_spec.L)
    eta = wave.reshape(-1, 1, 1) * np.ones(small_spec.shape)
    phi = solve_spde(model_half, LatticeField(small_spec, eta))
    k = 2 * np.pi * k_index / (small_spec.L * small_spec.a)
    scale = green_momentum_sq(model_half, k**2)
    assert np.allclose(phi.values, scale * eta, atol=1e-12)


def test_solve_spde_m0_zero():
    with pytest.raises(SingularityError):
        solve_spde(ModelParams(0.5, 0.0), LatticeField.zeros(LatticeSpec(3, 8, 0.5)))


@settings(max_examples=20, deadline=None)
@given(eta=arrays(float, (8, 8, 8), elements=st.floats(-10, 10)),
       c=st.floats(-3, 3))
def test_solve_spde_linearity_and_inverse(eta, c):
    spec = LatticeSpec(3, 8, 0.5)
    p = ModelParams(0.7, 1.0)
    f = LatticeField(spec, eta)
    phi = solve_spde(p, f)
    scaled = solve_spde(p, LatticeField(spec, c * eta))
    assert np.allclose(scaled.values, c * phi.values, atol=1e-9)
    back = apply_forward_symbol(p, phi)
    assert np.allclose(back.values, eta, atol=1e-10 * (1 + np.abs(eta).max()))


def test_ensemble_determinism(model_half, small_spec, gaussian_chi):
    e1 = sample_ensemble(model_half, gaussian_chi, small_spec, 3, 99)
    e2 = sample_ensemble(model_half, gaussian_chi, small_spec, 3, 99)
    assert np.array_equal(e1.fields, e2.fields)
    e3 = sample_ensemble(model_half, gaussian_chi, small_spec, 3, 100)
    assert not np.array_equal(e1.fields, e3.fields)


def test_worker_count_independence(model_half, small_spec, poisson_chi):
    serial = sample_ensemble(model_half, poisson_chi, small_spec, 10, 7, workers=1)
    parallel = sample_ensemble(model_half, poisson_chi, small_spec, 10, 7, workers=4)
    assert np.array_equal(serial.fields, parallel.fields)


def test_point_values_match_ensemble(model_half, small_spec, mixed_chi):
    pts = [(0, 0, 0), (1, 2, 3), (7, 7, 7)]
    e = sample_ensemble(model_half, mixed_chi, small_spec, 5, 21)
    vals = sample_point_values(model_half, mixed_chi, small_spec, pts, 5, 21)
    for j, pt in enumerate(pts):
        assert np.array_equal(vals[:, j], e.fields[(slice(None),) + pt])


def test_gaussian_excess_kurtosis(model_half, gaussian_chi):
    from scipy.stats import kstat
    spec = LatticeSpec(3, 8, 0.5)
    e = sample_ensemble(model_half, gaussian_chi, spec, 10_000, 5, workers=2)
    x = e.fields[:, 0, 0, 0]
    k4 = kstat(x, 4)
    parts = np.array([kstat(c, 4) for c in np.array_split(x, 20)])
    se = parts.std(ddof=1) / np.sqrt(20)
    assert abs(k4) <= 4.0 * se


def test_ensemble_immutable(model_half, small_spec, gaussian_chi):
    e = sample_ensemble(model_half, gaussian_chi, small_spec, 2, 1)
    with pytest.raises(ValueError):
        e.fields[0, 0, 0, 0] = 1.0


def test_lflb_round_trip(tmp_path, model_half, small_spec, mixed_chi):
    e = sample_ensemble(model_half, mixed_chi, small_spec, 4, 31)
    path = tmp_path / "e.lflb"
    write_ensemble(path, e)
    back = read_ensemble(path, master_seed=31)
    assert np.array_equal(back.fields, e.fields)
    assert back.spec == e.spec
    assert back.chi == e.chi
    assert back.params.alpha == e.params.alpha
    assert back.params.m0 == e.params.m0
    # byte-identical on rewrite
    path2 = tmp_path / "e2.lflb"
    write_ensemble(path2, back)
    assert path.read_bytes() == path2.read_bytes()


def test_lflb_rejects_garbage(tmp_path):
    path = tmp_path / "bad.lflb"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(ConfigurationError):
        read_ensemble(path)


def test_lflb_rejects_bad_version(tmp_path, model_half, small_spec, gaussian_chi):
    e = sample_ensemble(model_half, gaussian_chi, small_spec, 1, 0)
    path = tmp_path / "v.lflb"
    write_ensemble(path, e)
    data = bytearray(path.read_bytes())
    data[4] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(ConfigurationError):
        read_ensemble(path)
