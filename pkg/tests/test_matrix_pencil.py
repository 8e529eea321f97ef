import numpy as np
import pytest

from spikesr.errors import RankDeficiencyError
from spikesr.matrix_pencil import (
    build_hankel,
    default_pencil_param,
    hankel_down,
    hankel_up,
    mp_recover,
)
from spikesr.signal import SpikeTrain, sample_spectrum, shift


def _circular(a, b):
    frac = (a - b) % 1.0
    return np.minimum(frac, 1.0 - frac)


def test_build_hankel_examples():
    h = build_hankel(np.array([1, 2, 3, 4], dtype=complex), 1)
    np.testing.assert_array_equal(h, [[1, 2, 3], [2, 3, 4]])
    h = build_hankel(np.array([2, -1, -1, 2], dtype=complex), 2)
    np.testing.assert_array_equal(h, [[2, -1], [-1, -1], [-1, 2]])
    np.testing.assert_array_equal(hankel_down(h), [[-1, -1], [-1, 2]])
    np.testing.assert_array_equal(hankel_up(h), [[2, -1], [-1, -1]])


def test_build_hankel_rejects_bad_pencil():
    values = np.arange(5, dtype=complex)
    with pytest.raises(ValueError):
        build_hankel(values, 0)
    with pytest.raises(ValueError):
        build_hankel(values, 5)


def test_default_pencil_param():
    assert default_pencil_param(7) == 4
    assert default_pencil_param(8) == 4
    assert default_pencil_param(3) == 2
    with pytest.raises(ValueError):
        default_pencil_param(2)


def test_recover_single_spike():
    train = SpikeTrain(amplitudes=[1.0], nodes=[0.2])
    samples = sample_spectrum(train, 8, 0.0, 0)
    result = mp_recover(samples, 1, 4)
    assert result.estimate.nodes[0] == pytest.approx(0.2, abs=1e-10)
    assert result.estimate.amplitudes[0] == pytest.approx(1.0, abs=1e-10)
    assert result.pencil_param == 4
    assert len(result.sigma_upper) == 1 and len(result.sigma_lower) == 1


def test_recover_symmetric_pair_wraps_to_principal_range():
    train = SpikeTrain(amplitudes=[1.0, 1.0], nodes=[1 / 3, 2 / 3])
    samples = sample_spectrum(train, 4, 0.0, 0)
    result = mp_recover(samples, 2, 2)
    np.testing.assert_allclose(result.estimate.nodes, [-1 / 3, 1 / 3], atol=1e-10)
    np.testing.assert_allclose(result.estimate.amplitudes, [1, 1], atol=1e-9)


def test_recover_random_three_spikes():
    rng = np.random.default_rng(5)
    while True:
        nodes = np.sort(rng.uniform(-0.45, 0.45, 3))
        if np.min(np.diff(nodes)) >= 0.1:
            break
    amps = rng.normal(size=3) + 1j * rng.normal(size=3)
    train = SpikeTrain(amplitudes=amps, nodes=nodes)
    result = mp_recover(sample_spectrum(train, 16, 0.0, 0), 3, 8)
    assert np.abs(result.estimate.nodes - nodes).max() < 1e-9
    assert np.abs(result.estimate.amplitudes - amps).max() < 1e-9


def test_exact_recovery_property():
    rng = np.random.default_rng(123)
    for _ in range(40):
        d = int(rng.integers(1, 6))
        n = int(rng.integers(2 * d + 2, 40))
        while True:
            nodes = np.sort(rng.uniform(-0.5, 0.5, d))
            gaps = _circular(np.roll(nodes, -1), nodes) if d > 1 else np.array([1.0])
            if gaps.min() >= 2.0 / n:
                break
        amps = rng.uniform(0.1, 3.0, d) * np.exp(1j * rng.uniform(0, 2 * np.pi, d))
        train = SpikeTrain(amplitudes=amps, nodes=nodes)
        result = mp_recover(sample_spectrum(train, n, 0.0, 0), d)
        assert _circular(result.estimate.nodes, nodes).max() < 1e-8
        assert np.abs(result.estimate.amplitudes - amps).max() < 1e-8


def test_eigenvalue_moduli_near_unit_circle_at_small_noise():
    rng = np.random.default_rng(9)
    train = SpikeTrain(
        amplitudes=[1.0, 1.0 + 0.5j, -2.0], nodes=[-0.3, 0.05, 0.31]
    )
    for eps in (1e-8, 1e-6, 1e-4):
        samples = sample_spectrum(train, 32, eps, int(rng.integers(1 << 30)))
        hankel = build_hankel(samples, default_pencil_param(32))
        sigma_d = np.linalg.svd(hankel, compute_uv=False)[2]
        delta = samples.actual_noise / sigma_d
        result = mp_recover(samples, 3)
        moduli = np.abs(result.eigenvalues)
        assert np.all(moduli >= 1 - 10 * delta)
        assert np.all(moduli <= 1 + 10 * delta)


def test_recover_is_bit_reproducible():
    train = SpikeTrain(amplitudes=[1.0, -1.0], nodes=[0.1, 0.12])
    samples = sample_spectrum(train, 32, 1e-5, 3)
    a = mp_recover(samples, 2)
    b = mp_recover(samples, 2)
    np.testing.assert_array_equal(a.estimate.nodes, b.estimate.nodes)
    np.testing.assert_array_equal(a.estimate.amplitudes, b.estimate.amplitudes)


def test_recover_shift_equivariance():
    train = SpikeTrain(amplitudes=[1.0, 2.0], nodes=[-0.1, 0.2])
    alpha = 0.15
    base = mp_recover(sample_spectrum(train, 24, 0.0, 0), 2)
    moved = mp_recover(sample_spectrum(shift(train, alpha), 24, 0.0, 0), 2)
    expected = np.sort((base.estimate.nodes - alpha + 0.5) % 1.0 - 0.5)
    assert _circular(moved.estimate.nodes, expected).max() < 1e-8


def test_recover_rank_deficiency_signal():
    # single-spike data solved at order 3: the Hankel blocks have rank 1
    train = SpikeTrain(amplitudes=[1.0], nodes=[0.2])
    samples = sample_spectrum(train, 16, 0.0, 0)
    with pytest.raises(RankDeficiencyError):
        mp_recover(samples, 3)


def test_recover_validates_arguments():
    train = SpikeTrain(amplitudes=[1.0, 2.0], nodes=[0.1, 0.3])
    samples = sample_spectrum(train, 8, 0.0, 0)
    with pytest.raises(ValueError):
        mp_recover(samples, 2, 1)  # pencil below d
    with pytest.raises(ValueError):
        mp_recover(samples, 2, 7)  # pencil above N - d
    with pytest.raises(ValueError):
        mp_recover(sample_spectrum(train, 3, 0.0, 0), 2)  # too few samples


def test_result_json_schema():
    train = SpikeTrain(amplitudes=[1.0], nodes=[0.25])
    result = mp_recover(sample_spectrum(train, 8, 0.0, 0), 1)
    obj = result.to_json_dict()
    assert set(obj) == {"nodes", "amplitudes", "L", "sigma_A", "sigma_B"}
    assert obj["L"] == 4
    assert obj["nodes"][0] == pytest.approx(0.25, abs=1e-10)
