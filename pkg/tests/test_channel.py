import numpy as np
import pytest

from dbpsim.channel import (
    ChannelRealization,
    Purpose,
    RngStream,
    SystemConfig,
    demodulate_hard,
    generate_rayleigh,
    modulation,
    modulate,
    partition,
    snr_to_noise,
    transmit_uplink,
)
from dbpsim.errors import ConfigError, DimensionMismatch, LengthError

CFG = SystemConfig(bs_antennas=128, users=16, clusters=4, coherence_len=16)


class TestConstellations:
    @pytest.mark.parametrize("name", ["qpsk", "16qam", "64qam"])
    def test_unit_average_energy(self, name):
        pts = modulation(name).points
        assert abs(np.mean(np.abs(pts) ** 2) - 1.0) < 1e-12

    @pytest.mark.parametrize("name", ["qpsk", "16qam", "64qam"])
    def test_gray_adjacency_per_axis(self, name):
        # walking one step along either axis flips exactly one label bit
        scheme = modulation(name)
        m = scheme.bits_per_symbol // 2
        levels = 1 << m
        for label in range(len(scheme.points)):
            gi, gq = label >> m, label & (levels - 1)
            p = scheme.points[label]
            for other in range(len(scheme.points)):
                oi, oq = other >> m, other & (levels - 1)
                q = scheme.points[other]
                d = abs(p - q)
                if abs(d - scheme.min_distance) < 1e-12:
                    same_axis = abs(p.real - q.real) < 1e-12 or abs(p.imag - q.imag) < 1e-12
                    if same_axis:
                        diff_bits = bin((gi ^ oi) << m | (gq ^ oq)).count("1")
                        assert diff_bits == 1

    def test_qpsk_declared_mapping(self):
        assert modulate([0, 0], modulation("qpsk"))[0] == pytest.approx((1 + 1j) / np.sqrt(2))
        assert modulate([1, 1], modulation("qpsk"))[0] == pytest.approx((-1 - 1j) / np.sqrt(2))

    def test_16qam_declared_mapping(self):
        sym = modulate([0, 0, 0, 0], modulation("16qam"))[0]
        assert sym == pytest.approx((-3 - 3j) / np.sqrt(10))

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError):
            modulation("1024qam")


class TestModulateDemodulate:
    @pytest.mark.parametrize("name", ["qpsk", "16qam", "64qam"])
    def test_noiseless_round_trip(self, name):
        scheme = modulation(name)
        rng = np.random.default_rng(7)
        bits = rng.integers(0, 2, size=scheme.bits_per_symbol * 500)
        assert np.array_equal(demodulate_hard(modulate(bits, scheme), scheme), bits)

    def test_length_error(self):
        with pytest.raises(LengthError):
            modulate([0, 1, 0], modulation("16qam"))

    def test_exact_point_maps_to_label(self):
        scheme = modulation("16qam")
        for label in range(16):
            bits = [(label >> k) & 1 for k in (3, 2, 1, 0)]
            assert np.array_equal(demodulate_hard([scheme.points[label]], scheme), bits)

    def test_origin_tie_breaks_to_smallest_label(self):
        # all four QPSK points are equidistant from 0; label 00 wins
        assert np.array_equal(demodulate_hard([0.0], modulation("qpsk")), [0, 0])

    @pytest.mark.parametrize("name", ["qpsk", "16qam", "64qam"])
    def test_voronoi_property(self, name):
        scheme = modulation(name)
        rng = np.random.default_rng(11)
        bits = rng.integers(0, 2, size=scheme.bits_per_symbol * 10_000)
        sym = modulate(bits, scheme)
        radius = rng.uniform(0, 0.499 * scheme.min_distance, size=sym.size)
        angle = rng.uniform(0, 2 * np.pi, size=sym.size)
        perturbed = sym + radius * np.exp(1j * angle)
        assert np.array_equal(demodulate_hard(perturbed, scheme), bits)


class TestSystemConfig:
    def test_cluster_antennas(self):
        assert CFG.cluster_antennas == 32

    def test_rejects_non_uniform_clusters(self):
        with pytest.raises(ConfigError, match="'B'"):
            SystemConfig(bs_antennas=10, users=2, clusters=4)

    @pytest.mark.parametrize(
        "kwargs,key",
        [
            (dict(bs_antennas=4, users=0, clusters=2), "U"),
            (dict(bs_antennas=4, users=2, clusters=2, coherence_len=0), "n_coh"),
            (dict(bs_antennas=4, users=2, clusters=2, symbol_energy=0.0), "e_s"),
            (dict(bs_antennas=4, users=2, clusters=2, tx_power=-1.0), "p_tx"),
        ],
    )
    def test_validation_names_key(self, kwargs, key):
        with pytest.raises(ConfigError, match=f"'{key}'"):
            SystemConfig(**kwargs)


class TestPartition:
    def test_rows_split(self):
        cfg = SystemConfig(bs_antennas=4, users=2, clusters=2)
        h = np.arange(8, dtype=complex).reshape(4, 2)
        parts = partition(ChannelRealization(h), cfg)
        assert np.array_equal(parts[0], h[:2])
        assert np.array_equal(parts[1], h[2:])

    def test_single_cluster_degenerate(self):
        cfg = SystemConfig(bs_antennas=4, users=2, clusters=1)
        h = np.arange(8, dtype=complex).reshape(4, 2)
        assert np.array_equal(partition(ChannelRealization(h), cfg)[0], h)

    def test_stack_reproduces_exactly(self):
        real = generate_rayleigh(CFG, RngStream(3))
        parts = partition(real, CFG)
        assert len(parts) == 4
        assert all(p.shape == (32, 16) for p in parts)
        assert np.array_equal(np.vstack(parts), real.h)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            partition(ChannelRealization(np.ones((3, 2), dtype=complex)), CFG)


class TestRayleigh:
    def test_determinism(self):
        a = generate_rayleigh(CFG, RngStream(9, trial=1, block=2))
        b = generate_rayleigh(CFG, RngStream(9, trial=1, block=2))
        assert np.array_equal(a.h, b.h)
        c = generate_rayleigh(CFG, RngStream(9, trial=1, block=3))
        assert not np.array_equal(a.h, c.h)

    def test_unit_entry_variance(self):
        cfg = SystemConfig(bs_antennas=1000, users=1000, clusters=1)
        h = generate_rayleigh(cfg, RngStream(5)).h  # 1e6 draws
        assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.01
        assert abs(np.var(h.real) - 0.5) < 0.01
        assert abs(np.var(h.imag) - 0.5) < 0.01

    def test_entries_uncorrelated(self):
        cfg = SystemConfig(bs_antennas=100_000, users=2, clusters=1)
        h = generate_rayleigh(cfg, RngStream(6)).h
        cov = np.mean(h[:, 0] * np.conj(h[:, 1]))
        assert abs(cov) < 0.02


class TestTransmit:
    def test_noise_free_is_exact(self):
        real = generate_rayleigh(CFG, RngStream(1))
        x = np.ones(16, dtype=complex)
        y = transmit_uplink(real.h, x, 0.0, RngStream(1, purpose=Purpose.NOISE))
        assert np.array_equal(y, real.h @ x)

    def test_noise_variance(self):
        cfg = SystemConfig(bs_antennas=100_000, users=1, clusters=1)
        h = np.ones((100_000, 1), dtype=complex)
        n0 = 0.7
        y = transmit_uplink(h, np.zeros(1, dtype=complex), n0, RngStream(2, purpose=Purpose.NOISE))
        assert abs(np.mean(np.abs(y) ** 2) - n0) < 0.02 * n0

    def test_cluster_views_stack(self):
        real = generate_rayleigh(CFG, RngStream(4))
        x = np.ones(16, dtype=complex)
        y = transmit_uplink(real.h, x, 0.3, RngStream(4, purpose=Purpose.NOISE))
        parts = partition(real, CFG)
        stacked = np.concatenate([y[c * 32 : (c + 1) * 32] for c in range(4)])
        assert np.array_equal(stacked, y)
        # and the per-cluster signal part is the cluster channel times x
        clean = transmit_uplink(real.h, x, 0.0, RngStream(4))
        for c in range(4):
            assert np.array_equal(clean[c * 32 : (c + 1) * 32], parts[c] @ x)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValueError):
            transmit_uplink(np.eye(2, dtype=complex), np.ones(2, dtype=complex), -1.0, RngStream(0))


class TestSnrConvention:
    def test_reference_point(self):
        cfg = SystemConfig(bs_antennas=32, users=16, clusters=1)
        assert snr_to_noise(cfg, 12.04) == pytest.approx(1.0, rel=1e-3)

    def test_infinite_snr(self):
        assert snr_to_noise(CFG, np.inf) == 0.0

    def test_single_user_zero_db(self):
        cfg = SystemConfig(bs_antennas=8, users=1, clusters=1)
        assert snr_to_noise(cfg, 0.0) == 1.0
