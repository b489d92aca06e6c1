"""System configuration, Rayleigh channels, modulation, and noise streams.

Conventions fixed here (documented in the README):

* SNR convention: ``SNR = U * E_s / N_0``, the total received signal power
  per base-station antenna over the noise power, for unit-variance Rayleigh
  entries.
* Gray labeling: QPSK maps bit 0 to the positive half-axis per I/Q axis;
  square QAM uses a per-axis binary-reflected Gray code with the I-axis
  bits in the most significant positions.
* Block fading: one channel draw is held constant for ``coherence_len``
  consecutive symbol transmissions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ConfigError, DimensionMismatch, LengthError


class Purpose(IntEnum):
    """Sub-stream selector for the seeded RNG streams."""

    CHANNEL = 0
    SYMBOLS = 1
    NOISE = 2
    DL_SYMBOLS = 3
    DL_NOISE = 4


@dataclass(frozen=True)
class RngStream:
    """Deterministic RNG stream addressed by ``(trial, block, purpose)``.

    The same ``(seed, trial, block, purpose)`` always yields an identical
    generator, so draws are reproducible and independent workers can own
    disjoint ids without sharing state.
    """

    seed: int
    trial: int = 0
    block: int = 0
    purpose: int = Purpose.CHANNEL

    def substream(self, trial=None, block=None, purpose=None) -> "RngStream":
        return RngStream(
            self.seed,
            self.trial if trial is None else trial,
            self.block if block is None else block,
            self.purpose if purpose is None else purpose,
        )

    def generator(self) -> np.random.Generator:
        """Fresh generator for this stream id; repeated calls restart it."""
        return np.random.default_rng(
            np.random.SeedSequence(
                [int(self.seed), int(self.trial), int(self.block), int(self.purpose)]
            )
        )


def _gray_to_binary(g: int) -> int:
    b = 0
    while g:
        b ^= g
        g >>= 1
    return b


def _square_qam_points(bits_per_symbol: int) -> np.ndarray:
    """Label-ordered constellation points, unit average energy.

    The label's most significant half selects the I amplitude, the rest the
    Q amplitude; each half is interpreted as a Gray code over the ascending
    amplitude levels.
    """
    m = bits_per_symbol // 2
    levels = 1 << m
    amplitudes = 2.0 * np.arange(levels) - (levels - 1)
    scale = np.sqrt(np.mean(amplitudes**2) * 2.0)
    points = np.empty(1 << bits_per_symbol, dtype=np.complex128)
    for label in range(1 << bits_per_symbol):
        gi = label >> m
        gq = label & (levels - 1)
        points[label] = complex(
            amplitudes[_gray_to_binary(gi)], amplitudes[_gray_to_binary(gq)]
        )
    return points / scale


def _qpsk_points() -> np.ndarray:
    # bit 0 -> positive I, bit 1 -> negative I; same for Q on the second bit
    a = 1.0 / np.sqrt(2.0)
    signs = {0: a, 1: -a}
    return np.array(
        [complex(signs[b >> 1], signs[b & 1]) for b in range(4)], dtype=np.complex128
    )


@dataclass(frozen=True)
class ModulationScheme:
    """A Gray-labeled constellation normalized to unit average energy."""

    name: str
    bits_per_symbol: int
    points: np.ndarray

    @property
    def min_distance(self) -> float:
        diffs = self.points[:, None] - self.points[None, :]
        d = np.abs(diffs)
        return float(d[d > 0].min())


_SCHEMES = {
    "qpsk": ModulationScheme("qpsk", 2, _qpsk_points()),
    "16qam": ModulationScheme("16qam", 4, _square_qam_points(4)),
    "64qam": ModulationScheme("64qam", 6, _square_qam_points(6)),
}


def modulation(name: str) -> ModulationScheme:
    key = name.lower()
    if key not in _SCHEMES:
        raise ConfigError("modulation", f"unknown scheme '{name}' (qpsk/16qam/64qam)")
    return _SCHEMES[key]


@dataclass(frozen=True)
class SystemConfig:
    """Antenna/cluster/user geometry and power bookkeeping."""

    bs_antennas: int
    users: int
    clusters: int
    coherence_len: int = 1
    modulation: str = "16qam"
    symbol_energy: float = 1.0
    tx_power: float = 1.0

    def __post_init__(self):
        if self.users < 1:
            raise ConfigError("U", "must be >= 1")
        if self.clusters < 1:
            raise ConfigError("C", "must be >= 1")
        if self.bs_antennas < 1:
            raise ConfigError("B", "must be >= 1")
        if self.bs_antennas % self.clusters != 0:
            raise ConfigError(
                "B",
                f"B={self.bs_antennas} must be divisible by C={self.clusters} "
                "(uniform clusters only)",
            )
        if self.coherence_len < 1:
            raise ConfigError("n_coh", "must be >= 1")
        if not self.symbol_energy > 0:
            raise ConfigError("e_s", "must be > 0")
        if not self.tx_power > 0:
            raise ConfigError("p_tx", "must be > 0")
        modulation(self.modulation)

    @property
    def cluster_antennas(self) -> int:
        return self.bs_antennas // self.clusters

    @property
    def scheme(self) -> ModulationScheme:
        return modulation(self.modulation)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading uplink channel draw and its per-cluster row blocks."""

    h: np.ndarray
    block_index: int = 0
    cluster_rows: int = field(default=0)

    def cluster_views(self):
        rows = self.cluster_rows or self.h.shape[0]
        return [self.h[i : i + rows] for i in range(0, self.h.shape[0], rows)]


def generate_rayleigh(cfg: SystemConfig, stream: RngStream) -> ChannelRealization:
    """I.i.d. circularly-symmetric complex Gaussian channel, unit entry variance."""
    gen = stream.generator()
    shape = (cfg.bs_antennas, cfg.users)
    h = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelRealization(h, block_index=stream.block, cluster_rows=cfg.cluster_antennas)


def partition(real: ChannelRealization, cfg: SystemConfig):
    """Consecutive-row sub-matrices, one per cluster; their stack is exactly H."""
    if real.h.shape != (cfg.bs_antennas, cfg.users):
        raise DimensionMismatch(
            f"channel is {real.h.shape}, config expects "
            f"({cfg.bs_antennas}, {cfg.users})"
        )
    rows = cfg.cluster_antennas
    return [real.h[c * rows : (c + 1) * rows] for c in range(cfg.clusters)]


def modulate(bits, scheme: ModulationScheme) -> np.ndarray:
    """Map a flat 0/1 sequence onto constellation points, MSB first per symbol."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size % scheme.bits_per_symbol != 0:
        raise LengthError(
            f"bit count {bits.size} is not a multiple of {scheme.bits_per_symbol}"
        )
    groups = bits.reshape(-1, scheme.bits_per_symbol)
    weights = 1 << np.arange(scheme.bits_per_symbol - 1, -1, -1)
    labels = groups @ weights
    return scheme.points[labels]


def labels_to_bits(labels, scheme: ModulationScheme) -> np.ndarray:
    shifts = np.arange(scheme.bits_per_symbol - 1, -1, -1)
    return ((np.asarray(labels)[:, None] >> shifts) & 1).ravel().astype(np.int64)


def demodulate_hard(estimates, scheme: ModulationScheme) -> np.ndarray:
    """Nearest-point hard decisions; ties go to the smaller bit label.

    Points are label-ordered, so the first argmin hit is the smallest label.
    """
    est = np.asarray(estimates, dtype=np.complex128).ravel()
    d = np.abs(est[:, None] - scheme.points[None, :])
    labels = np.argmin(d, axis=1)
    return labels_to_bits(labels, scheme)


def transmit_uplink(h, x, n0: float, stream: RngStream) -> np.ndarray:
    """Receive vector ``y = H x + n`` with i.i.d. ``CN(0, N_0)`` noise.

    ``x`` may be a vector or a ``(U, S)`` batch of symbol vectors.
    """
    h = np.asarray(h)
    x = np.asarray(x)
    if n0 < 0:
        raise ValueError("N_0 must be >= 0")
    if h.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"H is {h.shape}, x has leading dim {x.shape[0]}")
    y = h @ x
    if n0 > 0:
        gen = stream.generator()
        n = gen.standard_normal(y.shape) + 1j * gen.standard_normal(y.shape)
        y = y + np.sqrt(n0 / 2.0) * n
    return y


def snr_to_noise(cfg: SystemConfig, snr_db: float) -> float:
    """Noise power for a target SNR: ``N_0 = U * E_s / 10^(snr_db/10)``."""
    return cfg.users * cfg.symbol_energy / (10.0 ** (snr_db / 10.0))
