"""Downlink precoding with reciprocity-based reuse of uplink artifacts.

Under TDD reciprocity the downlink channel is the plain transpose of the
uplink channel, so the downlink Gram is the transpose of the uplink Gram
and a cached uplink Cholesky factor transfers as its entrywise conjugate.
The precoders here accept a :class:`ReciprocityStore` built during uplink
processing and fall back to fresh computation when none is given; both
paths run the same arithmetic, so reuse is bit-identical to fresh work.

Scaling convention: the transmit vector is normalized per symbol so that
``||x_dl||^2 == P_tx`` exactly. User terminals apply the (genie-shared)
factor ``beta = ||x_raw|| / sqrt(P_tx)`` before slicing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RngStream
from .errors import DimensionMismatch, StaleCache
from .numerics import cholesky, gram, hermitian_inverse, solve_cholesky


@dataclass(frozen=True)
class PrecoderConfig:
    """Algorithm/architecture selection, regularizer, and power budget."""

    algorithm: str = "wf"  # wf | zf
    architecture: str = "centralized"  # centralized | pd | fd
    inversion: str = "implicit"  # implicit | explicit
    kappa: float = 0.0  # wf: U * N_0 / P_tx, zf: 0
    p_tx: float = 1.0

    def __post_init__(self):
        if self.algorithm not in ("wf", "zf"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.architecture not in ("centralized", "pd", "fd"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.inversion not in ("implicit", "explicit"):
            raise ValueError(f"unknown inversion {self.inversion!r}")
        if self.kappa < 0:
            raise ValueError("regularizer must be >= 0")
        if not self.p_tx > 0:
            raise ValueError("transmit power must be > 0")


def wf_regularizer(users: int, n0: float, p_tx: float) -> float:
    """Wiener-filter regularizer ``U * N_0 / P_tx`` (reduces to ZF at N_0 = 0)."""
    return users * n0 / p_tx


def precoder_config(algorithm, architecture, users, n0=0.0, p_tx=1.0, inversion="implicit"):
    kappa = wf_regularizer(users, n0, p_tx) if algorithm == "wf" else 0.0
    return PrecoderConfig(algorithm, architecture, inversion, kappa, p_tx)


@dataclass(frozen=True)
class PrecodeResult:
    """Power-normalized transmit vector and the matching receive-side scale.

    ``x_dl`` stacks the per-cluster antenna blocks; ``beta`` is scalar for a
    single symbol or one entry per column of a batch. ``ue_gains`` is the
    deterministic per-user array gain of the architecture/algorithm pair
    (ones for centralized/PD zero forcing); the genie-aided receiver divides
    it out along with ``beta`` so estimates land on the constellation scale.
    """

    x_dl: np.ndarray
    beta: np.ndarray
    ue_gains: np.ndarray | None = None  # None means unit gains


def reciprocal_channel(h_ul) -> np.ndarray:
    """Downlink channel by TDD reciprocity: the plain (unconjugated) transpose."""
    return np.ascontiguousarray(np.asarray(h_ul).T)


@dataclass
class ReciprocityStore:
    """Uplink artifacts kept for downlink reuse within one coherence block.

    ``g_ul`` is the fused Gram; the ZF factor/inverse slots hold the
    unregularized factorization so they transfer to zero-forcing precoding.
    Per-cluster lists hold the same artifacts for the FD path.
    """

    block_index: int
    g_ul: np.ndarray | None = None
    l_zf_ul: np.ndarray | None = None
    inv_zf_ul: np.ndarray | None = None
    cluster_g_ul: list | None = None

    def check_block(self, block_index):
        if block_index != self.block_index:
            raise StaleCache(
                f"store built for block {self.block_index}, used in block {block_index}"
            )


def build_store(
    h_ul=None,
    cfg=None,
    block_index=0,
    g_ul=None,
    with_zf_factor=False,
    with_zf_inverse=False,
):
    """Populate a :class:`ReciprocityStore` from the uplink side.

    Pass ``g_ul`` to reuse the Gram the uplink pipeline already fused (the
    production flow); otherwise it is computed from ``h_ul``.
    """
    if g_ul is None:
        if h_ul is None:
            raise ValueError("need either h_ul or g_ul")
        g_ul = gram(np.asarray(h_ul))
    store = ReciprocityStore(block_index=block_index, g_ul=g_ul)
    if cfg is not None and h_ul is not None:
        h_ul = np.asarray(h_ul)
        if h_ul.shape[0] != cfg.bs_antennas:
            raise DimensionMismatch(
                f"channel has {h_ul.shape[0]} rows, config expects {cfg.bs_antennas}"
            )
        store.cluster_g_ul = [
            gram(h_ul[c * cfg.cluster_antennas : (c + 1) * cfg.cluster_antennas])
            for c in range(cfg.clusters)
        ]
    if with_zf_factor:
        store.l_zf_ul = cholesky(store.g_ul)
    if with_zf_inverse:
        store.inv_zf_ul = hermitian_inverse(store.g_ul)
    return store


def reuse_gram(store: ReciprocityStore, block_index) -> np.ndarray:
    """Downlink Gram as the transpose of the stored uplink Gram."""
    store.check_block(block_index)
    if store.g_ul is None:
        raise ValueError("store holds no uplink Gram")
    return store.g_ul.T.copy()


def reuse_cholesky(store: ReciprocityStore, block_index) -> np.ndarray:
    """Downlink Cholesky factor: the conjugate of the stored uplink factor."""
    store.check_block(block_index)
    if store.l_zf_ul is None:
        raise ValueError("store holds no uplink Cholesky factor")
    return np.conj(store.l_zf_ul)


def reuse_inverse(store: ReciprocityStore, block_index) -> np.ndarray:
    """Downlink Gram inverse: the transpose of the stored uplink inverse."""
    store.check_block(block_index)
    if store.inv_zf_ul is None:
        raise ValueError("store holds no uplink inverse")
    return store.inv_zf_ul.T.copy()


def downlink_gram(h_dl) -> np.ndarray:
    """Fresh ``H_dl H_dl^H`` through the same kernel as the uplink Gram.

    The operand is canonicalized to the uplink memory layout so that fresh
    computation and reciprocity reuse run identical arithmetic and agree at
    the bit level.
    """
    return gram(np.ascontiguousarray(np.conj(np.asarray(h_dl)).T))


def _normalize(x_raw, p_tx):
    """Scale columns to meet the power budget; returns (x_dl, beta)."""
    x_raw = np.asarray(x_raw)
    norms = np.sqrt(np.sum(x_raw.real**2 + x_raw.imag**2, axis=0))
    if np.any(norms == 0):
        raise ValueError("cannot power-normalize a zero transmit vector")
    beta = norms / np.sqrt(p_tx)
    return x_raw / beta, beta


def _cluster_columns(h_dl, clusters):
    b = h_dl.shape[1]
    if b % clusters != 0:
        raise DimensionMismatch(f"{b} antennas do not split into {clusters} clusters")
    bc = b // clusters
    return [h_dl[:, c * bc : (c + 1) * bc] for c in range(clusters)]


def _whiten(g_dl, s, kappa, inversion, factor=None, inverse=None, need_gains=False):
    """Solve ``(G_dl + kappa I) w = s`` per the selected inversion route.

    Returns ``(w, gains)`` where ``gains`` is the per-user self-term gain
    ``1 - kappa * diag((G + kappa I)^{-1})`` when requested (ones for
    ``kappa == 0``, where the solve is an exact inversion).
    """
    from .numerics import inverse_diagonal_from_factor

    users = s.shape[0]
    if inverse is not None:
        w = inverse @ s
        diag = inverse.diagonal().real if need_gains else None
    elif factor is not None:
        w = solve_cholesky(factor, s)
        diag = inverse_diagonal_from_factor(factor) if need_gains else None
    else:
        a = g_dl if kappa == 0.0 else g_dl + kappa * np.eye(g_dl.shape[0])
        if inversion == "explicit":
            inv = hermitian_inverse(a)
            w = inv @ s
            diag = inv.diagonal().real if need_gains else None
        else:
            l = cholesky(a)
            w = solve_cholesky(l, s)
            diag = inverse_diagonal_from_factor(l) if need_gains else None
    if not need_gains or kappa == 0.0:
        return w, np.ones(users)
    return w, 1.0 - kappa * diag


def _quantize_broadcast(vec, payload_format):
    if payload_format is None:
        return vec
    from .quant import quantize_complex

    return quantize_complex(vec, payload_format)


def precode_wf(h_dl, s, cfg: PrecoderConfig, store=None, block_index=0, clusters=1,
               payload_format=None) -> PrecodeResult:
    """Regularized (Wiener-filter) precoding.

    Centralized/PD: one central whitening solve, then per-cluster
    beamforming; PD fuses per-cluster Grams first, which reproduces the
    centralized result. FD: each cluster whitens against its local Gram.
    The stacked vector is normalized to the power budget in all cases.

    ``payload_format`` quantizes the values that cross cluster boundaries:
    the broadcast whitened vector (PD) or the broadcast transmit vector
    (FD). Centralized precoding has no boundary and ignores it.
    """
    h_dl = np.asarray(h_dl, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    if s.shape[0] != h_dl.shape[0]:
        raise DimensionMismatch(f"s has {s.shape[0]} rows, H_dl has {h_dl.shape[0]}")

    if cfg.architecture in ("centralized", "pd"):
        if store is not None:
            g_dl = reuse_gram(store, block_index)
        elif cfg.architecture == "pd":
            blocks = _cluster_columns(h_dl, clusters)
            g_dl = downlink_gram(blocks[0])
            for blk in blocks[1:]:
                g_dl += downlink_gram(blk)
        else:
            g_dl = downlink_gram(h_dl)
        w, gains = _whiten(g_dl, s, cfg.kappa, cfg.inversion, need_gains=True)
        if cfg.architecture == "pd":
            w = _quantize_broadcast(w, payload_format)
        x_raw = h_dl.conj().T @ w
    else:  # fd: local whitening per cluster, stacked
        s_bc = _quantize_broadcast(s, payload_format)
        blocks = _cluster_columns(h_dl, clusters)
        if store is not None:
            store.check_block(block_index)
            if store.cluster_g_ul is None:
                raise ValueError("store holds no per-cluster Grams")
            local_grams = [g.T.copy() for g in store.cluster_g_ul]
        else:
            local_grams = [downlink_gram(blk) for blk in blocks]
        parts = []
        gains = np.zeros(s.shape[0])
        for blk, g_c in zip(blocks, local_grams):
            w_c, gains_c = _whiten(g_c, s_bc, cfg.kappa, cfg.inversion, need_gains=True)
            parts.append(blk.conj().T @ w_c)
            gains = gains + gains_c  # per-user aggregate over clusters
        x_raw = np.concatenate(parts, axis=0)

    x_dl, beta = _normalize(x_raw, cfg.p_tx)
    return PrecodeResult(x_dl=x_dl, beta=beta, ue_gains=gains)


def precode_zf(h_dl, s, cfg: PrecoderConfig, store=None, block_index=0, clusters=1,
               payload_format=None) -> PrecodeResult:
    """Zero-forcing precoding: whiten against the unregularized Gram, then
    scale the normalized vector to the power budget.

    The implicit route can consume a reused uplink Cholesky factor; the
    explicit route can consume a reused uplink inverse.
    """
    h_dl = np.asarray(h_dl, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    if s.shape[0] != h_dl.shape[0]:
        raise DimensionMismatch(f"s has {s.shape[0]} rows, H_dl has {h_dl.shape[0]}")

    if cfg.architecture in ("centralized", "pd"):
        factor = inverse = g_dl = None
        if store is not None and cfg.inversion == "implicit" and store.l_zf_ul is not None:
            factor = reuse_cholesky(store, block_index)
        elif store is not None and cfg.inversion == "explicit" and store.inv_zf_ul is not None:
            inverse = reuse_inverse(store, block_index)
        elif store is not None:
            g_dl = reuse_gram(store, block_index)
        elif cfg.architecture == "pd":
            blocks = _cluster_columns(h_dl, clusters)
            g_dl = downlink_gram(blocks[0])
            for blk in blocks[1:]:
                g_dl += downlink_gram(blk)
        else:
            g_dl = downlink_gram(h_dl)
        w, gains = _whiten(g_dl, s, 0.0, cfg.inversion, factor=factor, inverse=inverse)
        if cfg.architecture == "pd":
            w = _quantize_broadcast(w, payload_format)
        x_raw = h_dl.conj().T @ w
    else:  # fd: every cluster inverts its channel exactly, so gains sum to C
        s_bc = _quantize_broadcast(s, payload_format)
        blocks = _cluster_columns(h_dl, clusters)
        if store is not None:
            store.check_block(block_index)
            if store.cluster_g_ul is None:
                raise ValueError("store holds no per-cluster Grams")
            local_grams = [g.T.copy() for g in store.cluster_g_ul]
        else:
            local_grams = [downlink_gram(blk) for blk in blocks]
        parts = []
        for blk, g_c in zip(blocks, local_grams):
            w_c, _ = _whiten(g_c, s_bc, 0.0, cfg.inversion)
            parts.append(blk.conj().T @ w_c)
        x_raw = np.concatenate(parts, axis=0)
        gains = float(len(blocks)) * np.ones(s.shape[0])

    x_dl, beta = _normalize(x_raw, cfg.p_tx)
    return PrecodeResult(x_dl=x_dl, beta=beta, ue_gains=gains)


def precode(h_dl, s, cfg: PrecoderConfig, store=None, block_index=0, clusters=1,
            payload_format=None) -> PrecodeResult:
    if cfg.algorithm == "zf":
        return precode_zf(h_dl, s, cfg, store, block_index, clusters, payload_format)
    return precode_wf(h_dl, s, cfg, store, block_index, clusters, payload_format)


def simulate_downlink(h_dl, result: PrecodeResult, n0: float, stream: RngStream):
    """Receive side: ``y = H_dl x_dl + n`` plus genie-scaled symbol estimates.

    The estimate is ``beta * y`` divided by the precoder's deterministic
    per-user gain, which puts it back on the constellation scale.
    """
    h_dl = np.asarray(h_dl)
    if h_dl.shape[1] != result.x_dl.shape[0]:
        raise DimensionMismatch(
            f"H_dl has {h_dl.shape[1]} columns, x_dl has {result.x_dl.shape[0]} rows"
        )
    y = h_dl @ result.x_dl
    if n0 > 0:
        gen = stream.generator()
        n = gen.standard_normal(y.shape) + 1j * gen.standard_normal(y.shape)
        y = y + np.sqrt(n0 / 2.0) * n
    s_hat = result.beta * y
    if result.ue_gains is not None:
        gains = result.ue_gains
        s_hat = s_hat / (gains[:, None] if s_hat.ndim == 2 else gains)
    return y, s_hat
