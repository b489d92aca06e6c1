"""Uplink data detection: centralized, partially- and fully-decentralized.

The partially-decentralized (PD) path fuses per-cluster Grams and
matched-filter vectors, then equalizes once centrally. The fully-
decentralized (FD) path equalizes per cluster and fuses the local estimates
with inverse-variance weights. Channel-only work (factorizations, explicit
inverses, error variances) is cached per coherence block.

Estimate and matched-filter arguments may be single vectors ``(U,)`` or
batches ``(U, S)`` of symbol columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateColumn,
    DimensionMismatch,
    InvalidVariance,
    StaleCache,
)
from .numerics import (
    cholesky,
    gram,
    hermitian_inverse,
    inverse_diagonal_from_factor,
    solve_cholesky,
)

# Lower bound on fused noise variances; keeps FD fusion defined at N_0 = 0,
# where every cluster's estimate is exact and any convex weights are valid.
VARIANCE_FLOOR = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class DetectorConfig:
    """Algorithm/architecture/inversion selection plus the Gram regularizer.

    ``unbiased`` divides regularized estimates by their per-user gain
    ``1 - rho * [(G + rho I)^{-1}]_{uu}`` before slicing, which restores the
    constellation scale the regularizer shrinks. It is a no-op for
    zero-forcing. The raw closed-form output is available with
    ``unbiased=False``.
    """

    algorithm: str = "mmse"  # mmse | zf | mrc
    architecture: str = "centralized"  # centralized | pd | fd
    inversion: str = "implicit"  # implicit | explicit
    rho: float = 0.0  # mmse: N_0 / E_s, zf: 0
    unbiased: bool = True

    def __post_init__(self):
        if self.algorithm not in ("mmse", "zf", "mrc"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.architecture not in ("centralized", "pd", "fd"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.inversion not in ("implicit", "explicit"):
            raise ValueError(f"unknown inversion {self.inversion!r}")
        if self.rho < 0:
            raise ValueError("regularizer must be >= 0")


def detector_config(algorithm, architecture, n0=0.0, e_s=1.0, inversion="implicit",
                    unbiased=True):
    """Build a :class:`DetectorConfig` with the regularizer implied by the algorithm."""
    rho = n0 / e_s if algorithm == "mmse" else 0.0
    return DetectorConfig(algorithm, architecture, inversion, rho, unbiased)


@dataclass(frozen=True)
class LocalPreprocessOutput:
    """Per-cluster Gram matrix and matched-filter vector (the PD payload)."""

    gram: np.ndarray
    y_mrc: np.ndarray


@dataclass(frozen=True)
class LocalEstimate:
    """Per-cluster equalizer output and per-user error variances (the FD payload)."""

    x_hat: np.ndarray
    noise_var: np.ndarray


@dataclass
class EqualizerCache:
    """Channel-only artifacts for one coherence block.

    ``factorizations`` counts how often the channel-dependent work ran; the
    contract is exactly once per block however many symbols are detected.
    """

    block_index: int
    factor: np.ndarray | None = None
    inverse: np.ndarray | None = None
    inverse_diag: np.ndarray | None = None
    unbias_gains: np.ndarray | None = None
    factorizations: int = field(default=0)

    def check_block(self, block_index):
        if block_index != self.block_index:
            raise StaleCache(
                f"cache built for block {self.block_index}, used in block {block_index}"
            )

    def ensure(self, a, inversion):
        """Factorize/invert the regularized Gram once; reuse afterwards."""
        if self.factor is None and self.inverse is None:
            self.factorizations += 1
            if inversion == "explicit":
                self.inverse = hermitian_inverse(a)
                self.inverse_diag = self.inverse.diagonal().real
            else:
                self.factor = cholesky(a)
        return self

    def apply(self, rhs):
        if self.inverse is not None:
            return self.inverse @ rhs
        return solve_cholesky(self.factor, rhs)

    def inv_diag(self):
        if self.inverse_diag is None:
            self.inverse_diag = inverse_diagonal_from_factor(self.factor)
        return self.inverse_diag

    def unbias(self, rho):
        if self.unbias_gains is None:
            self.unbias_gains = np.maximum(1.0 - rho * self.inv_diag(), VARIANCE_FLOOR)
        return self.unbias_gains


def local_preprocess(h_c, y_c) -> LocalPreprocessOutput:
    """Per-cluster Gram ``H_c^H H_c`` and matched filter ``H_c^H y_c``."""
    h_c = np.asarray(h_c)
    y_c = np.asarray(y_c)
    if y_c.shape[0] != h_c.shape[0]:
        raise DimensionMismatch(
            f"cluster receive vector has {y_c.shape[0]} rows, channel has {h_c.shape[0]}"
        )
    return LocalPreprocessOutput(gram=gram(h_c), y_mrc=h_c.conj().T @ y_c)


def pd_fuse(parts):
    """Sum per-cluster Grams and matched-filter vectors in ascending cluster order."""
    parts = list(parts)
    if not parts:
        raise DimensionMismatch("need at least one cluster")
    g = parts[0].gram.copy()
    y = parts[0].y_mrc.copy()
    for p in parts[1:]:
        if p.gram.shape != g.shape or p.y_mrc.shape != y.shape:
            raise DimensionMismatch("cluster payloads have inconsistent shapes")
        g += p.gram
        y += p.y_mrc
    return g, y


def regularized(g, rho):
    if rho == 0.0:
        return g
    return g + rho * np.eye(g.shape[0])


def _apply_unbias(x_hat, gains):
    return x_hat / (gains[:, None] if x_hat.ndim == 2 else gains)


def detect_centralized(h, y, det: DetectorConfig):
    """One-shot detection from the full channel: ``(G + rho I)^{-1} H^H y``."""
    h = np.asarray(h)
    y = np.asarray(y)
    if y.shape[0] != h.shape[0]:
        raise DimensionMismatch(f"y has {y.shape[0]} rows, H has {h.shape[0]}")
    g = gram(h)
    y_mrc = h.conj().T @ y
    if det.algorithm == "mrc":
        return detect_mrc(y_mrc, g)
    cache = EqualizerCache(block_index=0)
    cache.ensure(regularized(g, det.rho), det.inversion)
    x_hat = cache.apply(y_mrc)
    if det.unbiased and det.rho > 0:
        x_hat = _apply_unbias(x_hat, cache.unbias(det.rho))
    return x_hat


def detect_pd(g, y_mrc, det: DetectorConfig, cache: EqualizerCache, block_index):
    """Centralized equalization of fused PD payloads with per-block caching."""
    cache.check_block(block_index)
    cache.ensure(regularized(g, det.rho), det.inversion)
    x_hat = cache.apply(y_mrc)
    if det.unbiased and det.rho > 0:
        x_hat = _apply_unbias(x_hat, cache.unbias(det.rho))
    return x_hat


def fd_local_detect(
    prep: LocalPreprocessOutput,
    det: DetectorConfig,
    n0: float,
    cache: EqualizerCache,
    block_index,
) -> LocalEstimate:
    """Local equalization at one cluster plus its per-user error variances.

    The variance of user ``u`` is ``N_0 * [(G_c + rho I)^{-1}]_{uu}``, the
    diagonal of the local estimator's error covariance, floored at the
    smallest positive double so downstream weights stay defined. With
    ``det.unbiased`` both the estimate and its variance are divided by the
    per-user gain, which is exactly the error variance of the unbiased
    estimate.
    """
    cache.check_block(block_index)
    cache.ensure(regularized(prep.gram, det.rho), det.inversion)
    x_hat = cache.apply(prep.y_mrc)
    noise_var = n0 * cache.inv_diag()
    if det.unbiased and det.rho > 0:
        gains = cache.unbias(det.rho)
        x_hat = _apply_unbias(x_hat, gains)
        noise_var = noise_var / gains
    return LocalEstimate(x_hat=x_hat, noise_var=np.maximum(noise_var, VARIANCE_FLOOR))


def fusion_weights(variances):
    """Inverse-variance weights, normalized after summation to sum exactly to 1.

    ``variances`` has shape ``(C, U)``. The float residual of the
    normalization is folded into the last cluster's weight until the sums
    are exact; the adjustment is at the last-place-unit level.
    """
    var = np.asarray(variances, dtype=np.float64)
    if var.ndim == 1:
        var = var[:, None]
        squeeze = True
    else:
        squeeze = False
    if np.any(var <= 0) or not np.all(np.isfinite(var)):
        raise InvalidVariance("noise variances must be positive and finite")
    w = 1.0 / var
    lam = w / w.sum(axis=0, keepdims=True)
    for _ in range(64):
        residual = 1.0 - lam.sum(axis=0)
        if not residual.any():
            break
        lam[-1] += residual
    return lam[:, 0] if squeeze else lam


def fd_fuse(estimates):
    """Inverse-variance fusion of local estimates, ascending cluster order."""
    estimates = list(estimates)
    if not estimates:
        raise DimensionMismatch("need at least one cluster")
    lam = fusion_weights(np.stack([e.noise_var for e in estimates]))
    fused = None
    for weight, est in zip(lam, estimates):
        w = weight[:, None] if est.x_hat.ndim == 2 else weight
        term = w * est.x_hat
        fused = term if fused is None else fused + term
    return fused


def detect_mrc(y_mrc, g):
    """Column-energy normalized matched filter: ``x_u = y_mrc_u / G_uu``."""
    diag = np.asarray(g).diagonal().real
    if np.any(diag <= 1e-14):
        raise DegenerateColumn("a channel column has (numerically) zero energy")
    y_mrc = np.asarray(y_mrc)
    if y_mrc.ndim == 2:
        return y_mrc / diag[:, None]
    return y_mrc / diag
