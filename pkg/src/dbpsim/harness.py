"""Monte Carlo BER engine, trade-off tables, and equivalence verification.

One sweep iterates coherence blocks (a fresh channel every ``n_coh``
transmissions) and runs every requested scheme against the *same* channel,
symbol, and noise draws, so BER comparisons are paired rather than merely
statistical. All randomness flows through :class:`~dbpsim.channel.RngStream`
ids keyed by ``(block, purpose)``; a (spec, seed) pair fully determines
every output byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import cost
from .channel import (
    Purpose,
    RngStream,
    SystemConfig,
    demodulate_hard,
    generate_rayleigh,
    modulate,
    partition,
    snr_to_noise,
)
from .downlink import (
    ReciprocityStore,
    precode,
    precoder_config,
    reciprocal_channel,
    simulate_downlink,
)
from .errors import (
    ConfigError,
    DegenerateColumn,
    InvalidVariance,
    NotPositiveDefinite,
)
from .numerics import cholesky, gram, mirror_hermitian
from .quant import parse_precision, quantize_complex, quantize_payload
from .uplink import (
    EqualizerCache,
    detect_centralized,
    detect_mrc,
    detect_pd,
    detector_config,
    fd_fuse,
    fd_local_detect,
    local_preprocess,
    pd_fuse,
)

NUMERIC_ERRORS = (NotPositiveDefinite, InvalidVariance, DegenerateColumn)

BER_CSV_HEADER = (
    "snr_db,scheme,architecture,algorithm,inversion,precision,trials,bit_errors,ber"
)


@dataclass(frozen=True)
class SchemeSpec:
    """Parsed scheme label, e.g. ``pd-mmse``, ``dl-fd-wf``, ``mrc``, ``pd-zf-ex``."""

    label: str
    link: str  # uplink | downlink
    architecture: str  # centralized | pd | fd
    algorithm: str  # mmse | zf | mrc | wf
    inversion: str  # implicit | explicit | -


def parse_scheme(label: str) -> SchemeSpec:
    parts = label.lower().split("-")
    link = "uplink"
    if parts and parts[0] == "dl":
        link = "downlink"
        parts = parts[1:]
    inversion = "implicit"
    if parts and parts[-1] in ("ex", "im"):
        inversion = "explicit" if parts[-1] == "ex" else "implicit"
        parts = parts[:-1]
    if parts == ["mrc"]:
        if link == "downlink":
            raise ConfigError("detectors", f"'{label}': mrc is uplink-only")
        return SchemeSpec(label, link, "fd", "mrc", "-")
    if len(parts) != 2:
        raise ConfigError("detectors", f"cannot parse scheme '{label}'")
    arch, alg = parts
    if arch not in ("centralized", "pd", "fd"):
        raise ConfigError("detectors", f"'{label}': unknown architecture '{arch}'")
    if link == "uplink" and alg not in ("mmse", "zf"):
        raise ConfigError("detectors", f"'{label}': uplink algorithm must be mmse or zf")
    if link == "downlink" and alg not in ("wf", "zf"):
        raise ConfigError("detectors", f"'{label}': downlink algorithm must be wf or zf")
    return SchemeSpec(label, link, arch, alg, inversion)


@dataclass(frozen=True)
class SweepSpec:
    """Everything a BER sweep needs; (spec, seed) determines all outputs."""

    config: SystemConfig
    snr_db: tuple
    trials: int
    schemes: tuple
    precisions: tuple = ("fp32",)
    seed: int = 0
    early_stop_errors: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if len(self.snr_db) == 0:
            raise ConfigError("snr_db", "must be a nonempty list")
        if len(self.schemes) == 0:
            raise ConfigError("detectors", "must be a nonempty list")
        for s in self.schemes:
            parse_scheme(s)
        for p in self.precisions:
            parse_precision(p)


@dataclass
class BerRecord:
    """One (snr, scheme, precision) result; ``error`` labels aborted schemes."""

    snr_db: float
    scheme: str
    architecture: str
    algorithm: str
    inversion: str
    precision: str
    trials: int
    bit_errors: int
    total_bits: int
    error: str = ""

    @property
    def ber(self) -> float:
        if self.error or self.total_bits == 0:
            return math.nan
        return self.bit_errors / self.total_bits


def _block_layout(trials: int, n_coh: int):
    """(block_index, transmissions_in_block) covering ``trials`` transmissions."""
    blocks = math.ceil(trials / n_coh)
    for b in range(blocks):
        yield b, min(n_coh, trials - b * n_coh)


class _Runner:
    """One (scheme, precision) lane of a sweep with its own caches and tallies."""

    def __init__(self, spec: SchemeSpec, precision: str, cfg: SystemConfig, n0: float):
        self.spec = spec
        self.precision = precision
        self.fmt = parse_precision(precision)
        self.cfg = cfg
        self.n0 = n0
        self.trials = 0
        self.bit_errors = 0
        self.error = ""
        self.stopped = False
        self._caches = None
        self._block = -1
        if spec.link == "uplink" and spec.algorithm != "mrc":
            self.det = detector_config(
                spec.algorithm, spec.architecture, n0, cfg.symbol_energy, spec.inversion
            )
        elif spec.link == "downlink":
            self.pre = precoder_config(
                spec.algorithm, spec.architecture, cfg.users, n0, cfg.tx_power,
                spec.inversion,
            )

    @property
    def live(self) -> bool:
        return not self.error and not self.stopped

    def tally(self, rx_bits, tx_bits, n_sym, early_stop):
        self.bit_errors += int(np.count_nonzero(rx_bits != tx_bits))
        self.trials += n_sym
        if early_stop is not None and self.bit_errors >= early_stop:
            self.stopped = True

    @property
    def wants_quantized_preps(self) -> bool:
        # PD and MRC ship (G_c, y_mrc_c) across the fusion boundary; FD ships
        # local estimates instead, and centralized has no boundary
        return self.spec.link == "uplink" and (
            self.spec.architecture == "pd" or self.spec.algorithm == "mrc"
        )

    def detect_uplink(self, block: int, h, y, preps, quantized_preps):
        """Detection against shared per-block cluster preprocessing.

        ``quantized_preps`` maps precision labels to payload lists shared by
        every scheme at that precision.
        """
        if self.spec.architecture == "centralized":
            return detect_centralized(h, y, self.det)
        if self.spec.algorithm == "mrc":
            g, y_mrc = pd_fuse(quantized_preps[self.precision])
            return detect_mrc(y_mrc, g)
        if self.spec.architecture == "pd":
            g, y_mrc = pd_fuse(quantized_preps[self.precision])
            if block != self._block:
                self._caches = EqualizerCache(block_index=block)
                self._block = block
            return detect_pd(g, y_mrc, self.det, self._caches, block)
        # fd: the payload crossing the boundary is the local estimate
        if block != self._block:
            self._caches = [EqualizerCache(block_index=block) for _ in preps]
            self._block = block
        estimates = [
            fd_local_detect(p, self.det, self.n0, cache, block)
            for p, cache in zip(preps, self._caches)
        ]
        return fd_fuse([quantize_payload(e, self.fmt) for e in estimates])

    def precode_downlink(self, block: int, h_dl, s, cluster_grams):
        """Precoding with a reciprocity store assembled from uplink Grams."""
        fmt = self.fmt
        if self.spec.architecture == "pd":
            # cluster Grams cross the fusion boundary before the central solve
            qgrams = [mirror_hermitian(quantize_complex(g, fmt)) for g in cluster_grams]
            g_ul = qgrams[0].copy()
            for g in qgrams[1:]:
                g_ul += g
        else:
            g_ul = cluster_grams[0].copy()
            for g in cluster_grams[1:]:
                g_ul += g
        store = ReciprocityStore(
            block_index=block, g_ul=g_ul, cluster_g_ul=list(cluster_grams)
        )
        if self.spec.algorithm == "zf" and self.spec.architecture in ("centralized", "pd"):
            if self.spec.inversion == "implicit":
                store.l_zf_ul = cholesky(g_ul)
            else:
                from .numerics import hermitian_inverse

                store.inv_zf_ul = hermitian_inverse(g_ul)
        return precode(
            h_dl, s, self.pre, store, block, self.cfg.clusters, payload_format=fmt
        )


def run_ber_sweep(spec: SweepSpec):
    """Paired Monte Carlo BER over the (snr, scheme, precision) grid."""
    cfg = spec.config
    scheme = cfg.scheme
    bps = scheme.bits_per_symbol
    schemes = [parse_scheme(s) for s in spec.schemes]
    base = RngStream(spec.seed)

    records = []
    for snr_db in spec.snr_db:
        n0 = snr_to_noise(cfg, snr_db)
        runners = [
            _Runner(s, precision, cfg, n0)
            for s in schemes
            for precision in spec.precisions
        ]

        for block, n_sym in _block_layout(spec.trials, cfg.coherence_len):
            live = [r for r in runners if r.live]
            if not live:
                break
            real = generate_rayleigh(
                cfg, base.substream(block=block, purpose=Purpose.CHANNEL)
            )
            h = real.h
            clusters = partition(real, cfg)

            up_live = [r for r in live if r.spec.link == "uplink"]
            if up_live:
                gen = base.substream(block=block, purpose=Purpose.SYMBOLS).generator()
                tx_bits = gen.integers(0, 2, size=n_sym * cfg.users * bps)
                x = modulate(tx_bits, scheme).reshape(n_sym, cfg.users).T
                y = h @ x
                if n0 > 0:
                    ngen = base.substream(block=block, purpose=Purpose.NOISE).generator()
                    z = ngen.standard_normal(y.shape) + 1j * ngen.standard_normal(y.shape)
                    y = y + np.sqrt(n0 / 2.0) * z
                bc = cfg.cluster_antennas
                preps = [
                    local_preprocess(h_c, y[c * bc : (c + 1) * bc])
                    for c, h_c in enumerate(clusters)
                ]
                quantized_preps = {
                    r.precision: None for r in up_live if r.wants_quantized_preps
                }
                for precision in quantized_preps:
                    fmt = parse_precision(precision)
                    quantized_preps[precision] = [
                        quantize_payload(p, fmt) for p in preps
                    ]
                for runner in up_live:
                    try:
                        x_hat = runner.detect_uplink(block, h, y, preps, quantized_preps)
                    except NUMERIC_ERRORS as exc:
                        runner.error = f"{type(exc).__name__}: {exc}"
                        continue
                    rx_bits = demodulate_hard(x_hat.T.ravel(), scheme)
                    runner.tally(rx_bits, tx_bits, n_sym, spec.early_stop_errors)

            dl_live = [r for r in live if r.spec.link == "downlink"]
            if dl_live:
                h_dl = reciprocal_channel(h)
                cluster_grams = [gram(h_c) for h_c in clusters]
                gen = base.substream(block=block, purpose=Purpose.DL_SYMBOLS).generator()
                tx_bits = gen.integers(0, 2, size=n_sym * cfg.users * bps)
                s_sym = modulate(tx_bits, scheme).reshape(n_sym, cfg.users).T
                nstream = base.substream(block=block, purpose=Purpose.DL_NOISE)
                for runner in dl_live:
                    try:
                        result = runner.precode_downlink(block, h_dl, s_sym, cluster_grams)
                        _, s_hat = simulate_downlink(h_dl, result, n0, nstream)
                    except NUMERIC_ERRORS as exc:
                        runner.error = f"{type(exc).__name__}: {exc}"
                        continue
                    rx_bits = demodulate_hard(s_hat.T.ravel(), scheme)
                    runner.tally(rx_bits, tx_bits, n_sym, spec.early_stop_errors)

        for runner in runners:
            s = runner.spec
            records.append(
                BerRecord(
                    snr_db=float(snr_db),
                    scheme=s.label,
                    architecture=s.architecture,
                    algorithm=s.algorithm,
                    inversion=s.inversion,
                    precision=runner.precision,
                    trials=runner.trials,
                    bit_errors=runner.bit_errors,
                    total_bits=runner.trials * cfg.users * bps,
                    error=runner.error,
                )
            )
    return records


def format_number(x) -> str:
    """12-significant-digit serialization used in every CSV."""
    return f"{float(x):.12g}"


def write_ber_csv(records, path):
    lines = [BER_CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    format_number(r.snr_db),
                    r.scheme,
                    r.architecture,
                    r.algorithm,
                    r.inversion,
                    r.precision,
                    str(r.trials),
                    str(r.bit_errors),
                    format_number(r.ber),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def run_tradeoff_report(cfg: SystemConfig, n_coh_list):
    """Transfer and complexity columns for each coherence length."""
    rows = []
    for n_coh in n_coh_list:
        report = cost.cost_report(cfg.clusters, cfg.users, cfg.cluster_antennas, n_coh)
        row = {
            "n_coh": int(n_coh),
            "m_pd_ul": report.m_pd_ul,
            "m_fd_ul": report.m_fd_ul,
            "m_pd_dl": report.m_pd_dl,
            "m_fd_dl": report.m_fd_dl,
            "n_ex": report.n_ex,
            "n_im": report.n_im,
        }
        row.update(report.pipeline_costs)
        rows.append(row)
    return rows


def write_tradeoff_csv(rows, path):
    header = ["n_coh", "m_pd_ul", "m_fd_ul", "m_pd_dl", "m_fd_dl", "n_ex", "n_im"]
    header += list(cost.PIPELINES)
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join([str(row["n_coh"])] + [format_number(row[k]) for k in header[1:]])
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


@dataclass
class CheckResult:
    """Outcome of one equivalence/property check; failures are data."""

    name: str
    instances: int
    max_deviation: float
    tolerance: float
    passed: bool
    note: str = ""


def verify_equivalences(cfg: SystemConfig, instances: int = 100, seed: int = 0,
                        snr_db: float = 10.0):
    """Cross-check the dual implementation routes on random instances.

    Runs PD vs centralized, implicit vs explicit (detection and ZF
    precoding), the single-cluster collapse, bitwise reciprocity reuse, and
    the undersized-cluster error path. Numeric failures are recorded, not
    raised.
    """
    from .downlink import build_store, precode_zf, reuse_cholesky, reuse_gram

    base = RngStream(seed)
    scheme = cfg.scheme
    n0 = snr_to_noise(cfg, snr_db)

    dev_pd = dev_dual = dev_dual_zf = dev_precode = dev_reuse = dev_c1 = 0.0
    cfg_c1 = replace(cfg, clusters=1)

    for i in range(instances):
        real = generate_rayleigh(cfg, base.substream(block=i, purpose=Purpose.CHANNEL))
        h = real.h
        gen = base.substream(block=i, purpose=Purpose.SYMBOLS).generator()
        x = modulate(gen.integers(0, 2, size=cfg.users * scheme.bits_per_symbol), scheme)
        ngen = base.substream(block=i, purpose=Purpose.NOISE).generator()
        y = h @ x + np.sqrt(n0 / 2.0) * (
            ngen.standard_normal(cfg.bs_antennas)
            + 1j * ngen.standard_normal(cfg.bs_antennas)
        )

        bc = cfg.cluster_antennas
        preps = [
            local_preprocess(h_c, y[c * bc : (c + 1) * bc])
            for c, h_c in enumerate(partition(real, cfg))
        ]
        g, y_mrc = pd_fuse(preps)

        det_im = detector_config("mmse", "pd", n0, cfg.symbol_energy, "implicit")
        det_ex = detector_config("mmse", "pd", n0, cfg.symbol_energy, "explicit")
        x_central = detect_centralized(
            h, y, detector_config("mmse", "centralized", n0, cfg.symbol_energy)
        )
        x_pd_im = detect_pd(g, y_mrc, det_im, EqualizerCache(i), i)
        x_pd_ex = detect_pd(g, y_mrc, det_ex, EqualizerCache(i), i)
        dev_pd = max(dev_pd, float(np.max(np.abs(x_pd_im - x_central))))
        dev_dual = max(dev_dual, float(np.max(np.abs(x_pd_im - x_pd_ex))))

        zf_im = detector_config("zf", "pd", inversion="implicit")
        zf_ex = detector_config("zf", "pd", inversion="explicit")
        x_zf_im = detect_pd(g, y_mrc, zf_im, EqualizerCache(i), i)
        x_zf_ex = detect_pd(g, y_mrc, zf_ex, EqualizerCache(i), i)
        dev_dual_zf = max(dev_dual_zf, float(np.max(np.abs(x_zf_im - x_zf_ex))))

        # zero-forcing precoding: implicit vs explicit, and reuse vs fresh
        h_dl = reciprocal_channel(h)
        s = modulate(gen.integers(0, 2, size=cfg.users * scheme.bits_per_symbol), scheme)
        pre_im = precoder_config("zf", "centralized", cfg.users, inversion="implicit")
        pre_ex = precoder_config("zf", "centralized", cfg.users, inversion="explicit")
        r_im = precode_zf(h_dl, s, pre_im)
        r_ex = precode_zf(h_dl, s, pre_ex)
        dev_precode = max(dev_precode, float(np.max(np.abs(r_im.x_dl - r_ex.x_dl))))

        store = build_store(h_ul=h, cfg=cfg, block_index=i, with_zf_factor=True)
        reused = precode_zf(h_dl, s, pre_im, store=store, block_index=i)
        dev_reuse = max(dev_reuse, float(np.max(np.abs(r_im.x_dl - reused.x_dl))))
        reuse_gram(store, i)
        reuse_cholesky(store, i)

        # single-cluster collapse on a C=1 geometry
        real1 = generate_rayleigh(
            cfg_c1, base.substream(trial=1, block=i, purpose=Purpose.CHANNEL)
        )
        y1 = real1.h @ x
        prep1 = local_preprocess(real1.h, y1)
        g1, y_mrc1 = pd_fuse([prep1])
        xc = detect_centralized(real1.h, y1, detector_config("mmse", "centralized", n0))
        xp = detect_pd(g1, y_mrc1, det_im, EqualizerCache(i), i)
        xf = fd_fuse([fd_local_detect(prep1, det_im, n0, EqualizerCache(i), i)])
        dev_c1 = max(
            dev_c1,
            float(np.max(np.abs(xp - xc))),
            float(np.max(np.abs(xf - xc))),
        )

    results = [
        CheckResult("pd_matches_centralized", instances, dev_pd, 1e-10, dev_pd < 1e-10),
        CheckResult("implicit_matches_explicit_mmse", instances, dev_dual, 1e-9, dev_dual < 1e-9),
        CheckResult("implicit_matches_explicit_zf", instances, dev_dual_zf, 1e-9, dev_dual_zf < 1e-9),
        CheckResult("zf_precode_dual_route", instances, dev_precode, 1e-9, dev_precode < 1e-9),
        CheckResult("reuse_bitwise_identical", instances, dev_reuse, 0.0, dev_reuse == 0.0),
        CheckResult("single_cluster_collapse", instances, dev_c1, 1e-10, dev_c1 < 1e-10),
    ]

    # error path: zero-forcing at a cluster with fewer antennas than users
    if cfg.users > 1:
        undersized = SystemConfig(
            bs_antennas=cfg.users,
            users=cfg.users,
            clusters=cfg.users,  # one antenna per cluster
            coherence_len=cfg.coherence_len,
            modulation=cfg.modulation,
        )
        real = generate_rayleigh(undersized, base.substream(trial=2, purpose=Purpose.CHANNEL))
        h_c = partition(real, undersized)[0]
        prep = local_preprocess(h_c, h_c @ np.ones(undersized.users))
        try:
            fd_local_detect(prep, detector_config("zf", "fd"), 0.0, EqualizerCache(0), 0)
            results.append(
                CheckResult("undersized_cluster_zf_errors", 1, math.nan, math.nan, False,
                            "expected NotPositiveDefinite was not raised")
            )
        except NotPositiveDefinite as exc:
            results.append(
                CheckResult("undersized_cluster_zf_errors", 1, 0.0, 0.0, True,
                            f"recorded {type(exc).__name__}")
            )
    return results
