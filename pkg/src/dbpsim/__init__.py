"""Decentralized baseband processing simulator for massive MU-MIMO.

Feedforward uplink detection (centralized, partially and fully
decentralized), downlink precoding with channel-reciprocity reuse,
closed-form data-transfer and timing-complexity models, a minifloat codec
for reduced-precision fusion payloads, and a reproducible Monte Carlo BER
harness behind a CSV-emitting CLI.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    ModulationScheme,
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
from .cost import (
    CostReport,
    DesignChoice,
    cost_report,
    pipeline_cost,
    pipeline_terms,
    select_architecture,
    timing_cost,
    transfer_cost,
)
from .downlink import (
    PrecodeResult,
    PrecoderConfig,
    ReciprocityStore,
    build_store,
    precode,
    precode_wf,
    precode_zf,
    precoder_config,
    reciprocal_channel,
    reuse_cholesky,
    reuse_gram,
    reuse_inverse,
    simulate_downlink,
)
from .harness import (
    BerRecord,
    SweepSpec,
    parse_scheme,
    run_ber_sweep,
    run_tradeoff_report,
    verify_equivalences,
    write_ber_csv,
    write_tradeoff_csv,
)
from .numerics import cholesky, gram, hermitian_inverse, solve_cholesky
from .quant import (
    FP8,
    FP32,
    MinifloatFormat,
    decode,
    encode,
    pack4,
    parse_precision,
    quantize,
    quantize_payload,
    unpack4,
)
from .uplink import (
    DetectorConfig,
    EqualizerCache,
    LocalEstimate,
    LocalPreprocessOutput,
    detect_centralized,
    detect_mrc,
    detect_pd,
    detector_config,
    fd_fuse,
    fd_local_detect,
    fusion_weights,
    local_preprocess,
    pd_fuse,
)
