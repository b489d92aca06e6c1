"""Closed-form data-transfer and timing-complexity models.

All quantities are per transmitted symbol (per subcarrier in an OFDM
reading). Transfer sizes count real values crossing the fusion links;
timing complexity counts real-valued multiplications, with divisions
counted as multiplications and parallel per-cluster work counted once.

Results are exact rationals (:class:`fractions.Fraction`), so identities
such as "reusing the Gram saves exactly ``2*Bc*U^2/N_coh``" hold without
floating-point slack. Fractions compare and mix with ints/floats directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidParameter, UnknownPipeline

UPLINK = "uplink"
DOWNLINK = "downlink"

PIPELINES = (
    "separate_explicit",
    "mmse_wf_reuse_gram",
    "zf_zf_reuse_inverse",
    "zf_zf_implicit_reuse_L",
)


def _check_positive(**params):
    for name, value in params.items():
        if int(value) != value or value < 1:
            raise InvalidParameter(f"{name} must be an integer >= 1, got {value!r}")


def transfer_cost(link: str, arch: str, clusters: int, users: int, n_coh: int) -> Fraction:
    """Average real values transferred per symbol at the fusion stage.

    Uplink: the partially-decentralized architecture ships each cluster's
    Hermitian Gram (``U^2`` unique reals, once per coherence block) plus the
    matched-filter vector (``2U`` reals per symbol); the fully-decentralized
    one ships local estimates and variances (``3U`` reals per symbol).
    Downlink: the PD payload is the same as uplink; the FD payload is the
    broadcast transmit vector plus one power-allocation scalar per block.
    """
    _check_positive(C=clusters, U=users, n_coh=n_coh)
    c, u, n = int(clusters), int(users), int(n_coh)
    if link == UPLINK:
        if arch == "pd":
            return Fraction(c * (u * u + 2 * n * u), n)
        if arch == "fd":
            return Fraction(3 * c * u)
    elif link == DOWNLINK:
        if arch == "pd":
            return Fraction(c * (u * u + 2 * n * u), n)
        if arch == "fd":
            return Fraction(c * (1 + 2 * n * u), n)
    else:
        raise InvalidParameter(f"link must be 'uplink' or 'downlink', got {link!r}")
    raise InvalidParameter(f"architecture must be 'pd' or 'fd', got {arch!r}")


def timing_cost(method: str, cluster_antennas: int, users: int, n_coh: int) -> Fraction:
    """Per-symbol real multiplications of PD equalization.

    ``explicit`` materializes the regularized-Gram inverse once per block;
    ``implicit`` factorizes once per block and substitutes per symbol.
    Channel-only work amortizes over ``n_coh``; per-symbol work does not.
    """
    _check_positive(B_c=cluster_antennas, U=users, n_coh=n_coh)
    bc, u, n = int(cluster_antennas), int(users), int(n_coh)
    per_symbol = 4 * bc * u + 4 * u * u
    if method == "explicit":
        channel_only = Fraction(2 * bc * u * u) + Fraction(10 * u**3 - 4 * u, 3)
    elif method == "implicit":
        channel_only = Fraction(2 * bc * u * u) + Fraction(2 * u**3 - 2 * u, 3)
    else:
        raise InvalidParameter(f"method must be 'explicit' or 'implicit', got {method!r}")
    return channel_only / n + per_symbol


def _terms(bc: int, u: int, n: int):
    """Named additive cost terms shared by the pipeline accounting."""
    return {
        "gram": Fraction(2 * bc * u * u, n),
        "inversion": Fraction(10 * u**3 - 4 * u, 3 * n),
        "cholesky": Fraction(2 * u**3 - 2 * u, 3 * n),
        "matched_filter": Fraction(4 * bc * u),
        "equalize_matvec": Fraction(4 * u * u),
        "whiten_matvec": Fraction(4 * u * u),
        "beamform": Fraction(4 * bc * u),
    }


def pipeline_terms(pipeline: str, cluster_antennas: int, users: int, n_coh: int):
    """Per-term accounting of an integrated uplink+downlink pipeline.

    Baseline ``separate_explicit`` runs explicit detection and explicit
    regularized precoding independently. The reuse pipelines drop the
    downlink terms made redundant by channel reciprocity: the Gram
    (transpose of the uplink Gram), then additionally the explicit inverse
    or the Cholesky factor for the zero-forcing pairs.
    """
    _check_positive(B_c=cluster_antennas, U=users, n_coh=n_coh)
    t = _terms(int(cluster_antennas), int(users), int(n_coh))
    uplink_explicit = {
        "ul_gram": t["gram"],
        "ul_inversion": t["inversion"],
        "ul_matched_filter": t["matched_filter"],
        "ul_equalize": t["equalize_matvec"],
    }
    uplink_implicit = {
        "ul_gram": t["gram"],
        "ul_cholesky": t["cholesky"],
        "ul_matched_filter": t["matched_filter"],
        "ul_equalize": t["equalize_matvec"],
    }
    if pipeline == "separate_explicit":
        downlink = {
            "dl_gram": t["gram"],
            "dl_inversion": t["inversion"],
            "dl_whiten": t["whiten_matvec"],
            "dl_beamform": t["beamform"],
        }
        return {**uplink_explicit, **downlink}
    if pipeline == "mmse_wf_reuse_gram":
        downlink = {
            "dl_inversion": t["inversion"],
            "dl_whiten": t["whiten_matvec"],
            "dl_beamform": t["beamform"],
        }
        return {**uplink_explicit, **downlink}
    if pipeline == "zf_zf_reuse_inverse":
        downlink = {
            "dl_whiten": t["whiten_matvec"],
            "dl_beamform": t["beamform"],
        }
        return {**uplink_explicit, **downlink}
    if pipeline == "zf_zf_implicit_reuse_L":
        downlink = {
            "dl_whiten": t["whiten_matvec"],
            "dl_beamform": t["beamform"],
        }
        return {**uplink_implicit, **downlink}
    raise UnknownPipeline(f"unknown pipeline {pipeline!r}; known: {PIPELINES}")


def pipeline_cost(pipeline: str, cluster_antennas: int, users: int, n_coh: int) -> Fraction:
    """Total per-symbol complexity of an integrated pipeline."""
    return sum(pipeline_terms(pipeline, cluster_antennas, users, n_coh).values())


@dataclass(frozen=True)
class CostReport:
    """Transfer and complexity figures for one (C, U, B_c, N_coh) point."""

    m_pd_ul: Fraction
    m_fd_ul: Fraction
    m_pd_dl: Fraction
    m_fd_dl: Fraction
    n_ex: Fraction
    n_im: Fraction
    pipeline_costs: dict = field(default_factory=dict)


def cost_report(clusters: int, users: int, cluster_antennas: int, n_coh: int) -> CostReport:
    return CostReport(
        m_pd_ul=transfer_cost(UPLINK, "pd", clusters, users, n_coh),
        m_fd_ul=transfer_cost(UPLINK, "fd", clusters, users, n_coh),
        m_pd_dl=transfer_cost(DOWNLINK, "pd", clusters, users, n_coh),
        m_fd_dl=transfer_cost(DOWNLINK, "fd", clusters, users, n_coh),
        n_ex=timing_cost("explicit", cluster_antennas, users, n_coh),
        n_im=timing_cost("implicit", cluster_antennas, users, n_coh),
        pipeline_costs={
            name: pipeline_cost(name, cluster_antennas, users, n_coh)
            for name in PIPELINES
        },
    )


@dataclass(frozen=True)
class DesignChoice:
    """Architecture recommendation with the inputs that drove it."""

    architecture: str
    rationale: str
    link: str
    n_coh: int
    users: int
    preference: str


def select_architecture(link: str, n_coh: int, users: int, preference: str) -> DesignChoice:
    """Executable decision flow for picking PD vs FD.

    Uplink: long coherence (``N_coh > U``) makes PD cheaper on transfer and
    it is never worse on error rate, so PD dominates; at short coherence the
    preference decides. Downlink: FD always transfers less, PD is never
    worse on error rate, so the preference decides directly.
    """
    if link not in (UPLINK, DOWNLINK):
        raise InvalidParameter(f"link must be 'uplink' or 'downlink', got {link!r}")
    if preference not in ("ber", "bandwidth"):
        raise InvalidParameter(f"preference must be 'ber' or 'bandwidth', got {preference!r}")
    _check_positive(n_coh=n_coh, U=users)

    if link == UPLINK:
        if n_coh > users:
            arch = "pd"
            why = (
                f"coherence length {n_coh} exceeds user count {users}: the PD "
                "fusion payload amortizes below the FD payload, and PD matches "
                "centralized error-rate performance, so PD wins on both axes"
            )
        elif preference == "bandwidth":
            arch = "fd"
            why = (
                f"coherence length {n_coh} <= user count {users}: the per-block "
                "Gram transfer dominates, the FD payload is smaller, and data "
                "fusion efficiency was given priority over error rate"
            )
        else:
            arch = "pd"
            why = (
                "error rate was given priority: PD matches centralized "
                "detection performance at the price of a larger fusion payload"
            )
    else:
        if preference == "ber":
            arch = "pd"
            why = (
                "error rate was given priority: PD precoding is never worse "
                "than FD precoding"
            )
        else:
            arch = "fd"
            why = (
                "transfer was given priority: broadcasting the transmit vector "
                "plus one power scalar is always cheaper than shipping Grams"
            )
    return DesignChoice(
        architecture=arch,
        rationale=why,
        link=link,
        n_coh=int(n_coh),
        users=int(users),
        preference=preference,
    )
