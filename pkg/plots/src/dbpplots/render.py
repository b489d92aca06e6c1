"""Render one figure from one CSV produced by the simulator CLI.

Three figure kinds are supported:

* ``ber``        -- BER waterfalls from ``ber.csv`` (log-y vs SNR, one line
                    per scheme/precision pair).
* ``transfer``   -- per-symbol fusion transfer sizes from ``tradeoff.csv``
                    (PD and FD series for uplink and downlink vs coherence
                    length).
* ``complexity`` -- per-symbol multiplication counts from ``tradeoff.csv``
                    (explicit and implicit series, plus any pipeline columns
                    present).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path


class SchemaError(ValueError):
    """The input CSV lacks a column the figure kind requires."""

    def __init__(self, column, path):
        self.column = column
        super().__init__(f"{path}: missing required column '{column}'")


KINDS = ("ber", "transfer", "complexity")

REQUIRED_COLUMNS = {
    "ber": ("snr_db", "scheme", "precision", "ber"),
    "transfer": ("n_coh", "m_pd_ul", "m_fd_ul", "m_pd_dl", "m_fd_dl"),
    "complexity": ("n_coh", "n_ex", "n_im"),
}

PIPELINE_COLUMNS = (
    "separate_explicit",
    "mmse_wf_reuse_gram",
    "zf_zf_reuse_inverse",
    "zf_zf_implicit_reuse_L",
)


@dataclass(frozen=True)
class PlotSpec:
    """What to read, which figure to draw, and where to write it."""

    input_csv: str
    kind: str
    output: str
    log_x: bool | None = None  # None picks the kind's default
    log_y: bool | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def _read_rows(spec: PlotSpec):
    path = Path(spec.input_csv)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS[spec.kind]:
            if column not in header:
                raise SchemaError(column, path)
        rows = list(reader)
    if not rows:
        warnings.warn(f"{path}: no data rows; rendering an empty figure")
    return rows


def _axes(spec: PlotSpec, default_log_x, default_log_y):
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    log_x = default_log_x if spec.log_x is None else spec.log_x
    log_y = default_log_y if spec.log_y is None else spec.log_y
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _render_ber(spec: PlotSpec, rows, ax):
    series = {}
    precisions = {row["precision"] for row in rows}
    for row in rows:
        ber = float(row["ber"])
        if math.isnan(ber):
            warnings.warn(f"skipping failed record for scheme {row['scheme']}")
            continue
        label = row["scheme"]
        if len(precisions) > 1:
            label = f"{label} ({row['precision']})"
        series.setdefault(label, []).append((float(row["snr_db"]), ber))
    for label, points in series.items():
        points.sort()
        ax.plot(*zip(*points), marker="o", markersize=3.5, label=label)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("uncoded BER")
    ax.set_ylim(1e-5, 1.0)
    if series:
        ax.legend(fontsize=8)


def _render_tradeoff(spec: PlotSpec, rows, ax, columns, ylabel, styles=None):
    x = [int(row["n_coh"]) for row in rows]
    for i, column in enumerate(columns):
        y = [float(row[column]) for row in rows]
        style = (styles or {}).get(column, {})
        ax.plot(x, y, marker=".", label=column, **style)
    ax.set_xlabel("coherence length (symbols)")
    ax.set_ylabel(ylabel)
    if columns and rows:
        ax.legend(fontsize=8)


def render(spec: PlotSpec) -> Path:
    """Draw the figure and write it to ``spec.output``; returns the path."""
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    rows = _read_rows(spec)
    if spec.kind == "ber":
        fig, ax = _axes(spec, default_log_x=False, default_log_y=True)
        _render_ber(spec, rows, ax)
        ax.set_title("BER vs SNR")
    elif spec.kind == "transfer":
        fig, ax = _axes(spec, default_log_x=True, default_log_y=True)
        styles = {
            "m_pd_ul": {"linestyle": "-"},
            "m_fd_ul": {"linestyle": "-"},
            "m_pd_dl": {"linestyle": "--"},
            "m_fd_dl": {"linestyle": "--"},
        }
        _render_tradeoff(spec, rows, ax, REQUIRED_COLUMNS["transfer"][1:],
                         "transfer size (real values / symbol)", styles)
        ax.set_title("Fusion transfer size vs coherence length")
    else:
        fig, ax = _axes(spec, default_log_x=True, default_log_y=True)
        columns = list(REQUIRED_COLUMNS["complexity"][1:])
        if rows:
            columns += [c for c in PIPELINE_COLUMNS if c in rows[0]]
        styles = {c: {"linestyle": ":"} for c in PIPELINE_COLUMNS}
        _render_tradeoff(spec, rows, ax, columns,
                         "real multiplications / symbol", styles)
        ax.set_title("Equalization complexity vs coherence length")

    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
