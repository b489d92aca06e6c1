"""Command-line entry point: BER sweeps, trade-off tables, verification, decisions.

Exit codes: 0 success, 1 configuration error (the message names the
offending key), 2 numeric failure during a run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .channel import SystemConfig
from .cost import select_architecture
from .errors import ConfigError
from .harness import (
    SweepSpec,
    format_number,
    run_ber_sweep,
    run_tradeoff_report,
    verify_equivalences,
    write_ber_csv,
    write_tradeoff_csv,
)

CONFIG_KEYS = {
    "B": int,
    "U": int,
    "C": int,
    "n_coh": int,
    "modulation": str,
    "e_s": float,
    "p_tx": float,
    "snr_db": list,
    "trials": int,
    "seed": int,
    "detectors": list,
    "precision": (str, list),
    "n_coh_list": list,
    "early_stop_errors": int,
}

DEFAULTS = {
    "B": 128,
    "U": 16,
    "C": 4,
    "n_coh": 16,
    "modulation": "16qam",
    "e_s": 1.0,
    "p_tx": 1.0,
    "snr_db": [0.0],
    "trials": 1000,
    "seed": 0,
    "detectors": ["pd-mmse"],
    "precision": "fp32",
    "n_coh_list": list(range(1, 257)),
    "early_stop_errors": None,
}


def load_config(spec: str) -> dict:
    """Read a JSON config from a path or a bundled preset name."""
    path = Path(spec)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    else:
        preset = resources.files("dbpsim").joinpath(f"presets/{spec}.json")
        if not preset.is_file():
            raise ConfigError("config", f"no such file or preset: {spec}")
        text = preset.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return data


def validate_config(data: dict) -> dict:
    for key, value in data.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown configuration key")
        expected = CONFIG_KEYS[key]
        if expected is float and isinstance(value, (int, float)):
            continue
        if expected is int and isinstance(value, bool):
            raise ConfigError(key, "expected an integer")
        if not isinstance(value, expected):
            kinds = (
                expected.__name__
                if not isinstance(expected, tuple)
                else "/".join(t.__name__ for t in expected)
            )
            raise ConfigError(key, f"expected {kinds}, got {type(value).__name__}")
    merged = dict(DEFAULTS)
    merged.update(data)
    return merged


def apply_overrides(data: dict, overrides) -> dict:
    """Apply repeatable ``--set key=value`` pairs; values parse as JSON."""
    out = dict(data)
    applied = {}
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown configuration key")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings (e.g. 16qam) pass through
        out[key] = value
        applied[key] = value
    return out, applied


def system_config(data: dict) -> SystemConfig:
    return SystemConfig(
        bs_antennas=data["B"],
        users=data["U"],
        clusters=data["C"],
        coherence_len=data["n_coh"],
        modulation=data["modulation"],
        symbol_energy=float(data["e_s"]),
        tx_power=float(data["p_tx"]),
    )


def sweep_spec(data: dict) -> SweepSpec:
    precision = data["precision"]
    precisions = tuple(precision) if isinstance(precision, list) else (precision,)
    snr = tuple(float(v) for v in data["snr_db"])
    return SweepSpec(
        config=system_config(data),
        snr_db=snr,
        trials=int(data["trials"]),
        schemes=tuple(data["detectors"]),
        precisions=precisions,
        seed=int(data["seed"]),
        early_stop_errors=data.get("early_stop_errors"),
    )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit_manifest(out_dir: Path, verb: str, data: dict, overrides: dict, outputs):
    manifest = {
        "verb": verb,
        "config": {k: data[k] for k in sorted(data) if data[k] is not None},
        "overrides": overrides,
        "seed": data.get("seed"),
        "versions": {
            "dbpsim": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _prepare(args):
    data = load_config(args.config)
    data, applied = apply_overrides(data, args.set)
    if args.seed is not None:
        data["seed"] = args.seed
        applied["seed"] = args.seed
    data = validate_config(data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return data, applied, out_dir


def cmd_ber(args) -> int:
    data, applied, out_dir = _prepare(args)
    spec = sweep_spec(data)
    records = run_ber_sweep(spec)
    csv_path = write_ber_csv(records, out_dir / "ber.csv")
    emit_manifest(out_dir, "ber", data, applied, [Path(csv_path)])
    failures = [r for r in records if r.error]
    for r in failures:
        print(
            f"scheme {r.scheme} ({r.precision}) aborted at snr {r.snr_db}: {r.error}",
            file=sys.stderr,
        )
    print(f"wrote {csv_path} ({len(records)} records)")
    return 2 if failures else 0


def cmd_tradeoff(args) -> int:
    data, applied, out_dir = _prepare(args)
    cfg = system_config(data)
    rows = run_tradeoff_report(cfg, data["n_coh_list"])
    csv_path = write_tradeoff_csv(rows, out_dir / "tradeoff.csv")
    emit_manifest(out_dir, "tradeoff", data, applied, [Path(csv_path)])
    print(f"wrote {csv_path} ({len(rows)} rows)")
    return 0


def cmd_verify(args) -> int:
    data, applied, out_dir = _prepare(args)
    cfg = system_config(data)
    results = verify_equivalences(cfg, instances=args.instances, seed=data["seed"])
    lines = ["check,instances,max_deviation,tolerance,status,note"]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(
            f"[{status}] {r.name}: max deviation {r.max_deviation:.3e} "
            f"(tolerance {r.tolerance:.1e}) {r.note}"
        )
        lines.append(
            f"{r.name},{r.instances},{format_number(r.max_deviation)},"
            f"{format_number(r.tolerance)},{status},{r.note}"
        )
    csv_path = out_dir / "verify.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    emit_manifest(out_dir, "verify", data, applied, [csv_path])
    return 0 if all(r.passed for r in results) else 2


def cmd_decide(args) -> int:
    choice = select_architecture(args.link, args.n_coh, args.u, args.prefer)
    print(f"{choice.architecture.upper()}: {choice.rationale}")
    print(
        f"(link={choice.link}, n_coh={choice.n_coh}, u={choice.users}, "
        f"preference={choice.preference})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbpsim",
        description=(
            "Decentralized baseband processing simulator: BER sweeps, "
            "transfer/complexity trade-off tables, equivalence checks, and "
            "architecture recommendations."
        ),
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="JSON config path or preset name")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config key (repeatable; JSON values)",
        )

    p_ber = sub.add_parser("ber", help="run a Monte Carlo BER sweep, write ber.csv")
    add_common(p_ber)
    p_ber.set_defaults(func=cmd_ber)

    p_trade = sub.add_parser("tradeoff", help="evaluate cost models, write tradeoff.csv")
    add_common(p_trade)
    p_trade.set_defaults(func=cmd_tradeoff)

    p_verify = sub.add_parser("verify", help="run equivalence checks, write verify.csv")
    add_common(p_verify)
    p_verify.add_argument("--instances", type=int, default=100)
    p_verify.set_defaults(func=cmd_verify)

    p_decide = sub.add_parser("decide", help="recommend PD vs FD for a scenario")
    p_decide.add_argument("--link", choices=["uplink", "downlink"], required=True)
    p_decide.add_argument("--n-coh", type=int, required=True, dest="n_coh")
    p_decide.add_argument("--u", type=int, required=True)
    p_decide.add_argument("--prefer", choices=["ber", "bandwidth"], required=True)
    p_decide.set_defaults(func=cmd_decide)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


def entry():  # console script
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
