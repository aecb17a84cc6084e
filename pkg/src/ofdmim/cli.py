"""
SNR-sweep harness: analytic union bounds and/or Monte Carlo per grid point,
written as CSV or JSON.

    ofdmim --n 4 --k 2 --m 2 --mu 1 --snr-start 0 --snr-stop 30 --snr-step 5 \\
           --trials 100000 --seed 1 --mode both --out sweep.csv

A ``--config`` file holds the same keys as ``key = value`` lines (``#``
starts a comment); flags given on the command line win.

Exit codes: 0 success, 1 usage/configuration error, 2 computation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import SnrPoint, UnionMethod, union_bounds
from .codebook import ConfigurationError, PepConvention, SystemConfig, build_codebook
from .numerics import QuadratureError
from .simulator import monte_carlo

log = logging.getLogger("ofdmim")

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2
MODES = ("analytic", "simulate", "both")
ERROR_MARKER = "error"

CSV_FIELDS = ("snr_db", "bler_craig", "bler_exp", "ber_craig", "ber_exp",
              "bler_sim", "ber_sim", "bler_ci95", "ber_ci95", "convention")


@dataclass(frozen=True)
class SweepConfig:
    system: SystemConfig
    snr_db_start: float = 0.0
    snr_db_stop: float = 30.0
    snr_db_step: float = 5.0
    trials: int = 100_000
    seed: int = 0
    mode: str = "both"
    output_path: Optional[str] = None
    backend: str = "auto"
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("snr_db_start", "snr_db_stop", "snr_db_step"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if self.snr_db_start > self.snr_db_stop:
            raise ConfigurationError("snr start must not exceed snr stop")
        if not self.snr_db_step > 0:
            raise ConfigurationError("snr step must be positive")
        if self.mode != "analytic" and self.trials < 1:
            raise ConfigurationError("trials must be >= 1 when simulating")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")

    def snr_grid(self) -> list[float]:
        n = int(math.floor((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9)) + 1
        return [round(self.snr_db_start + i * self.snr_db_step, 10) for i in range(n)]


@dataclass
class ReportRow:
    snr_db: float
    bler_craig: Optional[float] = None
    bler_exp: Optional[float] = None
    ber_craig: Optional[float] = None
    ber_exp: Optional[float] = None
    bler_sim: Optional[float] = None
    ber_sim: Optional[float] = None
    bler_ci95: Optional[float] = None
    ber_ci95: Optional[float] = None
    convention: str = PepConvention.STANDARD.value
    failed: bool = False


def point_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for the index-th grid point."""
    state = np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def run_sweep(config: SweepConfig) -> list[ReportRow]:
    system = config.system
    codebook = build_codebook(system)
    rows = []
    for i, db in enumerate(config.snr_grid()):
        snr = SnrPoint(db)
        row = ReportRow(snr_db=db, convention=system.pep_convention.value)
        if config.mode in ("analytic", "both"):
            for method, suffix in ((UnionMethod.CRAIG, "craig"), (UnionMethod.EXPONENTIAL, "exp")):
                try:
                    ub = union_bounds(codebook, snr, method)
                except QuadratureError as exc:
                    log.error("%s dB: %s union bound failed: %s", db, suffix, exc)
                    row.failed = True
                    continue
                setattr(row, f"bler_{suffix}", ub.bler)
                setattr(row, f"ber_{suffix}", ub.ber)
        if config.mode in ("simulate", "both"):
            est = monte_carlo(codebook, snr, config.trials, point_seed(config.seed, i),
                              backend=config.backend, workers=config.workers)
            row.bler_sim, row.ber_sim = est.bler_hat, est.ber_hat
            row.bler_ci95, row.ber_ci95 = est.bler_ci95, est.ber_ci95
        rows.append(row)
    return rows


def _fmt(name, value, row, mode):
    if value is None:
        if row.failed and name in ("bler_craig", "bler_exp", "ber_craig", "ber_exp") \
                and mode != "simulate":
            return ERROR_MARKER
        return ""
    if name == "convention":
        return value
    if name == "snr_db":
        return f"{value:.6f}"
    return f"{value:.12e}"


def _row_cells(row: ReportRow, mode: str) -> dict:
    return {name: _fmt(name, getattr(row, name), row, mode) for name in CSV_FIELDS}


def format_report(rows: Sequence[ReportRow], fmt: str = "csv", mode: str = "both") -> str:
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(_row_cells(r, mode))
        return buf.getvalue()
    if fmt == "json":
        out = []
        for r in rows:
            cells = _row_cells(r, mode)
            obj = {}
            for name in CSV_FIELDS:
                v = cells[name]
                if name == "convention" or v == ERROR_MARKER:
                    obj[name] = v
                else:
                    obj[name] = float(v) if v else None
            out.append(obj)
        return json.dumps(out, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(rows: Sequence[ReportRow], fmt: str = "csv", path=None, mode: str = "both") -> None:
    """Write rows to ``path`` (stdout when None)."""
    text = format_report(rows, fmt, mode)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def parse_report(text: str, fmt: str = "csv") -> list[ReportRow]:
    """Inverse of format_report, at the printed precision."""
    if fmt == "csv":
        records = list(csv.DictReader(io.StringIO(text)))
    elif fmt == "json":
        records = json.loads(text)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    rows = []
    for rec in records:
        kw, failed = {}, False
        for name in CSV_FIELDS:
            v = rec.get(name)
            if name == "convention":
                kw[name] = v
            elif v == ERROR_MARKER:
                failed = True
                kw[name] = None
            else:
                kw[name] = float(v) if v not in (None, "") else None
        rows.append(ReportRow(**kw, failed=failed))
    return rows


# -- command line ---------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config_file(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ofdmim", description="OFDM-IM BLER/BER sweep: union bounds and Monte Carlo.")
    p.add_argument("--config", help="key = value file with the same fields as the flags")
    p.add_argument("--n", type=int, default=4, help="subcarriers per group (N)")
    p.add_argument("--k", type=int, default=2, help="active subcarriers (K)")
    p.add_argument("--m", type=int, default=2, help="PSK order (M)")
    p.add_argument("--mu", type=float, default=1.0, help="mean channel power gain")
    p.add_argument("--snr-start", type=float, default=0.0, help="first Pt/N0 in dB")
    p.add_argument("--snr-stop", type=float, default=30.0, help="last Pt/N0 in dB")
    p.add_argument("--snr-step", type=float, default=5.0)
    p.add_argument("--trials", type=int, default=100_000, help="Monte Carlo trials per point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="both")
    p.add_argument("--convention", choices=[c.value for c in PepConvention], default="standard")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--backend", choices=("auto", "numba", "numpy"), default="auto")
    p.add_argument("--workers", type=int, default=1)
    return p


def _apply_config_file(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config_file(known.config)
    dests = {a.dest: a for a in parser._actions}
    defaults = {}
    for key, raw in values.items():
        if key not in dests or key == "config":
            raise ConfigurationError(f"unknown config key {key!r}")
        action = dests[key]
        conv = action.type or str
        try:
            val = conv(raw)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc
        if action.choices is not None and val not in action.choices:
            raise ConfigurationError(f"{key} must be one of {list(action.choices)}")
        defaults[key] = val
    parser.set_defaults(**defaults)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
    except (OSError, ConfigurationError) as exc:
        print(f"ofdmim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        system = SystemConfig(args.n, args.k, args.m, args.mu, PepConvention(args.convention))
        config = SweepConfig(system, args.snr_start, args.snr_stop, args.snr_step,
                             args.trials, args.seed, args.mode, args.out,
                             backend=args.backend, workers=args.workers)
        build_codebook(system)
    except ConfigurationError as exc:
        print(f"ofdmim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rows = run_sweep(config)
    except (QuadratureError, RuntimeError) as exc:
        print(f"ofdmim: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    try:
        emit_report(rows, args.format, args.out, config.mode)
    except OSError as exc:
        print(f"ofdmim: cannot write report: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_COMPUTE if any(r.failed for r in rows) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
