"""Command-line front end.

Subcommands::

    scan               P_N along Re(alpha) at fixed Im(alpha)
    significance-vs-s  P_N and significance at one alpha over a grid of s
    simulate           finite-shot replications at one alpha and s
    dsymbols           dump the click POVM diagonal as k, m, value

Grids are ``start:stop:steps`` with inclusive endpoints and ``steps`` points.
``clickspace --config run.json`` replays a configuration written with
``--save-config``.

Errors are reported on stderr as one JSON object ``{"error": category,
"message": ...}`` with exit status 2 (usage), 3 (domain), 4 (precision),
5 (cutoff) or 6 (io).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .detector import DetectorArray, click_distribution, d_symbol_table
from .experiment import ExperimentConfig, simulate_replications
from .phasespace import CSV_COLUMNS, ScanRow, scan_line, significance_vs_s, stderr_exact, quasiprob
from .special import PrecisionError
from .states import DEFAULT_TAIL_EPS, CutoffError, parse_state, photon_distribution

S_GUARD = (-1.0, 0.95)
EXIT_CODES = {"usage": 2, "domain": 3, "precision": 4, "cutoff": 5, "io": 6}
_VALUE_FLAGS = {"--re", "--s-grid", "--s", "--alpha", "--im", "--eta"}


class UsageError(Exception):
    pass


class DomainError(UsageError):
    """A value outside the physically meaningful range (e.g. ``s >= 1``)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    state: Optional[str] = None
    detectors: int = 6
    eta: float = 0.9
    s: float = 0.0
    nu: int = 10_000
    seed: int = 0
    replications: int = 100
    re: str = "-2:2:201"
    im: float = 0.0
    alpha: str = "0"
    s_grid: str = "-1:0.9:39"
    max_m: int = 20
    tail_eps: float = DEFAULT_TAIL_EPS
    output: Optional[str] = None
    format: str = "csv"
    summary: bool = False
    allow_any_s: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**data)
        validate(cfg)
        return cfg


def parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} must be start:stop:steps")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid {text!r} must be start:stop:steps with integer steps") from None
    if steps < 1:
        raise UsageError(f"grid {text!r} needs steps >= 1")
    return start, stop, steps


def parse_alpha(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"alpha {text!r} is not a number like 0.8 or 0.8+0.2j") from None


def _check_s_value(s: float, allow_any: bool) -> None:
    if not s < 1:
        raise DomainError(f"s must be < 1, got {s}")
    lo, hi = S_GUARD
    if not allow_any and not lo <= s <= hi:
        raise UsageError(f"s={s} outside [{lo}, {hi}]; pass --allow-any-s to override")


def validate(cfg: RunConfig) -> None:
    if cfg.command not in ("scan", "significance-vs-s", "simulate", "dsymbols"):
        raise UsageError(f"unknown command {cfg.command!r}")
    if cfg.detectors < 1:
        raise UsageError("--detectors must be >= 1")
    if not 0 < cfg.eta <= 1:
        raise UsageError("--eta must lie in (0, 1]")
    if cfg.format not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    if cfg.command == "dsymbols":
        if cfg.max_m < 0:
            raise UsageError("--max-m must be >= 0")
        return
    if cfg.state is None:
        raise UsageError(f"{cfg.command} needs --state")
    try:
        parse_state(cfg.state)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.nu < 1:
        raise UsageError("--nu must be >= 1")
    if not 0 < cfg.tail_eps <= 1e-6:
        raise UsageError("--tail-eps must lie in (0, 1e-6]")
    if cfg.command == "significance-vs-s":
        start, stop, steps = parse_grid(cfg.s_grid)
        for s in np.linspace(start, stop, steps):
            _check_s_value(float(s), cfg.allow_any_s)
    else:
        _check_s_value(cfg.s, cfg.allow_any_s)
    if cfg.command == "scan":
        parse_grid(cfg.re)
    else:
        parse_alpha(cfg.alpha)
    if cfg.command == "simulate":
        if cfg.replications < 1:
            raise UsageError("--replications must be >= 1")
        if not 0 <= cfg.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")


def _build_parser() -> _Parser:
    parser = _Parser(prog="clickspace", description="Click-counting phase-space functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, state=True):
        p.add_argument("--detectors", type=int, default=6, help="number of on-off detectors N")
        p.add_argument("--eta", type=float, default=0.9, help="overall quantum efficiency")
        if state:
            p.add_argument("--state", required=True, help="e.g. squeezed:r=1, fock:n=1, thermal:mean=0.5")
            p.add_argument("--nu", type=int, default=10_000, help="number of measurements")
            p.add_argument("--tail-eps", type=float, default=DEFAULT_TAIL_EPS)
            p.add_argument("--allow-any-s", action="store_true", help="permit any s < 1")
        p.add_argument("--output", "-o", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--save-config", help="also write the parsed configuration as JSON")

    p = sub.add_parser("scan", help="P_N along a line in phase space")
    common(p)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--re", default="-2:2:201", help="Re(alpha) grid start:stop:steps")
    p.add_argument("--im", type=float, default=0.0, help="fixed Im(alpha)")
    p.add_argument("--summary", action="store_true")

    p = sub.add_parser("significance-vs-s", help="significance at fixed alpha over s")
    common(p)
    p.add_argument("--alpha", default="0")
    p.add_argument("--s-grid", default="-1:0.9:39")
    p.add_argument("--summary", action="store_true")

    p = sub.add_parser("simulate", help="simulate finite-shot experiments")
    common(p)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--alpha", default="0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replications", type=int, default=100)

    p = sub.add_parser("dsymbols", help="dump POVM diagonal entries")
    common(p, state=False)
    p.add_argument("--max-m", type=int, default=20)
    return parser


def _join_values(argv: list[str]) -> list[str]:
    # argparse mistakes values like -2:2:201 for options
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def parse_args(argv: list[str]) -> tuple[RunConfig, Optional[str]]:
    """Parse and validate ``argv``; returns the config and an optional save path.

    Raises:
        UsageError: on unknown flags, bad grammar or out-of-range values.
    """
    argv = list(argv)
    if argv[:1] == ["--config"]:
        if len(argv) != 2:
            raise UsageError("usage: clickspace --config FILE")
        try:
            with open(argv[1]) as fh:
                return RunConfig.from_json(fh.read()), None
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise UsageError(f"cannot load config: {exc}") from None
    ns = vars(_build_parser().parse_args(_join_values(argv)))
    save = ns.pop("save_config", None)
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in ns.items() if k in known})
    validate(cfg)
    return cfg, save


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _write(rows: list[dict], columns, cfg: RunConfig) -> str:
    if cfg.format == "json":
        return json.dumps([{c: r[c] for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([r[c] if isinstance(r[c], str) else _fmt(r[c]) for c in columns])
    return buf.getvalue()


def _summary(rows: list[dict], key: str) -> str:
    best_v = min(rows, key=lambda r: r["p_value"])
    sig = [r for r in rows if r["significance"] is not None]
    lines = [f"min p_value: {best_v['p_value']:.6g} at {key}={best_v[key]:.6g}"]
    if sig:
        best_s = min(sig, key=lambda r: r["significance"])
        lines.append(f"min significance: {best_s['significance']:.6g} at {key}={best_s[key]:.6g}")
    else:
        lines.append("min significance: n/a")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> tuple[str, Optional[str]]:
    """Execute a validated config; returns (output text, summary text or None)."""
    det = DetectorArray(cfg.detectors, cfg.eta)
    if cfg.command == "dsymbols":
        table = d_symbol_table(det, cfg.max_m)
        rows = [
            {"k": k, "m": m, "value": float(table.entries[k, m])}
            for k in range(det.n_detectors + 1)
            for m in range(cfg.max_m + 1)
        ]
        return _write(rows, ("k", "m", "value"), cfg), None

    state = parse_state(cfg.state)
    if cfg.command == "scan":
        rows = scan_line(state, det, cfg.s, cfg.nu, parse_grid(cfg.re), cfg.im, cfg.tail_eps)
        dicts = [r.as_dict() for r in rows]
        return _write(dicts, CSV_COLUMNS, cfg), _summary(dicts, "re_alpha") if cfg.summary else None

    alpha = parse_alpha(cfg.alpha)
    if cfg.command == "significance-vs-s":
        start, stop, steps = parse_grid(cfg.s_grid)
        rows = significance_vs_s(state, det, alpha, cfg.nu, list(np.linspace(start, stop, steps)), cfg.tail_eps)
        dicts = [r.as_dict() for r in rows]
        return _write(dicts, CSV_COLUMNS, cfg), _summary(dicts, "s") if cfg.summary else None

    # simulate
    exp = ExperimentConfig(cfg.nu, cfg.seed, cfg.replications)
    clicks = click_distribution(photon_distribution(state, alpha, cfg.tail_eps), det)
    ests = simulate_replications(clicks, cfg.s, exp)
    dicts = []
    for i, est in enumerate(ests):
        d = ScanRow.from_estimate(alpha, cfg.s, det, est).as_dict()
        d.update(replication=i, seed=cfg.seed)
        dicts.append(d)
    values = np.array([e.value for e in ests])
    mean = math.fsum(values) / len(values)
    sp_mean = math.fsum(e.stderr_paper for e in ests) / len(ests)
    agg = dict(
        re_alpha=alpha.real,
        im_alpha=alpha.imag,
        s=cfg.s,
        N=det.n_detectors,
        eta=det.efficiency,
        nu=cfg.nu,
        p_value=mean,
        stderr_paper=sp_mean,
        stderr_exact=float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
        significance=mean / sp_mean if sp_mean > 0 else None,
        replication="aggregate",
        seed=cfg.seed,
    )
    dicts.append(agg)
    # exact reference printed alongside for comparison
    info = (
        f"exact p_value: {quasiprob(clicks, cfg.s):.17g}\n"
        f"analytic stderr_exact: {stderr_exact(clicks, cfg.s, cfg.nu):.17g}\n"
    )
    return _write(dicts, CSV_COLUMNS + ("replication", "seed"), cfg), info


def _fail(category: str, message: str) -> int:
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)
    return EXIT_CODES[category]


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg, save = parse_args(argv)
        if save:
            with open(save, "w") as fh:
                fh.write(cfg.to_json() + "\n")
        text, summary = run(cfg)
        if cfg.output:
            with open(cfg.output, "w") as fh:
                fh.write(text)
            if summary:
                sys.stdout.write(summary)
        else:
            sys.stdout.write(text)
            if summary:
                sys.stderr.write(summary)
    except DomainError as exc:
        return _fail("domain", str(exc))
    except UsageError as exc:
        return _fail("usage", str(exc))
    except CutoffError as exc:
        return _fail("cutoff", str(exc))
    except PrecisionError as exc:
        return _fail("precision", str(exc))
    except ValueError as exc:
        return _fail("domain", str(exc))
    except OSError as exc:
        return _fail("io", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
