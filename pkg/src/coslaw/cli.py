"""Command-line front end: ``coslaw <command> --config run.json [--seed N] [--out PATH] [--format csv|jsonl]``.

The result payload (CSV rows or JSON lines) goes to ``--out`` or stdout and is
byte-for-byte reproducible for a fixed config. A one-line run report with the
config echo, summary and wall-clock time goes to ``--report`` if given,
otherwise to stderr.

Exit codes: 0 success, 2 config or I/O error, 3 domain/precondition error,
4 overflow where the command cannot treat it as a result.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time

import numpy as np

from coslaw import __version__, config
from coslaw.cosine_families import ScalarCosineFamily, family_from_json, parse_complex
from coslaw.discrete_semigroups import (
    DiscreteCosineSequence,
    ExpSemigroup,
    PowerSemigroup,
    cesaro_wallen,
    default_exp_config,
    discrete_law_check,
    matrix_exp_semigroup_check,
    semigroup_law_check,
)
from coslaw.errors import (
    ConfigError,
    DomainError,
    InvalidMatrix,
    NoConvergence,
    NotNormal,
    OutsideDisk,
    Overflowed,
)
from coslaw.laws import (
    Approach,
    ScanConfig,
    classify_scalar_dichotomy,
    default_scan_config,
    default_witness_config,
    scaled_gap_witness,
    shrinking_scan,
    windowed_sup_scan,
)
from coslaw.linalg_core import as_matrix, identity, matrix_from_json, matrix_to_json, operator_norm
from coslaw.sqrt_halving import DEFAULT_MARGIN, dyadic_reconstruct, halve

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_OVERFLOW = 0, 2, 3, 4
COMMANDS = ("scan", "classify", "halve", "reconstruct", "discrete", "semigroup", "witness")


def fmt(x) -> str:
    """17 significant digits; ``inf``/``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _clean(obj):
    """Make an object strict-JSON safe: non-finite floats become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def jsonline(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, allow_nan=False) + "\n"


def csv_rows(header: str, xs, ys) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    for x, y in zip(xs, ys):
        buf.write(f"{fmt(x)},{fmt(y)}\n")
    return buf.getvalue()


def parse_matrix(value, name: str) -> np.ndarray:
    """A matrix literal, or a scalar / ``[re, im]`` pair taken as a 1x1 matrix."""
    if isinstance(value, dict) and "dim" in value:
        return matrix_from_json(value)
    return as_matrix(parse_complex(value, name), name)


def _require(cfg: dict, key: str, message: str | None = None):
    if key not in cfg:
        raise ConfigError(message or f"missing field '{key}'")
    return cfg[key]


def _scan_config(cfg: dict, fallback) -> ScanConfig:
    raw = cfg.get("scan")
    if raw is None:
        return fallback()
    if not isinstance(raw, dict):
        raise ConfigError("'scan' must be an object")
    allowed = set(ScanConfig.__dataclass_fields__)
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown scan fields: {sorted(unknown)}")
    try:
        return ScanConfig(**{k: (int(v) if k == "tail_windows" else float(v)) for k, v in raw.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scan config: {exc}") from None


def _family(cfg: dict):
    if "family" not in cfg:
        raise ConfigError("missing family descriptor")
    return family_from_json(cfg["family"])


def _scalar_parameter(cfg: dict) -> complex:
    if "a" in cfg:
        return parse_complex(cfg["a"], "a")
    f = _family(cfg)
    if not isinstance(f, ScalarCosineFamily):
        raise ConfigError("classify works on scalar families only")
    return f.a


def cmd_scan(cfg: dict, fmt_: str):
    f = _family(cfg)
    scan = _scan_config(cfg, lambda: default_scan_config(f))
    est = windowed_sup_scan(f, scan)
    summary = est.to_json()
    if fmt_ == "csv":
        payload = csv_rows("t,norm", est.times, est.norms)
    else:
        payload = jsonline(summary)
    return payload, summary


def cmd_classify(cfg: dict, fmt_: str):
    a = _scalar_parameter(cfg)
    t0 = cfg.get("t0", "infinity")
    try:
        t0 = Approach(t0)
    except ValueError:
        raise ConfigError(f"t0 must be 'zero' or 'infinity', got {t0!r}") from None
    scan = _scan_config(cfg, lambda: None)
    tol = float(cfg.get("tol", 0.05))
    res = classify_scalar_dichotomy(a, t0, scan, tol)
    summary = res.to_json()
    if fmt_ == "csv":
        # the class keeps only the estimate; rerun the scan for per-window rows
        payload = csv_rows("t,norm", *_classify_rows(a, t0, scan))
    else:
        payload = jsonline(summary)
    return payload, summary


def _classify_rows(a, t0, scan):
    f = ScalarCosineFamily(a)
    if t0 is Approach.INFINITY:
        est = windowed_sup_scan(f, scan or default_scan_config(f))
    else:
        est = shrinking_scan(f, scan.t_end if scan else 1.0,
                             overflow_cap=scan.overflow_cap if scan else 1e6)
    starts = [s for s, _ in est.window_sups]
    sups = [v for _, v in est.window_sups]
    return starts, sups


def _margin(cfg) -> float:
    return float(cfg.get("margin", DEFAULT_MARGIN))


def cmd_halve(cfg: dict, fmt_: str):
    s = None
    if "C2s" in cfg:
        C2s = parse_matrix(cfg["C2s"], "C2s")
    else:
        f = _family(cfg)
        s = float(_require(cfg, "s", "halve needs 'C2s' or a family with 's'"))
        C2s = np.atleast_2d(f.evaluate(2.0 * s))
    Cs = halve(C2s, _margin(cfg))
    eye = identity(Cs.shape[0])
    residual = operator_norm(2.0 * (Cs @ Cs) - eye - C2s)
    gap = operator_norm(Cs - eye)
    summary = {"s": s, "Cs": matrix_to_json(Cs), "doubling_residual": residual, "norm_Cs_minus_I": gap}
    if fmt_ == "csv":
        payload = csv_rows("t,norm", [math.nan if s is None else s], [gap])
    else:
        payload = jsonline(summary)
    return payload, summary


def cmd_reconstruct(cfg: dict, fmt_: str):
    k = int(_require(cfg, "k"))
    f = None
    if "C1" in cfg:
        C1 = parse_matrix(cfg["C1"], "C1")
    else:
        f = _family(cfg)
        C1 = np.atleast_2d(f.evaluate(1.0))
    stages = dyadic_reconstruct(C1, k, _margin(cfg))
    eye = identity(C1.shape[0])
    rows = []
    prev = C1
    for j, C in enumerate(stages, start=1):
        t = 2.0**-j
        row = {
            "stage": j,
            "t": t,
            "C": matrix_to_json(C),
            "norm_C_minus_I": operator_norm(C - eye),
            "doubling_residual": operator_norm(2.0 * (C @ C) - eye - prev),
        }
        if f is not None:
            row["error_vs_direct"] = operator_norm(C - np.atleast_2d(f.evaluate(t)))
        rows.append(row)
        prev = C
    if fmt_ == "csv":
        payload = csv_rows("t,norm", [r["t"] for r in rows], [r["norm_C_minus_I"] for r in rows])
    else:
        payload = "".join(jsonline(r) for r in rows)
    summary = {
        "k": k,
        "max_doubling_residual": max((r["doubling_residual"] for r in rows), default=0.0),
        "max_error_vs_direct": max((r.get("error_vs_direct", 0.0) for r in rows), default=0.0) if f else None,
    }
    return payload, summary


def cmd_discrete(cfg: dict, fmt_: str):
    X = parse_matrix(_require(cfg, "X"), "X")
    r = float(cfg.get("r", 1.5))
    N = int(cfg.get("N", 10_000))
    verdict = discrete_law_check(DiscreteCosineSequence(X), r, N)
    summary = verdict.to_json()
    ev = verdict.evidence
    if fmt_ == "csv":
        payload = csv_rows("n,norm", ev.times.astype(int), ev.norms)
    else:
        payload = jsonline(summary)
    return payload, summary


def cmd_semigroup(cfg: dict, fmt_: str):
    if "G" in cfg:
        G = parse_matrix(cfg["G"], "G")
        r = float(cfg.get("r", 1.0))
        sg = ExpSemigroup(G)
        scan = _scan_config(cfg, lambda: default_exp_config(sg))
        verdict = matrix_exp_semigroup_check(G, r, scan)
        summary = verdict.to_json()
        header = "t,norm"
        xs = verdict.evidence.times
    else:
        T = parse_matrix(_require(cfg, "T", "semigroup needs 'T' or 'G'"), "T")
        r = float(cfg.get("r", 1.0))
        N = int(cfg.get("N", 10_000))
        sg = PowerSemigroup(T)
        verdict = semigroup_law_check(sg, r, N)
        liminf, averages = cesaro_wallen(sg, N)
        summary = verdict.to_json() | {"cesaro_liminf": liminf, "cesaro_first": averages[:5].tolist()}
        header = "n,norm"
        xs = verdict.evidence.times.astype(int)
    if fmt_ == "csv":
        payload = csv_rows(header, xs, verdict.evidence.norms)
    else:
        payload = jsonline(summary)
    return payload, summary


def cmd_witness(cfg: dict, fmt_: str):
    a = float(_require(cfg, "a"))
    b = float(_require(cfg, "b"))
    scan = _scan_config(cfg, lambda: default_witness_config(a, b) if a != b else ScanConfig(0.0, 1.0, 0.01, 1.0))
    sup = scaled_gap_witness(a, b, scan)
    summary = {"a": a, "b": b, "sup": sup}
    if fmt_ == "csv":
        ts = scan.grid()
        payload = csv_rows("t,norm", ts, np.abs(np.cos(b * ts) - np.cos(a * ts)))
    else:
        payload = jsonline(summary)
    return payload, summary


HANDLERS = {
    "scan": cmd_scan,
    "classify": cmd_classify,
    "halve": cmd_halve,
    "reconstruct": cmd_reconstruct,
    "discrete": cmd_discrete,
    "semigroup": cmd_semigroup,
    "witness": cmd_witness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coslaw", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"coslaw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="payload path (default: stdout)")
        p.add_argument("--format", choices=("csv", "jsonl"), default=None)
        p.add_argument("--report", default=None, help="write the run report JSON here")
    return parser


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = load_config(args.config)
        output = dict(cfg.get("output") or {})
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.out is not None:
            output["path"] = args.out
        if args.format is not None:
            output["format"] = args.format
        fmt_ = output.get("format", "jsonl")
        if fmt_ not in ("csv", "jsonl"):
            raise ConfigError(f"unknown output format {fmt_!r}")
        cfg["output"] = output
        config.set_seed(cfg.get("seed", config.SEED))
        payload, summary = HANDLERS[args.command](cfg, fmt_)
        path = output.get("path")
        if path:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(payload)
        else:
            sys.stdout.write(payload)
    except (OutsideDisk, DomainError, NotNormal, NoConvergence) as exc:
        return _fail(EXIT_DOMAIN, exc)
    except Overflowed as exc:
        return _fail(EXIT_OVERFLOW, exc)
    except (ConfigError, InvalidMatrix, OSError, KeyError, TypeError, ValueError) as exc:
        return _fail(EXIT_CONFIG, exc)

    report = {
        "command": args.command,
        "config": cfg,
        "result": summary,
        "wall_clock_s": time.perf_counter() - started,
        "version": __version__,
    }
    line = jsonline(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(line)
    else:
        sys.stderr.write(line)
    return EXIT_OK


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(f"coslaw: error: {type(exc).__name__}: {exc}\n")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
