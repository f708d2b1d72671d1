"""Command-line front end.

    gcplift check    --config FILE [--out DIR] [--ladder 3x4,4x6] [--seed N] [--tolerance T]
    gcplift spectrum --config FILE [--out DIR]
    gcplift heat     --config FILE [--times 0.01,0.1,1]
    gcplift norm1    --config FILE --element "(0,0):1, (1,0):0.5-0.5j"

Exit status: 0 when every check passes, 1 when a check fails, 2 for usage
or configuration errors.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import os
import re
import sys

import numpy as np

from .config import ConfigError, load_config, parse_ladder

log = logging.getLogger("gcplift")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_element(text, n):
    """Parse ``"(k1,...,kn):coef, ..."`` into a FourierElement."""
    from .fourier import FourierElement
    terms = {}
    pattern = re.compile(r"\(\s*([-\d\s,]+?)\s*\)\s*:\s*([^,()]+)")
    pos = 0
    text = text.strip()
    for m in pattern.finditer(text):
        gap = text[pos:m.start()].strip().strip(",").strip()
        if gap:
            raise UsageError(f"cannot parse element near {gap!r}")
        try:
            k = tuple(int(v) for v in m.group(1).split(","))
            c = complex(m.group(2).replace(" ", ""))
        except ValueError as exc:
            raise UsageError(f"cannot parse term {m.group(0)!r}") from exc
        if len(k) != n:
            raise UsageError(f"lattice point {k} does not have {n} coordinates")
        terms[k] = terms.get(k, 0) + c
        pos = m.end()
    if text[pos:].strip().strip(","):
        raise UsageError(f"cannot parse element near {text[pos:]!r}")
    if not terms:
        raise UsageError("element has no terms")
    return FourierElement.from_terms(terms, n)


def _emit(text, out_dir, name):
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _header(cfg):
    head = f"# kind={cfg.kind} n={cfg.n} frame={cfg.frame} K={cfg.K} M={cfg.M}"
    if cfg.kind == "twisted-module":
        head += f" mu={cfg.mu} nu={cfg.nu}"
    elif cfg.kind == "qhm":
        q = cfg.qhm
        head += f" c={q.c} mu={q.mu} nu={q.nu} N={q.N}"
    return head + "\n"


def cmd_check(cfg, out_dir=None):
    from .suite import run_checks
    results = run_checks(cfg)
    failed = [r.name for r in results if r.status == "FAIL"]
    report = {
        "instance": cfg.kind,
        "seed": cfg.seed,
        "ladder": [list(r) for r in cfg.ladder],
        "cutoffs": {"K": cfg.K, "M": cfg.M},
        "checks": [r.as_dict() for r in results],
        "passed": not failed,
        "failed": failed,
    }
    _emit(_json(report), out_dir, "check.json")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_spectrum(cfg, out_dir=None):
    from .suite import instance_lift, spectrum_rows
    inst, L = instance_lift(cfg)
    rows = spectrum_rows(L, inst.module)
    buf = io.StringIO()
    buf.write(_header(cfg))
    buf.write("degree,mode,eigenvalue,multiplicity\n")
    for (deg, mode, lam), mult in rows:
        buf.write(f"{deg},{';'.join(str(v) for v in mode)},{lam:.9f},{mult}\n")
    _emit(buf.getvalue(), out_dir, "spectrum.csv")
    return EXIT_OK


def cmd_heat(cfg, times, out_dir=None):
    from .operators import heat_trace
    from .suite import eigenvalues
    ts = np.asarray(times, dtype=float)
    if np.any(ts <= 0):
        raise UsageError("heat-trace times must be positive")
    vals = heat_trace(eigenvalues(cfg), ts)
    buf = io.StringIO()
    buf.write(_header(cfg))
    buf.write("t,trace\n")
    for t, v in zip(ts, vals):
        buf.write(f"{t:.6g},{v:.12e}\n")
    _emit(buf.getvalue(), out_dir, "heat.csv")
    return EXIT_OK


def cmd_norm1(cfg, element, out_dir=None):
    from .clifford import build_clifford
    from .fourier import norm1
    n = cfg.n if cfg.kind == "flat-torus" else 2
    a = parse_element(element, n)
    cl = build_clifford(n)
    Ms = [M for _, M in cfg.ladder]
    vals = [norm1(a, M, cl) for M in Ms]
    change = abs(vals[-1] - vals[-2]) / max(vals[-1], 1e-300) if len(vals) > 1 else 0.0
    report = {
        "element": {str(k): [v.real, v.imag] for k, v in sorted(a.terms().items())},
        "cutoffs": Ms,
        "norm1": ["%.12e" % v for v in vals],
        "relative_change": "%.6e" % change,
        "stable": bool(change < cfg.stability_tol),
    }
    _emit(_json(report), out_dir, "norm1.json")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="gcplift", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--out", help="output directory (default: standard output)")
        sp.add_argument("--ladder", help='truncation ladder, e.g. "3x4,4x6,5x8"')
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tolerance", type=float, help="residual tolerance override")
        return sp

    common(sub.add_parser("check", help="run the invariant suite"))
    common(sub.add_parser("spectrum", help="spectrum of the lifted operator as CSV"))
    h = common(sub.add_parser("heat", help="heat trace of the lifted operator as CSV"))
    h.add_argument("--times", help="comma-separated positive times")
    n1 = common(sub.add_parser("norm1", help="the 1-norm of a base element across the ladder"))
    n1.add_argument("--element", required=True, help='e.g. "(0,0):1, (1,0):0.5-0.5j"')
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        overrides = {"seed": args.seed, "residual_tol": args.tolerance}
        if args.ladder is not None:
            overrides["ladder"] = parse_ladder(args.ladder)
        cfg = load_config(args.config, overrides)
        out_dir = args.out or cfg.out_dir
        if args.command == "check":
            return cmd_check(cfg, out_dir)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out_dir)
        if args.command == "heat":
            times = cfg.heat_times
            if args.times:
                try:
                    times = [float(t) for t in args.times.split(",") if t.strip()]
                except ValueError as exc:
                    raise UsageError(f"cannot parse times {args.times!r}") from exc
            return cmd_heat(cfg, times, out_dir)
        return cmd_norm1(cfg, args.element, out_dir)
    except (ConfigError, UsageError) as exc:
        print(f"gcplift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"gcplift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
