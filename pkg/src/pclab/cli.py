"""Command-line front end: table management, analyses, and plot-ready series.

Exit codes: 0 success, 2 argument/validation error, 3 coverage/resource error
(including missing prerequisites), 4 I/O error.  Every output embeds the
exact configuration used.  The PCLAB_THREADS environment variable caps the
numeric worker threads; reductions use a fixed chunk tree, so outputs are
byte-identical regardless.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _apply_thread_cap() -> None:
    cap = os.environ.get("PCLAB_THREADS")
    if cap:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, cap)


_apply_thread_cap()

import numpy as np  # noqa: E402  (thread cap must precede the import)

from . import __version__  # noqa: E402
from .errors import (CoverageError, GridRangeError, HeightCapError,  # noqa: E402
                     InvalidArgumentError, OutOfRangeError, PclabError,
                     ResourceLimitError, ZeroFileError)

CONFIG_KEYS = {
    "zeros": str, "zeros_format": str, "sieve_limit": int, "out_dir": str,
    "format": str, "cutoff": float, "alpha_step": float, "grid_step": float,
    "log_scale": str, "bins": int, "tol": float,
}
DEFAULTS = {
    "zeros": None, "zeros_format": "plain-ordinates", "sieve_limit": 2_000_000,
    "out_dir": ".", "format": "csv", "cutoff": 200.0, "alpha_step": 0.01,
    "grid_step": 0.01, "log_scale": "effective", "bins": 30, "tol": 1e-9,
}


def load_config_file(path: str) -> dict:
    """Flat key = value file, '#' comments, unknown keys rejected."""
    out = {}
    for lineno, raw in enumerate(open(path, encoding="utf-8"), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise InvalidArgumentError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in text.split("=", 1))
        if key not in CONFIG_KEYS:
            raise InvalidArgumentError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = CONFIG_KEYS[key](value)
    return out


class Session:
    """Resolved configuration plus lazily loaded tables."""

    def __init__(self, args: argparse.Namespace):
        cfg = dict(DEFAULTS)
        if args.config:
            cfg.update(load_config_file(args.config))
        for key in CONFIG_KEYS:
            val = getattr(args, key, None)
            if val is not None:
                cfg[key] = val
        cfg["format"] = cfg["format"].lower()
        if cfg["format"] not in ("csv", "json"):
            raise InvalidArgumentError(f"format must be csv or json, got {cfg['format']!r}")
        self.cfg = cfg
        self.out_dir = Path(cfg["out_dir"])
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._zeros = None
        self._primes = None

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.cfg, sort_keys=True, default=str).encode()).hexdigest()[:16]

    def metadata(self, **extra) -> dict:
        md = {k: v for k, v in self.cfg.items() if v is not None}
        md["tool_version"] = __version__
        md["config_hash"] = self.config_hash()
        md.update(extra)
        return md

    def zero_table(self):
        from . import zeros as zstore
        if self._zeros is None:
            path = self.cfg.get("zeros")
            if not path:
                raise CoverageError(
                    "no zero table configured; run zeros-ingest or zeros-compute first "
                    "and pass --zeros")
            path = Path(path)
            with open(path, "rb") as fh:
                magic = fh.read(8)
            if magic == zstore.CACHE_MAGIC:
                self._zeros = zstore.load_cache(path)
            else:
                self._zeros = zstore.ingest(path, self.cfg["zeros_format"])
        return self._zeros

    def prime_table(self):
        from . import arith
        if self._primes is None:
            self._primes = arith.sieve_build(int(self.cfg["sieve_limit"]))
        return self._primes

    def emit(self, series) -> Path:
        path = series.write(self.out_dir / series.name, self.cfg["format"])
        print(path)
        return path

    def emit_json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / f"{name}.json"
        doc = {"metadata": self.metadata(), **payload}
        path.write_text(json.dumps(doc, sort_keys=True, indent=1, default=float) + "\n",
                        encoding="utf-8")
        print(path)
        return path


def _series(name, columns, rows, md):
    from .series import GridSeries
    return GridSeries(name=name, columns=columns, rows=rows, metadata=md)


# --- subcommand implementations ---------------------------------------------

def cmd_sieve(sess: Session, args) -> None:
    from . import arith
    table = sess.prime_table()
    limit = table.limit
    checkpoints = np.unique(np.geomspace(10, limit, 40).astype(np.int64))
    rows = [(float(n), float(table.psi_cum[n]), float(table.prime_count(n)),
             arith.log_integral(float(n)) if n >= 2 else 0.0)
            for n in checkpoints]
    sess.emit(_series("sieve-summary", ["n", "psi", "pi", "li"], rows,
                      sess.metadata(limit=limit)))


def cmd_zeros_compute(sess: Session, args) -> None:
    from . import zeros as zstore
    from . import zeta
    if args.height <= zeta.FIND_ZEROS_CAP and not args.bulk:
        table = zeta.find_zeros(args.height, tol=sess.cfg["tol"])
    else:
        table = zeta.compute_zero_table(args.height, tol=sess.cfg["tol"])
    out = Path(args.out) if args.out else sess.out_dir / f"zeros_{int(args.height)}.pclb"
    zstore.write_cache(table, out)
    print(out)
    sess.emit_json("zeros-compute-summary", {
        "count": len(table), "t_max": table.t_max, "precision": table.precision,
        "cache": str(out)})


def cmd_zeros_ingest(sess: Session, args) -> None:
    from . import zeros as zstore
    table = zstore.ingest(args.path, sess.cfg["zeros_format"])
    sess.emit_json("zeros-ingest-summary", {
        "count": len(table), "t_max": table.t_max, "source": table.source,
        "cache": str(Path(args.path).with_suffix(Path(args.path).suffix + '.pclb'))})


def cmd_falpha(sess: Session, args) -> None:
    from . import paircorr
    table = sess.zero_table()
    t_ref = args.t or table.t_max
    step = sess.cfg["alpha_step"]
    count = int(round((args.alpha_max - args.alpha_min) / step))
    grid = np.round(args.alpha_min + np.arange(count + 1) * step, 12)
    ser = paircorr.f_alpha(table, t_ref, grid, cutoff=sess.cfg["cutoff"],
                           log_scale=sess.cfg["log_scale"])
    rows = np.column_stack([ser.alphas, ser.values])
    sess.emit(_series("falpha", ["alpha", "F"], rows,
                      sess.metadata(T=t_ref, log_used=ser.log_used,
                                    tail_bound=ser.tail_bound)))


def cmd_pairsum(sess: Session, args) -> None:
    from . import paircorr
    table = sess.zero_table()
    t_ref = args.t or table.t_max
    pair = (paircorr.fejer_pair(args.lam) if args.kernel == "fejer"
            else paircorr.selberg_minorant_pair())
    res = paircorr.pair_sum(table, t_ref, pair, cutoff=sess.cfg["cutoff"],
                            log_scale=sess.cfg["log_scale"],
                            alpha_step=sess.cfg["alpha_step"])
    sess.emit_json("pairsum", {
        "kernel": pair.name, "T": t_ref, "direct": res.direct,
        "transform": res.transform, "normalized": res.normalized,
        "log_used": res.log_used, "tail_bound": res.tail_bound})


def cmd_pcc_hist(sess: Session, args) -> None:
    from . import paircorr
    table = sess.zero_table()
    t_ref = args.t or table.t_max
    hist = paircorr.pcc_histogram(table, t_ref, args.beta_max, sess.cfg["bins"],
                                  log_scale=sess.cfg["log_scale"], weighted=args.weighted)
    cum = hist.cumulative()
    model = paircorr.gue_model(hist.edges[1:])
    rows = np.column_stack([hist.edges[1:], hist.counts, cum, model])
    sess.emit(_series("pcc-hist", ["beta", "count", "cumulative", "gue_cdf"], rows,
                      sess.metadata(T=t_ref, weighted=hist.weighted,
                                    log_used=hist.log_used)))


def cmd_gue_model(sess: Session, args) -> None:
    from . import paircorr
    bins = sess.cfg["bins"] if args.bins is None else args.bins
    beta = np.arange(bins) * (args.beta_max / bins)
    rows = np.column_stack([beta, paircorr.gue_model(beta)])
    sess.emit(_series("gue-model", ["beta", "gue_cdf"], rows,
                      sess.metadata(beta_max=args.beta_max, bins=bins)))


def cmd_small_gap(sess: Session, args) -> None:
    from . import paircorr
    lam = paircorr.small_gap_threshold(args.quad_tol)
    print(f"lambda_star={lam:.6f}")
    sess.emit_json("small-gap", {"lambda_star": lam, "quad_tol": args.quad_tol})


def cmd_lemma1(sess: Session, args) -> None:
    from . import paircorr
    table = sess.zero_table()
    t_ref = args.t or table.t_max
    step = sess.cfg["alpha_step"]
    count = int(round((args.b + 1.0) / step))
    grid = np.round(np.arange(count + 1) * step, 12)
    ser = paircorr.f_alpha(table, t_ref, grid, cutoff=sess.cfg["cutoff"],
                           log_scale=sess.cfg["log_scale"])
    value = paircorr.lemma1_window(ser, args.b)
    sess.emit_json("lemma1", {"B": args.b, "window_integral": value, "bound": 3.0,
                              "holds": value <= 3.0, "T": t_ref})


def cmd_psi_explicit(sess: Session, args) -> None:
    from . import explicit
    ztable = sess.zero_table()
    ptable = sess.prime_table()
    t_cap = args.height or ztable.t_max
    xs = np.linspace(args.x_min, args.x_max, args.count)
    rows = []
    for x in xs:
        rep = explicit.psi_from_zeros(float(x), ztable, t_cap, ptable)
        rows.append((float(x), rep.left.real if isinstance(rep.left, complex) else rep.left,
                     rep.right, rep.residual, rep.truncation_estimate))
    sess.emit(_series("psi-explicit", ["x", "reconstruction", "sieve_psi0",
                                       "residual", "truncation_estimate"], rows,
                      sess.metadata(zero_height=t_cap)))


def cmd_landau(sess: Session, args) -> None:
    from . import explicit
    ztable = sess.zero_table()
    t_cap = args.t or ztable.t_max
    xs = np.arange(args.x_min, args.x_max + 0.5 * args.step, args.step)
    vals = explicit.landau_scan(xs, ztable, t_cap)
    sess.emit(_series("landau", ["x", "lambda_hat"], np.column_stack([xs, vals]),
                      sess.metadata(T=t_cap)))


def cmd_montgomery(sess: Session, args) -> None:
    from . import explicit
    rep = explicit.montgomery_formula(args.x, args.t, sess.zero_table(),
                                      sess.prime_table())
    sess.emit_json("montgomery", {
        "x": args.x, "t": args.t,
        "left_re": rep.left.real, "left_im": rep.left.imag,
        "right_re": rep.right.real, "right_im": rep.right.imag,
        "residual": rep.residual, "truncation_estimate": rep.truncation_estimate,
        "zero_height": rep.zero_height, "prime_cutoff": rep.prime_cutoff})


def cmd_s_of_t(sess: Session, args) -> None:
    from . import zeros as zstore
    table = sess.zero_table()
    curve = zstore.s_curve(table, args.t_min, args.t_max, sess.cfg["grid_step"])
    sess.emit(_series("s-of-t", ["t", "S"], np.column_stack([curve.grid, curve.values]),
                      sess.metadata()))


def cmd_fujii(sess: Session, args) -> None:
    from . import zeros as zstore
    table = sess.zero_table()
    rows = []
    for h in args.h:
        res = zstore.fujii_variance(args.t, h, table, sess.cfg["grid_step"])
        rows.append((h, res.value, res.model if res.model else math.nan,
                     res.ratio if res.ratio else math.nan))
    sess.emit(_series("fujii", ["h", "variance", "model", "ratio"], rows,
                      sess.metadata(T=args.t)))


def cmd_s_moments(sess: Session, args) -> None:
    from . import zeros as zstore
    table = sess.zero_table()
    rows = []
    for k in args.k:
        res = zstore.s_moment(args.t, k, table, sess.cfg["grid_step"])
        rows.append((k, res.value, res.model, res.ratio))
    sess.emit(_series("s-moments", ["k", "moment", "model", "ratio"], rows,
                      sess.metadata(T=args.t)))


def cmd_sign_changes(sess: Session, args) -> None:
    from . import zeros as zstore
    table = sess.zero_table()
    count = zstore.sign_changes(args.t, table)
    model = args.t * math.log(args.t) / math.sqrt(math.pi * math.log(math.log(args.t)))
    sess.emit_json("sign-changes", {"T": args.t, "sign_changes": count,
                                    "gaussian_model": model, "ratio": count / model})


def cmd_selberg_approx(sess: Session, args) -> None:
    from . import explicit
    ptable = sess.prime_table()
    ts = np.arange(args.t_min, args.t_max + 0.5 * args.step, args.step)
    vals = explicit.selberg_s_curve(ts, args.x, ptable)
    columns = ["t", "approx"]
    data = [ts, vals]
    if sess.cfg.get("zeros"):
        from . import zeros as zstore
        table = sess.zero_table()
        data.append(table.count_below(ts, "right") - zstore.smooth_main_term(ts))
        columns.append("counted_S")
    sess.emit(_series("selberg-approx", columns, np.column_stack(data),
                      sess.metadata(x=args.x)))


def cmd_logderiv_check(sess: Session, args) -> None:
    from . import explicit
    rep = explicit.smoothed_logderiv_check(complex(args.sigma, args.t), args.x,
                                           sess.zero_table(), sess.prime_table())
    sess.emit_json("logderiv-check", {
        "sigma": args.sigma, "t": args.t, "x": args.x,
        "left_re": rep.left.real, "left_im": rep.left.imag,
        "right_re": rep.right.real, "right_im": rep.right.imag,
        "residual": rep.residual, "truncation_estimate": rep.truncation_estimate})


def cmd_twin(sess: Session, args) -> None:
    from . import arith
    table = sess.prime_table()
    rows = []
    for k in args.k:
        res = arith.twin_sum(args.n, k, table)
        rows.append((k, res.value, res.model, res.ratio))
    sess.emit(_series("twin", ["k", "sum", "model", "ratio"], rows,
                      sess.metadata(N=args.n)))


def cmd_interval_moment(sess: Session, args) -> None:
    from . import arith
    table = sess.prime_table()
    if args.delta is not None:
        res = arith.interval_second_moment(args.x, args.delta, table)
        kind = "relative"
        width = args.delta
    else:
        res = arith.fixed_interval_second_moment(args.x, args.h, table)
        kind = "fixed"
        width = args.h
    sess.emit_json("interval-moment", {
        "kind": kind, "X": args.x, "width": width, "value": res.value,
        "model": res.model, "ratio": res.ratio, "degenerate": res.degenerate})


def cmd_gaps(sess: Session, args) -> None:
    from . import arith
    rep = arith.prime_gap_scan(sess.prime_table())
    rows = [(r.p, r.p_next, r.gap, r.ratio_sqrt_log2, r.ratio_sqrt_log, r.ratio_log2)
            for r in rep.records]
    sess.emit(_series("gaps", ["p", "p_next", "gap", "ratio_sqrt_log2",
                               "ratio_sqrt_log", "ratio_log2"], rows,
                      sess.metadata(max_ratio_sqrt_log2=rep.max_ratio_sqrt_log2,
                                    max_ratio_sqrt_log=rep.max_ratio_sqrt_log,
                                    max_ratio_log2=rep.max_ratio_log2)))


def cmd_report(sess: Session, args) -> None:
    from . import report as rpt
    ctx = rpt.DeskContext(zero_table=sess.zero_table(), prime_table=sess.prime_table())
    ids = [int(v) for v in args.ids.split(",")] if args.ids else None
    results = rpt.run_all(ctx, ids)
    for res in results:
        print(f"[{res.status.upper():8s}] {res.cid:2d} {res.name}")
    payload = {
        "criteria": [{"id": r.cid, "name": r.name, "status": r.status,
                      "details": r.details} for r in results],
        "pass_count": sum(r.status == "pass" for r in results),
        "fail_count": sum(r.status == "fail" for r in results),
        "reported_count": sum(r.status == "reported" for r in results),
    }
    sess.emit_json("report", payload)
    if payload["fail_count"]:
        raise SystemExit(1)


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pclab",
        description="zeta-zero pair correlation and explicit-formula laboratory")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--format", dest="format", choices=["csv", "json"])
    parser.add_argument("--zeros", dest="zeros", help="zero table (text or .pclb cache)")
    parser.add_argument("--zeros-format", dest="zeros_format",
                        choices=["plain-ordinates", "offset-block"])
    parser.add_argument("--sieve-limit", dest="sieve_limit", type=int)
    parser.add_argument("--cutoff", dest="cutoff", type=float)
    parser.add_argument("--alpha-step", dest="alpha_step", type=float)
    parser.add_argument("--grid-step", dest="grid_step", type=float)
    parser.add_argument("--log-scale", dest="log_scale", choices=["effective", "literal"])
    parser.add_argument("--bins", dest="bins", type=int)
    parser.add_argument("--tol", dest="tol", type=float)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="build the sieve and emit summary checkpoints")
    p.set_defaults(fn=cmd_sieve)

    p = sub.add_parser("zeros-compute", help="compute a zero table and cache it")
    p.add_argument("--height", type=float, required=True)
    p.add_argument("--bulk", action="store_true",
                   help="force the bulk Riemann-Siegel builder below the find_zeros cap")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_zeros_compute)

    p = sub.add_parser("zeros-ingest", help="validate a zero file and write its cache")
    p.add_argument("path")
    p.set_defaults(fn=cmd_zeros_ingest)

    p = sub.add_parser("falpha", help="form factor F(alpha) series")
    p.add_argument("--t", type=float)
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=3.0)
    p.set_defaults(fn=cmd_falpha)

    p = sub.add_parser("pairsum", help="kernel pair sum, both routes")
    p.add_argument("--t", type=float)
    p.add_argument("--kernel", choices=["fejer", "selberg"], default="fejer")
    p.add_argument("--lam", type=float, default=1.0)
    p.set_defaults(fn=cmd_pairsum)

    p = sub.add_parser("pcc-hist", help="pair-correlation histogram vs GUE")
    p.add_argument("--t", type=float)
    p.add_argument("--beta-max", type=float, default=3.0)
    p.add_argument("--weighted", action="store_true")
    p.set_defaults(fn=cmd_pcc_hist)

    p = sub.add_parser("gue-model", help="GUE cumulative model series")
    p.add_argument("--beta-max", type=float, default=3.0)
    p.add_argument("--bins", type=int, default=None)
    p.set_defaults(fn=cmd_gue_model)

    p = sub.add_parser("small-gap", help="small-gap threshold constant")
    p.add_argument("--quad-tol", type=float, default=1e-10)
    p.set_defaults(fn=cmd_small_gap)

    p = sub.add_parser("lemma1", help="form-factor unit-window integral")
    p.add_argument("--t", type=float)
    p.add_argument("--b", type=float, default=0.0)
    p.set_defaults(fn=cmd_lemma1)

    p = sub.add_parser("psi-explicit", help="psi reconstruction from zeros")
    p.add_argument("--x-min", type=float, default=2.5)
    p.add_argument("--x-max", type=float, default=500.5)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--height", type=float)
    p.set_defaults(fn=cmd_psi_explicit)

    p = sub.add_parser("landau", help="Landau prime-detecting scan")
    p.add_argument("--t", type=float)
    p.add_argument("--x-min", type=float, default=1.5)
    p.add_argument("--x-max", type=float, default=20.0)
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(fn=cmd_landau)

    p = sub.add_parser("montgomery", help="Montgomery two-sided formula at (x, t)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(fn=cmd_montgomery)

    p = sub.add_parser("s-of-t", help="S(t) curve")
    p.add_argument("--t-min", type=float, default=20.0)
    p.add_argument("--t-max", type=float, required=True)
    p.set_defaults(fn=cmd_s_of_t)

    p = sub.add_parser("fujii", help="Fujii variance R(T, h)")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--h", type=float, nargs="+", required=True)
    p.set_defaults(fn=cmd_fujii)

    p = sub.add_parser("s-moments", help="moments of S(t)")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k", type=int, nargs="+", default=[1])
    p.set_defaults(fn=cmd_s_moments)

    p = sub.add_parser("sign-changes", help="sign changes of S on [0, T]")
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(fn=cmd_sign_changes)

    p = sub.add_parser("selberg-approx", help="Selberg S(t) approximation curve")
    p.add_argument("--x", type=float, default=20.0)
    p.add_argument("--t-min", type=float, default=50.0)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--step", type=float, default=0.5)
    p.set_defaults(fn=cmd_selberg_approx)

    p = sub.add_parser("logderiv-check", help="smoothed zeta'/zeta identity check")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", type=float, default=10.0)
    p.set_defaults(fn=cmd_logderiv_check)

    p = sub.add_parser("twin", help="twin correlation sums")
    p.add_argument("--n", type=int, default=10 ** 6)
    p.add_argument("--k", type=int, nargs="+", default=[2, 4, 6])
    p.set_defaults(fn=cmd_twin)

    p = sub.add_parser("interval-moment", help="second moment of psi in short intervals")
    p.add_argument("--x", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--delta", type=float)
    group.add_argument("--h", type=float)
    p.set_defaults(fn=cmd_interval_moment)

    p = sub.add_parser("gaps", help="prime gap scan")
    p.set_defaults(fn=cmd_gaps)

    p = sub.add_parser("report", help="run acceptance criteria, emit consolidated JSON")
    p.add_argument("--ids", help="comma-separated criterion ids (default: all)")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        sess = Session(args)
        args.fn(sess, args)
        return 0
    except (InvalidArgumentError, ZeroFileError, GridRangeError) as exc:
        line = getattr(exc, "line", None)
        loc = f" (line {line})" if line is not None else ""
        print(f"error: {exc}{loc}", file=sys.stderr)
        return 2
    except (CoverageError, OutOfRangeError, ResourceLimitError, HeightCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except PclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
