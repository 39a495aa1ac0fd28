"""Command-line entry point: ``pgl <subcommand> [options]``.

Records go to stdout (or --out) as CSV or JSON; progress and diagnostics go
to stderr. Exit codes: 0 ok, 1 counterexample found, 2 usage or capacity
error, 3 numeric verification failed.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import asymptotics as asym
from . import complex_sums as cs
from . import gaps
from . import summation_oracle as so
from . import taylor_polys as tp
from . import weighted_sums as ws
from .errors import CapacityError, DomainError, NumericError
from .sieve import DEFAULT_SEGMENT_SIZE, Sieve, set_default_sieve, write_checkpoints

log = logging.getLogger("pgl")

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    lam: float = 0.5
    c: float = 1.0
    limit: int = 10**10
    segment_size: int = DEFAULT_SEGMENT_SIZE
    tol: float = 1e-10
    fmt: str = "csv"
    out: str = None
    deterministic: bool = False
    threads: int = 1

    @classmethod
    def from_args(cls, args):
        cfg = cls(
            args.command,
            args.lam,
            args.c,
            args.limit,
            args.segment_size,
            args.tol,
            args.format,
            args.out,
            args.deterministic,
            args.threads or os.cpu_count() or 1,
        )
        cfg.validate()
        return cfg

    def validate(self):
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"--lambda must lie in (0, 1), got {self.lam}")
        if not self.c > 0:
            raise DomainError(f"--c must be positive, got {self.c}")
        if self.limit < 2:
            raise DomainError("--limit must be at least 2")
        if self.segment_size < 1024:
            raise DomainError("--segment-size must be at least 1024")
        if not self.tol > 0:
            raise DomainError("--tol must be positive")
        if self.threads < 1:
            raise DomainError("--threads must be positive")

    @property
    def params(self):
        return ws.WeightParams(self.lam, self.c)


# -- output -------------------------------------------------------------------


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _flatten(row):
    """Split complex values into re_/im_ column pairs."""
    out = {}
    for k, v in row.items():
        if isinstance(v, (complex, np.complexfloating)):
            out[f"re_{k}"] = float(v.real)
            out[f"im_{k}"] = float(v.imag)
        else:
            out[k] = _num(v)
    return out


def _csv_cell(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return "" if v is None else str(v)


def _json_value(v):
    if isinstance(v, float):
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.17g}")
    return v


def render(rows, fmt, meta=None):
    rows = [_flatten(r) for r in rows]
    if fmt == "json":
        doc = {"rows": [{k: _json_value(v) for k, v in r.items()} for r in rows]}
        if meta:
            doc.update(meta)
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([_csv_cell(v) for v in r.values()])
    return buf.getvalue()


# -- argument helpers ------------------------------------------------------------


def complex_arg(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def int_arg(text):
    """Integer that also accepts 1e6-style input."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if v != math.floor(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


# -- subcommands ----------------------------------------------------------------


def cmd_sieve(cfg, args, sieve):
    x = args.x or cfg.limit
    pts = [10**k for k in range(1, int(math.log10(x)) + 1) if 10**k <= x] if args.decades else []
    if x not in pts:
        pts.append(x)
    stats = []
    for p in pts:
        log.info("sieving to %d", p)
        stats.append(sieve.stats(p))
    if args.checkpoint_file:
        write_checkpoints(args.checkpoint_file, stats, cfg.segment_size)
    return [
        {"x": s.limit, "pi": s.pi, "theta": s.theta, "chebyshev_ok": s.chebyshev_ok} for s in stats
    ], EXIT_OK


def cmd_theta(cfg, args, sieve):
    if args.x:
        xs = np.asarray(args.x, dtype=np.int64)
    else:
        xs = np.unique(np.floor(np.geomspace(2, args.x_max, args.points)).astype(np.int64))
    th = sieve.theta_many(xs)
    rows = []
    bad = 0
    for x, t in zip(xs, th):
        lim = math.log(4.0) * int(x)
        ok = float(t) <= lim
        bad += not ok
        rows.append({"x": int(x), "theta": float(t), "bound": lim, "ok": ok})
    return rows, EXIT_COUNTEREXAMPLE if bad else EXIT_OK


def _ladder(args):
    if args.x:
        return args.x
    out = []
    for k in range(args.from_exp, args.to_exp + 1):
        out.extend(int(v) for v in np.geomspace(10**k, 10 ** (k + 1), args.per_decade, endpoint=False))
    return out


def cmd_interval_scan(cfg, args, sieve):
    recs = gaps.interval_scan(cfg.lam, _ladder(args), cfg.c, sieve)
    return [r.__dict__ for r in recs], EXIT_OK


def cmd_weighted_sum(cfg, args, sieve):
    if args.sequence == "primes":
        src = ws.PrimeSource(sieve)
    else:
        src = ws.nlogn_source(args.n_max)
    rows = []
    for x in args.x:
        log.info("weighted sum at x=%g", x)
        r = ws.normalized_W(cfg.params, src, x)
        rows.append(
            {
                "sequence": src.name,
                "lambda": cfg.lam,
                "c": cfg.c,
                "x": r.x,
                "ratio": r.ratio,
                "log_W": r.log_W,
                "terms_used": r.terms_used,
                "dropped": r.dropped,
            }
        )
    return rows, EXIT_OK


RS_FUNCTIONS = {
    "one": lambda cfg, x: so.const_one(),
    "log": lambda cfg, x: so.log_fn(),
    "t": lambda cfg, x: so.power_fn(1.0),
    "w": lambda cfg, x: so.scaled_weight_fn(cfg.params, x),
}


def cmd_rs_check(cfg, args, sieve):
    rows = []
    status = EXIT_OK
    for name in args.fn:
        for x in args.x:
            f, fp = RS_FUNCTIONS[name](cfg, x)
            direct = so.direct_sum(f, x, sieve)
            rhs = so.rs_rhs(f, fp, x, sieve)
            rel = abs(direct - rhs) / abs(direct)
            if rel > args.max_rel:
                status = EXIT_NUMERIC
            rows.append({"f": name, "x": float(x), "direct": direct, "rhs": rhs, "rel_err": rel})
    return rows, status


def cmd_epsilon(cfg, args, sieve):
    return [r.__dict__ for r in so.epsilon_profile(args.x, sieve)], EXIT_OK


def cmd_complex_eval(cfg, args, sieve):
    rows = []
    for s in args.s:
        r = cs.evaluate(args.fn, cfg.params, s, cfg.tol, sieve)
        rows.append(
            {
                "tag": r.tag.value,
                "lambda": cfg.lam,
                "c": cfg.c,
                "s": complex(s),
                "val": r.value,
                "tail_bound": r.tail_bound,
                "cutoff": r.cutoff,
            }
        )
    return rows, EXIT_OK


def cmd_identity_check(cfg, args, sieve):
    rows = []
    status = EXIT_OK
    for s in args.s:
        if args.which == "tau-tpp":
            r = cs.identity_tau_Tpp(cfg.params, s, args.h, cfg.tol, sieve)
            row = {
                "identity": args.which,
                "lambda": cfg.lam,
                "s": complex(s),
                "h": args.h,
                "residual": r.residual,
                "residual_half": r.residual_half,
                "ratio": r.ratio,
                "bound": r.bound,
                "cutoff": r.cutoff,
                "ok": r.ok,
            }
        else:
            fn = cs.identity_xi_psi if args.which == "xi-psi" else cs.identity_xi_tau
            r = fn(cfg.params, s, cfg.tol, sieve)
            row = {
                "identity": args.which,
                "lambda": cfg.lam,
                "s": complex(s),
                "residual": r.residual,
                "bound": r.bound,
                "cutoff": r.cutoff,
                "tail": max(r.tails.values()),
                "ok": r.ok,
            }
        if not r.ok:
            status = EXIT_NUMERIC
        rows.append(row)
    return rows, status


def cmd_laplace_check(cfg, args, sieve):
    rows = []
    status = EXIT_OK
    for s in args.s:
        r = cs.laplace_check(cfg.params, s, args.quad_tol, sieve)
        if r.residual > args.max_residual:
            status = EXIT_NUMERIC
        rows.append(
            {
                "lambda": cfg.lam,
                "c": cfg.c,
                "s": complex(s),
                "lhs": r.lhs,
                "rhs": r.rhs,
                "residual": r.residual,
                "x_max": r.x_max,
            }
        )
    return rows, status


def cmd_mellin_check(cfg, args, sieve):
    rows = []
    status = EXIT_OK
    for z in args.z:
        r = cs.mellin_check(cfg.params, z, args.cutoff, sieve)
        if r.residual > args.max_residual:
            status = EXIT_NUMERIC
        rows.append(
            {
                "lambda": cfg.lam,
                "z": r.z,
                "numeric": r.numeric,
                "closed_form": r.closed_form,
                "residual": r.residual,
                "cutoff": r.cutoff,
                "tail_bound": r.tail_bound,
            }
        )
    return rows, status


def cmd_poly(cfg, args, sieve):
    js = [args.j] if args.j is not None else list(range(args.max_j + 1))
    if tp.cache_path() is not None:
        tp.load_cache()
        tp.save_cache(max(js))
    if cfg.fmt == "json":
        return [
            {"j": j, "coefficients": " ".join(tp.format_coefficients(tp.f_poly(j)).split())}
            for j in js
        ], EXIT_OK
    text = "".join(f"{j}: {tp.format_coefficients(tp.f_poly(j))}\n" for j in js)
    return text, EXIT_OK


def cmd_expansion_check(cfg, args, sieve):
    rows = []
    for J in args.J:
        rows.append(
            {
                "p": args.p,
                "s": complex(args.s),
                "lambda": cfg.lam,
                "J": J,
                "residual": tp.expansion_check(args.p, args.s, cfg.lam, J),
            }
        )
    return rows, EXIT_OK


def cmd_lemma_probe(cfg, args, sieve):
    which = args.lemma
    rows = []
    ok = True
    if which in ("3.1", "all"):
        p = asym.lemma31_probe(args.epsilon, cfg.lam)
        ok &= p.strictly_decreasing or args.epsilon == 0
        rows.extend(p.rows())
    if which in ("3.2", "3.3", "all"):
        for p in asym.lemma_integral_probes(args.alpha, cfg.params):
            if which in (p.lemma, "all"):
                ok &= p.strictly_decreasing or args.alpha == 0
                rows.extend(p.rows())
    if which in ("bd", "all"):
        for kind in ("b", "d"):
            for v in asym.TEST_VALUES:
                d = asym.lemma_b_d_window(v, kind)
                ok &= d > 0
                rows.append((kind, f"{kind}={v}", d, d, 0.0, d))
    if which in ("h", "all"):
        r = asym.lemma_h_probes(args.epsilon, cfg.lam)
        ok &= r.ok
        ps = f"epsilon={args.epsilon};lambda={cfg.lam}"
        for x, v in zip(r.x_grid, r.h1):
            rows.append(("h1", ps, x, v, r.bound, r.bound - v))
        edge = args.epsilon ** (1.0 / (1.0 - cfg.lam))
        g2 = np.geomspace(edge, max(1e6, 1e3 * edge), len(r.h2))
        for x, v in zip(g2, r.h2):
            rows.append(("h2", ps, float(x), v, r.bound, v - r.bound))
    keys = ("lemma", "params", "x", "value", "target", "deviation")
    return [dict(zip(keys, r)) for r in rows], EXIT_OK if ok else EXIT_NUMERIC


def cmd_conjecture(cfg, args, sieve):
    names = list(gaps.Conjecture) if args.name == "all" else [gaps.Conjecture(args.name)]
    rows = []
    status = EXIT_OK
    for conj in names:
        kw = {}
        if conj is gaps.Conjecture.LEGENDRE:
            kw["min_primes"] = args.min_primes
        if conj is gaps.Conjecture.BROCARD:
            kw["start"] = args.brocard_start
        log.info("scanning %s", conj.value)
        rep = gaps.run_conjecture(conj, args.bound, sieve, **kw)
        for ce in rep.counterexamples:
            print(f"counterexample {conj.value}: {ce}", file=sys.stderr)
        if rep.counterexamples:
            status = EXIT_COUNTEREXAMPLE
        rows.append(
            {
                "conjecture": conj.value,
                "lo": rep.range_checked[0],
                "hi": rep.range_checked[1],
                "counterexamples": len(rep.counterexamples),
                "min_margin": rep.min_margin,
                "witness": " ".join(str(w) for w in rep.witness),
            }
        )
    return rows, status


def cmd_erdos_hist(cfg, args, sieve):
    h = gaps.erdos_gap_histogram(args.p_max, sieve=sieve)
    return [
        {"bin_lo": float(a), "bin_hi": float(b), "count": int(n)}
        for a, b, n in zip(h.edges[:-1], h.edges[1:], h.counts)
    ], EXIT_OK


def cmd_toy_seq(cfg, args, sieve):
    recs = gaps.toy_sequence_scan(cfg.lam, cfg.c, args.n_max)
    return [r.__dict__ for r in recs], EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--out", help="write records here instead of stdout")
    g.add_argument("--deterministic", action="store_true", help="omit timing metadata")
    g.add_argument("--threads", type=int, default=None, help="sieve worker threads")
    g.add_argument("--lambda", dest="lam", type=float, default=0.5)
    g.add_argument("--c", type=float, default=1.0)
    g.add_argument("--limit", type=int_arg, default=10**10, help="largest sieve value")
    g.add_argument("--segment-size", type=int_arg, default=DEFAULT_SEGMENT_SIZE)
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--quiet", action="store_true", help="no progress messages")

    p = argparse.ArgumentParser(prog="pgl", description="Prime short-interval laboratory.")
    p.add_argument("--version", action="version", version=f"pgl {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help, description=help)
        sp.set_defaults(func=fn)
        return sp

    sp = add("sieve", cmd_sieve, "prime counts and theta at x (and at each power of ten)")
    sp.add_argument("--x", type=int_arg)
    sp.add_argument("--decades", action="store_true")
    sp.add_argument("--checkpoint-file")

    sp = add("theta", cmd_theta, "check theta(x) <= log(4) x")
    sp.add_argument("--x", type=int_arg, nargs="+")
    sp.add_argument("--x-max", type=int_arg, default=10**6)
    sp.add_argument("--points", type=int, default=100)

    sp = add("interval-scan", cmd_interval_scan, "primes in (x, x + x^lambda] against x^lambda/log x")
    sp.add_argument("--x", type=int_arg, nargs="+")
    sp.add_argument("--from-exp", type=int, default=3)
    sp.add_argument("--to-exp", type=int, default=6)
    sp.add_argument("--per-decade", type=int, default=4)

    sp = add("weighted-sum", cmd_weighted_sum, "normalised weighted sum W(x)/exp(c x^(1-lambda))")
    sp.add_argument("--x", type=float, nargs="+", required=True)
    sp.add_argument("--sequence", choices=("primes", "nlogn"), default="primes")
    sp.add_argument("--n-max", type=int_arg, default=10**6)

    sp = add("rs-check", cmd_rs_check, "direct prime sums against the partial-summation identity")
    sp.add_argument("--fn", choices=sorted(RS_FUNCTIONS), nargs="+", default=["one", "log", "t", "w"])
    sp.add_argument("--x", type=float, nargs="+", default=[1e3, 1e4, 1e5])
    sp.add_argument("--max-rel", type=float, default=1e-4)

    sp = add("epsilon", cmd_epsilon, "pi(x) - li(x) and its size relative to sqrt(x) log x")
    sp.add_argument("--x", type=float, nargs="+", default=[1e2, 1e3, 1e4, 1e5, 1e6])

    sp = add("complex-eval", cmd_complex_eval, "evaluate a complex prime sum with a certified tail")
    sp.add_argument("--fn", choices=[t.value for t in cs.Tag], required=True)
    sp.add_argument("--s", type=complex_arg, nargs="+", required=True)

    sp = add("identity-check", cmd_identity_check, "termwise identities between the prime sums")
    sp.add_argument("--which", choices=("xi-psi", "xi-tau", "tau-tpp"), default="xi-psi")
    sp.add_argument("--s", type=complex_arg, nargs="+", required=True)
    sp.add_argument("--h", type=float, default=1e-2)

    sp = add("laplace-check", cmd_laplace_check, "quadrature Laplace transform against Psi")
    sp.add_argument("--s", type=complex_arg, nargs="+", default=[0.5, 1.0, 2.0])
    sp.add_argument("--quad-tol", type=float, default=1e-8)
    sp.add_argument("--max-residual", type=float, default=1e-4)

    sp = add("mellin-check", cmd_mellin_check, "numeric Mellin transform of T against Gamma * Phi")
    sp.add_argument("--z", type=complex_arg, nargs="+", default=[1.0])
    sp.add_argument("--cutoff", type=int_arg, default=cs.MELLIN_CUTOFF)
    sp.add_argument("--max-residual", type=float, default=1e-5)

    sp = add("poly", cmd_poly, "exact rational polynomials f_j")
    sp.add_argument("--j", type=int)
    sp.add_argument("--max-j", type=int, default=8)

    sp = add("expansion-check", cmd_expansion_check, "truncation residual of the f_j expansion")
    sp.add_argument("--p", type=int, default=5)
    sp.add_argument("--s", type=complex_arg, default=0.3 + 0.2j)
    sp.add_argument("--J", type=int, nargs="+", default=[4, 6, 8, 10])

    sp = add("lemma-probe", cmd_lemma_probe, "limit and window probes for the technical lemmas")
    sp.add_argument("--lemma", choices=("3.1", "3.2", "3.3", "bd", "h", "all"), default="all")
    sp.add_argument("--epsilon", type=float, default=1.0)
    sp.add_argument("--alpha", type=float, default=1.0)

    sp = add("conjecture", cmd_conjecture, "scan a prime-gap conjecture for counterexamples")
    sp.add_argument("name", choices=[c.value for c in gaps.Conjecture] + ["all"])
    sp.add_argument("--n-max", "--p-max", dest="bound", type=int_arg, default=None)
    sp.add_argument("--min-primes", type=int, default=2)
    sp.add_argument("--brocard-start", type=int, default=2)

    sp = add("erdos-hist", cmd_erdos_hist, "histogram of (p_{n+1} - p_n)/log p_n")
    sp.add_argument("--p-max", type=int_arg, default=10**6)

    sp = add("toy-seq", cmd_toy_seq, "weighted-sum ratio and gaps of floor(n log n)")
    sp.add_argument("--n-max", type=int_arg, default=10**6)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="[pgl] %(message)s",
        stream=sys.stderr,
    )
    t0 = time.perf_counter()
    try:
        cfg = RunConfig.from_args(args)
        sieve = Sieve(limit=cfg.limit, segment_size=cfg.segment_size, threads=cfg.threads)
        set_default_sieve(sieve)
        result, status = args.func(cfg, args, sieve)
    except (CapacityError, DomainError, ValueError) as e:
        print(f"pgl {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as e:
        print(f"pgl {args.command}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    if isinstance(result, str):
        text = result
    else:
        meta = None
        if not cfg.deterministic:
            meta = {"elapsed_seconds": round(time.perf_counter() - t0, 3), "threads": cfg.threads}
        text = render(result, cfg.fmt, meta)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
