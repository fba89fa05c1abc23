"""Command-line front-end.

Subcommands: constants, count, dist, moments, sample, mgf, verify.
Structured results go to JSON (with a meta block recording version, seed,
precision, and wall time); tabular data goes to CSV.  Files are written
atomically (temp file + rename).  Exit codes: 0 success, 1 domain errors
(no root, precision unattainable), 2 usage, 3 resource caps.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

from mpmath import mp, mpf

from . import __version__, acceptance, analysis, counter, sampler, spectral
from .counter import Centering, WidthPolicy
from .dirichlet import PrecisionContext
from .errors import DomainError, ResourceCapError, UsageError
from .factorset import FactorSetSpec, detect_periodicity, kappa, parse_spec_string
from .sampler import RNG_ALGORITHM

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


@dataclass
class RunConfig:
    """One resolved invocation."""

    command: str
    spec: FactorSetSpec | None = None
    N: int = 0
    N_list: list[int] = field(default_factory=list)
    digits: int = 30
    K: int = 4
    seed: int = 0
    count: int = 1000
    fmt: str = "json"
    out: str | None = None
    width: WidthPolicy = WidthPolicy.AUTO
    centering: Centering = Centering.MU_LOG_n
    z_values: list[float] = field(default_factory=list)
    gof: bool = False
    cache: str | None = None
    em_cutoff: int | None = None
    euler_product_bound: int | None = None
    suite: str = "full"
    only: list[int] | None = None

    def __post_init__(self):
        if self.N and self.N < 1:
            raise UsageError("N must be >= 1")
        if self.digits < 20:
            raise UsageError("digits must be >= 20")
        if not 0 <= self.K <= 8:
            raise UsageError("moment order K must be in 0..8")

    def precision(self, **overrides) -> PrecisionContext:
        kw = dict(
            working_digits=self.digits + 10,
            target_digits=self.digits,
            em_cutoff=self.em_cutoff,
            euler_product_bound=self.euler_product_bound,
        )
        kw.update(overrides)
        return PrecisionContext(**kw)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="factoria",
        description="Exact counting, sampling and limit diagnostics for ordered factorizations.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_set=True):
        if with_set:
            sp.add_argument("--set", required=True, metavar="SPEC",
                            help="all | primes | squarefree | totient | powers:<d> | "
                                 "explicit:<q1>,<q2>,... | weighted:<q>=<w>,...")
        sp.add_argument("--digits", type=int, default=30)
        sp.add_argument("--em-cutoff", type=int, default=None)
        sp.add_argument("--euler-product-bound", type=int, default=None)
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("constants", help="growth exponent and limit-law constants")
    common(sp)

    sp = sub.add_parser("count", help="exact counts a(n), A(N), per-length totals")
    common(sp)
    sp.add_argument("--max", type=int, required=True, dest="N")
    sp.add_argument("--format", choices=("csv", "json"), default="json")
    sp.add_argument("--width", choices=[w.value for w in WidthPolicy], default="auto")
    sp.add_argument("--cache", default=None, help="write per-n counts in the binary record format")

    sp = sub.add_parser("dist", help="exact factor-count law and normal distances")
    common(sp)
    sp.add_argument("--max", type=int, required=True, dest="N")
    sp.add_argument("--kmax", type=int, default=4)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("moments", help="centered power sums vs predictions")
    common(sp)
    sp.add_argument("--max", type=int, required=True, dest="N")
    sp.add_argument("--kmax", type=int, default=4)
    sp.add_argument("--centering", choices=[c.value for c in Centering], default="mulogn")

    sp = sub.add_parser("sample", help="exact uniform random factorizations")
    common(sp)
    sp.add_argument("--max", type=int, required=True, dest="N")
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--gof", action="store_true", help="append a chi-square report as JSON")

    sp = sub.add_parser("mgf", help="exact vs predicted moment generating function")
    common(sp)
    sp.add_argument("--max", type=int, required=True, dest="N")
    sp.add_argument("-z", "--z-values", default="0", help="comma-separated real z values")

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--suite", choices=("quick", "full"), default="full")
    sp.add_argument("--only", default=None, help="comma-separated criterion ids")
    sp.add_argument("--out", default=None, help="also write results as JSON")
    return p


def parse_args(argv: list[str]) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command)
    if ns.command != "verify":
        cfg.spec = parse_spec_string(ns.set)
        cfg.digits = ns.digits
        cfg.em_cutoff = ns.em_cutoff
        cfg.euler_product_bound = ns.euler_product_bound
    cfg.out = ns.out
    if ns.command in ("count", "dist", "moments", "sample", "mgf"):
        cfg.N = ns.N
    if ns.command == "count":
        cfg.fmt = ns.format
        cfg.width = WidthPolicy(ns.width)
        cfg.cache = ns.cache
    if ns.command == "dist":
        cfg.fmt = ns.format
        cfg.K = ns.kmax
    if ns.command == "moments":
        cfg.fmt = "csv"
        cfg.K = ns.kmax
        cfg.centering = Centering(ns.centering)
    if ns.command == "sample":
        cfg.fmt = "csv"
        cfg.count = ns.count
        cfg.seed = ns.seed
        cfg.gof = ns.gof
    if ns.command == "mgf":
        cfg.fmt = "csv"
        try:
            cfg.z_values = [float(z) for z in ns.z_values.split(",")]
        except ValueError:
            raise UsageError(f"malformed z list {ns.z_values!r}") from None
    if ns.command == "verify":
        cfg.suite = ns.suite
        if ns.only:
            try:
                cfg.only = [int(x) for x in ns.only.split(",")]
            except ValueError:
                raise UsageError(f"malformed criterion list {ns.only!r}") from None
    cfg.__post_init__()
    return cfg


# -- output helpers -----------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".factoria-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _deliver(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        _atomic_write(cfg.out, text)
    else:
        sys.stdout.write(text)


def _meta(cfg: RunConfig, t0: float, seed: int | None = None) -> dict:
    meta = {
        "version": __version__,
        "command": cfg.command,
        "digits": cfg.digits,
        "wall_time_s": round(time.time() - t0, 3),
        "threads": acceptance.thread_cap(),
    }
    if seed is not None:
        meta["seed"] = seed
        meta["rng"] = RNG_ALGORITHM
    return meta


def emit_plot_data(series) -> str:
    """Tidy long-format CSV `x,y,series` from (x, y, name) triples."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["x", "y", "series"])
    for x, y, name in series:
        w.writerow([x, y, name])
    return buf.getvalue()


# -- subcommand bodies ---------------------------------------------------------


def _cmd_constants(cfg: RunConfig) -> int:
    t0 = time.time()
    ctx = cfg.precision()
    app = detect_periodicity(cfg.spec)
    c = spectral.spectral_constants(cfg.spec, ctx)
    digits = min(cfg.digits, c.certified_digits())
    k = kappa(cfg.spec)
    doc = {
        "family": cfg.spec.spec_string(),
        "kappa": k if math.isfinite(k) else "-inf",
        "rho": mp.nstr(c.rho, digits + 2),
        "mu": mp.nstr(c.mu, digits + 2),
        "sigma2": mp.nstr(c.sigma2, digits + 2),
        "R": mp.nstr(c.R, digits + 2),
        "certified_digits": c.certified_digits(),
        "theorem_applies": app.theorem_applies,
        "applicability": app.reason.value,
        "meta": _meta(cfg, t0),
    }
    _deliver(cfg, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_count(cfg: RunConfig) -> int:
    t0 = time.time()
    counts = counter.count_layers(cfg.spec, cfg.N, keep_per_n=True, width=cfg.width)
    if cfg.cache:
        counter.save_counts_cache(cfg.cache, [int(x) for x in counts.per_n])
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["n", "a_n"])
        for n in range(1, cfg.N + 1):
            w.writerow([n, int(counts.per_n[n])])
        _deliver(cfg, buf.getvalue())
    else:
        doc = {
            "family": cfg.spec.spec_string(),
            "N": cfg.N,
            "A_N": counts.A_N,
            "T": list(counts.T),
            "meta": _meta(cfg, t0),
        }
        _deliver(cfg, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _constants_or_none(cfg: RunConfig):
    from .errors import NoRootError

    try:
        return spectral.spectral_constants(cfg.spec, cfg.precision())
    except NoRootError:
        return None


def _cmd_dist(cfg: RunConfig) -> int:
    t0 = time.time()
    counts = counter.count_layers(cfg.spec, cfg.N)
    c = _constants_or_none(cfg)
    s = analysis.summarize_distribution(counts, c, K=cfg.K)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["m", "mass"])
        for m, mass in enumerate(s.masses):
            w.writerow([m, float(mass)])
        _deliver(cfg, buf.getvalue())
    else:
        doc = {
            "family": cfg.spec.spec_string(),
            "N": cfg.N,
            "A_N": s.A_N,
            "masses": [str(x) for x in s.masses],
            "mean": s.mean,
            "variance": s.variance,
            "standardized_central_moments": list(s.standardized_central_moments),
            "paper_standardized_moments": list(s.paper_standardized_moments),
            "sup_cdf_distance": s.sup_cdf_distance,
            "tv_distance": s.tv_distance,
            "meta": _meta(cfg, t0),
        }
        _deliver(cfg, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_moments(cfg: RunConfig) -> int:
    c = spectral.spectral_constants(cfg.spec, cfg.precision())
    sums = counter.centered_sums(cfg.spec, cfg.N, cfg.K, cfg.centering, c)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["family", "N", "k", "centering", "exact", "prediction", "ratio"])
    for k in range(cfg.K + 1):
        r = analysis.moment_report(cfg.spec, cfg.N, k, cfg.centering, c, sums)
        w.writerow([
            cfg.spec.spec_string(), cfg.N, k, cfg.centering.value,
            repr(r.exact_sum), repr(r.prediction),
            "" if r.ratio is None else repr(r.ratio),
        ])
    _deliver(cfg, buf.getvalue())
    return EXIT_OK


def _cmd_sample(cfg: RunConfig) -> int:
    t0 = time.time()
    smp = sampler.FactorizationSampler(cfg.spec, cfg.N, seed=cfg.seed)
    records = smp.sample_many(cfg.count)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["m", "product", "factors"])
    for r in records:
        w.writerow([r.m, r.product, "·".join(str(q) for q in r.factors)])
    _deliver(cfg, buf.getvalue())
    if cfg.gof:
        counts = counter.count_layers(cfg.spec, cfg.N)
        try:
            rep = sampler.chi_square_gof(sampler.empirical_distribution(records), counts.masses())
        except ValueError as exc:
            raise UsageError(f"goodness of fit needs more samples: {exc}") from None
        doc = {
            "statistic": rep.statistic,
            "p_value": rep.p_value,
            "dof": rep.dof,
            "bins": rep.bins,
            "meta": _meta(cfg, t0, seed=cfg.seed),
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_mgf(cfg: RunConfig) -> int:
    ctx = cfg.precision()
    c = spectral.spectral_constants(cfg.spec, ctx)
    counts = counter.count_layers(cfg.spec, cfg.N)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["z", "exact", "prediction", "ratio"])
    with mp.workdps(ctx.dps):
        for z in cfg.z_values:
            exact = float(
                sum(mpf(t) * mp.exp(m * z) for m, t in enumerate(counts.T)) / counts.A_N
            )
            pred = float(spectral.mgf_prediction(cfg.spec, z, cfg.N, ctx))
            w.writerow([z, repr(exact), repr(pred), repr(exact / pred)])
    _deliver(cfg, buf.getvalue())
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    t0 = time.time()
    results = acceptance.run_suite(cfg.suite, cfg.only)
    for r in results:
        print(r.line())
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed in {time.time() - t0:.1f}s")
    if cfg.out:
        doc = {
            "suite": cfg.suite,
            "results": [
                {
                    "id": r.cid,
                    "name": r.name,
                    "passed": r.passed,
                    "details": r.details,
                    "elapsed_s": round(r.elapsed, 2),
                }
                for r in results
            ],
            "meta": {"version": __version__, "wall_time_s": round(time.time() - t0, 1)},
        }
        _atomic_write(cfg.out, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if n_pass == len(results) else EXIT_DOMAIN


_DISPATCH = {
    "constants": _cmd_constants,
    "count": _cmd_count,
    "dist": _cmd_dist,
    "moments": _cmd_moments,
    "sample": _cmd_sample,
    "mgf": _cmd_mgf,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig) -> int:
    try:
        return _DISPATCH[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except Exception as exc:  # PrecisionUnattainable and friends
        from .errors import FactoriaError

        if isinstance(exc, FactoriaError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DOMAIN
        raise


def main(argv: list[str] | None = None) -> int:
    argv = argv if argv is not None else sys.argv[1:]
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
