"""Command-line driver.

Exit codes: 0 on success/pass, 1 on any audit failure, 2 on config errors.
Thread count comes from --threads or JETFORGE_THREADS; results are
independent of it because shard subtotals combine by exact addition.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from . import counting, measure, slices, subreg
from .counting import CountQuery, CountRecord, combine_records, count_sharded, fit_dimension, run_query
from .errors import BadConfig, ChevalabError
from .field import field_make, trunc_make
from .matrices import CharCoeffs
from .reporting import Report, atomic_write_text, emit, load_jsonl


@dataclass
class RunConfig:
    subcommand: str
    n: int = 2
    ell: int = 2
    k: int = 1
    m: Optional[int] = None
    level: Optional[int] = None
    target: Optional[str] = None
    x: Optional[str] = None
    i: Optional[int] = None
    a: Optional[int] = None
    partition: Optional[str] = None
    kind: str = "L"
    shards: int = 1
    shard_id: Optional[int] = None
    checkpoint: Optional[str] = None
    out: Optional[str] = None
    fmt: str = "json"
    seed: int = 0
    samples: int = 1000
    limit: int = 3
    poly: Optional[str] = None
    threads: int = 0
    inputs: Optional[str] = None

    def thread_count(self) -> int:
        if self.threads > 0:
            return self.threads
        env = os.environ.get("JETFORGE_THREADS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise BadConfig(f"bad JETFORGE_THREADS value {env!r}")
        return os.cpu_count() or 1


def _parse_coeffs(text: str, ctx) -> tuple:
    # "0;1|1;0" -> one series per c_i, coefficients of t^j separated by ';'
    out = []
    for part in text.split("|"):
        out.append(ctx.make([int(c) for c in part.split(";")]))
    return tuple(out)


def _frac_str(f: Fraction) -> str:
    return f"{float(f)} (={f.numerator}/{f.denominator})"


# --------------------------------------------------------------------------
# subcommand handlers
# --------------------------------------------------------------------------

def _run_count(cfg: RunConfig) -> Report:
    if cfg.m is None or cfg.target is None:
        raise BadConfig("count needs --m and --target")
    ctx = trunc_make(field_make(cfg.ell, cfg.k), cfg.m)
    x = _parse_coeffs(cfg.x, ctx) if cfg.x else None
    query = CountQuery(cfg.n, cfg.ell, cfg.k, cfg.m, cfg.target, x=x, i=cfg.i)
    t0 = time.monotonic()
    if cfg.shards > 1 and cfg.shard_id is None:
        with ThreadPoolExecutor(max_workers=cfg.thread_count()) as pool:
            futures = [pool.submit(count_sharded, query, cfg.shards, j, cfg.checkpoint and f"{cfg.checkpoint}.{j}")
                       for j in range(cfg.shards)]
            record = combine_records([f.result() for f in futures])
    elif cfg.shard_id is not None:
        record = count_sharded(query, cfg.shards, cfg.shard_id, cfg.checkpoint)
    else:
        record = run_query(query)
    if cfg.out:
        emit([record], cfg.fmt, cfg.out)
    anchors = {"nilcone": "Thm A", "fiber": "Thm B", "gi": "Thm C", "fibertable": "Thm B"}
    return Report("count", anchors[cfg.target],
                  inputs=query.target_dict() | {"n": cfg.n, "ell": cfg.ell, "k": cfg.k, "m": cfg.m},
                  outputs={"count": str(record.count)},
                  wall_ms=int((time.monotonic() - t0) * 1000))


def _run_fit_dim(cfg: RunConfig) -> Report:
    if not cfg.inputs:
        raise BadConfig("fit-dim needs --in records.jsonl")
    records = load_jsonl(cfg.inputs)
    fit = fit_dimension(records)
    outputs = {
        "entries": fit.entries,
        "slopes": {str(m): float(s) for m, s in fit.slopes.items()},
    }
    if cfg.out:
        atomic_write_text(cfg.out, json.dumps(outputs, sort_keys=True) + "\n")
    return Report("fit-dim", "Thm A", {"records": len(records)}, outputs)


def _run_density(cfg: RunConfig) -> Report:
    M = cfg.level or 1
    field = field_make(cfg.ell, cfg.k)
    profile = measure.density_profile(cfg.n, field, M)
    summary = measure.profile_summary(profile)
    if cfg.out:
        if cfg.fmt == "csv":
            measure.profile_to_csv(profile, cfg.out)
        else:
            measure.summary_to_json(summary, cfg.out)
    verdict = {"mass_is_one": profile.mass() == 1}
    return Report("density", "Thm E", {"n": cfg.n, "ell": cfg.ell, "k": cfg.k, "M": M},
                  summary, verdict)


def _run_anfrs(cfg: RunConfig) -> Report:
    if cfg.a is None:
        raise BadConfig("anfrs needs --a")
    field = field_make(cfg.ell, cfg.k)
    ratio = measure.anfrs_ratio(cfg.n, field, cfg.a, cfg.level)
    return Report("anfrs", "Thm 6.3",
                  {"n": cfg.n, "ell": cfg.ell, "k": cfg.k, "a": cfg.a},
                  {"ratio": _frac_str(ratio)})


def _run_slice_audit(cfg: RunConfig) -> Report:
    if not cfg.partition:
        raise BadConfig("slice-audit needs --partition")
    partition = slices.Partition.parse(cfg.partition)
    if partition.n != cfg.n:
        raise BadConfig(f"partition sums to {partition.n}, not n={cfg.n}")
    field = field_make(cfg.ell, cfg.k)
    rep = slices.weight_report(partition, cfg.kind)
    verdicts = {
        "transversality": slices.audit_transversality(partition, field),
        "equivariance": slices.audit_equivariance(partition, cfg.kind, field,
                                                  cfg.samples, cfg.seed),
        "positivity": rep.all_positive,
        "exponent_sum_formula": slices.exponent_sum(partition, cfg.kind) == rep.total,
    }
    if cfg.kind == "M":
        verdicts["threshold"] = slices.subregular_threshold(partition)["threshold_ok"]
    outputs = rep.to_dict()
    if cfg.out:
        atomic_write_text(cfg.out, json.dumps(outputs, sort_keys=True) + "\n")
    return Report("slice-audit", "Lemma 6.5", {"partition": cfg.partition, "kind": cfg.kind,
                                               "ell": cfg.ell, "k": cfg.k},
                  outputs, verdicts)


def _run_subreg(cfg: RunConfig) -> Report:
    M = cfg.level or 2
    field = field_make(cfg.ell, cfg.k)
    den = subreg.subreg_slice_density(cfg.n, field, M)
    bound = Fraction(cfg.n, cfg.ell) + 1
    verdicts = {
        "mass_is_one": den.mass() == 1,
        "dual_path_equal": den.dual_path_equal(),
        "sup_bounded": den.sup() <= bound,
        "m1_identity": subreg.m1_identity_check(cfg.n, field, cfg.samples, cfg.seed),
    }
    outputs = {"mass": str(den.mass()), "sup": _frac_str(den.sup()), "bound": str(bound)}
    return Report("subreg", "Thm E step 4", {"n": cfg.n, "ell": cfg.ell, "M": M},
                  outputs, verdicts)


def _run_insep_probe(cfg: RunConfig) -> Report:
    field = field_make(cfg.ell, cfg.k)
    trace = measure.insep_probe(field, cfg.limit)
    outputs = {
        "note": "exploratory trace, no pass/fail verdict",
        "trace": [{"M": p.M, "count": str(p.count), "density": str(p.density)}
                  for p in trace],
    }
    if cfg.out:
        atomic_write_text(cfg.out, json.dumps(outputs, sort_keys=True) + "\n")
    return Report("insep-probe", "Conj 1.6", {"ell": cfg.ell, "limit": cfg.limit}, outputs)


def _run_hist_mult(cfg: RunConfig) -> Report:
    M = cfg.level if cfg.level is not None else 3
    field = field_make(cfg.ell, cfg.k)
    hist = subreg.mult_pushforward_hist(field, M)
    verdicts = {
        f"bucket_{r}": hist.buckets[r] == subreg.closed_form_bucket(field, r)
        for r in range(M)
    }
    verdicts["masses_sum_to_one"] = hist.total() == 1
    outputs = {
        "buckets": {str(r): str(v) for r, v in hist.buckets.items()},
        "tail": str(hist.tail),
    }
    return Report("hist-mult", "Lemma 13.8", {"ell": cfg.ell, "k": cfg.k, "M": M},
                  outputs, verdicts)


def _run_val_int(cfg: RunConfig) -> Report:
    if not cfg.poly:
        raise BadConfig("val-int needs --poly (low-degree-first field coefficients)")
    M = cfg.level if cfg.level is not None else 2
    field = field_make(cfg.ell, cfg.k)
    ctx = trunc_make(field, M)
    coeffs = [ctx.make([int(c)]) for c in cfg.poly.split(",")]
    value = subreg.val_integral(coeffs, field, M)
    deg = len(coeffs) - 1
    bound = subreg.val_integral_bound(deg, field, M)
    verdicts = {"bounded": value <= bound}
    return Report("val-int", "Lemma 13.6",
                  {"poly": cfg.poly, "ell": cfg.ell, "M": M},
                  {"integral": _frac_str(value), "bound": str(bound)}, verdicts)


_HANDLERS = {
    "count": _run_count,
    "fit-dim": _run_fit_dim,
    "density": _run_density,
    "anfrs": _run_anfrs,
    "slice-audit": _run_slice_audit,
    "subreg": _run_subreg,
    "insep-probe": _run_insep_probe,
    "hist-mult": _run_hist_mult,
    "val-int": _run_val_int,
}


def run(cfg: RunConfig) -> Report:
    if cfg.subcommand not in _HANDLERS:
        raise BadConfig(f"unknown subcommand {cfg.subcommand!r}")
    return _HANDLERS[cfg.subcommand](cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chevalab",
        description="Exact jet counts and pushforward densities of the "
                    "characteristic-polynomial map over truncated local rings.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--ell", type=int, default=2)
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--threads", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")

    p = sub.add_parser("count", help="exact jet-scheme point counts")
    common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--target", choices=["nilcone", "fiber", "gi"], required=True)
    p.add_argument("--x", help="fiber coefficients, e.g. '0;1|1;0'")
    p.add_argument("--i", type=int, help="power for the gi target")
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--shard-id", type=int, dest="shard_id", default=None)
    p.add_argument("--checkpoint", default=None)

    p = sub.add_parser("fit-dim", help="Lang-Weil dimension fit from saved records")
    common(p)
    p.add_argument("--in", dest="inputs", required=True)

    p = sub.add_parser("density", help="pushforward density profile at resolution M")
    common(p)
    p.add_argument("--M", type=int, dest="level", required=True)

    p = sub.add_parser("anfrs", help="shrinking-ellipsoid density ratio")
    common(p)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--level", type=int, default=None)

    p = sub.add_parser("slice-audit", help="slice weight table and audits")
    common(p)
    p.add_argument("--partition", required=True)
    p.add_argument("--kind", choices=["L", "M"], default="L")

    p = sub.add_parser("subreg", help="subregular slice density, dual-path checked")
    common(p)
    p.add_argument("--M", type=int, dest="level", default=2)

    p = sub.add_parser("insep-probe", help="char-2 inseparable-locus density trace")
    common(p)
    p.add_argument("--limit", type=int, default=3)

    p = sub.add_parser("hist-mult", help="valuation histogram of a product of Haar variables")
    common(p)
    p.add_argument("--M", type=int, dest="level", default=3)

    p = sub.add_parser("val-int", help="truncated valuation integral of a polynomial")
    common(p)
    p.add_argument("--M", type=int, dest="level", default=2)
    p.add_argument("--poly", required=True,
                   help="comma-separated field coefficients, low degree first")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items()})
    try:
        report = run(cfg)
    except BadConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ChevalabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0 if report.passed() else 1


if __name__ == "__main__":
    sys.exit(main())
