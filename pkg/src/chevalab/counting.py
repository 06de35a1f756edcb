"""Exact jet-scheme point counts: nilpotent-cone jets, fibers of the
characteristic-polynomial map, fiber tables, power sums, dimension fits,
and a shardable, checkpointed enumeration kernel.

All counts are exhaustive enumerations (no lifting shortcuts); counts are
Python ints of unbounded size and serialize as decimal strings.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (BadConfig, CorruptCheckpoint, CtxMismatch,
                     InsufficientData, ShardOutOfRange, TooLarge)
from .field import FieldCtx, TruncCtx, field_make, trunc_make
from .matrices import CharCoeffs, JetMatrix, charpoly, is_nilpotent_jet

SCHEMA_VERSION = 1
ENGINE_VERSION = "chevalab-0.1.0"
SHARD_GUARD = 1 << 40
SWEEP_GUARD = 1 << 30  # single-process full-sweep guard
_NP_RING_LIMIT = 512  # max q^(m+1) for the vectorized n=2 engine

FiberKey = Tuple[tuple, ...]  # (c_1, ..., c_n), each a series tuple


@dataclass(frozen=True)
class CountQuery:
    n: int
    ell: int
    k: int
    m: int
    kind: str  # "nilcone" | "fiber" | "gi" | "fibertable"
    x: Optional[FiberKey] = None
    i: Optional[int] = None

    def __post_init__(self):
        if self.n < 1 or self.ell < 2 or self.k < 1 or self.m < 0:
            raise BadConfig("need n >= 1, ell >= 2, k >= 1, m >= 0")
        if self.kind not in ("nilcone", "fiber", "gi", "fibertable"):
            raise BadConfig(f"unknown target kind {self.kind!r}")
        if self.kind == "fiber" and self.x is None:
            raise BadConfig("fiber target needs coefficients x")
        if self.kind == "gi" and (self.i is None or self.i < 1):
            raise BadConfig("gi target needs power i >= 1")

    def ctx(self) -> TruncCtx:
        return trunc_make(field_make(self.ell, self.k), self.m)

    def target_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.x is not None:
            d["x"] = [list(ci) for ci in self.x]
        if self.i is not None:
            d["i"] = self.i
        return d


@dataclass
class CountRecord:
    schema_version: int
    n: int
    ell: int
    k: int
    m: int
    target: dict
    count: int
    shards: int = 1
    shard_id: Optional[int] = None
    elapsed_ms: int = 0
    engine_version: str = ENGINE_VERSION

    def to_json(self) -> str:
        d = dict(self.__dict__)
        d["count"] = str(self.count)
        return json.dumps(d, sort_keys=True)

    @staticmethod
    def from_json(line: str) -> "CountRecord":
        d = json.loads(line)
        if "schema_version" not in d:
            raise BadConfig("record missing schema_version")
        d["count"] = int(d["count"])
        return CountRecord(**d)


# --------------------------------------------------------------------------
# enumeration of matrices
# --------------------------------------------------------------------------

def matrix_space_size(n: int, ctx: TruncCtx) -> int:
    return ctx.size ** (n * n)


def _check_sweep(n: int, ctx: TruncCtx, guard: int = SWEEP_GUARD) -> None:
    if matrix_space_size(n, ctx) > guard:
        raise TooLarge(
            f"q^((m+1)n^2) = {matrix_space_size(n, ctx)} exceeds the sweep guard; shard the run"
        )


def enumerate_matrices(n: int, ctx: TruncCtx) -> Iterable[JetMatrix]:
    """All matrices, entry (0,0) outermost, each entry in ring order."""
    for flat in itertools.product(ctx.elements(), repeat=n * n):
        rows = tuple(tuple(flat[i * n + j] for j in range(n)) for i in range(n))
        yield JetMatrix(ctx, n, rows)


def matrix_from_index(n: int, ctx: TruncCtx, idx: int) -> JetMatrix:
    P = ctx.size
    cells = []
    for _ in range(n * n):
        cells.append(ctx.from_index(idx % P))
        idx //= P
    cells.reverse()
    rows = tuple(tuple(cells[i * n + j] for j in range(n)) for i in range(n))
    return JetMatrix(ctx, n, rows)


# --------------------------------------------------------------------------
# fiber tables
# --------------------------------------------------------------------------

def fiber_table(n: int, ctx: TruncCtx) -> Dict[FiberKey, int]:
    """count_jet_fiber(x) for every x in c(R_m), by one exhaustive sweep."""
    _check_sweep(n, ctx)
    if n == 2 and ctx.field.k == 1 and ctx.size <= _NP_RING_LIMIT:
        return _fiber_table_np(ctx)
    table: Dict[FiberKey, int] = {}
    for A in enumerate_matrices(n, ctx):
        key = charpoly(A).c
        table[key] = table.get(key, 0) + 1
    return table


def _ring_tables(ctx: TruncCtx):
    """Dense add/mul/neg tables on ring indices for the vectorized engine."""
    P = ctx.size
    sers = [ctx.from_index(i) for i in range(P)]
    add = np.zeros((P, P), dtype=np.int64)
    mul = np.zeros((P, P), dtype=np.int64)
    neg = np.zeros(P, dtype=np.int64)
    for i, a in enumerate(sers):
        neg[i] = ctx.index(ctx.neg(a))
        for j in range(i, P):
            b = sers[j]
            s = ctx.index(ctx.add(a, b))
            p = ctx.index(ctx.mul(a, b))
            add[i, j] = add[j, i] = s
            mul[i, j] = mul[j, i] = p
    return P, add, mul, neg


def _fiber_table_np(ctx: TruncCtx) -> Dict[FiberKey, int]:
    P, add, mul, neg = _ring_tables(ctx)
    counts = np.zeros(P * P, dtype=np.int64)
    idx = np.arange(P ** 3, dtype=np.int64)
    b = idx // (P * P)
    c = (idx // P) % P
    d = idx % P
    bc = mul[b, c]
    for a in range(P):
        c1 = neg[add[a, d]]
        c2 = add[mul[a, d], neg[bc]]
        counts += np.bincount(c1 * P + c2, minlength=P * P)
    table: Dict[FiberKey, int] = {}
    nz = np.nonzero(counts)[0]
    for key in nz.tolist():
        x = (ctx.from_index(key // P), ctx.from_index(key % P))
        table[x] = int(counts[key])
    return table


def count_jet_fiber(n: int, ctx: TruncCtx, x) -> int:
    """Exact size of {A in Mat_n(R_m) : charpoly(A) = x}."""
    key = _fiber_key(n, ctx, x)
    if n == 2 and ctx.field.k == 1 and ctx.size <= _NP_RING_LIMIT:
        _check_sweep(n, ctx)
        return fiber_table(n, ctx).get(key, 0)
    _check_sweep(n, ctx)
    total = 0
    for A in enumerate_matrices(n, ctx):
        if charpoly(A).c == key:
            total += 1
    return total


def _fiber_key(n: int, ctx: TruncCtx, x) -> FiberKey:
    if isinstance(x, CharCoeffs):
        if x.ctx.key() != ctx.key() or x.n != n:
            raise CtxMismatch("fiber target context does not match query")
        return x.c
    key = tuple(tuple(ci) for ci in x)
    if len(key) != n:
        raise CtxMismatch(f"expected {n} coefficients, got {len(key)}")
    for ci in key:
        ctx.check(ci)
    return key


def count_nilcone_jets(n: int, ctx: TruncCtx) -> int:
    """#J_m(N)(F_q): the fiber over x = 0, with base-layer pruning."""
    zero = tuple(ctx.zero for _ in range(n))
    if n == 2 and ctx.field.k == 1 and ctx.size <= _NP_RING_LIMIT:
        _check_sweep(n, ctx)
        return fiber_table(n, ctx).get(zero, 0)
    total = 0
    for base, hi_total, decode in _nilcone_space(n, ctx):
        for h in range(hi_total):
            if is_nilpotent_jet(decode(base, h)):
                total += 1
    return total


def nilpotent_base_matrices(n: int, ctx0: TruncCtx) -> List[tuple]:
    """m=0 nilpotent matrices (flat entry tuples of field codes), in sweep order."""
    field = ctx0.field
    out = []
    for flat in itertools.product(range(field.q), repeat=n * n):
        rows = tuple(tuple((flat[i * n + j],) for j in range(n)) for i in range(n))
        if is_nilpotent_jet(JetMatrix(ctx0, n, rows)):
            out.append(flat)
    return out


def _nilcone_space(n: int, ctx: TruncCtx):
    """Pruned enumeration: nilpotent base layer outermost, then the free
    higher t-coefficients of every entry (reduction J_m(N) -> J_0(N))."""
    _check_sweep(n, ctx)
    field = ctx.field
    m = ctx.m
    ctx0 = trunc_make(field, 0)
    bases = nilpotent_base_matrices(n, ctx0)
    q = field.q
    hi_total = q ** (m * n * n)

    def decode(base_flat: tuple, h: int) -> JetMatrix:
        # per-entry higher coefficients, entry (0,0) outermost, t^1 outermost
        digits = []
        for _ in range(m * n * n):
            digits.append(h % q)
            h //= q
        digits.reverse()
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                e = i * n + j
                hi = digits[e * m:(e + 1) * m]
                row.append((base_flat[e],) + tuple(hi))
            rows.append(tuple(row))
        return JetMatrix(ctx, n, tuple(rows))

    for base in bases:
        yield base, hi_total, decode


def count_gi_jets(n: int, ctx: TruncCtx, i: int) -> int:
    """Sum over x in c(R_m) of count_jet_fiber(x)^i (i-tuples sharing a
    characteristic polynomial)."""
    if i < 1:
        raise BadConfig("power i must be >= 1")
    table = fiber_table(n, ctx)
    return sum(v ** i for v in table.values())


# --------------------------------------------------------------------------
# running a query
# --------------------------------------------------------------------------

def run_query(query: CountQuery) -> CountRecord:
    ctx = query.ctx()
    t0 = time.monotonic()
    if query.kind == "nilcone":
        count = count_nilcone_jets(query.n, ctx)
    elif query.kind == "fiber":
        count = count_jet_fiber(query.n, ctx, query.x)
    elif query.kind == "gi":
        count = count_gi_jets(query.n, ctx, query.i)
    else:
        raise BadConfig("fibertable target has no single count; use fiber_table()")
    ms = int((time.monotonic() - t0) * 1000)
    return CountRecord(SCHEMA_VERSION, query.n, query.ell, query.k, query.m,
                       query.target_dict(), count, elapsed_ms=ms)


# --------------------------------------------------------------------------
# sharded, checkpointed counting
# --------------------------------------------------------------------------

def _shard_space(query: CountQuery, ctx: TruncCtx):
    """(total index count, decode, predicate) for the pure counting fold."""
    n = query.n
    if query.kind == "nilcone":
        field = ctx.field
        ctx0 = trunc_make(field, 0)
        bases = nilpotent_base_matrices(n, ctx0)
        hi_total = field.q ** (ctx.m * n * n)
        gen = _nilcone_space(n, ctx)
        decode_inner = None
        for _b, _t, dec in gen:
            decode_inner = dec
            break

        def decode(idx: int) -> JetMatrix:
            return decode_inner(bases[idx // hi_total], idx % hi_total)

        return len(bases) * hi_total, decode, is_nilpotent_jet
    if query.kind == "fiber":
        key = _fiber_key(n, ctx, query.x)
        total = matrix_space_size(n, ctx)

        def decode(idx: int) -> JetMatrix:
            return matrix_from_index(n, ctx, idx)

        return total, decode, lambda A: charpoly(A).c == key
    if query.kind == "gi":
        i = query.i
        total = matrix_space_size(n, ctx) ** i

        def decode(idx: int):
            P = matrix_space_size(n, ctx)
            mats = []
            for _ in range(i):
                mats.append(matrix_from_index(n, ctx, idx % P))
                idx //= P
            return mats

        def pred(mats) -> bool:
            first = charpoly(mats[0]).c
            return all(charpoly(A).c == first for A in mats[1:])

        return total, decode, pred
    raise BadConfig("fibertable target is not shardable")


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def count_sharded(query: CountQuery, shards: int, shard_id: int,
                  checkpoint_path: Optional[str] = None,
                  chunk: int = 65536) -> CountRecord:
    """Subtotal for one shard of the enumeration; resumable from checkpoint.

    Shards are contiguous prefixes of the fixed enumeration order, so the
    split is reproducible across machines; subtotals add up to the full count.
    """
    if not (0 <= shard_id < shards):
        raise ShardOutOfRange(f"shard {shard_id} outside [0, {shards})")
    ctx = query.ctx()
    if matrix_space_size(query.n, ctx) > SHARD_GUARD:
        raise TooLarge("query exceeds the per-shard-set guard 2^40")
    total, decode, pred = _shard_space(query, ctx)
    lo = shard_id * total // shards
    hi = (shard_id + 1) * total // shards
    pos, subtotal, lines = lo, 0, []
    if checkpoint_path and os.path.exists(checkpoint_path):
        pos, subtotal, lines = _read_checkpoint(checkpoint_path, query, shards, shard_id, lo, hi)
    t0 = time.monotonic()
    while pos < hi:
        end = min(pos + chunk, hi)
        for idx in range(pos, end):
            if pred(decode(idx)):
                subtotal += 1
        pos = end
        if checkpoint_path:
            lines.append(json.dumps({
                "schema_version": SCHEMA_VERSION,
                "query": _query_sig(query),
                "shards": shards, "shard_id": shard_id,
                "next_index": pos, "subtotal": str(subtotal),
            }, sort_keys=True))
            _atomic_write(checkpoint_path, "\n".join(lines) + "\n")
    ms = int((time.monotonic() - t0) * 1000)
    return CountRecord(SCHEMA_VERSION, query.n, query.ell, query.k, query.m,
                       query.target_dict(), subtotal, shards=shards,
                       shard_id=shard_id, elapsed_ms=ms)


def _query_sig(query: CountQuery) -> dict:
    return {"n": query.n, "ell": query.ell, "k": query.k, "m": query.m,
            "target": query.target_dict()}


def _read_checkpoint(path: str, query: CountQuery, shards: int, shard_id: int,
                     lo: int, hi: int):
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        if not lines:
            return lo, 0, []
        last = json.loads(lines[-1])
        if (last.get("schema_version") != SCHEMA_VERSION
                or last.get("query") != _query_sig(query)
                or last.get("shards") != shards
                or last.get("shard_id") != shard_id):
            raise CorruptCheckpoint(f"checkpoint {path} does not match this query/shard")
        pos = int(last["next_index"])
        subtotal = int(last["subtotal"])
        if not (lo <= pos <= hi):
            raise CorruptCheckpoint(f"checkpoint position {pos} outside shard range")
        return pos, subtotal, lines
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise CorruptCheckpoint(f"unreadable checkpoint {path}: {exc}") from exc


def combine_records(partials: Sequence[CountRecord]) -> CountRecord:
    if not partials:
        raise InsufficientData("no partial records to combine")
    head = partials[0]
    for r in partials[1:]:
        if (r.n, r.ell, r.k, r.m, r.target) != (head.n, head.ell, head.k, head.m, head.target):
            raise BadConfig("cannot combine records of different queries")
    total = sum(r.count for r in partials)
    return CountRecord(SCHEMA_VERSION, head.n, head.ell, head.k, head.m,
                       head.target, total, shards=head.shards, shard_id=None,
                       elapsed_ms=sum(r.elapsed_ms for r in partials))


# --------------------------------------------------------------------------
# Lang-Weil dimension fitting
# --------------------------------------------------------------------------

@dataclass
class DimFit:
    n: int
    ell: int
    target_kind: str
    entries: List[dict] = dc_field(default_factory=list)  # per record: k, m, count, C_m
    slopes: Dict[int, Fraction] = dc_field(default_factory=dict)  # per m

    @property
    def slope(self):
        if not self.slopes:
            raise InsufficientData("need >= 2 distinct extension degrees k for a slope")
        return self.slopes[min(self.slopes)]


def expected_dimension_rate(n: int, target: dict) -> int:
    """Per-jet-order dimension growth: n^2 - n for nilcone/fiber targets,
    i(n^2 - n) + n for the i-fold fiber power."""
    if target["kind"] in ("nilcone", "fiber"):
        return n * n - n
    if target["kind"] == "gi":
        return target["i"] * (n * n - n) + n
    raise BadConfig(f"no expected dimension for target {target['kind']}")


def _log_q(count: int, q: int):
    """log_q(count), exact as an int when count is a perfect power of q."""
    if count <= 0:
        raise InsufficientData("cannot fit a zero count")
    e = round(math.log(count) / math.log(q))
    if q ** e == count:
        return e
    return math.log(count) / math.log(q)


def fit_dimension(records: Sequence[CountRecord]) -> DimFit:
    if not records:
        raise InsufficientData("no records")
    head = records[0]
    kind = head.target["kind"]
    for r in records:
        if (r.n, r.ell, r.target["kind"]) != (head.n, head.ell, kind):
            raise BadConfig("fit_dimension needs consistent (n, ell, target)")
    fit = DimFit(head.n, head.ell, kind)
    d_rate = expected_dimension_rate(head.n, head.target)
    by_m: Dict[int, List[Tuple[int, int]]] = {}
    for r in records:
        q = r.ell ** r.k
        c_m = _log_q(r.count, q) - r.m * d_rate
        fit.entries.append({"k": r.k, "m": r.m, "count": r.count,
                            "C_m": float(c_m)})
        by_m.setdefault(r.m, []).append((r.k, r.count))
    for m, pts in by_m.items():
        ks = sorted({k for k, _ in pts})
        if len(ks) < 2:
            continue
        # least squares of log_ell(count) against k (slope = dimension)
        xs, ys, exact = [], [], True
        for k, count in pts:
            xs.append(Fraction(k))
            y = _log_q(count, head.ell)
            if not isinstance(y, int):
                exact = False
            ys.append(Fraction(y) if isinstance(y, int) else y)
        xbar = sum(xs) / len(xs)
        ybar = sum(ys) / len(ys)
        num = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
        den = sum((x - xbar) ** 2 for x in xs)
        slope = Fraction(num, den) if exact else num / den
        fit.slopes[m] = slope
    return fit
