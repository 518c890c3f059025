"""Acceptance criteria 1-7.

Each test records exactly one PASS/FAIL line in ``RESULTS``; the lines are
printed as they happen and again in the terminal summary (see conftest).
"""

from __future__ import annotations

import random
import time
from statistics import mean

from mbasimp.boolfunc import BoolFunc, quine_mccluskey
from mbasimp.datagen import gen_dataset, obf_style_specs, table3_specs
from mbasimp.expr import Binary, Const, Var, canonical, evaluate, fold_constants, node_count, render
from mbasimp.linear import simplify_linear
from mbasimp.oracle import exhaustive_equiv, matrix_equiv, random_equiv
from mbasimp.parser import parse
from mbasimp.semilinear import MaskedSum, MaskedTerm, merge_terms, recover_structure, simplify, to_expr
from mbasimp.signature import (
    SignatureVector,
    adjusted_matrix,
    linear_signature,
    reconstruct_conjunctions,
    semilinear_matrix,
    subtract_offset,
)

from conftest import NAMES, random_semilinear

RESULTS: list[str] = []
M64 = (1 << 64) - 1
X = BoolFunc(0b10, 1)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def structurally_equal(e, text: str, width: int) -> bool:
    return canonical(fold_constants(e, width)) == canonical(fold_constants(parse(text, width), width))


# -- 1 ----------------------------------------------------------------------------------

def _worked_examples():
    w64 = 64

    def rows(text, width):
        return semilinear_matrix(parse(text, width), width).rows

    sum_vec = linear_signature(parse("x+y"), w64).entries
    neg_vec = linear_signature(parse("~(x+y)"), w64)
    off, neg_adj = subtract_offset(neg_vec)

    def masked(constant, terms, width=64):
        m = (1 << width) - 1
        return MaskedSum(constant & m, tuple(MaskedTerm(c & m, k & m, X) for c, k in terms), ("x",), width)

    intro = "((22079729|(5368709120&x))+(5368709207^(5368709120&x)))-5390788936"
    sub54 = "((1111&(x&~y))|(2222&(~x&y)))|(3327&(x&y))"
    yield "matrix rows of (x&5)+(y&3)", rows("(x&5)+(y&3)", 3) == ((0, 1, 1, 2), (0, 0, 1, 1), (0, 1, 0, 1))
    yield "vector of x+y", sum_vec == (0, 1, 1, 2)
    yield "vector of ~(x+y)", list(neg_vec.entries) == [v & M64 for v in (-1, -2, -2, -3)]
    yield "offset-adjusted ~(x+y)", off == M64 and list(neg_adj.entries) == [v & M64 for v in (0, -1, -1, -2)]
    yield "merge equal coefficients", structurally_equal(
        to_expr(merge_terms(masked(0, [(64, 130), (64, 192)], 8))), "64*(194&x)", 8)
    yield "three-term merge", structurally_equal(
        to_expr(merge_terms(masked(0, [(1, 529682), (7676756576, 23429673), (7676756577, 24772)]))),
        "(554454&x)+7676756576*(23454445&x)", w64)
    yield "xor recovery", structurally_equal(
        to_expr(recover_structure(masked(980, [(-10, 98), (10, -99)]))), "10*(98^x)", w64)
    yield "xor recovery end to end", structurally_equal(
        simplify(parse("980+(-10*(98&x))+(10*(-99&x))")), "10*(98^x)", w64)
    yield "single-mask rewrite", structurally_equal(
        to_expr(recover_structure(masked(0, [(7, 1111), (2, -1112)]))), "5*(1111&x)+2*x", w64)
    yield "single-mask rewrite end to end", structurally_equal(
        simplify(parse("7*(1111&x)+2*(-1112&x)")), "5*(1111&x)+2*x", w64)
    yield "constant substitution", structurally_equal(simplify(parse(sub54)), "(x&1111)|(y&2222)", w64)
    yield "linearity shortcut", structurally_equal(simplify(parse("(x&1111)+(x&-1112)")), "x", w64)
    yield "intro expression", structurally_equal(simplify(parse(intro)), "0", w64)


def test_criterion_1_worked_examples():
    results = list(_worked_examples())
    failed = [name for name, ok in results if not ok]
    record(1, not failed, f"{len(results) - len(failed)}/{len(results)} worked examples match exactly"
           + (f"; mismatched: {', '.join(failed)}" if failed else ""))


# -- 2 ----------------------------------------------------------------------------------

CONFIGS = [(t, w) for t in (1, 2, 3) for w in (4, 8, 64)]
PER_CONFIG = 1000


def _reconstruction_ok(e, t: int, w: int, seed: int) -> bool:
    names = list(NAMES[:t])
    adj = adjusted_matrix(e, w, names)
    r = reconstruct_conjunctions(adj, adj.offset)
    if t * w <= 16:
        return exhaustive_equiv(e, r, w, names).equivalent
    return random_equiv(e, r, w, samples=10_000, seed=seed, var_order=names).equivalent


def test_criterion_2_reconstruction_identity():
    failures = []
    for t, w in CONFIGS:
        rng = random.Random(1000 * t + w)
        for k in range(PER_CONFIG):
            e = random_semilinear(rng, t, w)
            if not _reconstruction_ok(e, t, w, seed=k):
                failures.append((t, w))
    total = len(CONFIGS) * PER_CONFIG
    record(2, not failures, f"reconstruction identity held for {total - len(failures)}/{total} expressions "
           f"(t in 1..3, w in 4/8/64, {PER_CONFIG} each; exhaustive where t*w<=16, else 10000 random samples)")


# -- 3 ----------------------------------------------------------------------------------

def _partner(rng: random.Random, a, t: int, w: int):
    names = list(NAMES[:t])
    kind = rng.randrange(4)
    if kind == 0:
        adj = adjusted_matrix(a, w, names)
        return reconstruct_conjunctions(adj, adj.offset)
    if kind == 1:
        return simplify(a, w)
    if kind == 2:
        # near miss: differs on exactly one bit for one variable
        bit = 1 << rng.randrange(w)
        return Binary("+", a, Binary("&", Const(bit), Var(rng.choice(names))))
    return random_semilinear(rng, t, w)


def test_criterion_3_oracle_agreement():
    rng = random.Random(303)
    disagreements = 0
    equivalent = 0
    for _ in range(1000):
        t = rng.choice([1, 2])
        w = rng.choice(range(1, 9))
        a = random_semilinear(rng, t, w)
        b = _partner(rng, a, t, w)
        names = list(NAMES[:t])
        m = matrix_equiv(a, b, w, names)
        ex = exhaustive_equiv(a, b, w, names)
        equivalent += ex.equivalent
        if m.equivalent != ex.equivalent:
            disagreements += 1
    record(3, disagreements == 0, f"matrix vs exhaustive verdicts: {disagreements} disagreements on 1000 pairs "
           f"({equivalent} equivalent, {1000 - equivalent} not)")


# -- 4 ----------------------------------------------------------------------------------

TABLE3_COUNT = 1000


def _bench(records, width: int):
    rows = []
    for r in records:
        e = parse(r.obfuscated, width)
        t0 = time.perf_counter()
        out = simplify(e, width)
        elapsed = time.perf_counter() - t0
        ok = matrix_equiv(e, out, width).equivalent
        rows.append((node_count(out), node_count(parse(r.ground_truth, width)), elapsed, ok))
    return rows


def test_criterion_4_stand_in_classes():
    problems = []
    worst_ratio, worst_exact, worst_ms = 0.0, 1.0, 0.0
    n_total = n_ok = 0
    for t in (2, 3, 4):
        for name, spec in table3_specs(t, 64, steps=3, seed=7).items():
            rows = _bench(gen_dataset(TABLE3_COUNT, spec), 64)
            out_mean = mean(r[0] for r in rows)
            gt_mean = mean(r[1] for r in rows)
            ratio = out_mean / gt_mean
            exact = mean(r[0] <= r[1] for r in rows)
            ms = 1000 * mean(r[2] for r in rows)
            verified = sum(r[3] for r in rows)
            n_total += len(rows)
            n_ok += verified
            worst_ratio, worst_exact, worst_ms = max(worst_ratio, ratio), min(worst_exact, exact), max(worst_ms, ms)
            print(f"  {name} t={t}: {out_mean:.2f} / {gt_mean:.2f} nodes, exact {exact:.1%}, "
                  f"{ms:.3f} ms, verified {verified}/{len(rows)}")
            if verified != len(rows) or ratio > 1.25 or exact < 0.90 or ms > 5.0:
                problems.append(f"{name} t={t}")
    record(4, not problems, f"{n_ok}/{n_total} verified; worst class ratio {worst_ratio:.3f} (<=1.25), "
           f"lowest exact share {worst_exact:.1%} (>=90%), slowest class mean {worst_ms:.3f} ms (<=5 ms)"
           + (f"; failing classes: {', '.join(problems)}" if problems else ""))


# -- 5 ----------------------------------------------------------------------------------

def test_criterion_5_obf_style_corpus():
    specs = obf_style_specs(500, 64, steps=2, seed=11)
    rows = _bench(gen_dataset(500, specs), 64)
    out_mean = mean(r[0] for r in rows)
    gt_mean = mean(r[1] for r in rows)
    ratio = out_mean / gt_mean
    verified = sum(r[3] for r in rows)
    record(5, ratio <= 1.1 and verified == len(rows),
           f"500 records, mean nodes {out_mean:.2f} / {gt_mean:.2f} (ratio {ratio:.3f}, <=1.1), "
           f"verified {verified}/{len(rows)}, mean {1000 * mean(r[2] for r in rows):.2f} ms")


# -- 6 ----------------------------------------------------------------------------------

def test_criterion_6_linear_regression():
    v = SignatureVector((0, 1, 1, 2), ("x", "y"), 64)
    sum_out = simplify_linear(v)
    neg = SignatureVector(tuple(x & M64 for x in (-1, -2, -2, -3)), ("x", "y"), 64)
    neg_out = simplify_linear(neg)
    ok_sum = sum_out == parse("x+y")
    ok_neg = node_count(neg_out) <= 4 and exhaustive_equiv(neg_out, parse("~(x+y)", 8), 8).equivalent \
        and linear_signature(neg_out, 64, ("x", "y"), check=False) == neg
    record(6, ok_sum and ok_neg, f"[0,1,1,2] -> {render(sum_out)}; [-1,-2,-2,-3] -> {render(neg_out)} "
           f"({node_count(neg_out)} nodes, equivalent to ~(x+y))")


# -- 7 ----------------------------------------------------------------------------------

def test_criterion_7_quine_mccluskey_sweep():
    wrong = []
    for tab in range(256):
        e = quine_mccluskey(BoolFunc(tab, 3), ["x", "y", "z"], 64)
        got = 0
        for j in range(8):
            env = {"x": j & 1, "y": j >> 1 & 1, "z": j >> 2 & 1}
            got |= (evaluate(e, env, 64) & 1) << j
        if got != tab:
            wrong.append(tab)
    record(7, not wrong, f"{256 - len(wrong)}/256 three-variable truth tables reproduced exactly")
