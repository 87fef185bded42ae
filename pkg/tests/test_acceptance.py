"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed in
the terminal summary (see conftest.py), or live with ``pytest -s``. Run
standalone with ``python3 tests/test_acceptance.py``.
"""

import functools
import itertools
import math
import sys
import time
from math import comb

import numpy as np
import pytest

from sparsepce.benchmarks import get_benchmark, pce_moments, sobol_g, sobol_g_moments, validation_error
from sparsepce.cli import main
from sparsepce.experiments import design_seed, fit_design, make_design, validation_sample
from sparsepce.heredity import heredity_violations
from sparsepce.lar import lar_path
from sparsepce.multiindex import TruncationSpec, generate_candidate_set
from sparsepce.polynomials import gauss_rule, univariate_table
from sparsepce.regression import build_design_matrix, loo_error, ols_solve

RESULTS = []
SEED = 0
SOBOL = dict(q=0.5, r=2)
VALIDATION_SIZE = 100_000
# largest degree tried in the convergence and moment studies
SOBOL_P_HIGH = 20

# heredity audits collected from every h-LAR fit of criteria 5-8
AUDIT = {}


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def auditor(tag):
    def callback(p, model):
        if model.path is not None:
            AUDIT[(tag, p)] = heredity_violations(model.path)

    return callback


def fit_pair(name, size, rep, p_max, q, r, tag):
    bench = get_benchmark(name)
    seed = design_seed(SEED, size, rep)
    ed = make_design(bench, size, seed)
    lar = fit_design(ed, bench.input_model, "lar", p_max, q, r)
    hlar = fit_design(ed, bench.input_model, "hlar", p_max, q, r, callback=auditor((tag, size, rep)))
    return bench, seed, lar, hlar


def validate(bench, seed, model):
    x, y = validation_sample(bench, VALIDATION_SIZE, seed)
    return validation_error(y, model.predict(x))


# --- 1 ---------------------------------------------------------------------


def test_c1_orthonormality():
    start = time.perf_counter()
    worst = 0.0
    for family in ("legendre", "hermite"):
        x, w = gauss_rule(family, 64)
        table = univariate_table(family, 10, x)
        gram = table.T @ (w[:, None] * table)
        worst = max(worst, np.abs(gram - np.eye(11)).max())
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-10 and elapsed < 1.0, f"max |G - I| = {worst:.1e} (tol 1e-10), {elapsed:.2f} s (< 1 s)")


# --- 2 ---------------------------------------------------------------------


def refit_loo(psi, y):
    n = len(y)
    errs = np.empty(n)
    for i in range(n):
        keep = np.arange(n) != i
        c, *_ = np.linalg.lstsq(psi[keep], y[keep], rcond=None)
        errs[i] = y[i] - psi[i] @ c
    return np.mean(errs**2) / np.var(y, ddof=1)


def test_c2_loo_oracle():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(1, 11))
        n = int(rng.integers(k + 5, 41))
        psi = rng.standard_normal((n, k))
        y = psi @ rng.standard_normal(k) + rng.standard_normal(n)
        analytic = loo_error(psi, y, ols_solve(psi, y))
        worst = max(worst, abs(analytic - refit_loo(psi, y)) / refit_loo(psi, y))
    elapsed = time.perf_counter() - start
    record(2, worst <= 1e-8 and elapsed < 10, f"max rel diff = {worst:.1e} (tol 1e-8), {elapsed:.2f} s (< 10 s)")


# --- 3 ---------------------------------------------------------------------


def test_c3_lar_constructions():
    from sparsepce import InputModel, Uniform, lhs_sample

    start = time.perf_counter()
    square = InputModel.iid(Uniform(-1, 1), 2)
    x = lhs_sample(square, 100, SEED)
    dm = build_design_matrix(x, generate_candidate_set(2, TruncationSpec(5)), square.families)
    col = {a: j for j, a in enumerate(dm.column_index)}
    y = 2 * dm.values[:, col[(2, 0)]] + 3 * dm.values[:, col[(0, 3)]]
    step = lar_path(dm, y, patience=None).steps[1]
    coef = dict(zip(step.active, step.coefficients[1:]))
    recovery = max(abs(coef.get((2, 0), np.inf) - 2), abs(coef.get((0, 3), np.inf) - 3), abs(step.coefficients[0]))

    rng = np.random.default_rng(SEED)
    psi = rng.standard_normal((60, 10))
    y = psi @ rng.standard_normal(10) + 0.3 * rng.standard_normal(60)
    last = lar_path(psi, y, max_terms=10, patience=None).steps[-1]
    order = list(last.active)
    full = ols_solve(np.column_stack([np.ones(60), psi[:, order]]), y)
    ols_gap = np.abs(last.coefficients - full).max()
    elapsed = time.perf_counter() - start
    ok = recovery < 1e-8 and ols_gap < 1e-8 and elapsed < 5
    record(3, ok, f"recovery err {recovery:.1e}, full-path vs OLS {ols_gap:.1e} (tol 1e-8), {elapsed:.2f} s (< 5 s)")


# --- 4 ---------------------------------------------------------------------


def exhaustive(m, p, q, r):
    out = []
    for alpha in itertools.product(range(p + 1), repeat=m):
        nz = [a for a in alpha if a]
        if len(nz) <= r and (not nz or sum(a**q for a in nz) ** (1 / q) <= p * (1 + 1e-9)):
            out.append(alpha)
    return sorted(out, key=lambda a: (sum(a), a))


def test_c4_cardinalities():
    start = time.perf_counter()
    bad = []
    for m in range(1, 7):
        for p in range(1, 9):
            if len(generate_candidate_set(m, TruncationSpec(p))) != comb(m + p, p):
                bad.append(("standard", m, p))
    cases = 0
    for m, p, q, r in itertools.product(range(1, 5), range(1, 7), (0.25, 0.5, 0.75, 1.0), (1, 2, 3)):
        cases += 1
        if generate_candidate_set(m, TruncationSpec(p, q, r)) != exhaustive(m, p, q, r):
            bad.append(("hyperbolic", m, p, q, r))
    elapsed = time.perf_counter() - start
    record(4, not bad and elapsed < 5, f"48 standard + {cases} hyperbolic/low-rank sets, {len(bad)} mismatches, {elapsed:.2f} s (< 5 s)")


# --- 5 ---------------------------------------------------------------------


@functools.cache
def sobol_table():
    rows = []
    for rep in range(10):
        bench, seed, lar, hlar = fit_pair("sobolg", 200, rep, 9, tag="c5", **SOBOL)
        rows.append((validate(bench, seed, lar), validate(bench, seed, hlar), hlar.best_degree, hlar.n_retained))
    return np.array(rows)


@pytest.mark.slow
def test_c5_sobol_table():
    start = time.perf_counter()
    rows = sobol_table()
    lar, hlar = np.median(rows[:, 0]), np.median(rows[:, 1])
    elapsed = time.perf_counter() - start
    ok = hlar < lar and hlar <= 5e-2 and lar <= 1.5e-1 and elapsed < 600
    record(
        5, ok,
        f"median eps_V h-LAR {hlar:.3g} < LAR {lar:.3g}; h-LAR <= 5e-2, LAR <= 1.5e-1 "
        f"(h-LAR median degree {np.median(rows[:, 2]):.0f}, N_r {np.median(rows[:, 3]):.0f}), {elapsed:.0f} s",
    )


# --- 6 ---------------------------------------------------------------------


@functools.cache
def sobol_convergence():
    out = {}
    for size in (100, 200, 300):
        loo = [
            (lar.loo_error, hlar.loo_error)
            for lar, hlar in (
                fit_pair("sobolg", size, rep, SOBOL_P_HIGH, tag="c6", **SOBOL)[2:] for rep in range(10)
            )
        ]
        out[size] = np.median(np.array(loo), axis=0)
    return out


@pytest.mark.slow
def test_c6_sobol_convergence():
    start = time.perf_counter()
    medians = sobol_convergence()
    elapsed = time.perf_counter() - start
    ok = all(h < lar for lar, h in medians.values()) and elapsed < 1200
    detail = ", ".join(f"N={n}: h-LAR {h:.3g} vs LAR {lar:.3g}" for n, (lar, h) in medians.items())
    record(6, ok, f"median LOO {detail}, {elapsed:.0f} s")


# --- 7 ---------------------------------------------------------------------


@pytest.mark.slow
def test_c7_sobol_moments():
    start = time.perf_counter()
    bench = get_benchmark("sobolg")
    ed = make_design(bench, 300, SEED)
    model = fit_design(ed, bench.input_model, "hlar", SOBOL_P_HIGH, callback=auditor(("c7", 300, 0)), **SOBOL)
    mean, var = pce_moments(model)
    _, exact_var = sobol_g_moments()
    y = sobol_g(np.random.default_rng(SEED).random((1_000_000, 8)))
    n, mc_var = y.size, y.var(ddof=1)
    se_var = math.sqrt((np.mean((y - y.mean()) ** 4) - mc_var**2 * (n - 3) / (n - 1)) / n)
    mc_ok = abs(mc_var - exact_var) < 3 * se_var
    elapsed = time.perf_counter() - start
    ok = abs(mean - 1) <= 0.02 and abs(var - exact_var) <= 0.1 * exact_var and mc_ok and elapsed < 300
    record(
        7, ok,
        f"PCE mean {mean:.4f} (1 +- 2%), variance {var:.4f} vs analytic {exact_var:.4f} (+-10%), "
        f"MC variance {mc_var:.4f} +- {se_var:.1e}, {elapsed:.0f} s",
    )


# --- 8 ---------------------------------------------------------------------


@pytest.mark.slow
def test_c8_schwefel():
    start = time.perf_counter()
    rows = []
    for rep in range(5):
        bench, seed, lar, hlar = fit_pair("schwefelmod", 400, rep, 12, q=0.25, r=2, tag="c8")
        rows.append((validate(bench, seed, lar), validate(bench, seed, hlar)))
    lar, hlar = np.median(rows, axis=0)
    elapsed = time.perf_counter() - start
    ok = hlar <= lar and elapsed < 900
    record(8, ok, f"median eps_V h-LAR {hlar:.3g} <= LAR {lar:.3g}, {elapsed:.0f} s")


# --- 9 ---------------------------------------------------------------------


@pytest.mark.slow
def test_c9_heredity_soundness():
    if not any(tag[0][0] == "c5" for tag in AUDIT):
        sobol_table()
    if not any(tag[0][0] == "c6" for tag in AUDIT):
        sobol_convergence()
    problems = [msg for msgs in AUDIT.values() for msg in msgs]
    runs = len(AUDIT)
    record(9, runs > 0 and not problems, f"{runs} h-LAR paths audited, {len(problems)} violations")


# --- 10 --------------------------------------------------------------------


def test_c10_determinism(capsys):
    argv = ["benchmark", "sobolg", "--method", "hlar", "--ed-size", "200", "--p-max", "9", "--q", "0.5", "--seed", "3"]
    outputs = []
    for _ in range(2):
        code = main(argv)
        outputs.append((code, capsys.readouterr().out))
    ok = outputs[0] == outputs[1] and outputs[0][0] == 0
    with capsys.disabled():
        record(10, ok, f"two fixed-seed benchmark reports {'identical' if ok else 'differ'} ({len(outputs[0][1])} bytes)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
