"""Benchmark runs and replicated convergence studies."""

import time
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed

from .benchmarks import DEFAULT_VALIDATION_SIZE, get_benchmark, validation_error
from .exceptions import PCEError
from .heredity import ChildTruncation
from .inputs import ExperimentalDesign, lhs_sample
from .lar import LOO_CORRECTION, fit_degree_adaptive

METHODS = {"lar": "LAR", "hlar": "hLAR"}
# children are cut by the same q-norm as the reference candidate set
BENCHMARK_CHILD_TRUNCATION = ChildTruncation.QNORM


def method_label(method):
    key = method.lower().replace("-", "").replace("_", "")
    try:
        return METHODS[key]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; use one of {sorted(METHODS)}") from None


@dataclass
class RunReport:
    """One row of a benchmark table, with the seed that reproduces it."""

    benchmark: str
    method: str
    ed_size: int
    q: float
    r: int | None
    p_max: int
    best_degree: int | None
    loo_error: float
    validation_error: float | None
    n_retained: int
    seed: int
    validation_size: int
    child_truncation: str | None
    loo_correction: bool
    wall_time: float | None = None

    def to_dict(self):
        return asdict(self)


def design_seed(seed, size, replication):
    """Seed of the design used for (size, replication) in a convergence study."""
    return int(np.random.SeedSequence([seed, size, replication]).generate_state(1)[0])


def validation_sample(bench, n, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    x = bench.input_model.sample(n, rng)
    return x, bench(x)


def make_design(bench, size, seed):
    x = lhs_sample(bench.input_model, size, seed)
    return ExperimentalDesign(x, bench(x), seed=seed)


def fit_design(
    ed,
    input_model,
    method,
    p_max,
    q,
    r,
    child_truncation=BENCHMARK_CHILD_TRUNCATION,
    loo_correction=LOO_CORRECTION,
    p_min=1,
    callback=None,
):
    label = method_label(method)
    return fit_degree_adaptive(
        ed,
        input_model,
        range(p_min, p_max + 1),
        method=label.lower(),
        q=q,
        r=r,
        child_truncation=child_truncation,
        loo_correction=loo_correction,
        callback=callback,
    )


def run_benchmark(
    name,
    method,
    ed_size,
    seed,
    p_max,
    q=1.0,
    r=2,
    child_truncation=BENCHMARK_CHILD_TRUNCATION,
    validation_size=DEFAULT_VALIDATION_SIZE,
    loo_correction=LOO_CORRECTION,
    timing=False,
    return_details=False,
):
    """Sample an LHS design, fit, and score on a fresh Monte Carlo validation set.

    Returns a :class:`RunReport`; with ``return_details`` also the fitted
    model and ``(x_val, y_val, y_pred)``.
    """
    bench = get_benchmark(name)
    label = method_label(method)
    start = time.perf_counter()
    ed = make_design(bench, ed_size, seed)
    model = fit_design(ed, bench.input_model, label, p_max, q, r, child_truncation, loo_correction)
    x_val = y_val = y_pred = None
    eps_v = None
    if validation_size:
        x_val, y_val = validation_sample(bench, validation_size, seed)
        y_pred = model.predict(x_val)
        eps_v = validation_error(y_val, y_pred)
    report = RunReport(
        benchmark=bench.name,
        method=label,
        ed_size=int(ed_size),
        q=float(q),
        r=r,
        p_max=int(p_max),
        best_degree=model.best_degree,
        loo_error=float(model.loo_error),
        validation_error=eps_v,
        n_retained=model.n_retained,
        seed=int(seed),
        validation_size=int(validation_size),
        child_truncation=ChildTruncation(child_truncation).value if label == "hLAR" else None,
        loo_correction=bool(loo_correction),
        wall_time=time.perf_counter() - start if timing else None,
    )
    if return_details:
        return report, model, (x_val, y_val, y_pred)
    return report


CONVERGE_COLUMNS = ["method", "size", "replication", "seed", "loo_error", "best_degree", "n_retained", "error"]


def _converge_task(bench_name, size, replication, seed, methods, p_max, q, r, child_truncation, loo_correction):
    bench = get_benchmark(bench_name)
    s = design_seed(seed, size, replication)
    ed = make_design(bench, size, s)
    rows = []
    for method in methods:
        label = method_label(method)
        try:
            model = fit_design(ed, bench.input_model, label, p_max, q, r, child_truncation, loo_correction)
            rows.append([label, size, replication, s, float(model.loo_error), model.best_degree, model.n_retained, ""])
        except (PCEError, ValueError, ArithmeticError) as exc:
            rows.append([label, size, replication, s, float("nan"), None, None, f"{type(exc).__name__}: {exc}"])
    return rows


def converge(
    name,
    sizes,
    replications,
    methods=("lar", "hlar"),
    seed=0,
    p_max=10,
    q=1.0,
    r=2,
    child_truncation=BENCHMARK_CHILD_TRUNCATION,
    loo_correction=LOO_CORRECTION,
    n_jobs=1,
):
    """LOO error of every (method, size, replication); failures are kept as marked rows.

    Both methods of a replication share the same design. Rows are ordered
    by (method, size, replication) whatever the completion order.
    """
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes) or not sizes:
        raise ValueError("sizes must be a non-empty ascending sequence")
    if replications < 1:
        raise ValueError("replications must be at least 1")
    tasks = [(size, rep) for size in sizes for rep in range(replications)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_converge_task)(name, size, rep, seed, methods, p_max, q, r, child_truncation, loo_correction)
        for size, rep in tasks
    )
    rows = [row for group in results for row in group]
    order = {method_label(m): i for i, m in enumerate(methods)}
    rows.sort(key=lambda row: (order[row[0]], row[1], row[2]))
    return rows


def summarize_converge(rows):
    """Median, mean and 95% normal interval of LOO per (method, size)."""
    out = {}
    for method, size in sorted({(r[0], r[1]) for r in rows}):
        values = np.array([r[4] for r in rows if r[0] == method and r[1] == size], dtype=float)
        values = values[np.isfinite(values)]
        if values.size == 0:
            continue
        half = 1.96 * values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else float("nan")
        out[(method, size)] = {
            "median": float(np.median(values)),
            "mean": float(values.mean()),
            "ci95": (float(values.mean() - half), float(values.mean() + half)),
            "count": int(values.size),
        }
    return out
