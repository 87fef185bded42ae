"""Command-line interface: ``sparsepce {fit,predict,benchmark,converge}``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .benchmarks import BENCHMARKS, DEFAULT_VALIDATION_SIZE
from .exceptions import InputError, NumericalError
from .experiments import (
    BENCHMARK_CHILD_TRUNCATION,
    CONVERGE_COLUMNS,
    RunReport,
    converge,
    fit_design,
    method_label,
    run_benchmark,
    summarize_converge,
)
from .heredity import ChildTruncation
from .inputs import ExperimentalDesign, Gaussian, InputModel, Uniform, read_csv, write_csv
from .serialization import load_model, save_model

log = logging.getLogger("sparsepce")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def parse_marginals(text, dimension):
    """``uniform:a:b`` / ``gaussian:mean:sd``, comma separated; one entry is broadcast."""
    items = []
    for part in text.split(","):
        fields = part.strip().split(":")
        kind = fields[0].lower()
        try:
            params = [float(v) for v in fields[1:]]
        except ValueError:
            raise UsageError(f"bad marginal {part!r}") from None
        if kind in ("uniform", "u") and len(params) == 2:
            items.append(Uniform(*params))
        elif kind in ("gaussian", "normal", "n") and len(params) == 2:
            items.append(Gaussian(*params))
        else:
            raise UsageError(f"bad marginal {part!r}; expected uniform:a:b or gaussian:mean:sd")
    if len(items) == 1:
        items = items * dimension
    if len(items) != dimension:
        raise UsageError(f"{len(items)} marginals given for {dimension} inputs")
    return InputModel(tuple(items))


def _observed_range_model(x):
    lo, hi = x.min(axis=0), x.max(axis=0)
    return InputModel(tuple(Uniform(a, b if b > a else a + 1.0) for a, b in zip(lo, hi)))


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_fit(args):
    ed = ExperimentalDesign.from_csv(args.design)
    if args.marginals:
        input_model = parse_marginals(args.marginals, ed.dimension)
    else:
        input_model = _observed_range_model(ed.inputs)
    model = fit_design(
        ed, input_model, args.method, args.p_max, args.q, args.r,
        args.child_truncation, not args.no_loo_correction, p_min=args.p_min,
    )
    model.seed = args.seed
    save_model(model, args.model)
    label = method_label(args.method)
    report = RunReport(
        benchmark=str(args.design),
        method=label,
        ed_size=ed.size,
        q=args.q,
        r=args.r,
        p_max=args.p_max,
        best_degree=model.best_degree,
        loo_error=model.loo_error,
        validation_error=None,
        n_retained=model.n_retained,
        seed=args.seed,
        validation_size=0,
        child_truncation=ChildTruncation(args.child_truncation).value if label == "hLAR" else None,
        loo_correction=not args.no_loo_correction,
    )
    report = report.to_dict()
    report["empirical_error"] = model.empirical_error
    _emit_json(report, args.report)
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    header, rows = read_csv(args.points)
    m = model.dimension
    if rows.shape[1] == m + 1 and header[-1].lower() == "y":
        rows = rows[:, :m]
    if rows.shape[1] != m:
        raise InputError(f"points have {rows.shape[1]} columns, the model expects {m}")
    y = model.predict(rows)
    write_csv(sys.stdout if args.out in (None, "-") else args.out, ["y_pred"], y[:, None])
    return 0


def cmd_benchmark(args):
    report, model, (x_val, y_val, y_pred) = run_benchmark(
        args.name, args.method, args.ed_size, args.seed, args.p_max,
        q=args.q, r=args.r, child_truncation=args.child_truncation,
        validation_size=args.validation_size, loo_correction=not args.no_loo_correction,
        timing=args.timing, return_details=True,
    )
    if args.model:
        model.seed = args.seed
        save_model(model, args.model)
    if args.export_predictions and x_val is not None:
        header = [f"x{i + 1}" for i in range(x_val.shape[1])] + ["y_true", "y_pred"]
        write_csv(args.export_predictions, header, np.column_stack([x_val, y_val, y_pred]))
    _emit_json(report.to_dict(), args.out)
    return 0


def cmd_converge(args):
    sizes = _int_list(args.sizes)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        method_label(m)
    rows = converge(
        args.name, sizes, args.replications, methods=methods, seed=args.seed,
        p_max=args.p_max, q=args.q, r=args.r, child_truncation=args.child_truncation,
        loo_correction=not args.no_loo_correction, n_jobs=args.jobs,
    )
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CONVERGE_COLUMNS)
        for row in rows:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    finally:
        if out is not sys.stdout:
            out.close()
    if args.summary:
        for (method, size), s in summarize_converge(rows).items():
            log.warning(
                "%s N=%d median LOO %.4g mean %.4g CI95 [%.4g, %.4g] (%d runs)",
                method, size, s["median"], s["mean"], *s["ci95"], s["count"],
            )
    return 0


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _add_fit_options(p, default_method="hlar"):
    p.add_argument("--method", default=default_method, choices=["lar", "hlar"])
    p.add_argument("--p-max", type=int, default=10, help="largest total degree tried (default 10)")
    p.add_argument("--q", type=float, default=1.0, help="hyperbolic truncation exponent (default 1)")
    p.add_argument("--r", type=int, default=2, help="maximal interaction rank (default 2)")
    p.add_argument(
        "--child-truncation",
        default=BENCHMARK_CHILD_TRUNCATION.value,
        choices=[c.value for c in ChildTruncation],
        help="degree bound on generated interactions for hlar (default qnorm)",
    )
    p.add_argument(
        "--no-loo-correction", action="store_true",
        help="select models by the plain LOO error instead of the corrected one",
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsepce", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a sparse PCE to a design CSV (header x1,...,xM,y)")
    p.add_argument("design")
    _add_fit_options(p)
    p.add_argument("--p-min", type=int, default=1)
    p.add_argument(
        "--marginals",
        help="input distributions, e.g. 'uniform:0:1' or 'uniform:0:1,gaussian:2:3' "
        "(default: uniform over the observed range of each column)",
    )
    p.add_argument("--seed", type=int, default=None, help="provenance seed stored with the model")
    p.add_argument("--model", default="model.json", help="output model file (default model.json)")
    p.add_argument("--report", default=None, help="report JSON path (default stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a saved model on a points CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_predict)

    names = sorted({b.name.lower() for b in BENCHMARKS.values()} | {"sobol", "schwefel"})
    p = sub.add_parser("benchmark", help="fit a registered benchmark and report validation error")
    p.add_argument("name", help=f"benchmark name ({', '.join(names)})")
    _add_fit_options(p)
    p.add_argument("--ed-size", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--validation-size", type=int, default=DEFAULT_VALIDATION_SIZE)
    p.add_argument("--timing", action="store_true", help="include wall_time in the report")
    p.add_argument("--model", default=None, help="also save the fitted model")
    p.add_argument("--export-predictions", default=None, help="CSV of validation inputs, truth, prediction")
    p.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("converge", help="replicated LOO study over design sizes")
    p.add_argument("name")
    p.add_argument("--sizes", default="100,200,300")
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--methods", default="lar,hlar")
    p.add_argument("--seed", type=int, default=0)
    _add_fit_options(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    p.add_argument("--summary", action="store_true", help="log median/mean/CI per method and size")
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, InputError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"sparsepce {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"sparsepce {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
