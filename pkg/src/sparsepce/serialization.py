"""JSON persistence of fitted models."""

import json

import numpy as np

from .exceptions import InvalidInput
from .inputs import InputModel
from .lar import SparsePceModel
from .multiindex import TruncationSpec

SCHEMA_VERSION = 1


def model_to_dict(model):
    t = model.truncation
    return {
        "schema_version": SCHEMA_VERSION,
        "method": model.method,
        "input_model": model.input_model.to_dict(),
        "families": [f.value for f in model.input_model.families],
        "basis": [list(a) for a in model.basis],
        # repr round-trips doubles exactly
        "coefficients": [float(c) for c in model.coefficients],
        "diagnostics": {
            "loo_error": float(model.loo_error),
            "empirical_error": float(model.empirical_error),
            "n_retained": model.n_retained,
            "best_degree": model.best_degree,
        },
        "truncation": None if t is None else {"p": t.p, "q": t.q, "r": t.r, **model.options},
        "seed": model.seed,
    }


def model_from_dict(d):
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidInput(f"unsupported model schema version {version!r}")
    try:
        input_model = InputModel.from_dict(d["input_model"])
        families = [f.value for f in input_model.families]
        if d.get("families") not in (None, families):
            raise InvalidInput("families do not match the input marginals")
        t = d.get("truncation")
        truncation = None if t is None else TruncationSpec(t["p"], t["q"], t["r"])
        options = {} if t is None else {k: v for k, v in t.items() if k not in ("p", "q", "r")}
        diag = d.get("diagnostics", {})
        return SparsePceModel(
            basis=[tuple(a) for a in d["basis"]],
            coefficients=np.asarray(d["coefficients"], dtype=float),
            input_model=input_model,
            loo_error=diag.get("loo_error", float("nan")),
            empirical_error=diag.get("empirical_error", float("nan")),
            truncation=truncation,
            best_degree=diag.get("best_degree"),
            method=d.get("method", "LAR"),
            seed=d.get("seed"),
            options=options,
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed model file: {exc}") from None


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(data)
