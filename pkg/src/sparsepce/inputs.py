"""Input probability models, isoprobabilistic maps and Latin hypercube designs."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .exceptions import DimensionMismatch, InvalidInput, OutOfSupport
from .polynomials import PolyFamily

SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class Uniform:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise InvalidInput(f"Uniform bounds must satisfy a < b, got ({self.a}, {self.b})")

    family = PolyFamily.LEGENDRE

    @property
    def mean(self):
        return 0.5 * (self.a + self.b)

    @property
    def variance(self):
        return (self.b - self.a) ** 2 / 12.0

    def in_support(self, x):
        slack = SUPPORT_TOL * (self.b - self.a)
        return (x >= self.a - slack) & (x <= self.b + slack)

    def standardize(self, x):
        return 2.0 * (x - self.a) / (self.b - self.a) - 1.0

    def unstandardize(self, u):
        return self.a + 0.5 * (u + 1.0) * (self.b - self.a)

    def ppf(self, p):
        return self.a + p * (self.b - self.a)

    def to_dict(self):
        return {"type": "uniform", "a": float(self.a), "b": float(self.b)}


@dataclass(frozen=True)
class Gaussian:
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.sd) and self.sd > 0):
            raise InvalidInput(f"Gaussian needs finite mean and sd > 0, got ({self.mean}, {self.sd})")

    family = PolyFamily.HERMITE

    @property
    def variance(self):
        return self.sd**2

    def in_support(self, x):
        return np.isfinite(x)

    def standardize(self, x):
        return (x - self.mean) / self.sd

    def unstandardize(self, u):
        return self.mean + self.sd * u

    def ppf(self, p):
        return self.mean + self.sd * ndtri(p)

    def to_dict(self):
        return {"type": "gaussian", "mean": float(self.mean), "sd": float(self.sd)}


def marginal_from_dict(d):
    kind = str(d.get("type", "")).lower()
    if kind == "uniform":
        return Uniform(float(d["a"]), float(d["b"]))
    if kind in ("gaussian", "normal"):
        return Gaussian(float(d["mean"]), float(d["sd"]))
    raise InvalidInput(f"unknown marginal type {d.get('type')!r}")


@dataclass(frozen=True)
class InputModel:
    """Independent marginals, one per input dimension."""

    marginals: tuple

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        if not self.marginals:
            raise InvalidInput("an input model needs at least one marginal")
        for m in self.marginals:
            if not isinstance(m, (Uniform, Gaussian)):
                raise InvalidInput(f"unsupported marginal {m!r}")

    @classmethod
    def iid(cls, marginal, dimension):
        return cls((marginal,) * dimension)

    @property
    def dimension(self):
        return len(self.marginals)

    @property
    def families(self):
        return [m.family for m in self.marginals]

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise DimensionMismatch(
                f"points have {x.shape[-1]} coordinates, the input model {self.dimension}"
            )
        return x

    def standardize(self, x):
        """Map physical points to the standard domains of the polynomial families."""
        x = self._check(x)
        out = np.empty_like(x)
        for i, m in enumerate(self.marginals):
            col = x[..., i]
            if not np.all(m.in_support(col)):
                raise OutOfSupport(f"coordinate {i + 1} falls outside the support of {m}")
            out[..., i] = m.standardize(col)
        if isinstance(out, np.ndarray):
            for i, m in enumerate(self.marginals):
                if isinstance(m, Uniform):
                    np.clip(out[..., i], -1.0, 1.0, out=out[..., i])
        return out

    def unstandardize(self, u):
        u = self._check(u)
        out = np.empty_like(u)
        for i, m in enumerate(self.marginals):
            out[..., i] = m.unstandardize(u[..., i])
        return out

    def sample(self, n, rng):
        """Plain Monte Carlo sample of ``n`` points."""
        rng = np.random.default_rng(rng)
        p = rng.random((n, self.dimension))
        return self._from_probabilities(p)

    def _from_probabilities(self, p):
        p = np.clip(p, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
        out = np.empty_like(p)
        for i, m in enumerate(self.marginals):
            out[:, i] = m.ppf(p[:, i])
        return out

    def to_dict(self):
        return [m.to_dict() for m in self.marginals]

    @classmethod
    def from_dict(cls, items):
        return cls(tuple(marginal_from_dict(d) for d in items))


def standardize(x, model):
    """Standardize a point (or array of points) under ``model``."""
    return model.standardize(x)


def lhs_sample(model, n, seed):
    """Latin hypercube sample of ``n`` points in physical units.

    Each column places one point uniformly at random inside every
    equiprobable stratum ``[(k-1)/n, k/n)``; strata are permuted
    independently per dimension and mapped through the inverse CDF.
    """
    if int(n) != n or n < 1:
        raise InvalidInput(f"sample size must be a positive integer, got {n!r}")
    rng = np.random.default_rng(seed)
    p = np.empty((n, model.dimension))
    for i in range(model.dimension):
        p[:, i] = (rng.permutation(n) + rng.random(n)) / n
    return model._from_probabilities(p)


@dataclass
class ExperimentalDesign:
    """Sampled inputs (physical units) with their observed outputs."""

    inputs: np.ndarray
    outputs: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.outputs = np.asarray(self.outputs, dtype=float).ravel()
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise DimensionMismatch(
                f"{self.inputs.shape[0]} input rows but {self.outputs.shape[0]} outputs"
            )
        if self.inputs.shape[0] < 1:
            raise InvalidInput("an experimental design needs at least one point")
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.outputs))):
            raise InvalidInput("experimental design contains non-finite values")

    @property
    def size(self):
        return self.inputs.shape[0]

    @property
    def dimension(self):
        return self.inputs.shape[1]

    def to_csv(self, path_or_buffer):
        m = self.dimension
        header = [f"x{i + 1}" for i in range(m)] + ["y"]
        rows = np.column_stack([self.inputs, self.outputs])
        return write_csv(path_or_buffer, header, rows)

    @classmethod
    def from_csv(cls, path_or_buffer):
        header, rows = read_csv(path_or_buffer)
        if not header or header[-1].strip().lower() != "y":
            raise InvalidInput("line 1: design header must end with a 'y' column")
        if len(header) < 2:
            raise InvalidInput("line 1: design needs at least one input column")
        return cls(rows[:, :-1], rows[:, -1])


def write_csv(path_or_buffer, header, rows):
    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in np.atleast_2d(rows):
            writer.writerow([repr(float(v)) for v in row])

    if isinstance(path_or_buffer, io.TextIOBase) or hasattr(path_or_buffer, "write"):
        _write(path_or_buffer)
    else:
        with open(path_or_buffer, "w", encoding="utf-8", newline="") as fh:
            _write(fh)


def read_csv(path_or_buffer):
    """Parse a numeric CSV with a header row; errors name the offending line."""

    def _read(fh):
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInput("line 1: empty CSV file") from None
        header = [h.strip() for h in header]
        rows = []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InvalidInput(
                    f"line {lineno}: expected {len(header)} fields, found {len(row)}"
                )
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise InvalidInput(f"line {lineno}: non-numeric field in {row!r}") from None
            if not all(np.isfinite(values)):
                raise InvalidInput(f"line {lineno}: non-finite value")
            rows.append(values)
        if not rows:
            raise InvalidInput("CSV file has a header but no data rows")
        return header, np.array(rows, dtype=float)

    if hasattr(path_or_buffer, "read"):
        return _read(path_or_buffer)
    with open(path_or_buffer, encoding="utf-8", newline="") as fh:
        return _read(fh)
