"""Hierarchical adaptive sparse PCE (h-LAR).

LAR over a candidate set that starts with univariate terms only. Each time
a univariate term is found most relevant, its rank-2 children (pairings
with the other univariate terms) are generated and compete with it; the
children then stay in the candidate set for later iterations.
"""

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParent, InvalidTruncation
from .lar import (
    DEFAULT_PATIENCE,
    LOO_CORRECTION,
    CandidatePool,
    LarEngine,
    LarPath,
    LarStep,
    _check_design,
    constant_model,
    model_from_path,
    run_path,
)
from .multiindex import QNORM_RTOL, MultiIndex, TruncationSpec
from .regression import BasisEvaluator


class ChildTruncation(str, enum.Enum):
    """Degree bound applied to a generated child ``(a, b)``."""

    PER_DIMENSION = "per_dimension"  # max(a, b) <= p
    TOTAL_DEGREE = "total_degree"  # a + b <= p
    QNORM = "qnorm"  # (a**q + b**q)**(1/q) <= p


class Heredity(str, enum.Enum):
    NONE = "none"
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class HeredityConfig:
    p: int
    q: float = 1.0
    r: int = 2
    child_truncation: ChildTruncation = ChildTruncation.PER_DIMENSION

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise InvalidTruncation(f"p must be a positive integer, got {self.p!r}")
        if not (0 < self.q <= 1):
            raise InvalidTruncation(f"q must lie in (0, 1], got {self.q!r}")
        if self.r != 2:
            raise InvalidTruncation("heredity enrichment is limited to rank-2 interactions (r=2)")
        try:
            mode = ChildTruncation(self.child_truncation)
        except ValueError:
            raise InvalidTruncation(f"unknown child truncation {self.child_truncation!r}") from None
        object.__setattr__(self, "child_truncation", mode)

    def admits_child(self, a, b):
        mode = self.child_truncation
        if mode is ChildTruncation.PER_DIMENSION:
            return max(a, b) <= self.p
        if mode is ChildTruncation.TOTAL_DEGREE:
            return a + b <= self.p
        return (a**self.q + b**self.q) ** (1.0 / self.q) <= self.p * (1 + QNORM_RTOL)

    def reference_truncation(self):
        """A-priori truncation whose candidate set contains every h-LAR candidate in QNORM mode."""
        return TruncationSpec(self.p, self.q, self.r)


@dataclass
class HlarStep(LarStep):
    form: Heredity = Heredity.NONE
    n_children: int = 0
    displaced_parent: MultiIndex | None = None
    candidate_size: int = 0
    parents_active: int = 0


@dataclass
class HlarPath(LarPath):
    """LarPath plus the heredity records needed to audit it."""

    seen_1d: frozenset = frozenset()
    # child -> (generating parent, iteration in which it was generated)
    origin: dict = field(default_factory=dict)


@dataclass
class HlarState:
    """Candidate pool and bookkeeping of one h-LAR run."""

    pool: CandidatePool
    engine: LarEngine
    config: HeredityConfig
    evaluator: BasisEvaluator
    seen_1d: set = field(default_factory=set)
    # child -> (generating parent, iteration in which it was generated)
    origin: dict = field(default_factory=dict)
    known: set = field(default_factory=set)
    dropped: list = field(default_factory=list)
    iteration: int = 0

    @property
    def candidate_set(self):
        return [self.pool.labels[j] for j in self.pool.alive_ids()]

    @property
    def active_set(self):
        return list(self.engine.labels)

    @property
    def residual(self):
        return self.engine.residual

    def register(self, alpha):
        """Add ``alpha`` to the candidate pool; returns its pool index or None if constant."""
        self.known.add(alpha)
        st = self.engine.standardize(self.evaluator.column(alpha))
        if st is None:
            self.dropped.append(alpha)
            return None
        self.pool.add(alpha, *st, key=alpha.sort_key())
        return self.pool.index[alpha]


def initial_candidates(dimension, config):
    """All univariate multi-indices of degree 1..p, canonically ordered."""
    if int(dimension) != dimension or dimension < 1:
        raise InvalidTruncation(f"dimension must be a positive integer, got {dimension!r}")
    out = [MultiIndex.axis(dimension, i, d) for d in range(1, config.p + 1) for i in range(dimension)]
    out.sort(key=MultiIndex.sort_key)
    return out


def generate_children(selected, seen_1d, config, exclude=()):
    """Rank-2 pairings of ``selected`` with every univariate term of ``seen_1d``.

    Children failing ``config``'s child truncation, or present in
    ``exclude``, are skipped.
    """
    selected = MultiIndex(selected)
    if selected.rank() != 1:
        raise InvalidParent(f"{tuple(selected)} is not a univariate term")
    (i,) = selected.support()
    a = selected[i]
    children = set()
    for other in seen_1d:
        other = MultiIndex(other)
        if other.rank() != 1 or len(other) != len(selected):
            continue
        (j,) = other.support()
        if j == i:
            continue
        b = other[j]
        if not config.admits_child(a, b):
            continue
        degrees = list(selected)
        degrees[j] = b
        child = MultiIndex(degrees)
        if child not in exclude:
            children.add(child)
    return sorted(children, key=MultiIndex.sort_key)


def parents(alpha):
    """The two univariate parents of a rank-2 multi-index."""
    alpha = MultiIndex(alpha)
    return tuple(MultiIndex.axis(len(alpha), i, alpha[i]) for i in alpha.support())


def classify(selected, active):
    """Heredity form of a selection given the active set before it."""
    selected = MultiIndex(selected)
    if selected.rank() < 2:
        return Heredity.NONE, 0
    active = set(active)
    n_active = sum(1 for parent in parents(selected) if parent in active)
    return (Heredity.STRONG if n_active == 2 else Heredity.WEAK), n_active


def _selector(state):
    pool = state.pool

    def select(engine, pool_, ids, correlations):
        state.iteration += 1
        j = pool.argmax(correlations, ids)
        top = pool.labels[j]
        displaced, n_children = None, 0
        if top.rank() == 1:
            children = generate_children(top, state.seen_1d, state.config, exclude=state.known)
            new_ids = []
            for child in children:
                state.origin[child] = (top, state.iteration)
                k = state.register(child)
                if k is not None:
                    new_ids.append(k)
            n_children = len(new_ids)
            if new_ids:
                new_ids = np.asarray(new_ids)
                cc = engine.correlations(pool.matrix(new_ids))
                k = pool.argmax(cc, new_ids)
                c_top = abs(correlations[np.searchsorted(ids, j)])
                if abs(cc[np.searchsorted(new_ids, k)]) > c_top:
                    displaced, j = top, k
        selected = pool.labels[j]
        form, n_active = classify(selected, engine.labels)
        return j, {
            "step_type": HlarStep,
            "form": form,
            "n_children": n_children,
            "displaced_parent": displaced,
            # candidates left once the selected term is extracted
            "candidate_size": len(pool) - 1,
            "parents_active": n_active,
        }

    return select


def hlar_fit(
    ed,
    config,
    input_model,
    max_terms=None,
    patience=DEFAULT_PATIENCE,
    loo_correction=LOO_CORRECTION,
    return_state=False,
):
    """Fit a sparse PCE with heredity-driven candidate enrichment.

    Parameters
    ----------
    ed : ExperimentalDesign
    config : HeredityConfig
    input_model : InputModel
        Determines the standardization and the polynomial family per input.
    max_terms : int, optional
        Defaults to ``N - 1``.
    patience : int or None
        LOO no-improvement window shared with :func:`~sparsepce.lar.lar_path`.
    return_state : bool
        Also return the :class:`HlarState` of the run.

    Returns
    -------
    SparsePceModel
        Model at the step with the smallest LOO error. ``model.path`` holds
        the :class:`HlarPath` of :class:`HlarStep` records.
    """
    _check_design(ed, input_model)
    if np.var(ed.outputs) == 0:
        model = constant_model(ed, input_model, config.reference_truncation(), "hLAR", config.p)
        return (model, None) if return_state else model

    u = input_model.standardize(ed.inputs)
    evaluator = BasisEvaluator(u, input_model.families, config.p)
    engine = LarEngine(ed.outputs, loo_correction=loo_correction)
    state = HlarState(CandidatePool(ed.size), engine, config, evaluator)
    for alpha in initial_candidates(input_model.dimension, config):
        state.seen_1d.add(alpha)
        state.register(alpha)
    if state.dropped:
        warnings.warn(f"dropped {len(state.dropped)} univariate candidate(s) constant on the design", stacklevel=2)
    if max_terms is None:
        max_terms = ed.size - 1
    path = run_path(engine, state.pool, max_terms, patience, state.dropped, select=_selector(state))
    path = HlarPath(**vars(path), seen_1d=frozenset(state.seen_1d), origin=dict(state.origin))
    model = model_from_path(path, ed, input_model, config.reference_truncation(), "hLAR", config.p)
    model.options = {"child_truncation": config.child_truncation.value}
    return (model, state) if return_state else model


def heredity_violations(path, seen_1d=None, origin=None):
    """Check heredity soundness of an h-LAR path; returns a list of messages.

    ``seen_1d`` and ``origin`` default to the records of an :class:`HlarPath`.

    Every selected rank-2 term must have both parents in ``seen_1d``, its
    recorded form must match the active set just before its selection, and
    a Weak selection with no active parent must stem from a univariate term
    that won a relevance ranking (its recorded generating parent).
    """
    if seen_1d is None:
        seen_1d = path.seen_1d
    if origin is None:
        origin = getattr(path, "origin", None)
    problems = []
    for k, step in enumerate(path.steps):
        sel = MultiIndex(step.selected)
        before = step.active[:-1]
        expected, n_active = classify(sel, before)
        if step.form is not expected:
            problems.append(f"step {k}: {tuple(sel)} recorded {step.form.value}, expected {expected.value}")
        if sel.rank() == 2:
            missing = [tuple(p) for p in parents(sel) if p not in seen_1d]
            if missing:
                problems.append(f"step {k}: parents {missing} of {tuple(sel)} never generated")
            if n_active == 0:
                if origin is None or sel not in origin:
                    problems.append(f"step {k}: orphan interaction {tuple(sel)} without recorded origin")
                elif origin[sel][0] not in parents(sel):
                    problems.append(f"step {k}: {tuple(sel)} generated from a non-parent")
        elif sel.rank() > 2:
            problems.append(f"step {k}: rank {sel.rank()} term {tuple(sel)} selected")
    return problems


__all__ = [
    "ChildTruncation",
    "Heredity",
    "HeredityConfig",
    "HlarPath",
    "HlarState",
    "HlarStep",
    "LarPath",
    "generate_children",
    "heredity_violations",
    "hlar_fit",
    "initial_candidates",
]
