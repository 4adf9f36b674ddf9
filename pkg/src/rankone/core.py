"""Exact stage calculus for rank-one cutting-and-stacking constructions.

A rank-one transformation is described stage by stage: column ``C_n`` of
height ``h_n`` is cut into ``r_n`` subcolumns of equal width, ``s_{n,k}``
spacer levels are stacked on top of the k-th subcolumn, and the pieces are
stacked left to right to form ``C_{n+1}``.  Everything here is computed with
arbitrary-precision integers and exact rationals; no floats enter any
quantity that a certificate depends on.

The central combinatorial object is the height set

    H_n = {0} u { sum_{k<=l} (h_n + s_{n,k}) : 0 <= l < r_n - 1 },

the set of heights at which copies of the base of ``C_n`` appear inside
``C_{n+1}``.  Descendant sets of a level are iterated sum sets of height
sets, and every certificate in :mod:`rankone.analysis` is a statement about
those sets.
"""

from __future__ import annotations

import hashlib
import heapq
import json
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Callable, Iterable, Sequence

IntSet = tuple[int, ...]  # strictly increasing tuple of nonnegative ints


class RankOneError(Exception):
    """Base class for errors raised by this package."""


class BudgetExceeded(RankOneError):
    """A computation would exceed the spec's resource budget."""


class PreconditionError(RankOneError):
    """An operation's structural precondition on the spec does not hold."""


class NotDirectSum(PreconditionError):
    """An operation required descendant sums to be collision free."""


class NotStronglyArithmetic(PreconditionError):
    """A certificate required every stage to be staircase shaped."""


class CapsMakeConstructionUnfaithful(UserWarning):
    """A gallery cap forced a cut count below the value the construction calls for.

    Not fatal: the capped spec is still a perfectly good rank-one
    transformation, but conclusions that depend on the uncapped growth no
    longer follow from the construction recipe.  The cap is recorded in the
    spec's notes and surfaces in every report.
    """


@dataclass(frozen=True)
class Budget:
    """Resource limits for lazy materialization and set enumeration."""

    max_stage: int = 64
    max_height_bits: int = 100_000
    max_descendants: int = 200_000
    max_pairs: int = 10_000_000
    max_iterate: int = 1_000_000

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class StageSpec:
    """One cutting stage: cut count ``r`` and spacer counts per subcolumn."""

    r: int
    spacers: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.r < 2:
            raise ValueError(f"cut count must be at least 2, got {self.r}")
        object.__setattr__(self, "spacers", tuple(int(s) for s in self.spacers))
        if len(self.spacers) != self.r:
            raise ValueError(
                f"need one spacer count per subcolumn: r={self.r}, "
                f"got {len(self.spacers)} spacer entries"
            )
        if any(s < 0 for s in self.spacers):
            raise ValueError("spacer counts must be nonnegative")


Builder = Callable[[int, "RankOneSpec"], StageSpec]


def sum_set(a: Sequence[int], b: Sequence[int], *, max_products: int | None = None) -> IntSet:
    """Sorted, deduplicated set of pairwise sums of two sorted int sets.

    Uses a k-way merge of the shifted copies ``a_i + b`` rather than a hash
    set, so output order is canonical and the cost is
    O(|a| |b| log |a|) with no large intermediate collections.
    """
    if max_products is not None and len(a) * len(b) > max_products:
        raise BudgetExceeded(
            f"sum set would enumerate {len(a)}*{len(b)} products, "
            f"budget is {max_products}"
        )
    if not a or not b:
        return ()

    def shifted(x: int):
        return (x + y for y in b)

    streams = map(shifted, a)
    out: list[int] = []
    last: int | None = None
    for v in heapq.merge(*streams):
        if v != last:
            out.append(v)
            last = v
    return tuple(out)


def sum_is_direct(sets: Sequence[Sequence[int]], *, max_products: int | None = None) -> bool:
    """True when the iterated sum of the given sets has no collisions.

    The sum is direct exactly when its cardinality is the product of the
    individual cardinalities.
    """
    expected = 1
    acc: IntSet = (0,)
    for s in sets:
        expected *= len(s)
        acc = sum_set(acc, s, max_products=max_products)
        if len(acc) < expected:
            return False
    return len(acc) == expected


class RankOneSpec:
    """A lazily materialized rank-one construction.

    ``builder(n, spec)`` must return the :class:`StageSpec` for stage ``n``
    and may inspect any already materialized stage ``m < n`` through
    ``spec``, so adaptive recipes (spacer padding driven by descendant
    growth, for instance) stay deterministic: stage ``n`` depends only on
    the builder parameters and stages below it.
    """

    def __init__(
        self,
        builder: Builder,
        *,
        name: str = "anonymous",
        budget: Budget | None = None,
        params: dict | None = None,
        declared_properties: Iterable[str] = (),
    ) -> None:
        self.builder = builder
        self.name = name
        self.budget = budget if budget is not None else Budget()
        self.params = dict(params) if params else {}
        self.declared_properties = frozenset(declared_properties)
        self.notes: list[str] = []
        self._stages: list[StageSpec] = []
        self._heights: list[int] = [1]  # h_0 = 1
        self._wden: list[int] = [1]  # w_n = 1 / _wden[n]
        self._hsets: list[IntSet] = []
        self._maxdesc: list[int] = [0]  # max D(I, n) for I the base of C_0

    # -- materialization ---------------------------------------------------

    @property
    def stages_built(self) -> int:
        return len(self._stages)

    def materialize(self, n: int) -> "RankOneSpec":
        """Ensure stages 0..n-1 (hence heights h_0..h_n) exist."""
        if n > self.budget.max_stage:
            raise BudgetExceeded(
                f"stage {n} exceeds max_stage={self.budget.max_stage}"
            )
        while len(self._stages) < n:
            m = len(self._stages)
            stage = self.builder(m, self)
            if not isinstance(stage, StageSpec):
                raise TypeError("builder must return a StageSpec")
            if stage.r > self.budget.max_descendants:
                raise BudgetExceeded(
                    f"stage {m} cuts into {stage.r} subcolumns, "
                    f"budget is max_descendants={self.budget.max_descendants}"
                )
            h = self._heights[m]
            hs = []
            acc = 0
            for k in range(stage.r - 1):
                acc += h + stage.spacers[k]
                hs.append(acc)
            h_next = acc + h + stage.spacers[stage.r - 1]
            if h_next.bit_length() > self.budget.max_height_bits:
                raise BudgetExceeded(
                    f"h_{m + 1} needs {h_next.bit_length()} bits, "
                    f"budget is {self.budget.max_height_bits}"
                )
            self._stages.append(stage)
            self._heights.append(h_next)
            self._wden.append(self._wden[m] * stage.r)
            hset = (0, *hs)
            self._hsets.append(hset)
            self._maxdesc.append(self._maxdesc[m] + hset[-1])
        return self

    # -- accessors (auto-materializing, budget checked) --------------------

    def stage(self, n: int) -> StageSpec:
        self.materialize(n + 1)
        return self._stages[n]

    def height(self, n: int) -> int:
        """Column height h_n."""
        self.materialize(n)
        return self._heights[n]

    def width(self, n: int) -> Fraction:
        """Column width w_n = 1 / (r_0 ... r_{n-1}), exact."""
        self.materialize(n)
        return Fraction(1, self._wden[n])

    def width_denominator(self, n: int) -> int:
        self.materialize(n)
        return self._wden[n]

    def height_set(self, n: int) -> IntSet:
        """H_n, the copy heights of the base of C_n inside C_{n+1}."""
        self.materialize(n + 1)
        return self._hsets[n]

    def max_descendant(self, n: int) -> int:
        """max D(I, n) where I is the base level of C_0."""
        self.materialize(n)
        return self._maxdesc[n]

    def note(self, text: str) -> None:
        if text not in self.notes:
            self.notes.append(text)

    def fingerprint(self) -> str:
        """Stable hex digest of the construction's identity.

        Covers the name, builder parameters, and budget, so identical spec
        inputs hash identically across runs.
        """
        payload = {
            "name": self.name,
            "params": self.params,
            "budget": self.budget.to_dict(),
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def __repr__(self) -> str:  # pragma: no cover
        return f"RankOneSpec({self.name!r}, stages_built={self.stages_built})"


def explicit_spec(
    stages: Sequence[StageSpec | tuple[int, Sequence[int]]],
    *,
    name: str = "explicit",
    budget: Budget | None = None,
    cycle: bool = False,
) -> RankOneSpec:
    """Spec from a hand-written stage list.

    With ``cycle=True`` the list repeats forever; otherwise materializing
    past the end raises :class:`BudgetExceeded`.
    """
    normalized = tuple(
        s if isinstance(s, StageSpec) else StageSpec(s[0], tuple(s[1]))
        for s in stages
    )
    if not normalized:
        raise ValueError("explicit spec needs at least one stage")

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        if n < len(normalized):
            return normalized[n]
        if cycle:
            return normalized[n % len(normalized)]
        raise BudgetExceeded(
            f"explicit spec has {len(normalized)} stages, stage {n} requested"
        )

    params = {
        "kind": "explicit",
        "stages": [[s.r, list(s.spacers)] for s in normalized],
        "cycle": cycle,
    }
    return RankOneSpec(build, name=name, budget=budget, params=params)


def descendant_set(spec: RankOneSpec, i: int, j: int, b: int = 0) -> IntSet:
    """D(I, j): heights of the descendants in C_j of level ``b`` of C_i.

    This is the translated iterated sum set ``b + H_i + ... + H_{j-1}``.
    """
    if j < i:
        raise ValueError(f"need i <= j, got i={i}, j={j}")
    if not 0 <= b < spec.height(i):
        raise ValueError(f"level {b} is not a level of C_{i} (h_{i}={spec.height(i)})")
    size = 1
    for m in range(i, j):
        size *= spec.stage(m).r
        if size > spec.budget.max_descendants:
            raise BudgetExceeded(
                f"descendant set of size {size}+ exceeds "
                f"max_descendants={spec.budget.max_descendants}"
            )
    acc: IntSet = (b,)
    for m in range(i, j):
        acc = sum_set(acc, spec.height_set(m), max_products=spec.budget.max_pairs)
    return acc


def is_direct_sum(spec: RankOneSpec, i: int, j: int) -> bool:
    """True when |D(I, j)| equals the product of the cut counts r_i ... r_{j-1}.

    For any honestly materialized spec this always holds, because each
    height set's nonzero gaps exceed the maximum accumulated descendant
    height.  The set-level collision logic lives in :func:`sum_is_direct`
    so it can be exercised on synthetic inputs.
    """
    if j < i:
        raise ValueError(f"need i <= j, got i={i}, j={j}")
    expected = 1
    for m in range(i, j):
        expected *= spec.stage(m).r
    if expected > spec.budget.max_descendants:
        raise BudgetExceeded(
            f"direct-sum check over {expected} descendants exceeds "
            f"max_descendants={spec.budget.max_descendants}"
        )
    return len(descendant_set(spec, i, j, 0)) == expected
