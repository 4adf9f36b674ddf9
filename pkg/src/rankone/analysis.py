"""Finite-stage certificates about rank-one transformations.

Every function here reduces a dynamical question (conservativity of a
Cartesian power, ergodicity, rigidity, partial rigidity, weak mixing,
double ergodicity) to exact counting over descendant sets and height sets
at finitely many stages.  Results come back as exact rationals inside a
:class:`CertificateReport`; nothing is ever rounded.

A report's verdict is always one of a small vocabulary:

- ``"satisfied"`` / ``"satisfied-at-horizon"``: the finite criterion holds
  through the requested horizon.
- ``"refuted-conservativity"`` / ``"refuted-ergodicity"``: the computed
  stages witness the named property failing.
- ``"refuted"``: the finite check itself failed on some row.
- ``"inconclusive-at-horizon"``: nothing is contradicted, but the
  criterion did not resolve within the horizon.

Structural preconditions (collision-free sums, staircase-shaped stages)
raise :class:`rankone.core.PreconditionError` subclasses instead of
returning a verdict.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from rankone.core import (
    BudgetExceeded,
    IntSet,
    NotDirectSum,
    NotStronglyArithmetic,
    PreconditionError,
    RankOneSpec,
    descendant_set,
    is_direct_sum,
)
from rankone.tower import (
    LevelSet,
    least_valid_stage,
    measure,
    refine,
    translate_intersection_measure,
)


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of one finite-stage certificate computation."""

    kind: str
    horizon: int
    verdict: str
    rows: tuple[dict, ...]
    summary: dict
    notes: tuple[str, ...] = ()


# -- elementary counts -------------------------------------------------------


def gap_pair_count(r: int, m: int) -> int:
    """Number of pairs in {1..r}^2 whose coordinates differ by less than ``m``.

    Closed form ``2mr - m^2 + m - r``: the complement, pairs at distance at
    least ``m``, numbers ``(r-m)(r-m+1)``.  Only defined for ``1 <= m <= r``.
    """
    if not 1 <= m <= r:
        raise ValueError(f"need 1 <= m <= r, got m={m}, r={r}")
    return r * r - (r - m) * (r - m + 1)


def _gap_tuple_count(r: int, g: int, k: int) -> int:
    """Number of tuples in {0..r-1}^k with max - min <= g (g >= 0)."""
    if g >= r - 1:
        return r**k
    return (r - g) * ((g + 1) ** k - g**k) + g**k


def triangular_gap(a: int, b: int, c: int) -> int:
    """Gap between two equal-length runs of consecutive-integer sums.

    The sum of ``c`` consecutive integers starting above position ``a``
    minus the same starting above ``b`` is exactly ``c (a - b)``; this
    returns its absolute value.  Requires ``|c| < min(a, b)`` so both runs
    have valid positions.
    """
    if a < 0 or b < 0:
        raise ValueError("positions must be nonnegative")
    if abs(c) >= min(a, b):
        raise ValueError(f"need |c| < min(a, b), got a={a}, b={b}, c={c}")
    return abs(c) * abs(a - b)


# -- conservativity of Cartesian powers --------------------------------------


def rho_bound(spec: RankOneSpec, i: int, j: int, k: int) -> Fraction:
    """Product lower bound for non-shared k-tuples across stages ``i..j-1``.

    Equals the exact probability that ``k`` independent uniform descendant
    choices never agree on a subcolumn index at any stage, which is why it
    requires the descendant sums to be collision free.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if not is_direct_sum(spec, i, j):
        raise NotDirectSum(f"stages {i}..{j} of {spec.name} are not collision free")
    out = Fraction(1)
    for m in range(i, j):
        out *= 1 - Fraction(1, spec.stage(m).r ** (k - 1))
    return out


def cons_fraction_exact(spec: RankOneSpec, i: int, j: int, k: int) -> Fraction:
    """Exact fraction of k-tuples of descendants with a shifted companion.

    A tuple ``(a_0, ..., a_{k-1})`` counts when some nonzero ``t`` keeps
    every ``a_l - t`` in the descendant set; equivalently, when the set
    ``D `` meets all its translates by the tuple's internal differences in
    at least two points.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    D = descendant_set(spec, i, j)
    total = len(D) ** k
    if total > spec.budget.max_pairs:
        raise BudgetExceeded(
            f"{total} tuples exceeds max_pairs={spec.budget.max_pairs}"
        )
    if k == 2:
        mult = Counter(a - b for a in D for b in D)
        good = sum(c for c in mult.values() if c >= 2)
        return Fraction(good, total)
    Dset = set(D)
    witness_count: dict[tuple[int, ...], int] = {}
    good = 0
    seen = 0
    for tup in product(D, repeat=k):
        delta = tuple(a - tup[0] for a in tup[1:])
        cnt = witness_count.get(delta)
        if cnt is None:
            cnt = sum(1 for x in D if all(x + d in Dset for d in delta))
            witness_count[delta] = cnt
        seen += 1
        if cnt >= 2:
            good += 1
    if seen != total:
        raise AssertionError("tuple enumeration out of step")
    return Fraction(good, total)


def conservativity_sufficient(
    spec: RankOneSpec,
    k: int,
    horizon: int,
    threshold: Fraction = Fraction(1, 1000),
) -> CertificateReport:
    """Certify conservativity of the k-fold power by driving the bound down.

    The fraction of k-tuples with no shared subcolumn index through stage
    ``m`` is at most the running product of ``1 - 1/r^{k-1}``; once that
    product drops below ``threshold``, all but a vanishing fraction of
    orbits return and the power is conservative.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if horizon < 1:
        raise ValueError(f"need horizon >= 1, got {horizon}")
    threshold = Fraction(threshold)
    rows: list[dict] = []
    partial = Fraction(1)
    crossed_at: int | None = None
    for m in range(horizon):
        r = spec.stage(m).r
        factor = 1 - Fraction(1, r ** (k - 1))
        partial *= factor
        rows.append(
            {"stage": m, "r": r, "factor": factor, "partial_product": partial}
        )
        if partial < threshold:
            crossed_at = m
            break
    verdict = "satisfied" if crossed_at is not None else "inconclusive-at-horizon"
    return CertificateReport(
        kind="conservativity",
        horizon=horizon,
        verdict=verdict,
        rows=tuple(rows),
        summary={
            "k": k,
            "threshold": threshold,
            "product": partial,
            "crossed_at": crossed_at,
        },
    )


def _staircase_first_spacer(stage_r: int, spacers: tuple[int, ...]) -> int | None:
    """First spacer count if the stage is staircase shaped, else None.

    Staircase shaped means consecutive spacer counts grow by exactly one
    on every subcolumn but the last, whose count is unconstrained.
    """
    s0 = spacers[0]
    for m in range(stage_r - 1):
        if spacers[m] != s0 + m:
            return None
    return s0


def nonconservativity_check(
    spec: RankOneSpec,
    k: int,
    horizon: int,
    floor: Fraction = Fraction(1, 2),
) -> CertificateReport:
    """Certify non-conservativity of the k-fold power at a finite horizon.

    Requires every stage in the horizon to be staircase shaped.  At stage
    ``j``, tuples of subcolumn indices that spread wider than twice the
    maximum descendant height can never realign, so the fraction of
    surviving tuples is at most the running product of
    ``1 - |K_j| / r_j^k`` with ``|K_j|`` the count of wide tuples.

    The product argument needs each stage's spacer growth to dominate both
    the accumulated descendant spread and the internal triangular offsets;
    rows record that separation check, and the verdict only refutes
    conservativity when every stage passes it and the product stays at or
    above ``floor`` through the horizon.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if horizon < 1:
        raise ValueError(f"need horizon >= 1, got {horizon}")
    floor = Fraction(floor)
    rows: list[dict] = []
    notes: list[str] = []
    partial = Fraction(1)
    all_separated = True
    for j in range(horizon):
        st = spec.stage(j)
        s0 = _staircase_first_spacer(st.r, st.spacers)
        if s0 is None:
            raise NotStronglyArithmetic(
                f"stage {j} of {spec.name} is not staircase shaped"
            )
        maxd = spec.max_descendant(j)
        g = 2 * maxd
        excluded = st.r**k - _gap_tuple_count(st.r, g, k)
        factor = 1 - Fraction(excluded, st.r**k)
        partial *= factor
        # Wide index tuples stay misaligned only if one stage gap exceeds
        # the triangular spread plus twice the accumulated descendants.
        separated = spec.height(j) + s0 > st.r * (st.r - 1) + 2 * maxd + 1
        if not separated:
            all_separated = False
        rows.append(
            {
                "stage": j,
                "r": st.r,
                "max_descendant": maxd,
                "excluded": excluded,
                "factor": factor,
                "partial_product": partial,
                "separated": separated,
            }
        )
    if not all_separated:
        notes.append(
            "some stage lacks the spacer separation the survival bound needs; "
            "the product is reported but certifies nothing"
        )
    if partial < floor:
        notes.append(f"surviving-tuple product fell below the floor {floor}")
    ok = all_separated and partial >= floor
    return CertificateReport(
        kind="non-conservativity",
        horizon=horizon,
        verdict="refuted-conservativity" if ok else "inconclusive-at-horizon",
        rows=tuple(rows),
        summary={
            "k": k,
            "floor": floor,
            "product": partial,
            "all_separated": all_separated,
        },
        notes=tuple(notes),
    )


# -- ergodicity ---------------------------------------------------------------


def nonerg_pair_fraction(
    spec: RankOneSpec,
    n: int,
    b: int,
    *,
    require_distinct_witness: bool = False,
) -> Fraction:
    """Fraction of descendant pairs whose difference shifted by ``b`` reappears.

    A pair ``(a, a')`` counts when ``(a - a') + b`` is again a difference
    of two descendants.  With ``require_distinct_witness`` the witnessing
    pair must differ from ``(a, a')`` in its first coordinate, which only
    matters when the shifted difference has a unique realization.
    """
    D = descendant_set(spec, 0, n)
    if len(D) ** 2 > spec.budget.max_pairs:
        raise BudgetExceeded(
            f"{len(D) ** 2} pairs exceeds max_pairs={spec.budget.max_pairs}"
        )
    Dset = set(D)
    mult: dict[int, int] = {}
    first_minuend: dict[int, int] = {}
    for d in D:
        for d2 in D:
            v = d - d2
            mult[v] = mult.get(v, 0) + 1
            if v not in first_minuend:
                first_minuend[v] = d
    good = 0
    for v, pairs in mult.items():
        target = v + b
        hits = mult.get(target, 0)
        if hits == 0:
            continue
        if hits == 1 and require_distinct_witness:
            d = first_minuend[target]
            # the witness pair is (d, d - target); exclude pairs with a == d
            good += pairs - (1 if d - v in Dset else 0)
        else:
            good += pairs
    return Fraction(good, len(D) ** 2)


def nonergodicity_certificate(
    spec: RankOneSpec, b: int, horizon: int
) -> CertificateReport:
    """Track the pair-realignment fraction for a fixed shift across stages.

    When the fraction stays at or below one half at every computed stage,
    a positive-measure set of pairs never realigns to displacement ``b``
    and ergodicity of the Cartesian square fails.  Stages whose descendant
    count is over budget are skipped and noted, not silently dropped.
    """
    if horizon < 1:
        raise ValueError(f"need horizon >= 1, got {horizon}")
    rows: list[dict] = []
    notes: list[str] = []
    computed = 0
    worst = Fraction(0)
    for n in range(1, horizon + 1):
        try:
            frac = nonerg_pair_fraction(spec, n, b)
        except BudgetExceeded:
            rows.append({"stage": n, "fraction": None, "skipped": True})
            notes.append(f"stage {n} skipped: pair count over budget")
            continue
        computed += 1
        worst = max(worst, frac)
        rows.append({"stage": n, "fraction": frac, "skipped": False})
    ok = computed > 0 and worst <= Fraction(1, 2)
    return CertificateReport(
        kind="non-ergodicity",
        horizon=horizon,
        verdict="refuted-ergodicity" if ok else "inconclusive-at-horizon",
        rows=tuple(rows),
        summary={
            "b": b,
            "max_fraction": worst if computed else None,
            "stages_computed": computed,
        },
        notes=tuple(notes),
    )


# -- rigidity and partial rigidity --------------------------------------------


def rigidity_ratio(H: Sequence[int], a: int) -> Fraction:
    """Fraction of a height set carried back into itself by a shift of ``a``."""
    if not H:
        raise ValueError("height set must be nonempty")
    Hset = set(H)
    return Fraction(sum(1 for x in H if x + a in Hset), len(H))


def rigidity_scan(spec: RankOneSpec, n: int) -> tuple[int, Fraction]:
    """Best rigidity shift for stage ``n``: the positive difference of the
    height set maximizing the overlap ratio, smallest shift on ties."""
    H = spec.height_set(n)
    if len(H) ** 2 > spec.budget.max_pairs:
        raise BudgetExceeded(
            f"{len(H) ** 2} height pairs exceeds max_pairs={spec.budget.max_pairs}"
        )
    candidates = sorted({y - x for x in H for y in H if y > x})
    best_a, best_ratio = 0, Fraction(-1)
    for a in candidates:
        ratio = rigidity_ratio(H, a)
        if ratio > best_ratio:
            best_a, best_ratio = a, ratio
    return best_a, best_ratio


@dataclass(frozen=True)
class AlphaProfile:
    """Self-overlap ratios of a refined level set across all small shifts."""

    stage: int
    k_max: int
    threshold: Fraction
    base_size: int
    exceptions: tuple[tuple[int, Fraction], ...]
    sup_outside: Fraction
    sup_outside_at: int | None
    ratios: tuple[tuple[int, Fraction], ...] | None = None


def alpha_type_profile(
    spec: RankOneSpec,
    B: LevelSet,
    k_max: int,
    threshold: Fraction = Fraction(1, 2),
    *,
    store_ratios: bool = False,
) -> AlphaProfile:
    """Profile the partial-rigidity constant of ``B`` over shifts ``1..k_max``.

    Refines ``B`` once, to the least stage where no shift up to ``k_max``
    can wrap, so all ratios are plain difference counts of one descendant
    set.  Shifts whose ratio exceeds ``threshold`` are the exceptional
    returns; the supremum over the rest estimates the set's intrinsic
    overlap constant.
    """
    if k_max < 1:
        raise ValueError(f"need k_max >= 1, got {k_max}")
    threshold = Fraction(threshold)
    s = least_valid_stage(spec, B, k_max)
    D = refine(spec, B, s).heights
    if len(D) ** 2 > spec.budget.max_pairs:
        raise BudgetExceeded(
            f"{len(D) ** 2} pairs exceeds max_pairs={spec.budget.max_pairs}"
        )
    mult = Counter(y - x for x in D for y in D if y > x)
    base = len(D)
    exceptions: list[tuple[int, Fraction]] = []
    ratios: list[tuple[int, Fraction]] = []
    sup_out = Fraction(0)
    sup_at: int | None = None
    for k in range(1, k_max + 1):
        ratio = Fraction(mult.get(k, 0), base)
        if store_ratios:
            ratios.append((k, ratio))
        if ratio > threshold:
            exceptions.append((k, ratio))
        elif ratio > sup_out:
            sup_out, sup_at = ratio, k
    return AlphaProfile(
        stage=s,
        k_max=k_max,
        threshold=threshold,
        base_size=base,
        exceptions=tuple(exceptions),
        sup_outside=sup_out,
        sup_outside_at=sup_at,
        ratios=tuple(ratios) if store_ratios else None,
    )


# -- arithmetic progressions of stacked spacers --------------------------------


@dataclass(frozen=True)
class StaircaseWitness:
    """A maximal staircase-patterned run inside one height set."""

    a: int  # first element
    k: int  # spacer offset: consecutive increments are h + k + m
    length: int
    fraction: Fraction
    exceeds_tau: bool


def staircase_subset_detect(
    H: Sequence[int], h: int, tau: Fraction, min_k: int = -1
) -> tuple[StaircaseWitness, ...]:
    """Maximal staircase-patterned runs of a height set.

    A run with offset ``k`` visits ``a + m(h + k) + m(m+1)/2``; the m-th
    increment is ``h + k + m``.  Only runs of length at least two are
    reported, and a run is skipped when it extends backward (the longer
    run with offset ``k - 1`` subsumes it, provided that offset is
    allowed).  ``min_k`` bounds the offsets searched; the plain staircase
    pattern itself has offset -1.
    """
    tau = Fraction(tau)
    Hs = tuple(sorted(set(int(x) for x in H)))
    if not Hs:
        return ()
    Hset = set(Hs)
    out: list[StaircaseWitness] = []
    for a in Hs:
        for e1 in Hs:
            k = e1 - a - h - 1
            if e1 <= a or k < min_k:
                continue
            if a - h - k in Hset and k - 1 >= min_k:
                continue  # extends backward; not maximal
            length = 2
            nxt = e1
            while True:
                step = h + k + length  # increment into position `length`
                if nxt + step in Hset:
                    nxt += step
                    length += 1
                else:
                    break
            frac = Fraction(length, len(Hs))
            out.append(StaircaseWitness(a, k, length, frac, frac > tau))
    out.sort(key=lambda w: (-w.length, w.a, w.k))
    return tuple(out)


def arithmetic_report(
    spec: RankOneSpec,
    horizon: int,
    tau: Fraction = Fraction(1, 2),
    min_k: int = -1,
) -> CertificateReport:
    """Look for recurring staircase structure across the stages of a spec.

    A stage qualifies when some maximal run covers more than ``tau`` of
    its height set and has length at least three (length-two runs exist in
    almost any set and certify nothing).  The pattern counts as recurring
    when at least two stages qualify and their cut counts strictly
    increase in stage order.
    """
    if horizon < 1:
        raise ValueError(f"need horizon >= 1, got {horizon}")
    tau = Fraction(tau)
    rows: list[dict] = []
    notes: list[str] = []
    qualifying: list[tuple[int, int]] = []  # (stage, r)
    for n in range(horizon):
        H = spec.height_set(n)
        if len(H) ** 2 > spec.budget.max_pairs:
            rows.append({"stage": n, "r": spec.stage(n).r, "skipped": True})
            notes.append(f"stage {n} skipped: height set too large to scan")
            continue
        witnesses = staircase_subset_detect(H, spec.height(n), tau, min_k)
        best = witnesses[0] if witnesses else None
        qualifies = (
            best is not None and best.length >= 3 and best.exceeds_tau
        )
        r = spec.stage(n).r
        rows.append(
            {
                "stage": n,
                "r": r,
                "skipped": False,
                "best_a": best.a if best else None,
                "best_k": best.k if best else None,
                "best_length": best.length if best else 0,
                "fraction": best.fraction if best else Fraction(0),
                "qualifies": qualifies,
            }
        )
        if qualifies:
            qualifying.append((n, r))
    increasing = all(b[1] > a[1] for a, b in zip(qualifying, qualifying[1:]))
    ok = len(qualifying) >= 2 and increasing
    return CertificateReport(
        kind="arithmetic",
        horizon=horizon,
        verdict="satisfied-at-horizon" if ok else "inconclusive-at-horizon",
        rows=tuple(rows),
        summary={
            "tau": tau,
            "min_k": min_k,
            "qualifying_stages": [q[0] for q in qualifying],
            "cut_counts_increase": increasing,
        },
        notes=tuple(notes),
    )


# -- weak mixing and double ergodicity -----------------------------------------


def divisibility_gcd(spec: RankOneSpec, horizon: int) -> tuple[int, str]:
    """Gcd of all nonzero height-set elements through the horizon.

    A gcd ``g >= 2`` makes every return time a multiple of ``g``, which
    kills weak mixing.  The verdict is ``"not-weak-mixing"`` when the spec
    declares all heights divisible by some ``d >= 2`` dividing ``g`` (so
    the pattern provably persists), ``"at-horizon"`` when ``g >= 2`` holds
    with no such declaration, and ``"refuted"`` when ``g == 1``.
    """
    if horizon < 1:
        raise ValueError(f"need horizon >= 1, got {horizon}")
    g = 0
    for n in range(horizon):
        for e in spec.height_set(n)[1:]:
            g = math.gcd(g, e)
    if g == 1:
        return 1, "refuted"
    declared = _declared_divisors(spec)
    if any(d >= 2 and g % d == 0 for d in declared):
        return g, "not-weak-mixing"
    return g, "at-horizon"


def _declared_divisors(spec: RankOneSpec) -> list[int]:
    out = []
    for tag in spec.declared_properties:
        if tag.startswith("all-heights-divisible-by-"):
            try:
                out.append(int(tag.rsplit("-", 1)[-1]))
            except ValueError:
                continue
    return out


def wde_probe(
    spec: RankOneSpec, A: LevelSet, B: LevelSet, n_max: int
) -> int | None:
    """Smallest positive shift moving ``A`` across both itself and ``B``.

    Returns the least ``n <= n_max`` found with both overlap measures
    positive, or None when no shift in range works at the stage probed.

    A returned shift is always a sound certificate: within one column the
    transformation moves whole levels up rigidly, so matching descendant
    heights at any stage witness positive overlap.  Both sets are refined
    to the deepest stage the descendant budget affords, capped at the
    first stage whose column clears the largest probed shift (beyond that
    point no new differences ``<= n_max`` can appear); a None returned
    short of that cap is horizon-bounded evidence only.
    """
    if n_max < 1:
        return None
    target = least_valid_stage(spec, A, n_max)
    s = max(A.stage, B.stage)
    size = max(len(A.heights), len(B.heights))
    while s < target:
        r = spec.stage(s).r
        if size * r > spec.budget.max_descendants:
            break
        size *= r
        s += 1
    DA = refine(spec, A, s).heights
    DB = refine(spec, B, s).heights
    # Window walks over the sorted height lists; the full difference sets
    # are never materialized.
    pair_ops = 0
    self_hits: set[int] = set()
    for i, d in enumerate(DA):
        j = i + 1
        while j < len(DA) and DA[j] - d <= n_max:
            self_hits.add(DA[j] - d)
            j += 1
        pair_ops += j - i - 1
        if pair_ops > spec.budget.max_pairs:
            raise BudgetExceeded("difference scan over pair budget")
    if not self_hits:
        return None
    cross_hits: set[int] = set()
    for d in DA:
        lo = bisect.bisect_right(DB, d)
        hi = bisect.bisect_right(DB, d + n_max)
        for j in range(lo, hi):
            cross_hits.add(DB[j] - d)
        pair_ops += hi - lo
        if pair_ops > spec.budget.max_pairs:
            raise BudgetExceeded("difference scan over pair budget")
    both = self_hits & cross_hits
    return min(both) if both else None


def koopman_decay_check(
    spec: RankOneSpec, B: LevelSet, k_samples: Sequence[int]
) -> CertificateReport:
    """Check the overlap-decay window bound on sampled shifts.

    For the doubling-spacer family, the self-overlap of a level set under
    a shift ``k`` falling in the window ``h_n <= k < h_{n+1}`` is below
    ``2/n`` of the set's measure.  Only meaningful for specs built by that
    recipe, hence the precondition on the builder kind.
    """
    if spec.params.get("kind") != "koopman":
        raise PreconditionError(
            "decay windows apply only to the doubling-spacer family "
            f"(spec {spec.name!r} was built by {spec.params.get('kind')!r})"
        )
    ks = sorted(set(int(k) for k in k_samples))
    if not ks:
        raise ValueError("need at least one shift to check")
    if ks[0] < spec.height(1):
        raise ValueError(f"shifts must be at least h_1={spec.height(1)}, got {ks[0]}")
    mu = measure(spec, B)
    rows: list[dict] = []
    ok = True
    n = 1
    for k in ks:
        while spec.height(n + 1) <= k:
            n += 1
        ratio = translate_intersection_measure(spec, B, k) / mu
        bound = Fraction(2, n)
        holds = ratio < bound
        ok = ok and holds
        rows.append({"k": k, "window": n, "ratio": ratio, "bound": bound, "ok": holds})
    return CertificateReport(
        kind="koopman-decay",
        horizon=len(ks),
        verdict="satisfied" if ok else "refuted",
        rows=tuple(rows),
        summary={
            "levels": len(B.heights),
            "stage": B.stage,
            "violations": sum(1 for row in rows if not row["ok"]),
        },
    )
