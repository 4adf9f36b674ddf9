"""Ready-made rank-one constructions with known certified behavior.

Each function returns a lazily materialized :class:`RankOneSpec` whose
builder recomputes every stage deterministically from the parameters and
the stages below it.  Several recipes call for cut counts that grow
violently (quadratically in the accumulated descendant spread, or worse);
a :class:`Caps` value bounds those counts so the specs stay computable on
a desk.  Capping changes the construction: the capped spec is still a
valid rank-one transformation, but conclusions tied to the uncapped
growth no longer follow, so the cap is recorded on the spec and a
:class:`CapsMakeConstructionUnfaithful` warning is emitted at the stage
where it first bites.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

from rankone.analysis import gap_pair_count
from rankone.core import (
    Budget,
    CapsMakeConstructionUnfaithful,
    PreconditionError,
    RankOneSpec,
    StageSpec,
    is_direct_sum,
)

RSeq = int | Sequence[int] | Callable[[int], int]


@dataclass(frozen=True)
class Caps:
    """Desk-scale limits applied to computed cut counts.

    ``max_r=None`` removes the limit; expect astronomically wide stages
    from the adaptive recipes if you do.
    """

    max_r: int | None = 64

    def __post_init__(self) -> None:
        if self.max_r is not None and self.max_r < 2:
            raise ValueError(f"max_r must be at least 2, got {self.max_r}")

    def to_dict(self) -> dict:
        return {"max_r": self.max_r}


def _rule(
    value: RSeq, extend: str, what: str, floor: int = 0
) -> Callable[[int], int]:
    """Normalize an int / sequence / callable stage parameter to a callable.

    Sequences extend past their end either by repeating the last entry or
    by incrementing it once per further stage.  Explicitly given values
    are range-checked now; callables stay lazy and are checked when the
    stage materializes.
    """
    if callable(value):
        return value
    if isinstance(value, int):
        if value < floor:
            raise ValueError(f"{what} must be at least {floor}, got {value}")
        v = value
        return lambda n: v
    seq = tuple(int(v) for v in value)
    if not seq:
        raise ValueError(f"{what} sequence must be nonempty")
    if any(v < floor for v in seq):
        raise ValueError(f"{what} must be at least {floor}, got {min(seq)}")
    if extend == "repeat":
        return lambda n: seq[n] if n < len(seq) else seq[-1]
    if extend == "increment":
        return lambda n: seq[n] if n < len(seq) else seq[-1] + (n - len(seq) + 1)
    raise ValueError(f"unknown extend mode {extend!r}")


def _params_value(value: RSeq) -> object:
    if callable(value):
        return "<callable>"
    if isinstance(value, int):
        return value
    return list(int(v) for v in value)


# -- plain and shifted staircases ---------------------------------------------


def staircase(
    r: RSeq = (2,),
    *,
    extend: str = "increment",
    name: str = "staircase",
    budget: Budget | None = None,
) -> RankOneSpec:
    """Staircase construction: stage ``n`` stacks ``0, 1, ..., r_n - 1`` spacers.

    The default cut rule grows by one each stage (2, 3, 4, ...), the
    classical choice.
    """
    r_of = _rule(r, extend, "cut count", floor=2)

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        rn = r_of(n)
        return StageSpec(rn, tuple(range(rn)))

    return RankOneSpec(
        build,
        name=name,
        budget=budget,
        params={"kind": "staircase", "r_seq": _params_value(r), "extend": extend},
        declared_properties=("strongly-arithmetic",),
    )


def high_staircase(
    r: RSeq,
    z: RSeq,
    *,
    extend: str = "repeat",
    name: str = "high-staircase",
    budget: Budget | None = None,
) -> RankOneSpec:
    """Staircase lifted by a per-stage base offset: spacers ``z_n + m``.

    Cut counts must increase strictly from stage to stage; that growth is
    what the recurring-pattern certificate keys on.
    """
    r_of = _rule(r, extend, "cut count", floor=2)
    z_of = _rule(z, extend, "offset", floor=0)
    if not callable(r) and not isinstance(r, int):
        seq = tuple(int(v) for v in r)
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise PreconditionError("cut counts must strictly increase")
    # a repeated or callable tail that goes flat is caught lazily below

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        rn, zn = r_of(n), z_of(n)
        if zn < 0:
            raise ValueError(f"offset must be nonnegative, got z_{n}={zn}")
        if n > 0 and rn <= spec.stage(n - 1).r:
            raise PreconditionError(
                f"cut counts must strictly increase: r_{n}={rn} after r_{n - 1}={spec.stage(n - 1).r}"
            )
        return StageSpec(rn, tuple(zn + m for m in range(rn)))

    return RankOneSpec(
        build,
        name=name,
        budget=budget,
        params={
            "kind": "high_staircase",
            "r_seq": _params_value(r),
            "z_seq": _params_value(z),
            "extend": extend,
        },
    )


# -- adaptive two-phase recipes -----------------------------------------------


def _min_r_for_pair_bound(m: int, idx: int) -> int:
    """Least cut count keeping close index pairs a ``1/(4 idx^2)`` minority.

    Close means coordinates within ``m`` of each other; the count is
    quadratic in ``r``, so the least admissible ``r`` comes from the upper
    root of ``r^2 - 4 idx^2 (2m - 1) r + 4 idx^2 (m^2 - m)``.
    """

    def ok(r: int) -> bool:
        if m > r:
            return False
        return 4 * idx * idx * gap_pair_count(r, m) <= r * r

    guess = 2 * idx * idx * (2 * m - 1) + 2 * math.isqrt(
        idx**4 * (2 * m - 1) ** 2 - idx * idx * (m * m - m)
    )
    r = max(2, m, guess - 2)
    while not ok(r):
        r += 1
    while r - 1 >= max(2, m) and ok(r - 1):
        r -= 1
    return r


def _capped(r_faithful: int, caps: Caps, spec: RankOneSpec, stage: int) -> int:
    if caps.max_r is None or r_faithful <= caps.max_r:
        return r_faithful
    note = (
        f"stage {stage}: cut count capped at {caps.max_r} "
        f"(recipe calls for {r_faithful})"
    )
    if note not in spec.notes:
        spec.note(note)
        warnings.warn(
            f"{spec.name}: {note}; conclusions tied to uncapped growth do not follow",
            CapsMakeConstructionUnfaithful,
            stacklevel=3,
        )
    return caps.max_r


def _staircase_run_spacers(r: int) -> tuple[int, ...]:
    """Spacer counts ``1, 2, ..., r-1, r``: one extra level per subcolumn."""
    return tuple(range(1, r)) + (r,)


def main_wde(
    caps: Caps = Caps(),
    *,
    name: str = "alternating-pair-spread",
    budget: Budget | None = None,
) -> RankOneSpec:
    """Alternate wide two-cut stages with pair-spreading staircase stages.

    Even stages cut in two and push the second copy past twice the
    accumulated descendant spread; odd stages cut finely enough that index
    pairs landing close together are a ``1/(4n^2)`` minority, which is the
    engine of the double-ergodicity failure.  The odd cut counts grow
    quadratically in the descendant spread, so ``caps`` matters from
    stage 3 on.
    """

    def odd_r(j: int, maxd_j: int) -> int:
        return _min_r_for_pair_bound(2 * maxd_j + 2, j)

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        h = spec.height(n)
        if n % 2 == 0:
            g = max(2 * spec.max_descendant(n) + 2, h)
            maxd_next = spec.max_descendant(n) + g
            r_next = odd_r(n + 1, maxd_next)
            if caps.max_r is not None:
                r_next = min(r_next, caps.max_r)
            # next stage's pair separation needs h_{n+1} to clear the
            # triangular spread plus twice the descendant spread
            bound = r_next * (r_next - 1) + 2 * maxd_next + 1
            h_next = max(g + h, bound + 1)
            return StageSpec(2, (g - h, h_next - g - h))
        r = _capped(odd_r(n, spec.max_descendant(n)), caps, spec, n)
        return StageSpec(r, _staircase_run_spacers(r))

    return RankOneSpec(
        build,
        name=name,
        budget=budget,
        params={"kind": "main_wde", "caps": caps.to_dict()},
        declared_properties=(
            (f"caps-max-r-{caps.max_r}",) if caps.max_r is not None else ()
        ),
    )


def rigid_wde(
    caps: Caps = Caps(),
    *,
    name: str = "rigid-pair-spread",
    budget: Budget | None = None,
) -> RankOneSpec:
    """Like :func:`main_wde` but with rigidity built into the even stages.

    Even stage ``n`` cuts into ``max(n, 2)`` subcolumns spaced an exact
    doubled height apart, so the shift by that gap maps a ``(r-1)/r``
    fraction of the height set into itself; the fraction climbs to one
    along even stages, giving rigidity in the limit.
    """

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        h = spec.height(n)
        if n % 2 == 0:
            r = max(n, 2)
            maxd_next = spec.max_descendant(n) + (r - 1) * 2 * h
            r_next = _min_r_for_pair_bound(2 * maxd_next + 2, n + 1)
            if caps.max_r is not None:
                r_next = min(r_next, caps.max_r)
            bound = max(r_next * (r_next - 1) + 2 * maxd_next + 1, 10 * r_next)
            h_next = max(2 * r * h, bound + 1)
            return StageSpec(r, (h,) * (r - 1) + (h + h_next - 2 * r * h,))
        r = _capped(
            _min_r_for_pair_bound(2 * spec.max_descendant(n) + 2, n), caps, spec, n
        )
        return StageSpec(r, _staircase_run_spacers(r))

    return RankOneSpec(
        build,
        name=name,
        budget=budget,
        params={"kind": "rigid_wde", "caps": caps.to_dict()},
        declared_properties=(
            (f"caps-max-r-{caps.max_r}",) if caps.max_r is not None else ()
        ),
    )


def t_q(
    q: int,
    caps: Caps = Caps(),
    *,
    name: str | None = None,
    budget: Budget | None = None,
) -> RankOneSpec:
    """Rigid family with a rational-spectrum flavor controlled by ``q``.

    Even stages cut into exactly ``q`` subcolumns a doubled height apart.
    Odd stages cut fine enough for three requirements at once: the solved
    distance inequality at spread ``4 q h``, the close-pair minority
    bound, and a floor of ``16 q h + 1``; all three are evaluated exactly
    and the largest wins, then ``caps`` applies.  Even-stage padding lifts
    the next height past the triangular spread bound, ten times the next
    cut count, and ten times ``q h``.
    """
    if q < 2:
        raise ValueError(f"need q >= 2, got {q}")

    def odd_r_faithful(even_idx: int, h_even: int, maxd_odd: int) -> int:
        # solved distance inequality at spread m = 4qh, index = even stage
        m = 4 * q * h_even
        nn = even_idx
        rad = nn**2 - 2 * m**2 * nn**2 + nn**4 - 4 * m * nn**4 + 4 * m**2 * nn**4
        r_dist = 2 * ((2 * m - 1) * nn * nn + math.isqrt(max(rad, 0))) + 1
        r_pairs = _min_r_for_pair_bound(2 * maxd_odd + 2, even_idx + 1)
        return max(r_dist, r_pairs, 16 * q * h_even + 1, 2)

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        h = spec.height(n)
        if n % 2 == 0:
            maxd_next = spec.max_descendant(n) + (q - 1) * 2 * h
            r_next = odd_r_faithful(n, h, maxd_next)
            if caps.max_r is not None:
                r_next = min(r_next, caps.max_r)
            bound = max(
                r_next * (r_next - 1) + 2 * maxd_next + 1,
                10 * r_next,
                10 * q * h,
            )
            h_next = max((2 * q - 1) * h, bound + 1)
            return StageSpec(q, (h,) * (q - 1) + (h_next - (2 * q - 1) * h,))
        h_even = spec.height(n - 1)
        r = _capped(
            odd_r_faithful(n - 1, h_even, spec.max_descendant(n)), caps, spec, n
        )
        return StageSpec(r, _staircase_run_spacers(r))

    return RankOneSpec(
        build,
        name=name if name is not None else f"doubled-gap-q{q}",
        budget=budget,
        params={"kind": "t_q", "q": q, "caps": caps.to_dict()},
        declared_properties=(
            (f"caps-max-r-{caps.max_r}",) if caps.max_r is not None else ()
        ),
    )


# -- spectral examples ----------------------------------------------------------


def koopman(
    caps: Caps = Caps(),
    *,
    name: str = "doubling-spacers",
    budget: Budget | None = None,
) -> RankOneSpec:
    """Power-of-two spacer stacks giving summable overlap decay.

    Stage ``n`` cuts into ``n + 2`` subcolumns with copy heights
    ``0, 2h, 4h, 8h, ..., 2^{n+1} h``, then pads the top so the next
    height is ``(2^{n+2} + 2) h``, keeping every height even.  Heights
    grow doubly exponentially; expect the bit budget to bite near stage
    twelve.
    """

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        h = spec.height(n)
        r = n + 2
        if caps.max_r is not None and r > caps.max_r:
            r = _capped(r, caps, spec, n)
        spacers = [h] + [(2**l - 1) * h for l in range(1, r - 1)]
        spacers.append((2 ** (n + 1) + 1) * h)
        return StageSpec(r, tuple(spacers))

    return RankOneSpec(
        build,
        name=name,
        budget=budget,
        params={"kind": "koopman", "caps": caps.to_dict()},
        declared_properties=("all-heights-divisible-by-2",),
    )


def partition_staircase(
    k: int,
    r: RSeq = (2,),
    *,
    extend: str = "increment",
    name: str | None = None,
    budget: Budget | None = None,
) -> RankOneSpec:
    """Staircase variant whose copy heights all share the divisor ``k``.

    Spacer counts grow in steps of ``k`` from a per-stage phase correction
    ``(-h_n) mod k``, so every height-set element is a multiple of ``k``
    while the staircase shape survives.  With ``k = 1`` this is a plain
    staircase in a shifted convention.
    """
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    r_of = _rule(r, extend, "cut count", floor=2)

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        rn = r_of(n)
        d = (-spec.height(n)) % k
        return StageSpec(rn, tuple(d + k * m for m in range(rn)))

    return RankOneSpec(
        build,
        name=name if name is not None else f"divisible-staircase-{k}",
        budget=budget,
        params={
            "kind": "partition_staircase",
            "k": k,
            "r_seq": _params_value(r),
            "extend": extend,
        },
        declared_properties=(
            (f"all-heights-divisible-by-{k}",) if k >= 2 else ()
        ),
    )


def not_eic(
    q: int,
    *,
    name: str | None = None,
    budget: Budget | None = None,
) -> RankOneSpec:
    """Constant ``q``-cut recipe with evenly doubled copy heights.

    Every stage has height set ``{0, 2h, ..., 2(q-1)h}`` and exactly one
    spacer on the last subcolumn, so heights satisfy ``h' = 2qh + 1``.
    The even height sets block weak mixing while the single spacer keeps
    the construction conservative.
    """
    if q < 2:
        raise ValueError(f"need q >= 2, got {q}")

    def build(n: int, spec: RankOneSpec) -> StageSpec:
        h = spec.height(n)
        return StageSpec(q, (h,) * (q - 1) + (h + 1,))

    return RankOneSpec(
        build,
        name=name if name is not None else f"even-gaps-q{q}",
        budget=budget,
        params={"kind": "not_eic", "q": q},
        declared_properties=("all-heights-divisible-by-2",),
    )


# -- declared-property audit ----------------------------------------------------


def verify_declared_properties(spec: RankOneSpec, horizon: int) -> list[dict]:
    """Check a spec's declared properties against its materialized stages.

    Declarations are recipe promises, not trusted facts; this audits each
    one through the horizon and reports what actually holds.
    """
    results: list[dict] = []
    for tag in sorted(spec.declared_properties):
        if tag.startswith("all-heights-divisible-by-"):
            d = int(tag.rsplit("-", 1)[-1])
            bad = [
                (n, e)
                for n in range(horizon)
                for e in spec.height_set(n)[1:]
                if e % d != 0
            ]
            results.append(
                {
                    "property": tag,
                    "holds": not bad,
                    "detail": f"first violation {bad[0]}" if bad else f"all heights through stage {horizon} divisible by {d}",
                }
            )
        elif tag == "strongly-arithmetic":
            bad_stage = None
            for n in range(horizon):
                st = spec.stage(n)
                s0 = st.spacers[0]
                if any(st.spacers[m] != s0 + m for m in range(st.r - 1)):
                    bad_stage = n
                    break
            results.append(
                {
                    "property": tag,
                    "holds": bad_stage is None,
                    "detail": (
                        f"stage {bad_stage} is not staircase shaped"
                        if bad_stage is not None
                        else f"stages 0..{horizon - 1} staircase shaped"
                    ),
                }
            )
        elif tag == "direct-sum":
            holds = is_direct_sum(spec, 0, horizon)
            results.append(
                {
                    "property": tag,
                    "holds": holds,
                    "detail": f"descendant sums through stage {horizon} {'are' if holds else 'are not'} collision free",
                }
            )
        elif tag.startswith("caps-max-r-"):
            results.append(
                {
                    "property": tag,
                    "holds": True,
                    "detail": "cap recorded; see spec notes for stages where it bit",
                }
            )
        else:
            results.append(
                {"property": tag, "holds": False, "detail": "unknown property tag"}
            )
    return results
