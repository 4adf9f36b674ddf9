"""Construction recipes: frozen stage data, caps behavior, declarations."""

import warnings
from fractions import Fraction

import pytest

from rankone import analysis, gallery
from rankone.core import (
    Budget,
    CapsMakeConstructionUnfaithful,
    PreconditionError,
)

pytestmark = pytest.mark.filterwarnings(
    "ignore::rankone.core.CapsMakeConstructionUnfaithful"
)


# -- staircase families ------------------------------------------------------


def test_staircase_default_is_classical():
    sp = gallery.staircase()
    assert [sp.stage(n).r for n in range(5)] == [2, 3, 4, 5, 6]
    assert [sp.height(n) for n in range(6)] == [1, 3, 12, 54, 280, 1695]
    assert sp.stage(2).spacers == (0, 1, 2, 3)
    assert "strongly-arithmetic" in sp.declared_properties


def test_staircase_int_is_constant():
    sp = gallery.staircase(3)
    assert [sp.stage(n).r for n in range(4)] == [3, 3, 3, 3]
    assert [sp.height(n) for n in range(4)] == [1, 6, 21, 66]


def test_staircase_sequence_rules():
    inc = gallery.staircase((2, 4))
    assert [inc.stage(n).r for n in range(4)] == [2, 4, 5, 6]
    rep = gallery.staircase((2, 4), extend="repeat")
    assert [rep.stage(n).r for n in range(4)] == [2, 4, 4, 4]
    fn = gallery.staircase(lambda n: n + 5)
    assert [fn.stage(n).r for n in range(3)] == [5, 6, 7]


def test_staircase_rejects_bad_rule():
    with pytest.raises(ValueError):
        gallery.staircase((1,))
    with pytest.raises(ValueError):
        gallery.staircase((2,), extend="sideways")


def test_high_staircase_frozen():
    sp = gallery.high_staircase((3,), (2,), extend="repeat")
    assert sp.height_set(0) == (0, 3, 7)
    assert sp.stage(0).spacers == (2, 3, 4)


def test_high_staircase_requires_growth():
    with pytest.raises(PreconditionError):
        gallery.high_staircase((3, 3), (1,))
    with pytest.raises(ValueError):
        gallery.high_staircase((3, 4), (-1,))


# -- the two spread-out families --------------------------------------------


def test_main_wde_frozen_prefix():
    sp = gallery.main_wde()
    assert [sp.height(n) for n in range(5)] == [1, 1728, 73479, 434304, 27797536]
    assert sp.height_set(0) == (0, 2)
    assert sp.height_set(1)[:3] == (0, 1729, 3459)
    assert max(sp.height_set(1)) == 71709
    assert sp.max_descendant(2) == 71711
    assert sp.max_descendant(3) == 215135
    assert sp.max_descendant(4) == 27578303
    assert [sp.stage(n).r for n in range(4)] == [2, 42, 2, 64]


def test_main_wde_cap_note():
    sp = gallery.main_wde()
    sp.height(4)
    assert "stage 3: cut count capped at 64 (recipe calls for 30762898)" in sp.notes
    assert "caps-max-r-64" in sp.declared_properties


def test_main_wde_even_stage_gap_bound():
    # the even-stage gap must clear twice the deepest descendant
    sp = gallery.main_wde()
    for n in (0, 2):
        g = sp.height_set(n)[1]
        assert g >= 2 * sp.max_descendant(n) + 2


def test_rigid_wde_even_stages_are_progressions():
    sp = gallery.rigid_wde(gallery.Caps(max_r=64))
    for n in (2, 4):
        H = sp.height_set(n)
        gaps = {b - a for a, b in zip(H, H[1:])}
        assert len(gaps) == 1  # arithmetic progression
        assert H[1] == 2 * sp.height(n)


def test_t_q_frozen_small_caps():
    sp = gallery.t_q(2, gallery.Caps(max_r=6))
    assert [sp.height(n) for n in range(6)] == [1, 61, 387, 7741, 46467, 929341]
    assert sp.height_set(1) == (0, 62, 125, 189, 254, 320)
    assert sp.height_set(3) == (0, 7742, 15485, 23229, 30974, 38720)
    assert sp.max_descendant(2) == 322
    assert sp.max_descendant(3) == 1096
    assert sp.max_descendant(4) == 39816
    assert "stage 1: cut count capped at 6 (recipe calls for 42)" in sp.notes
    assert "stage 3: cut count capped at 6 (recipe calls for 156828)" in sp.notes


def test_t_q_uncapped_first_odd_stage():
    sp = gallery.t_q(2, gallery.Caps(max_r=64))
    assert sp.stage(1).r == 42
    assert sp.height(1) == 1728


def test_t_q_even_stage_cuts_match_q():
    for q in (2, 3, 4):
        sp = gallery.t_q(q, gallery.Caps(max_r=6))
        assert sp.stage(0).r == q
        assert sp.stage(2).r == q


def test_caps_warning_fires_once_per_stage():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sp = gallery.t_q(2, gallery.Caps(max_r=6))
        sp.height(4)
        sp.height(4)
    texts = [str(w.message) for w in caught
             if issubclass(w.category, CapsMakeConstructionUnfaithful)]
    assert sum("stage 1" in t for t in texts) == 1
    assert sum("stage 3" in t for t in texts) == 1


def test_caps_validation():
    with pytest.raises(ValueError):
        gallery.Caps(max_r=1)
    assert gallery.Caps(max_r=None).max_r is None


# -- remaining recipes -------------------------------------------------------


def test_koopman_frozen():
    sp = gallery.koopman()
    assert [sp.height(n) for n in range(6)] == [1, 6, 60, 1080, 36720, 2423520]
    assert sp.height_set(0) == (0, 2)
    assert sp.height_set(1) == (0, 12, 24)
    assert sp.stage(1).spacers == (6, 6, 30)
    assert "all-heights-divisible-by-2" in sp.declared_properties


def test_koopman_doubling_height_law():
    sp = gallery.koopman()
    for n in range(1, 5):
        assert sp.height(n + 1) == (2 ** (n + 2) + 2) * sp.height(n)


def test_partition_staircase_frozen():
    sp = gallery.partition_staircase(2)
    assert sp.height(1) == 6
    assert sp.height_set(0) == (0, 2)
    assert "all-heights-divisible-by-2" in sp.declared_properties
    plain = gallery.partition_staircase(1)
    assert not any(
        t.startswith("all-heights-divisible") for t in plain.declared_properties
    )


def test_partition_staircase_divisibility_holds():
    for k in (2, 3, 5):
        sp = gallery.partition_staircase(k)
        g, verdict = analysis.divisibility_gcd(sp, 5)
        assert g % k == 0
        assert verdict == "not-weak-mixing"


def test_not_eic_frozen():
    sp = gallery.not_eic(2)
    assert [sp.height(n) for n in range(5)] == [1, 5, 21, 85, 341]
    assert sp.stage(0).spacers == (1, 2)
    assert "all-heights-divisible-by-2" in sp.declared_properties


def test_builders_take_budget():
    sp = gallery.staircase(budget=Budget(max_stage=3))
    sp.height(3)
    import pytest as _pytest

    with _pytest.raises(Exception):
        sp.height(5)


# -- declaration audit -------------------------------------------------------


def test_verify_declared_properties_all_hold():
    for sp, horizon in (
        (gallery.staircase(), 6),
        (gallery.koopman(), 5),
        (gallery.not_eic(3), 5),
        (gallery.partition_staircase(4), 5),
        (gallery.t_q(2, gallery.Caps(max_r=6)), 5),
        (gallery.main_wde(), 4),
    ):
        for row in gallery.verify_declared_properties(sp, horizon):
            assert row["holds"], (sp.name, row)


def test_verify_declared_properties_catches_lies():
    from rankone.core import RankOneSpec, StageSpec

    def build(n, spec):
        return StageSpec(2, (0, 1))

    liar = RankOneSpec(
        build, name="liar", declared_properties=("all-heights-divisible-by-2",)
    )
    rows = gallery.verify_declared_properties(liar, 3)
    assert any(not row["holds"] for row in rows)
