"""Shared strategies and helpers for the test suite."""

from hypothesis import strategies as st

from rankone.core import RankOneSpec, StageSpec, explicit_spec


@st.composite
def stage_lists(draw, max_stages=4, max_r=5, max_spacer=4):
    """A short list of (r, spacers) pairs suitable for explicit_spec."""
    n = draw(st.integers(min_value=1, max_value=max_stages))
    out = []
    for _ in range(n):
        r = draw(st.integers(min_value=2, max_value=max_r))
        spacers = tuple(
            draw(st.integers(min_value=0, max_value=max_spacer)) for _ in range(r)
        )
        out.append((r, spacers))
    return out


@st.composite
def small_specs(draw, **kwargs) -> RankOneSpec:
    return explicit_spec(draw(stage_lists(**kwargs)))


def product_of_cuts(spec: RankOneSpec, i: int, j: int) -> int:
    out = 1
    for m in range(i, j):
        out *= spec.stage(m).r
    return out
