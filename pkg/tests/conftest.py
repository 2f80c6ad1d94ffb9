from __future__ import annotations

from pathlib import Path

import pytest

import casetree as ct

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def small_ctx() -> ct.Context:
    return ct.parse_context((FIXTURES / "small.ctx.xml").read_text())


@pytest.fixture(scope="session")
def football_ctx() -> ct.Context:
    return ct.football_context()


@pytest.fixture(scope="session")
def three_case_base(small_ctx):
    """The hand fixture: three heterogeneous cases over the small context."""
    cases, priority = ct.parse_case_base(
        (FIXTURES / "three.cases.xml").read_text(), small_ctx
    )
    return cases, priority


@pytest.fixture()
def case1(three_case_base):
    return three_case_base[0][0]


@pytest.fixture()
def exact_case1_target() -> ct.TargetCase:
    """A target matching case1 perfectly under A -> Agent.1."""
    return ct.TargetCase(perceptions=(
        ct.Perception("hasball", (ct.ME,), False),
        ct.Perception("partner", (ct.concrete("Agent.1"),), True),
        ct.Perception("distance", (ct.const("ball", "Ball"), ct.concrete("Agent.1")), "long"),
    ), origin="exact")


@pytest.fixture()
def two_of_three_target() -> ct.TargetCase:
    """Matches case1's hasball and partner but not its distance."""
    return ct.TargetCase(perceptions=(
        ct.Perception("hasball", (ct.ME,), False),
        ct.Perception("partner", (ct.concrete("Agent.1"),), True),
        ct.Perception("distance", (ct.const("ball", "Ball"), ct.concrete("Agent.1")), "far"),
    ), origin="partial")
