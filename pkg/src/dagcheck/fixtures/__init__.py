"""Shipped DAG fixtures: the literature graph and its data-validated refinement."""

from importlib import resources

from ..graph import CausalDag, parse_dag

__all__ = ["fixture_text", "load_fixture", "FIXTURE_NAMES"]

FIXTURE_NAMES = ("literature", "data_validated")


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    return resources.files(__package__).joinpath(f"{name}.dag").read_text("utf-8")


def load_fixture(name: str) -> CausalDag:
    return parse_dag(fixture_text(name))
