"""Generators for the robust binomial and discretised diffusion markets, plus fixtures."""

from .binomial import (
    BinomialAnalytics,
    BinomialSpec,
    binomial_analytics,
    gen_binomial,
    gen_binomial_sna_fail,
)
from .diffusion import (
    DiffusionAnalytics,
    DiffusionSpec,
    base_tail_mass,
    diffusion_analytics,
    gen_diffusion,
    normal_cdf,
    z_grid,
)
from .fixtures import FIXTURES, FixtureExpectation, fixture, fixture_names

__all__ = [
    "BinomialAnalytics",
    "BinomialSpec",
    "DiffusionAnalytics",
    "DiffusionSpec",
    "FIXTURES",
    "FixtureExpectation",
    "base_tail_mass",
    "binomial_analytics",
    "diffusion_analytics",
    "fixture",
    "fixture_names",
    "gen_binomial",
    "gen_binomial_sna_fail",
    "gen_diffusion",
    "normal_cdf",
    "z_grid",
]
