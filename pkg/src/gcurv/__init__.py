"""Numerical generalised curvature for exact Courant algebroids on charts.

Fields are given as expression strings over chart coordinates and evaluated as
order-3 jets, so every derivative is exact up to rounding.
"""

from .expr import DomainError, ParseError, parse
from .fields import AmbientStructure, Chart, DilatonField, MetricError, MetricField, ThreeFormField
from .gencurv import GenGeometry, dilaton_eom, gen_ricci_mixed, gen_riemann, gen_scalar, geometry_at
from .hypersurface import EmbeddingMap, HypersurfaceError, HypersurfaceGeometry
from .jets import Jet
from .report import ResidualReport
from .scenarios import Scenario, ScenarioError, builtin_scenarios, get_scenario, load_scenario, run_suite

__all__ = [
    "AmbientStructure",
    "Chart",
    "DilatonField",
    "DomainError",
    "EmbeddingMap",
    "GenGeometry",
    "HypersurfaceError",
    "HypersurfaceGeometry",
    "Jet",
    "MetricError",
    "MetricField",
    "ParseError",
    "ResidualReport",
    "Scenario",
    "ScenarioError",
    "ThreeFormField",
    "builtin_scenarios",
    "dilaton_eom",
    "gen_ricci_mixed",
    "gen_riemann",
    "gen_scalar",
    "geometry_at",
    "get_scenario",
    "load_scenario",
    "parse",
    "run_suite",
]
