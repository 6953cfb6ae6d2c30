"""Scenario registry, scenario files and verification suites.

A scenario bundles an ambient structure, an optional hypersurface and sample
points.  With a hypersurface the points are Σ-points and ambient quantities
are evaluated at their images; otherwise they are ambient points.  Random
scenarios are drawn from seeded low-degree polynomial families, so a name
like ``random_poly_42_4`` always denotes the same fields.
"""

from __future__ import annotations

import itertools
import json
import math
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import flatness, fundamental, hypersurface
from .expr import ParseError
from .fields import AmbientStructure, Chart, DilatonField, MetricError, MetricField, ThreeFormField, exterior_derivative_3form
from .gencurv import GenGeometry, geometry_at
from .hypersurface import EmbeddingMap, HypersurfaceError, HypersurfaceGeometry
from .report import ResidualReport

SUITES = ("identities", "flatness", "constraints", "fundamental")
DEFAULT_TOL = {"identities": 1e-7, "flatness": 1e-8, "constraints": 1e-7, "fundamental": 1e-4}
DH_TOL = 1e-9
EXACT_TOL = 1e-9
RANDOM_SEEDS = range(5)


class ScenarioError(ValueError):
    """Scenario lookup, schema or validation failure."""


@dataclass(frozen=True)
class SurfacePatch:
    """Classical (h, k) data for the fundamental suite, with an optional analytic oracle."""

    h: MetricField
    k: fundamental.BilinearField
    grid: fundamental.GridSpec
    oracle: Callable[[fundamental.GridSpec], np.ndarray] | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    ambient: AmbientStructure
    embedding: EmbeddingMap | None = None
    points: tuple[tuple[float, ...], ...] = ()
    random_points: int = 0
    sample_radius: float = 0.3
    tolerances: dict = field(default_factory=dict)
    surface: SurfacePatch | None = None
    expect_flat: bool = False
    description: str = ""

    @property
    def point_chart(self) -> Chart:
        return self.embedding.sigma_chart if self.embedding is not None else self.ambient.chart

    def tolerance(self, suite: str, override: float | None = None) -> float:
        if override is not None:
            return float(override)
        return float(self.tolerances.get(suite, DEFAULT_TOL[suite]))

    def sample_points(self, seed: int = 0) -> list[tuple[float, ...]]:
        """Explicit points followed by ``random_points`` seeded draws inside the chart domain."""
        out = [tuple(float(x) for x in p) for p in self.points]
        chart = self.point_chart
        rng = np.random.default_rng(seed)
        centre = np.array(out[0]) if out else np.zeros(chart.dim)
        drawn = 0
        while drawn < self.random_points:
            p = centre + rng.uniform(-self.sample_radius, self.sample_radius, chart.dim)
            if chart.contains(p):
                out.append(tuple(float(round(x, 12)) for x in p))
                drawn += 1
        return out

    def ambient_point(self, point: Sequence[float]) -> list[float]:
        if self.embedding is None:
            return list(point)
        return [float(f.value) for f in self.embedding.evaluate(list(point), 0)]

    @property
    def exact_dilaton(self) -> bool:
        return self.ambient.dilaton.is_exact_type()


# ------------------------------------------------------------------ builders
def _euclidean(d: int, names: Sequence[str] | None = None) -> tuple[Chart, MetricField]:
    names = tuple(names or ("x", "y", "z", "w")[:d] if d <= 4 else (f"x{i}" for i in range(d)))
    chart = Chart(f"R{d}", names)
    rows = [["1" if i == j else "0" for j in range(d)] for i in range(d)]
    return chart, MetricField.from_strings(chart, rows, (d, 0))


def _plain(chart: Chart, g: MetricField, H: dict | None = None, X=None, xi=None) -> AmbientStructure:
    return AmbientStructure(chart, g, ThreeFormField.from_strings(chart, H or {}), DilatonField.from_strings(chart, X, xi))


def flat_trivial(d: int) -> Scenario:
    chart, g = _euclidean(d)
    sigma = Chart("hyperplane", tuple(f"s{i}" for i in range(d - 1)))
    emb = EmbeddingMap.from_strings(sigma, chart, [*sigma.coords, "0"])
    return Scenario(
        f"flat_trivial_{d}", _plain(chart, g), emb, points=((0.0,) * (d - 1),), random_points=4, expect_flat=True,
        description="flat space, H = 0, e = 0, hyperplane",
    )


def sphere_in_flat(d: int) -> Scenario:
    chart, g = _euclidean(d)
    if d == 3:
        sigma = Chart("S2", ("t", "p"))
        comps = ["sin(t)*cos(p)", "sin(t)*sin(p)", "cos(t)"]
        points = ((0.8, 0.4), (1.1, 0.3))
        surface = SurfacePatch(*fundamental.sphere_patch_data(), fundamental.SPHERE_GRID, fundamental.sphere_points)
    elif d == 4:
        sigma = Chart("S3", ("a", "b", "c"))
        comps = ["sin(a)*sin(b)*cos(c)", "sin(a)*sin(b)*sin(c)", "sin(a)*cos(b)", "cos(a)"]
        points = ((1.0, 0.9, 0.4), (0.7, 1.2, 0.2))
        surface = None
    else:
        raise ScenarioError("sphere_in_flat is available for d = 3 and d = 4")
    emb = EmbeddingMap.from_strings(sigma, chart, comps, normal_orientation=1 if d == 3 else -1)
    return Scenario(
        f"sphere_in_flat_{d}", _plain(chart, g), emb, points=points, random_points=3, sample_radius=0.2,
        surface=surface, expect_flat=True, description=f"unit S^{d - 1} in flat R^{d}, outward normal",
    )


def hyperplane_with_flux() -> Scenario:
    chart, g = _euclidean(3)
    sigma = Chart("plane", ("s", "t"))
    emb = EmbeddingMap.from_strings(sigma, chart, ["s", "t", "0"])
    return Scenario(
        "hyperplane_with_flux", _plain(chart, g, {"x,y,z": "6"}), emb, points=((0.0, 0.0),), random_points=4,
        description="flat R^3, H = 6 dx∧dy∧dz, Σ = {z = 0}",
    )


def torus_constant_H(c: float = 2.0) -> Scenario:
    chart = Chart("T3", ("x", "y", "z"), {k: (0.0, 2.0 * math.pi) for k in ("x", "y", "z")})
    g = MetricField.from_strings(chart, [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]], (3, 0))
    sigma = Chart("T2", ("s", "t"), {k: (0.0, 2.0 * math.pi) for k in ("s", "t")})
    emb = EmbeddingMap.from_strings(sigma, chart, ["s", "t", repr(math.pi)])
    tag = f"{c:g}".replace(".", "p")
    return Scenario(
        f"torus_constant_H_{tag}", _plain(chart, g, {"x,y,z": repr(float(c))}), emb,
        points=((1.0, 2.0), (3.0, 0.5)), random_points=3,
        description=f"flat 3-torus, H = {c:g} dx∧dy∧dz, e = 0 (not generalised flat)",
    )


def linear_dilaton(slope: float = 0.5) -> Scenario:
    chart, g = _euclidean(3)
    sigma = Chart("graph", ("s", "t"))
    emb = EmbeddingMap.from_strings(sigma, chart, ["s", "t", "0.1*s^2+0.2*s*t"])
    return Scenario(
        "linear_dilaton", _plain(chart, g, xi=["0", "0", repr(float(slope))]), emb,
        points=((0.1, -0.2),), random_points=4,
        description=f"flat R^3 with exact dilaton ξ = d({slope:g} z), graph hypersurface",
    )


def neutral_flat(m: int) -> Scenario:
    amb = flatness.neutral_flat_example(m)
    rng = np.random.default_rng(m)
    points = tuple((u, *(float(round(x, 6)) for x in rng.uniform(-1, 1, 2 * m - 1))) for u in (0.5, 0.8, 1.0, 1.5, 2.0))
    return Scenario(
        f"neutral_flat_example_m{m}", amb, None, points=points, expect_flat=True,
        description="neutral-signature canonically flat example (dilaton in X, ξ = 0)",
    )


def _poly(rng: np.random.Generator, names: Sequence[str], scale: float, const: float = 0.0) -> str:
    """Degree ≤ 3 polynomial plus a 0.1-amplitude trigonometric perturbation."""
    terms = [f"{const:.4f}"]
    for i, x in enumerate(names):
        terms.append(f"{scale * rng.normal():.4f}*{x}")
        y = names[rng.integers(len(names))]
        terms.append(f"{scale * rng.normal():.4f}*{x}*{y}")
    z = names[rng.integers(len(names))]
    terms.append(f"{scale * rng.normal():.4f}*{names[0]}*{z}^2")
    terms.append(f"{0.1 * scale * rng.normal():.4f}*sin({names[-1]})")
    return "+".join(terms).replace("+-", "-")


def _random_fields(seed: int, d: int, exact: bool) -> AmbientStructure:
    rng = np.random.default_rng(seed)
    names = tuple(f"x{i}" for i in range(d))
    chart = Chart(f"poly{d}", names)
    lorentz = bool(seed % 2)
    diag = [-1.0 if (lorentz and i == 0) else 1.0 for i in range(d)]
    rows = [[""] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            rows[i][j] = rows[j][i] = _poly(rng, names, 0.08, diag[i] if i == j else 0.0)
    g = MetricField.from_strings(chart, rows, (d - 1, 1) if lorentz else (d, 0))
    comps = {}
    for t in itertools.combinations(range(d), 3):
        a, b, c = (names[i] for i in t)
        # each component depends only on its own coordinates, so dH = 0
        comps[",".join(map(str, t))] = (
            f"{0.3 * rng.normal():.4f}+{0.2 * rng.normal():.4f}*{a}*{b}+{0.2 * rng.normal():.4f}*{c}^2"
        ).replace("+-", "-")
    H = ThreeFormField.from_strings(chart, comps)
    if exact:
        a = 0.3 * rng.normal(size=d)
        b = 0.2 * rng.normal(size=(d, d))
        b = b + b.T
        c = 0.1 * rng.normal(size=d)
        # ξ = dφ for φ = a·x + ½ xᵀ b x + Σ c_i x_i³
        xi = [
            "+".join([f"{a[i]:.4f}"] + [f"{b[i, j]:.4f}*{names[j]}" for j in range(d)] + [f"{3 * c[i]:.4f}*{names[i]}^2"]).replace("+-", "-")
            for i in range(d)
        ]
        dil = DilatonField.from_strings(chart, xi=xi)
    else:
        X = [_poly(rng, names, 0.2, 0.2 * rng.normal()) for _ in range(d)]
        xi = [_poly(rng, names, 0.2, 0.2 * rng.normal()) for _ in range(d)]
        dil = DilatonField.from_strings(chart, X=X, xi=xi)
    return AmbientStructure(chart, g, H, dil)


def _graph_embedding(chart: Chart) -> EmbeddingMap:
    d = chart.dim
    sigma = Chart("graph", tuple(f"y{i}" for i in range(d - 1)))
    lead = "0.1*y0^2+0.2*y0*y1" + ("+0.1*y2" if d > 3 else "")
    return EmbeddingMap.from_strings(sigma, chart, [lead, *sigma.coords])


def random_poly(seed: int, d: int) -> Scenario:
    if d not in (3, 4):
        raise ScenarioError("random scenarios are generated for d ∈ {3, 4}")
    amb = _random_fields(seed, d, exact=False)
    return Scenario(
        f"random_poly_{seed}_{d}", amb, _graph_embedding(amb.chart), points=((0.0,) * (d - 1),), random_points=4,
        sample_radius=0.25, description=f"seeded random polynomial fields (seed {seed}), graph hypersurface",
    )


def random_exact(seed: int, d: int) -> Scenario:
    if d not in (3, 4):
        raise ScenarioError("random scenarios are generated for d ∈ {3, 4}")
    amb = _random_fields(seed, d, exact=True)
    return Scenario(
        f"random_exact_{seed}_{d}", amb, _graph_embedding(amb.chart), points=((0.0,) * (d - 1),), random_points=4,
        sample_radius=0.25, description=f"seeded random fields with exact dilaton (seed {seed})",
    )


def cylinder_in_flat() -> Scenario:
    chart, g = _euclidean(3)
    sigma = Chart("cylinder", ("u", "v"))
    emb = EmbeddingMap.from_strings(sigma, chart, ["cos(u)", "sin(u)", "v"])
    surface = SurfacePatch(*fundamental.cylinder_patch_data(), fundamental.CYLINDER_GRID, fundamental.cylinder_points)
    return Scenario(
        "cylinder_in_flat", _plain(chart, g), emb, points=((0.3, 0.5),), random_points=2, surface=surface, expect_flat=True,
        description="unit cylinder in flat R^3 (flat h, k = du⊗du)",
    )


_FACTORIES: dict[str, Callable[[], Scenario]] = {}


def _register(name: str, factory: Callable[[], Scenario]) -> None:
    if name in _FACTORIES:
        raise ScenarioError(f"duplicate scenario name {name}")
    _FACTORIES[name] = factory


for _d in (3, 4):
    _register(f"flat_trivial_{_d}", lambda d=_d: flat_trivial(d))
    _register(f"sphere_in_flat_{_d}", lambda d=_d: sphere_in_flat(d))
_register("hyperplane_with_flux", hyperplane_with_flux)
_register("torus_constant_H_2", lambda: torus_constant_H(2.0))
_register("linear_dilaton", linear_dilaton)
_register("cylinder_in_flat", cylinder_in_flat)
for _m in (2, 3):
    _register(f"neutral_flat_example_m{_m}", lambda m=_m: neutral_flat(m))
for _seed in RANDOM_SEEDS:
    for _d in (3, 4):
        _register(f"random_poly_{_seed}_{_d}", lambda s=_seed, d=_d: random_poly(s, d))
        _register(f"random_exact_{_seed}_{_d}", lambda s=_seed, d=_d: random_exact(s, d))

_PATTERNS = (
    (re.compile(r"random_poly_(\d+)_(\d+)$"), lambda m: random_poly(int(m[1]), int(m[2]))),
    (re.compile(r"random_exact_(\d+)_(\d+)$"), lambda m: random_exact(int(m[1]), int(m[2]))),
    (re.compile(r"flat_trivial_(\d+)$"), lambda m: flat_trivial(int(m[1]))),
    (re.compile(r"neutral_flat_example_m(\d+)$"), lambda m: neutral_flat(int(m[1]))),
)


def scenario_names() -> list[str]:
    return list(_FACTORIES)


def builtin_scenarios() -> list[Scenario]:
    return [factory() for factory in _FACTORIES.values()]


def get_scenario(name: str) -> Scenario:
    """Registered scenario by name; seeded families accept any seed."""
    if name in _FACTORIES:
        return _FACTORIES[name]()
    for pattern, build in _PATTERNS:
        m = pattern.match(name)
        if m:
            try:
                return build(m)
            except ValueError as exc:
                raise ScenarioError(str(exc)) from exc
    raise ScenarioError(f"unknown scenario {name!r}")


# ------------------------------------------------------------- scenario files
def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ScenarioError(f"{path}: {message}")


def _string_list(value, path: str, length: int | None = None) -> list[str]:
    _expect(isinstance(value, list), path, "expected a list")
    if length is not None:
        _expect(len(value) == length, path, f"expected {length} entries, got {len(value)}")
    for i, v in enumerate(value):
        _expect(isinstance(v, (str, int, float)) and not isinstance(v, bool), f"{path}[{i}]", "expected an expression string")
    return [str(v) for v in value]


def _parse_at(path: str, fn):
    try:
        return fn()
    except ParseError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _check_exprs(chart: Chart, texts: Sequence[str], path: str) -> None:
    """Parse each expression up front so errors name the exact field."""
    for i, text in enumerate(texts):
        _parse_at(f"{path}[{i}]", lambda t=text: chart.parse(t))


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a scenario from the scenario-file JSON document."""
    _expect(isinstance(doc, dict), "$", "expected an object")
    for key in ("name", "dim", "coords", "signature", "metric"):
        _expect(key in doc, "$", f"missing field {key!r}")
    name = doc["name"]
    _expect(isinstance(name, str) and name, "name", "expected a non-empty string")
    d = doc["dim"]
    _expect(isinstance(d, int) and d >= 2, "dim", "expected an integer ≥ 2")
    coords = doc["coords"]
    _expect(isinstance(coords, list) and all(isinstance(c, str) for c in coords), "coords", "expected a list of names")
    _expect(len(coords) == d, "coords", f"expected {d} names")
    domain = {}
    for c, bounds in doc.get("domain", {}).items():
        _expect(c in coords, f"domain.{c}", "unknown coordinate")
        _expect(isinstance(bounds, list) and len(bounds) == 2, f"domain.{c}", "expected [lo, hi]")
        lo, hi = (-math.inf if b is None else float(b) for b in bounds)
        domain[c] = (lo, hi)
    try:
        chart = Chart(name, tuple(coords), domain)
    except ValueError as exc:
        raise ScenarioError(f"coords: {exc}") from exc
    sig = doc["signature"]
    _expect(isinstance(sig, list) and len(sig) == 2 and all(isinstance(s, int) for s in sig), "signature", "expected [p, q]")
    _expect(sum(sig) == d, "signature", f"p + q must equal dim = {d}")
    metric = doc["metric"]
    _expect(isinstance(metric, list) and len(metric) == d, "metric", f"expected {d} rows")
    rows = [_string_list(row, f"metric[{i}]", d) for i, row in enumerate(metric)]
    for i in range(d):
        for j in range(i + 1, d):
            _expect(rows[i][j].replace(" ", "") == rows[j][i].replace(" ", ""), f"metric[{j}][{i}]", "metric must be symmetric")
    for i, row in enumerate(rows):
        _check_exprs(chart, row, f"metric[{i}]")
    g = _parse_at("metric", lambda: MetricField.from_strings(chart, rows, tuple(sig)))
    H_doc = doc.get("H", {})
    _expect(isinstance(H_doc, dict), "H", "expected an object of \"i,j,k\": expr")
    for key, text in H_doc.items():
        _expect(isinstance(text, (str, int, float)), f"H.{key}", "expected an expression string")
        _parse_at(f"H.{key}", lambda t=text: chart.parse(t))
    try:
        H = ThreeFormField.from_strings(chart, {k: str(v) for k, v in H_doc.items()})
    except ParseError as exc:
        raise ScenarioError(f"H: {exc}") from exc
    except ValueError as exc:
        raise ScenarioError(f"H: {exc}") from exc
    dil_doc = doc.get("dilaton", {})
    _expect(isinstance(dil_doc, dict), "dilaton", "expected an object with X and xi")
    X = _string_list(dil_doc["X"], "dilaton.X", d) if "X" in dil_doc else None
    xi = _string_list(dil_doc["xi"], "dilaton.xi", d) if "xi" in dil_doc else None
    for label, texts in (("X", X), ("xi", xi)):
        if texts is not None:
            _check_exprs(chart, texts, f"dilaton.{label}")
    dil = _parse_at("dilaton", lambda: DilatonField.from_strings(chart, X, xi))
    amb = AmbientStructure(chart, g, H, dil)
    emb = None
    if "hypersurface" in doc:
        hs = doc["hypersurface"]
        _expect(isinstance(hs, dict), "hypersurface", "expected an object")
        _expect("coords" in hs and "embedding" in hs, "hypersurface", "needs coords and embedding")
        scoords = hs["coords"]
        _expect(isinstance(scoords, list) and len(scoords) == d - 1, "hypersurface.coords", f"expected {d - 1} names")
        sigma = Chart(f"{name}_sigma", tuple(scoords))
        comps = _string_list(hs["embedding"], "hypersurface.embedding", d)
        _check_exprs(sigma, comps, "hypersurface.embedding")
        orient = hs.get("orientation", 1)
        _expect(orient in (1, -1), "hypersurface.orientation", "expected 1 or -1")
        emb = _parse_at("hypersurface.embedding", lambda: EmbeddingMap.from_strings(sigma, chart, comps, orient))
    pts = doc.get("points", [])
    _expect(isinstance(pts, list), "points", "expected a list of points")
    dim_pts = d - 1 if emb is not None else d
    for i, p in enumerate(pts):
        _expect(
            isinstance(p, list) and len(p) == dim_pts and all(isinstance(x, (int, float)) for x in p),
            f"points[{i}]", f"expected {dim_pts} numbers",
        )
    tolerances = doc.get("tolerances", {})
    _expect(isinstance(tolerances, dict) and all(k in SUITES for k in tolerances), "tolerances", f"keys must be among {SUITES}")
    scenario = Scenario(
        name, amb, emb, points=tuple(tuple(float(x) for x in p) for p in pts),
        random_points=int(doc.get("random_points", 0)), tolerances=dict(tolerances),
        expect_flat=bool(doc.get("expect_flat", False)),
        description=str(doc.get("description", "")),
    )
    validate_scenario(scenario)
    return scenario


def validate_scenario(scenario: Scenario, seed: int = 0) -> None:
    """Domain, signature, closedness of H and immersion checks at every sample point."""
    amb = scenario.ambient
    for p in scenario.sample_points(seed):
        if not scenario.point_chart.contains(p):
            raise ScenarioError(f"point {list(p)} lies outside the chart domain")
        try:
            q = scenario.ambient_point(p)
            if not amb.chart.contains(q):
                raise ScenarioError(f"point {q} lies outside the chart domain")
            f = amb.fields_at(q, 1)
            dH = float(np.max(np.abs(exterior_derivative_3form(f.H)))) if amb.dim >= 4 else 0.0
            if dH > DH_TOL:
                raise ScenarioError(f"dH residual {dH:.3g} at point {q}")
            if scenario.embedding is not None:
                geo = HypersurfaceGeometry(amb, scenario.embedding, p)
                _ = geo.n
        except MetricError as exc:
            raise ScenarioError(f"signature check failed at {list(p)}: {exc}") from exc
        except HypersurfaceError as exc:
            raise ScenarioError(f"immersion check failed at {list(p)}: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ScenarioError(f"{p}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return scenario_from_dict(doc)


# ---------------------------------------------------------------- suites
@dataclass
class PointReport:
    """Residuals of one suite at one point of one scenario."""

    scenario: str
    suite: str
    point: tuple[float, ...]
    residuals: ResidualReport
    error: str | None = None
    skipped: tuple[str, ...] = ()
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and self.residuals.passed()

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "scenario": self.scenario,
            "suite": self.suite,
            "point": list(self.point),
            "passed": self.passed,
            "residuals": self.residuals.to_dict(),
        }
        if self.error is not None:
            out["error"] = self.error
        if self.skipped:
            out["skipped"] = list(self.skipped)
        if timing:
            out["wall_time"] = self.wall_time
        return out


def _identities(scenario: Scenario, point, tol: float) -> tuple[ResidualReport, list[str]]:
    report = ResidualReport()
    q = scenario.ambient_point(point)
    G: GenGeometry = geometry_at(scenario.ambient, q, 3)
    report.add("ricci_trace", G.mixed_trace_identity(1), tol)
    report.add("ricci_trace_minus", G.mixed_trace_identity(-1), tol)
    skipped = []
    if scenario.embedding is not None:
        hg = HypersurfaceGeometry(scenario.ambient, scenario.embedding, point)
        for s, terms in hg.gauss_terms().items():
            for kind, (lhs, rhs) in terms.items():
                report.add(f"gauss_{kind}_{hypersurface._band_name(s)}", lhs - rhs, tol)
        for s, terms in hg.codazzi_terms().items():
            for kind, (lhs, rhs) in terms.items():
                report.add(f"codazzi_{kind}_{hypersurface._band_name(s)}", lhs - rhs, tol)
    else:
        skipped.append("gauss/codazzi (no hypersurface)")
    return report, skipped


def _flatness(scenario: Scenario, point, tol: float) -> tuple[ResidualReport, list[str]]:
    q = scenario.ambient_point(point)
    report = flatness.flatness_report(scenario.ambient, q).to_report(tol)
    # null-ness of H and e±; the ∇πe± entries of the triviality check vanish only in definite signature
    trivial = flatness.triviality_check(scenario.ambient, q, tol)
    for name in ("h_norm2", "e_norm2_plus", "e_norm2_minus", "iota_e_H_plus", "iota_e_H_minus"):
        report.add(name, trivial[name], tol)
    for sigma in (1, -1):
        report.add(f"conformal_factor_{'plus' if sigma == 1 else 'minus'}", flatness.conformal_factor_residual(scenario.ambient, q, sigma), tol)
    return report, []


def _is_exact_at(hg: HypersurfaceGeometry) -> bool:
    x_size, dxi = hypersurface._exactness_defects(hg.ambient_fields)
    return x_size <= EXACT_TOL and dxi <= EXACT_TOL


def _constraints(scenario: Scenario, point, tol: float) -> tuple[ResidualReport, list[str]]:
    if scenario.embedding is None:
        raise ScenarioError("the constraints suite needs a hypersurface")
    hg = HypersurfaceGeometry(scenario.ambient, scenario.embedding, point)
    report = ResidualReport()
    skipped = []
    for s, (lhs, rhs) in hg.energy_terms().items():
        report.add(f"energy_{hypersurface._band_name(s)}", lhs - rhs, tol)
    exact = _is_exact_at(hg)
    e_zero = all(float(np.max(np.abs(hg.ambient.P0(s)))) == 0.0 for s in (1, -1))
    if exact or e_zero:
        mom = hg.momentum_terms()
        for s, (lhs, rhs) in mom.items():
            report.add(f"momentum_{hypersurface._band_name(s)}", lhs - rhs, tol)
    else:
        skipped.append("momentum (dilaton neither exact nor zero)")
    if exact:
        classical = hg.classical_terms()
        forms = generalised_forms(hg)
        for key in ("energy", "momentum", "antisymmetric"):
            report.add(f"classical_vs_generalised_{key}", classical[key] - forms[key], tol)
    else:
        skipped.append("classical constraints (needs e = 2ξ, dξ = 0)")
    return report, skipped


def generalised_forms(hg: HypersurfaceGeometry) -> dict:
    """The generalised quantities the classical constraint residuals must equal.

    energy: 2Rc⁺(n, n) − ε𝒮c; momentum: ½(Rc⁺(A, n) + Rc⁻(A, n));
    antisymmetric: Rc⁻(A, n) − Rc⁺(A, n).  For exact dilatons Rc⁻ = (Rc⁺)ᵀ.
    """
    mom = hg.momentum_terms()
    energy_lhs = hg.energy_terms()[1][0]
    return {
        "energy": energy_lhs,
        "momentum": 0.5 * (mom[1][0] + mom[-1][0]),
        "antisymmetric": mom[-1][0] - mom[1][0],
    }


def _fundamental(scenario: Scenario, point, tol: float) -> tuple[ResidualReport, list[str]]:
    if scenario.surface is None:
        raise ScenarioError("the fundamental suite needs (h, k) surface data")
    h, k = scenario.surface.h, scenario.surface.k
    report = ResidualReport()
    gauss, codazzi = fundamental.classical_flat_gc_residual(h, k, point)
    report.add("classical_gauss", gauss, tol)
    report.add("classical_codazzi", codazzi, tol)
    data = fundamental.HypersurfaceData(
        h.chart, h, k, ThreeFormField.from_strings(h.chart, {}),
        fundamental.BilinearField.zero(h.chart, skew=True), DilatonField.zero(h.chart),
    )
    report.merge(fundamental.flat_gc_residual(data, point, tol), prefix="flat_")
    return report, []


def reconstruction_report(scenario: Scenario, grid: fundamental.GridSpec | None = None, tol: float | None = None) -> tuple[ResidualReport, fundamental.SyntheticFrame, fundamental.ReconstructionDiagnostics]:
    if scenario.surface is None:
        raise ScenarioError("reconstruction needs (h, k) surface data")
    tol = scenario.tolerance("fundamental", tol)
    grid = grid or scenario.surface.grid
    frame, diag = fundamental.reconstruct_immersion(scenario.surface.h, scenario.surface.k, grid)
    report = ResidualReport()
    for key, value in diag.as_dict().items():
        report.add(key, value, tol)
    if scenario.surface.oracle is not None:
        report.add("procrustes_rms", fundamental.procrustes_rms(frame.points(), scenario.surface.oracle(grid)), tol)
    report.add("k_recovery", fundamental.k_recovery_error(frame, scenario.surface.k), tol)
    return report, frame, diag


_RUNNERS = {"identities": _identities, "flatness": _flatness, "constraints": _constraints, "fundamental": _fundamental}


def applicable_suites(scenario: Scenario, explicit: bool = False) -> list[str]:
    """Suites making claims about ``scenario``.

    Flatness is a claim only for scenarios marked ``expect_flat``; run
    explicitly on other data it reports how far they are from flat.
    """
    out = ["identities"]
    if scenario.expect_flat or explicit:
        out.append("flatness")
    if scenario.embedding is not None:
        out.append("constraints")
    if scenario.surface is not None:
        out.append("fundamental")
    return out


def run_suite(suite: str, scenario: Scenario, tol: float | None = None, seed: int = 0) -> list[PointReport]:
    """One report per sample point (and per suite for ``all``); errors count as failures."""
    if suite == "all":
        return [r for s in applicable_suites(scenario) for r in run_suite(s, scenario, tol, seed)]
    if suite not in _RUNNERS:
        raise ScenarioError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    if suite not in applicable_suites(scenario, explicit=True):
        raise ScenarioError(f"suite {suite} does not apply to scenario {scenario.name}")
    t = scenario.tolerance(suite, tol)
    reports = []
    for p in scenario.sample_points(seed):
        start = time.perf_counter()
        try:
            residuals, skipped = _RUNNERS[suite](scenario, p, t)
            rep = PointReport(scenario.name, suite, p, residuals, skipped=tuple(skipped))
        except (ValueError, ArithmeticError) as exc:
            rep = PointReport(scenario.name, suite, p, ResidualReport(), error=f"{type(exc).__name__}: {exc}")
        rep.wall_time = time.perf_counter() - start
        reports.append(rep)
    if suite == "fundamental":
        start = time.perf_counter()
        try:
            residuals, _, _ = reconstruction_report(scenario, tol=tol)
            rep = PointReport(scenario.name, "fundamental/reconstruction", (), residuals)
        except (ValueError, ArithmeticError) as exc:
            rep = PointReport(scenario.name, "fundamental/reconstruction", (), ResidualReport(), error=f"{type(exc).__name__}: {exc}")
        rep.wall_time = time.perf_counter() - start
        reports.append(rep)
    return reports


def point_summary(scenario: Scenario, point: Sequence[float]) -> dict:
    """Pointwise geometric quantities for ``gcurv report``."""
    q = scenario.ambient_point(point)
    G = geometry_at(scenario.ambient, q, 3)
    rc_plus, rc_minus = G.ricci_mixed
    out = {
        "scenario": scenario.name,
        "point": [float(x) for x in point],
        "ambient_point": [float(x) for x in q],
        "metric": G.g0.tolist(),
        "scalar_curvature": float(np.asarray(getattr(G.classical.Sc, "value", G.classical.Sc))),
        "gen_scalar": G.scalar,
        "dilaton_eom": G.dilaton_eom,
        "h_norm2": G.h_norm2,
        "e_norm2": G.e_norm2,
        "max_abs_gen_riemann": G.riemann.max_abs(),
        "ricci_mixed_plus": rc_plus.tolist(),
        "ricci_mixed_minus": rc_minus.tolist(),
    }
    if scenario.embedding is not None:
        induced, shape = hypersurface.induce(scenario.ambient, scenario.embedding, point)
        out["hypersurface"] = {
            "epsilon": induced.epsilon,
            "h": induced.h.tolist(),
            "k": shape.k.tolist(),
            "normal": shape.n.tolist(),
            "T_plus": shape.T_plus,
            "T_minus": shape.T_minus,
        }
    return out
