"""Diagnostics for canonically flat Courant algebroids.

When the generalised Riemann tensor of the canonical connection vanishes, the
metric is conformally flat and (H, e) satisfy a rigid set of structural
equations.  Each check here evaluates one of those equations at a point and
reports its defect, so the same functions serve as flatness diagnostics on
arbitrary data.

Conventions follow :mod:`gcurv.gencurv`: π e± = X ± g⁻¹ξ, |e±|² = g(πe±, πe±),
div^𝒢(e±) = tr ∇πe±, ∇^± = ∇ ± ½ g⁻¹H.  CS(A, B) = |A|²|B|² − g(A, B)².
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .classical import covariant_derivative, weyl_decomposition
from .fields import AmbientStructure, Chart, DilatonField, MetricField, ThreeFormField
from .gencurv import GenGeometry, geometry_at
from .report import ResidualReport

U_MIN = 1e-3
FLAT_TOL = 1e-8
RANDOM_PAIRS = 6


@dataclass(frozen=True)
class FlatnessReport:
    max_rm: float
    weyl: float
    nabla_h: float
    nabla_e_plus: float
    nabla_e_minus: float
    dilaton_eom: float
    q_vs_h2: float
    div_antisymmetry: float
    quadratic_rm: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)

    def to_report(self, tol: float = FLAT_TOL) -> ResidualReport:
        report = ResidualReport()
        for name, value in self.as_dict().items():
            report.add(name, value, tol)
        return report


@dataclass(frozen=True)
class QTensor:
    """Q(A, B) built from the metric and one of the vectors πe±."""

    g: np.ndarray
    P: np.ndarray

    def __call__(self, A: np.ndarray, B: np.ndarray) -> float:
        g, P = self.g, self.P
        d = len(g)
        AA, BB, AB = A @ g @ A, B @ g @ B, A @ g @ B
        AP, BP = A @ g @ P, B @ g @ P
        e2 = P @ g @ P
        cs = AA * BB - AB**2
        return (2 * e2 * cs - BB * AP**2 - AA * BP**2 + 2 * AB * AP * BP) / (2.0 * (d - 1) ** 2)


def orthogonal_pairs(g: np.ndarray, seed: int = 0, extra: int = RANDOM_PAIRS) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Pairs with g(A, B) = 0: an orthonormal frame plus Gram–Schmidt random pairs."""
    lam, V = np.linalg.eigh(g)
    frame = [V[:, i] / math.sqrt(abs(lam[i])) for i in range(len(g))]
    for i in range(len(frame)):
        for j in range(i + 1, len(frame)):
            yield frame[i], frame[j]
    rng = np.random.default_rng(seed)
    made = 0
    while made < extra:
        A, B = rng.standard_normal(len(g)), rng.standard_normal(len(g))
        AA = A @ g @ A
        if abs(AA) < 1e-3:
            continue
        yield A, B - (A @ g @ B) / AA * A
        made += 1


def _geometry(amb: AmbientStructure, point: Sequence[float]) -> GenGeometry:
    if "u" in amb.chart.coords and amb.chart.domain.get("u", (None,))[0] == U_MIN:
        u = point[amb.chart.coords.index("u")]
        if not u > U_MIN:
            raise ValueError(f"sample point needs u > {U_MIN} (φ is singular at u = 0)")
    return geometry_at(amb, list(point), 3)


def _nabla_pm_lowered(G: GenGeometry, s: int) -> np.ndarray:
    """[a, b] = g(∇^±_a πe±, ∂_b)."""
    return G.nabla_P(s, same=False) @ G.g0


def _q_residual(G: GenGeometry) -> float:
    d, g, H2 = G.d, G.g0, G.H2
    worst = 0.0
    for s in (1, -1):
        Q = QTensor(g, G.P0(s))
        div = G.div(s)
        for A, B in orthogonal_pairs(g):
            cs = (A @ g @ A) * (B @ g @ B)
            lhs = np.einsum("abcd,a,b,c,d->", H2, A, B, A, B) / 6.0
            rhs = -s * div / (d * (d - 1)) * cs + Q(A, B)
            worst = max(worst, abs(lhs - rhs))
    return worst


def _quadratic_rm_residual(G: GenGeometry) -> float:
    d, g, Rm = G.d, G.g0, G.Rm0
    worst = 0.0
    for s in (1, -1):
        P = G.P0(s)
        e2 = P @ g @ P
        div = G.div(s)
        for A, B in orthogonal_pairs(g):
            AA, BB = A @ g @ A, B @ g @ B
            AP, BP = A @ g @ P, B @ g @ P
            lhs = np.einsum("abcd,a,b,c,d->", Rm, A, B, A, B)
            rhs = s * div / (2 * d * (d - 1)) * AA * BB + 3.0 / (4 * (d - 1) ** 2) * (
                2 * e2 * AA * BB - BB * AP**2 - AA * BP**2
            )
            worst = max(worst, abs(lhs - rhs))
    return worst


def flatness_report(amb: AmbientStructure, point: Sequence[float]) -> FlatnessReport:
    G = _geometry(amb, point)
    if G.d < 3:
        raise ValueError("flatness diagnostics need d ≥ 3")
    cl = G.classical
    _, _, W, _ = weyl_decomposition(G.Rm0, np.asarray(cl.Rc.value), float(cl.Sc.value), G.g0)
    nabla_e = {}
    for s in (1, -1):
        target = G.div(s) / G.d * G.g0
        nabla_e[s] = float(np.max(np.abs(_nabla_pm_lowered(G, s) - target)))
    return FlatnessReport(
        max_rm=G.riemann.max_abs(),
        weyl=float(np.max(np.abs(W))),
        nabla_h=float(np.max(np.abs(G.nabla_H))),
        nabla_e_plus=nabla_e[1],
        nabla_e_minus=nabla_e[-1],
        dilaton_eom=abs(G.dilaton_eom),
        q_vs_h2=_q_residual(G),
        div_antisymmetry=abs(G.div(1) + G.div(-1)),
        quadratic_rm=_quadratic_rm_residual(G),
    )


def q_vs_h2_residual(amb: AmbientStructure, point: Sequence[float]) -> float:
    """max |H⁽²⁾(A,B,A,B)/6 ± div^𝒢(e±) CS(A,B)/(d(d−1)) − Q(A,B)| over orthogonal pairs."""
    return _q_residual(_geometry(amb, point))


def triviality_check(amb: AmbientStructure, point: Sequence[float], tol: float = FLAT_TOL) -> ResidualReport:
    """Defects of |H|² = |e±|² = 0, ∇^±πe± = ∇πe± = 0 and ι_{πe±}H = 0.

    In Riemannian signature these force H = 0 and e = 0, which is checked
    componentwise as well.
    """
    G = _geometry(amb, point)
    report = ResidualReport()
    report.add("h_norm2", G.h_norm2, tol)
    for s, name in ((1, "plus"), (-1, "minus")):
        P = G.P0(s)
        report.add(f"e_norm2_{name}", P @ G.g0 @ P, tol)
        report.add(f"nabla_pm_e_{name}", G.nabla_P(s, same=False), tol)
        report.add(f"nabla_e_{name}", _levi_civita_nabla_P(G, s), tol)
        report.add(f"iota_e_H_{name}", np.einsum("k,kab->ab", P, G.H0), tol)
    if amb.g.signature[1] == 0:
        report.add("H_components", G.H0, tol)
        report.add("e_components", np.concatenate([G.P0(1), G.P0(-1)]), tol)
    return report


def _levi_civita_nabla_P(G: GenGeometry, s: int) -> np.ndarray:
    P = G._as_jet(G.P[s], (G.d,))
    return np.asarray(covariant_derivative(P, G.classical.Gamma, "u").value)


def conformal_factor_residual(amb: AmbientStructure, point: Sequence[float], sigma: int = 1) -> float:
    """Defect of the flat-conformal-factor Ricci equation with grad φ = σ√3/(2(d−1)) πe₊.

    The equation Rc = (d−2)(∇dφ − dφ⊗dφ) + (Δφ + (d−2)|dφ|²) g says that
    e^{2φ} g is flat; Δφ = tr_g ∇dφ.
    """
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    G = _geometry(amb, point)
    d, g, ginv = G.d, G.g0, G.ginv0
    c = sigma * math.sqrt(3.0) / (2.0 * (d - 1))
    dphi = c * g @ G.P0(1)
    hess = c * _levi_civita_nabla_P(G, 1) @ g  # [a, b] = ∇_a (dφ)_b
    lap = float(np.einsum("ab,ab->", ginv, hess))
    norm2 = float(dphi @ ginv @ dphi)
    rhs = (d - 2) * (hess - np.outer(dphi, dphi)) + (lap + (d - 2) * norm2) * g
    return float(np.max(np.abs(np.asarray(G.classical.Rc.value) - rhs)))


def neutral_flat_example(m: int, epsilon: int = 1) -> AmbientStructure:
    """Flat structure on {u > 0} ⊂ ℝ^{2m} with a nonzero, null H.

    Coordinates (u, v, x2..xm, y2..ym), g = (du⊙dv + Σ dx² − Σ dy²)/u,
    πe₊ = (2(d−1)/√3) ∂_v and H = Σ u⁻² du∧dx^i∧dy^i.  ``epsilon`` = +1 puts
    the dilaton in X (ξ = 0); −1 puts it in ξ = gπe₊ (X = 0).
    """
    if m < 2:
        raise ValueError("the neutral example needs m ≥ 2 (d = 2m > 2)")
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +1 or -1")
    d = 2 * m
    xs = [f"x{i}" for i in range(2, m + 1)]
    ys = [f"y{i}" for i in range(2, m + 1)]
    chart = Chart("neutral", ("u", "v", *xs, *ys), {"u": (U_MIN, math.inf)})
    rows = [["0"] * d for _ in range(d)]
    rows[0][1] = rows[1][0] = "1/(2*u)"
    for i in range(m - 1):
        rows[2 + i][2 + i] = "1/u"
        rows[m + 1 + i][m + 1 + i] = "-1/u"
    g = MetricField.from_strings(chart, rows, (m, m))
    H = ThreeFormField.from_strings(chart, {f"u,{x},{y}": "u^-2" for x, y in zip(xs, ys)})
    c = 2.0 * (d - 1) / math.sqrt(3.0)
    if epsilon == 1:
        dil = DilatonField.from_strings(chart, X=["0", repr(c)] + ["0"] * (d - 2))
    else:
        dil = DilatonField.from_strings(chart, xi=[f"{c / 2!r}/u"] + ["0"] * (d - 1))
    return AmbientStructure(chart, g, H, dil)
