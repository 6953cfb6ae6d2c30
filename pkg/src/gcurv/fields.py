"""Charts and expression-valued fields (metric, twist, dilaton).

The exact Courant algebroid is always presented as the H-twisted generalised
tangent bundle, so a generalised metric is the same thing as a metric ``g``.
Objects living on E± are stored as TM tensors through the isometries
σ±(X) = X ± gX, and the pairing on E± is evaluated as ±g.

Evaluating a field produces :class:`~gcurv.jets.Jet` arrays: ``g`` has value
shape (d, d), ``H`` (d, d, d), ``X`` and ``xi`` (d,).  The same evaluation
works with an environment of jets in other variables, which is how ambient
fields are pulled back along an embedding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import jets
from .expr import Expr, Neg, Num, evaluate, is_zero_literal, parse
from .jets import Jet, einsum

DET_TOL = 1e-12
EIG_TOL = 1e-10


class MetricError(ValueError):
    """Degenerate metric or signature mismatch at a point."""


@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple[str, ...]
    domain: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.coords)) != len(self.coords):
            raise ValueError(f"chart {self.name}: coordinate names must be unique")
        if len(self.coords) < 1:
            raise ValueError(f"chart {self.name}: needs at least one coordinate")
        for c in self.domain:
            if c not in self.coords:
                raise ValueError(f"chart {self.name}: domain constraint on unknown coordinate {c}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def contains(self, point: Sequence[float]) -> bool:
        for c, (lo, hi) in self.domain.items():
            x = point[self.coords.index(c)]
            if not lo < x < hi:
                return False
        return True

    def parse(self, text: str | float | int) -> Expr:
        if isinstance(text, (int, float)):
            return Num(float(text))
        return parse(text, self.coords)


def _env(point_or_env: Sequence, order: int) -> list:
    if point_or_env and isinstance(point_or_env[0], Jet):
        return list(point_or_env)
    return [Jet.variable(point_or_env, i, order) for i in range(len(point_or_env))]


def _jet_array(values: list, shape: tuple[int, ...], env: list) -> Jet:
    ref = env[0]
    full = [v if isinstance(v, Jet) else Jet.constant(v, ref.dim, ref.order) for v in values]
    return Jet.stack(full, shape)


@dataclass(frozen=True)
class MetricField:
    chart: Chart
    components: tuple[tuple[Expr, ...], ...]
    signature: tuple[int, int]

    def __post_init__(self):
        d = self.chart.dim
        if len(self.components) != d or any(len(row) != d for row in self.components):
            raise ValueError(f"metric must be {d}x{d}")
        if sum(self.signature) != d:
            raise ValueError(f"signature {self.signature} does not add up to dimension {d}")
        for i in range(d):
            for j in range(i):
                if self.components[i][j] != self.components[j][i]:
                    raise ValueError(f"metric components ({i},{j}) and ({j},{i}) differ")

    @classmethod
    def from_strings(cls, chart: Chart, rows: Sequence[Sequence], signature: Sequence[int]) -> "MetricField":
        d = chart.dim
        parsed = [[None] * d for _ in range(d)]
        for i in range(d):
            for j in range(i, d):
                e = chart.parse(rows[i][j])
                parsed[i][j] = parsed[j][i] = e
        return cls(chart, tuple(tuple(r) for r in parsed), tuple(signature))

    def evaluate(self, point_or_env: Sequence, order: int = 3) -> Jet:
        env = _env(point_or_env, order)
        d = self.chart.dim
        upper = {}
        for i in range(d):
            for j in range(i, d):
                upper[i, j] = evaluate(self.components[i][j], env)
        vals = [upper[min(i, j), max(i, j)] for i in range(d) for j in range(d)]
        return _jet_array(vals, (d, d), env)


@dataclass(frozen=True)
class ThreeFormField:
    chart: Chart
    components: Mapping[tuple[int, int, int], Expr]

    def __post_init__(self):
        for key in self.components:
            i, j, k = key
            if not i < j < k < self.chart.dim:
                raise ValueError(f"three-form key {key} must satisfy i < j < k < d")

    @classmethod
    def from_strings(cls, chart: Chart, comps: Mapping[str, str]) -> "ThreeFormField":
        """Keys are "i,j,k" (0-based indices or coordinate names); unordered keys are sorted with sign."""
        out: dict[tuple[int, int, int], Expr] = {}
        signs: dict[tuple[int, int, int], int] = {}
        for key, text in comps.items():
            parts = [p.strip() for p in str(key).split(",")]
            if len(parts) != 3:
                raise ValueError(f"three-form key {key!r} needs three indices")
            idx = [chart.coords.index(p) if p in chart.coords else int(p) for p in parts]
            if len(set(idx)) < 3:
                continue
            order = sorted(range(3), key=lambda a: idx[a])
            perm_sign = _perm_sign(order)
            canon = tuple(sorted(idx))
            e = chart.parse(text)
            if canon in out:
                raise ValueError(f"three-form component {canon} given twice")
            out[canon] = e
            signs[canon] = perm_sign
        final = {}
        for canon, e in out.items():
            if signs[canon] < 0:
                e = Neg(e)
            final[canon] = e
        return cls(chart, final)

    def evaluate(self, point_or_env: Sequence, order: int = 3) -> Jet:
        env = _env(point_or_env, order)
        d = self.chart.dim
        vals: list = [0.0] * d**3
        for (i, j, k), e in self.components.items():
            v = evaluate(e, env)
            for perm in itertools.permutations((0, 1, 2)):
                idx = (i, j, k)
                p = tuple(idx[a] for a in perm)
                vals[(p[0] * d + p[1]) * d + p[2]] = v if _perm_sign(perm) > 0 else -v
        return _jet_array(vals, (d, d, d), env)

    def is_zero(self) -> bool:
        return all(is_zero_literal(e) for e in self.components.values())


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class DilatonField:
    chart: Chart
    X: tuple[Expr, ...]
    xi: tuple[Expr, ...]

    @classmethod
    def from_strings(cls, chart: Chart, X: Sequence | None = None, xi: Sequence | None = None) -> "DilatonField":
        d = chart.dim
        X = X if X is not None else [0] * d
        xi = xi if xi is not None else [0] * d
        if len(X) != d or len(xi) != d:
            raise ValueError(f"dilaton components must have length {d}")
        return cls(chart, tuple(chart.parse(t) for t in X), tuple(chart.parse(t) for t in xi))

    @classmethod
    def zero(cls, chart: Chart) -> "DilatonField":
        return cls.from_strings(chart)

    def evaluate(self, point_or_env: Sequence, order: int = 3) -> tuple[Jet, Jet]:
        env = _env(point_or_env, order)
        d = self.chart.dim
        X = _jet_array([evaluate(e, env) for e in self.X], (d,), env)
        xi = _jet_array([evaluate(e, env) for e in self.xi], (d,), env)
        return X, xi

    def is_exact_type(self) -> bool:
        """True when X vanishes identically (so e = 2ξ)."""
        return all(is_zero_literal(e) for e in self.X)


@dataclass(frozen=True)
class PointFields:
    """Jets of g, g⁻¹, H, X, ξ at one point (or pulled back to another chart)."""

    g: Jet
    ginv: Jet
    H: Jet
    X: Jet
    xi: Jet

    @property
    def dim(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class AmbientStructure:
    chart: Chart
    g: MetricField
    H: ThreeFormField
    dilaton: DilatonField

    def __post_init__(self):
        for f in (self.g, self.H, self.dilaton):
            if f.chart != self.chart:
                raise ValueError("all fields of an ambient structure must share its chart")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def fields_at(self, point_or_env: Sequence, order: int = 3, check: bool = True) -> PointFields:
        env = _env(point_or_env, order)
        g = self.g.evaluate(env)
        if check:
            check_metric(g.value, self.g.signature)
        ginv = jets.matrix_inverse(g)
        H = self.H.evaluate(env)
        X, xi = self.dilaton.evaluate(env)
        return PointFields(g, ginv, H, X, xi)


# ----------------------------------------------------------------- operations
def check_metric(g: np.ndarray, signature: Sequence[int] | None = None) -> None:
    det = float(np.linalg.det(g))
    if abs(det) <= DET_TOL:
        raise MetricError(f"degenerate metric: det g = {det:.3e}")
    if signature is not None:
        eig = np.linalg.eigvalsh(0.5 * (g + g.T))
        p = int(np.sum(eig > EIG_TOL))
        q = int(np.sum(eig < -EIG_TOL))
        if (p, q) != tuple(signature):
            raise MetricError(f"signature mismatch: found {(p, q)}, declared {tuple(signature)}")


def metric_at(g: MetricField, point: Sequence[float]):
    """Return (g_ij, g^ij, ∂_k g_ij, ∂_k∂_l g_ij) at ``point``; derivative indices last."""
    jet = g.evaluate(point)
    check_metric(jet.value, g.signature)
    ginv = np.linalg.inv(jet.value)
    return jet.value, ginv, jet.grad, jet.hess


def h2_form(H, ginv):
    """H⁽²⁾(X,Y,V,W) = g^{ab} H(X,Y,a) H(V,W,b)."""
    return einsum("xya,vwb,ab->xyvw", H, H, ginv)


def h_squared(H, ginv):
    """H²(X,Y) = g^{cd} H⁽²⁾(X,c,Y,d)."""
    return einsum("xki,ylj,kl,ij->xy", H, H, ginv, ginv)


def h_norm2(H, ginv):
    """|H|² = H_{ijk} H^{ijk}, summing over all index orderings."""
    return einsum("ijk,lmn,il,jm,kn->", H, H, ginv, ginv, ginv)


def exterior_derivative_3form(H: Jet) -> np.ndarray:
    """Components (dH)_{ijkl} at the base point."""
    return _dH(H.grad)


def _dH(G: np.ndarray) -> np.ndarray:
    # (dH)_{ijkl} = ∂_i H_jkl − ∂_j H_ikl + ∂_k H_ijl − ∂_l H_ijk
    t1 = np.einsum("jkli->ijkl", G)
    t2 = np.einsum("iklj->ijkl", G)
    t3 = np.einsum("ijlk->ijkl", G)
    t4 = np.einsum("ijkl->ijkl", G)
    return t1 - t2 + t3 - t4


@dataclass(frozen=True)
class HContractions:
    normH2: float
    Hsq: np.ndarray
    H2form: np.ndarray
    H: np.ndarray
    dH: np.ndarray


def h_contractions(amb: AmbientStructure, point: Sequence[float]) -> HContractions:
    f = amb.fields_at(point)
    H, ginv = f.H.value, f.ginv.value
    return HContractions(
        float(h_norm2(H, ginv)),
        h_squared(H, ginv),
        h2_form(H, ginv),
        H,
        _dH(f.H.grad),
    )


@dataclass(frozen=True)
class DilatonSplit:
    pi_e_plus: object
    pi_e_minus: object
    e_plus_norm2: object
    e_minus_norm2: object
    e_norm2: object


def dilaton_split_fields(f: PointFields) -> DilatonSplit:
    """πe± = X ± g⁻¹ξ, |e±|² = g(πe±, πe±), |e|²_𝒢 = |e₊|² + |e₋|²."""
    gxi = einsum("ij,j->i", f.ginv, f.xi)
    P = f.X + gxi
    M = f.X - gxi
    np_ = einsum("ij,i,j->", f.g, P, P)
    nm = einsum("ij,i,j->", f.g, M, M)
    return DilatonSplit(P, M, np_, nm, np_ + nm)


def dilaton_split(amb: AmbientStructure, point: Sequence[float]) -> DilatonSplit:
    s = dilaton_split_fields(amb.fields_at(point))
    v = jets.value_of
    return DilatonSplit(v(s.pi_e_plus), v(s.pi_e_minus), float(v(s.e_plus_norm2)), float(v(s.e_minus_norm2)), float(v(s.e_norm2)))


def sigma_pairing(g: np.ndarray, A: np.ndarray, B: np.ndarray, band: int) -> float:
    """𝒢(σ±A, σ±B), which by the σ± isometry is g(A, B) for either band."""
    del band
    return float(A @ g @ B)


def pairing(g: np.ndarray, A: np.ndarray, B: np.ndarray, band: int) -> float:
    """⟨σ±A, σ±B⟩ = ±g(A, B)."""
    return band * float(A @ g @ B)
