"""Abstract hypersurface data in a flat ambient and immersion reconstruction.

:func:`flat_gc_residual` evaluates the generalised Gauss–Codazzi identities
with vanishing ambient curvature, using only data given on Σ.
:func:`reconstruct_immersion` integrates the flat connection of TΣ ⊕ ν,

    ∂_a ∂_b F = Γ^c_ab ∂_c F − k_ab n,     ∂_a n = h^{cb} k_ab ∂_c F,

along grid rows and columns with RK4 and returns the frames and the surface.
Frames are stored as 3×3 matrices with columns (∂_1F, ∂_2F, n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import jets
from .classical import christoffel_from_metric, covariant_derivative, riemann_from_christoffel
from .expr import Expr, Neg, Num, evaluate
from .fields import AmbientStructure, Chart, DilatonField, MetricField, ThreeFormField, _env, _jet_array, check_metric
from .hypersurface import HypersurfaceError, HypersurfaceGeometry, SigmaGeometry, _band_name
from .jets import Jet, einsum
from .report import ResidualReport

GC_TOL = 1e-8
RECONSTRUCT_PRECONDITION = 1e-6
MIN_STEP = 1e-10


@dataclass(frozen=True)
class BilinearField:
    """Symmetric or skew (0,2) tensor field given by expressions."""

    chart: Chart
    components: tuple[tuple[Expr, ...], ...]
    skew: bool = False

    @classmethod
    def from_strings(cls, chart: Chart, rows: Sequence[Sequence], skew: bool = False) -> "BilinearField":
        """Only the upper triangle of ``rows`` is read; the rest follows by (anti)symmetry."""
        d = chart.dim
        out = [[Num(0.0)] * d for _ in range(d)]
        for i in range(d):
            for j in range(i, d):
                if skew and i == j:
                    continue
                e = chart.parse(rows[i][j])
                out[i][j] = e
                out[j][i] = Neg(e) if skew else e
        return cls(chart, tuple(tuple(r) for r in out), skew)

    @classmethod
    def zero(cls, chart: Chart, skew: bool = False) -> "BilinearField":
        return cls.from_strings(chart, [["0"] * chart.dim for _ in range(chart.dim)], skew)

    def evaluate(self, point_or_env: Sequence, order: int = 3) -> Jet:
        env = _env(point_or_env, order)
        d = self.chart.dim
        vals = [evaluate(self.components[i][j], env) for i in range(d) for j in range(d)]
        return _jet_array(vals, (d, d), env)


@dataclass(frozen=True)
class HypersurfaceData:
    """Abstract (Σ, h, k, H_Σ, H⊥, e_Σ, ⟨e, n±⟩) data; ε = +1 for the Riemannian theorem."""

    sigma_chart: Chart
    h: MetricField
    k: BilinearField
    H_sigma: ThreeFormField
    H_perp: BilinearField
    e_sigma: DilatonField
    e_perp_plus: Expr = field(default_factory=lambda: Num(0.0))
    e_perp_minus: Expr = field(default_factory=lambda: Num(0.0))
    epsilon: int = 1

    @classmethod
    def classical(cls, chart: Chart, h_rows: Sequence[Sequence], k_rows: Sequence[Sequence]) -> "HypersurfaceData":
        """Data with only (h, k); everything generalised vanishes."""
        m = chart.dim
        return cls(
            chart,
            MetricField.from_strings(chart, h_rows, (m, 0)),
            BilinearField.from_strings(chart, k_rows),
            ThreeFormField.from_strings(chart, {}),
            BilinearField.zero(chart, skew=True),
            DilatonField.zero(chart),
        )


class DataGeometry(SigmaGeometry):
    """Σ-side generalised geometry built directly from :class:`HypersurfaceData`."""

    def __init__(self, data: HypersurfaceData, point: Sequence[float], order: int = 2):
        self.data = data
        self.m = data.sigma_chart.dim
        self.d = self.m + 1
        if self.m < 2:
            raise ValueError("hypersurface data needs dim Σ ≥ 2")
        self.epsilon = data.epsilon
        self.env = _env(list(point), order)
        check_metric(np.asarray(self.h.value), data.h.signature)

    @cached_property
    def h(self) -> Jet:
        return self.data.h.evaluate(self.env)

    @cached_property
    def hinv(self) -> Jet:
        return jets.matrix_inverse(self.h)

    @cached_property
    def k(self) -> Jet:
        return self.data.k.evaluate(self.env)

    @cached_property
    def H_par(self) -> Jet:
        return self.data.H_sigma.evaluate(self.env)

    @cached_property
    def H_perp(self) -> Jet:
        return self.data.H_perp.evaluate(self.env)

    @cached_property
    def P_par(self) -> dict:
        X, xi = self.data.e_sigma.evaluate(self.env)
        hxi = einsum("ab,b->a", self.hinv, xi)
        return {1: X + hxi, -1: X - hxi}

    @cached_property
    def e_perp(self) -> dict:
        out = {}
        for s, e in ((1, self.data.e_perp_plus), (-1, self.data.e_perp_minus)):
            v = evaluate(e, self.env)
            out[s] = v if isinstance(v, Jet) else Jet.constant(v, self.m, self.env[0].order)
        return out


def flat_gc_residual(data: HypersurfaceData, point: Sequence[float], tol: float = GC_TOL) -> ResidualReport:
    """Generalised Gauss and Codazzi residuals with the ambient curvature set to zero."""
    geo = DataGeometry(data, point)
    report = ResidualReport()
    for s, terms in geo.gauss_terms().items():
        for kind, (lhs, rhs) in terms.items():
            report.add(f"gauss_{kind}_{_band_name(s)}", lhs - rhs, tol)
    for s, terms in geo.codazzi_terms().items():
        for kind, (lhs, rhs) in terms.items():
            report.add(f"codazzi_{kind}_{_band_name(s)}", lhs - rhs, tol)
    return report


def classical_flat_gc_residual(h: MetricField, k: BilinearField, point: Sequence[float]) -> tuple[float, float]:
    """(Gauss, Codazzi) residuals of (h, k) as data for a hypersurface in flat space.

    Gauss: Rm_h(a,b,v,w) = k(a,v)k(b,w) − k(a,w)k(b,v) (round sphere: k = h).
    Codazzi: (∇_a k)(b, c) = (∇_b k)(a, c).
    """
    env = _env(list(point), 3)
    g = h.evaluate(env)
    check_metric(np.asarray(g.value), h.signature)
    Gam = christoffel_from_metric(g, jets.matrix_inverse(g))
    Rm = np.asarray(riemann_from_christoffel(Gam, g).value)
    kj = k.evaluate(env).truncate(2)
    k0 = np.asarray(kj.value)
    kk = np.einsum("av,bw->abvw", k0, k0) - np.einsum("aw,bv->abvw", k0, k0)
    nk = np.asarray(covariant_derivative(kj, Gam.truncate(2), "ll").value)
    return float(np.max(np.abs(Rm - kk))), float(np.max(np.abs(nk - nk.transpose(1, 0, 2))))


# ------------------------------------------------------------ reconstruction
@dataclass(frozen=True)
class GridSpec:
    lo: tuple[float, float]
    hi: tuple[float, float]
    shape: tuple[int, int]

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.linspace(self.lo[a], self.hi[a], self.shape[a]) for a in (0, 1))

    def steps(self) -> tuple[float, float]:
        return tuple((self.hi[a] - self.lo[a]) / (self.shape[a] - 1) for a in (0, 1))

    def refined(self) -> "GridSpec":
        return GridSpec(self.lo, self.hi, tuple(2 * n - 1 for n in self.shape))


@dataclass
class SyntheticFrame:
    """Parallel frames and positions on a grid (indices [i, j] ↔ (axes[0][i], axes[1][j]))."""

    grid: GridSpec
    frames: np.ndarray  # (n0, n1, 3, 3)
    positions: np.ndarray  # (n0, n1, 3)

    def points(self) -> np.ndarray:
        return self.positions.reshape(-1, 3)


@dataclass(frozen=True)
class ReconstructionDiagnostics:
    path_residual: float
    frame_path_residual: float
    metric_residual: float
    orthonormality_residual: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


class _FrameSystem:
    """Connection matrices Ω_a with ∂_a M = M Ω_a, memoised per point."""

    def __init__(self, h: MetricField, k: BilinearField):
        self.h, self.k = h, k
        self._cache: dict[tuple[float, float], tuple[np.ndarray, np.ndarray]] = {}

    def omega(self, y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        key = (round(float(y[0]), 13), round(float(y[1]), 13))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        env = _env(list(key), 1)
        g = self.h.evaluate(env)
        ginv = jets.matrix_inverse(g)
        Gam = np.asarray(christoffel_from_metric(g, ginv).value)
        k0 = np.asarray(self.k.evaluate(env).value)
        A = np.asarray(ginv.value) @ k0  # A[c, a] = h^{cb} k_{ba}
        out = []
        for a in (0, 1):
            Om = np.zeros((3, 3))
            Om[:2, :2] = Gam[:, a, :]  # column b: Γ^c_{ab}
            Om[2, :2] = -k0[a, :]
            Om[:2, 2] = A[:, a]
            out.append(Om)
        self._cache[key] = (out[0], out[1])
        return self._cache[key]

    def rk4(self, M: np.ndarray, F: np.ndarray, y: np.ndarray, a: int, step: float) -> tuple[np.ndarray, np.ndarray]:
        """One RK4 step of (M, F) along coordinate direction ``a``."""
        e = np.zeros(2)
        e[a] = step

        def rhs(Mc, yc):
            return Mc @ self.omega(yc)[a], Mc[:, a]

        k1M, k1F = rhs(M, y)
        k2M, k2F = rhs(M + 0.5 * step * k1M, y + 0.5 * e)
        k3M, k3F = rhs(M + 0.5 * step * k2M, y + 0.5 * e)
        k4M, k4F = rhs(M + step * k3M, y + e)
        M_new = M + step / 6.0 * (k1M + 2 * k2M + 2 * k3M + k4M)
        F_new = F + step / 6.0 * (k1F + 2 * k2F + 2 * k3F + k4F)
        return M_new, F_new


def _seed_frame(h: MetricField, y: Sequence[float]) -> np.ndarray:
    """Columns ∂_1F, ∂_2F with Gram matrix h, and n = e_3 (positively oriented)."""
    h0 = np.asarray(h.evaluate(list(y), 0).value)
    L = np.linalg.cholesky(h0)
    M = np.zeros((3, 3))
    M[:2, :2] = L.T
    M[2, 2] = 1.0
    return M


def _integrate(system: _FrameSystem, grid: GridSpec, M0: np.ndarray, first_axis: int) -> tuple[np.ndarray, np.ndarray]:
    axes = grid.axes()
    steps = grid.steps()
    n0, n1 = grid.shape
    frames = np.zeros((n0, n1, 3, 3))
    pos = np.zeros((n0, n1, 3))
    frames[0, 0] = M0
    second = 1 - first_axis

    def node(idx_first: int, idx_second: int) -> tuple[int, int]:
        return (idx_first, idx_second) if first_axis == 0 else (idx_second, idx_first)

    def coords(i: int, j: int) -> np.ndarray:
        return np.array([axes[0][i], axes[1][j]])

    for p in range(1, grid.shape[first_axis]):
        prev = node(p - 1, 0)
        frames[node(p, 0)], pos[node(p, 0)] = system.rk4(frames[prev], pos[prev], coords(*prev), first_axis, steps[first_axis])
    for p in range(grid.shape[first_axis]):
        for q in range(1, grid.shape[second]):
            prev = node(p, q - 1)
            frames[node(p, q)], pos[node(p, q)] = system.rk4(frames[prev], pos[prev], coords(*prev), second, steps[second])
    return frames, pos


def reconstruct_immersion(
    h: MetricField, k: BilinearField, grid: GridSpec, check: bool = True
) -> tuple[SyntheticFrame, ReconstructionDiagnostics]:
    """Integrate the flat frame connection over ``grid`` and return frames, surface and diagnostics.

    The rows-then-columns integral is returned; the columns-then-rows integral
    is used for the path-dependence residual.
    """
    if h.chart.dim != 2:
        raise ValueError("reconstruction is implemented for two-dimensional Σ only")
    if min(grid.shape) < 2:
        raise ValueError("grid needs at least two nodes per axis")
    if min(abs(s) for s in grid.steps()) < MIN_STEP:
        raise ValueError("step-size underflow")
    axes = grid.axes()
    if check:
        sub = [np.unique(np.linspace(0, n - 1, min(n, 5)).astype(int)) for n in grid.shape]
        for i in sub[0]:
            for j in sub[1]:
                gauss, codazzi = classical_flat_gc_residual(h, k, [axes[0][i], axes[1][j]])
                if max(gauss, codazzi) > RECONSTRUCT_PRECONDITION:
                    raise HypersurfaceError(
                        f"data not flat-compatible at {[axes[0][i], axes[1][j]]}: Gauss {gauss:.2e}, Codazzi {codazzi:.2e}"
                    )
    system = _FrameSystem(h, k)
    M0 = _seed_frame(h, [axes[0][0], axes[1][0]])
    frames, pos = _integrate(system, grid, M0, 0)
    frames2, pos2 = _integrate(system, grid, M0, 1)
    metric_res = 0.0
    ortho_res = 0.0
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            h0 = np.asarray(h.evaluate([axes[0][i], axes[1][j]], 0).value)
            M = frames[i, j]
            target = np.zeros((3, 3))
            target[:2, :2] = h0
            target[2, 2] = 1.0
            metric_res = max(metric_res, float(np.max(np.abs(M[:, :2].T @ M[:, :2] - h0))))
            ortho_res = max(ortho_res, float(np.max(np.abs(M.T @ M - target))))
    diagnostics = ReconstructionDiagnostics(
        path_residual=float(np.max(np.abs(pos - pos2))),
        frame_path_residual=float(np.max(np.abs(frames - frames2))),
        metric_residual=metric_res,
        orthonormality_residual=ortho_res,
    )
    return SyntheticFrame(grid, frames, pos), diagnostics


def procrustes_rms(P: np.ndarray, Q: np.ndarray) -> float:
    """RMS distance between point clouds after the best rigid motion P → Q."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    Pc, Qc = P - P.mean(axis=0), Q - Q.mean(axis=0)
    U, _, Vt = np.linalg.svd(Pc.T @ Qc)
    D = np.eye(3)
    D[2, 2] = np.sign(np.linalg.det(U @ Vt))
    R = U @ D @ Vt
    return float(np.sqrt(np.mean(np.sum((Pc @ R - Qc) ** 2, axis=1))))


# ------------------------------------------------------ k from the surface
@dataclass(frozen=True)
class JetEmbedding:
    """Embedding given by precomputed order-3 jets at a single Σ-point."""

    sigma_chart: Chart
    ambient_chart: Chart
    jets_at_point: tuple[Jet, ...]
    normal_orientation: int = 1

    def evaluate(self, point_or_env: Sequence, order: int = 3) -> list[Jet]:
        return list(self.jets_at_point)


_MONOMIALS = [(p, q) for total in range(5) for p in range(total + 1) for q in [total - p]]


def _local_fit(frame: SyntheticFrame, i: int, j: int) -> list[Jet]:
    """Quartic Hermite fit of F around node (i, j); returns order-3 jets of F."""
    n0, n1 = frame.grid.shape
    axes = frame.grid.axes()
    i0 = min(max(i - 2, 0), n0 - 5)
    j0 = min(max(j - 2, 0), n1 - 5)
    y0 = np.array([axes[0][i], axes[1][j]])
    rows, rhs = [], []
    for a in range(i0, i0 + 5):
        for b in range(j0, j0 + 5):
            du, dv = axes[0][a] - y0[0], axes[1][b] - y0[1]
            rows.append([du**p * dv**q for p, q in _MONOMIALS])
            rhs.append(frame.positions[a, b])
            rows.append([p * du ** max(p - 1, 0) * dv**q if p else 0.0 for p, q in _MONOMIALS])
            rhs.append(frame.frames[a, b][:, 0])
            rows.append([q * du**p * dv ** max(q - 1, 0) if q else 0.0 for p, q in _MONOMIALS])
            rhs.append(frame.frames[a, b][:, 1])
    coef, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    u = Jet.variable(y0, 0, 3) - y0[0]
    v = Jet.variable(y0, 1, 3) - y0[1]
    out = []
    for c in range(3):
        acc = Jet.constant(0.0, 2, 3)
        for (p, q), cf in zip(_MONOMIALS, coef[:, c]):
            if p + q <= 3:
                acc = acc + cf * (u**p) * (v**q)
        out.append(acc)
    return out


def recomputed_k(frame: SyntheticFrame, i: int, j: int, sigma_chart: Chart) -> np.ndarray:
    """Second fundamental form of the reconstructed surface at node (i, j), via the hypersurface module."""
    ambient_chart = Chart("euclidean", ("x", "y", "z"))
    flat = AmbientStructure(
        ambient_chart,
        MetricField.from_strings(ambient_chart, [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]], (3, 0)),
        ThreeFormField.from_strings(ambient_chart, {}),
        DilatonField.zero(ambient_chart),
    )
    axes = frame.grid.axes()
    emb = JetEmbedding(sigma_chart, ambient_chart, tuple(_local_fit(frame, i, j)))
    geo = HypersurfaceGeometry(flat, emb, [axes[0][i], axes[1][j]])
    return np.asarray(geo.k.value)


def k_recovery_error(frame: SyntheticFrame, k: BilinearField, samples: int = 5) -> float:
    """max |k_reconstructed − k_input| over a samples × samples subgrid."""
    axes = frame.grid.axes()
    worst = 0.0
    for i in np.unique(np.linspace(0, frame.grid.shape[0] - 1, samples).astype(int)):
        for j in np.unique(np.linspace(0, frame.grid.shape[1] - 1, samples).astype(int)):
            k_in = np.asarray(k.evaluate([axes[0][i], axes[1][j]], 0).value)
            worst = max(worst, float(np.max(np.abs(recomputed_k(frame, i, j, k.chart) - k_in))))
    return worst


def mesh_json(frame: SyntheticFrame, diagnostics: ReconstructionDiagnostics) -> dict:
    return {
        "grid": list(frame.grid.shape),
        "points": [[float(x) for x in p] for p in frame.points()],
        "diagnostics": {key: float(v) for key, v in sorted(diagnostics.as_dict().items())},
    }


def sphere_patch_data() -> tuple[MetricField, BilinearField]:
    chart = Chart("sphere", ("t", "p"))
    return (
        MetricField.from_strings(chart, [["1", "0"], ["0", "sin(t)^2"]], (2, 0)),
        BilinearField.from_strings(chart, [["1", "0"], ["0", "sin(t)^2"]]),
    )


def cylinder_patch_data() -> tuple[MetricField, BilinearField]:
    chart = Chart("cylinder", ("u", "v"))
    return (
        MetricField.from_strings(chart, [["1", "0"], ["0", "1"]], (2, 0)),
        BilinearField.from_strings(chart, [["1", "0"], ["0", "0"]]),
    )


def sphere_points(grid: GridSpec) -> np.ndarray:
    t, p = np.meshgrid(*grid.axes(), indexing="ij")
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1).reshape(-1, 3)


def cylinder_points(grid: GridSpec) -> np.ndarray:
    u, v = np.meshgrid(*grid.axes(), indexing="ij")
    return np.stack([np.cos(u), np.sin(u), v], axis=-1).reshape(-1, 3)


SPHERE_GRID = GridSpec((0.4, 0.0), (1.2, 0.8), (33, 33))
CYLINDER_GRID = GridSpec((0.0, 0.0), (1.0, 1.0), (33, 33))
