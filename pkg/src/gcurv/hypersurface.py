"""Hypersurfaces: induced structure, exterior curvature, Gauss–Codazzi.

A hypersurface is given by an embedding map F: Σ-chart → ambient chart.  All
induced quantities are computed as jets in the Σ-coordinates: ambient fields
are evaluated on the jets of F, ambient Christoffel symbols are pulled back
with :func:`~gcurv.jets.compose_jets`.

Conventions:

* ``k(X, Y) = g(∇_X n, Y)``, ``A X = ∇_X n``; the outward normal of the
  round sphere gives ``k = h``.
* ``n`` is proportional to g⁻¹ν, where ν_μ = ε_{μν_1…ν_m} ∂_1F^{ν_1}⋯∂_mF^{ν_m}
  is the cofactor conormal, times the embedding's ``normal_orientation``.
* ``H = H∥ + ε n♭ ∧ H⊥`` and ``ξ = ξ∥ + ε x n♭`` give ``H⊥ = ι_n H|_Σ`` and
  ``x = ξ(n)``.
* Generalised objects on E_Σ are stored on the σ-basis
  (σ+∂_1 … σ+∂_m, σ−∂_1 … σ−∂_m), m = d − 1.  ``K[s][I, J]`` is
  𝒦^{n_s}(b_I, b_J) = 𝒢(D_{b_I} n_s, b_J).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import jets
from .classical import christoffel_from_metric, codifferential, covariant_derivative, lie_derivative_metric_from
from .expr import Expr, evaluate
from .fields import AmbientStructure, Chart, h_norm2, h_squared
from .gencurv import GenGeometry, band_selectors, canonical_coefficients, eta_matrix
from .jets import Jet, einsum
from .report import ResidualReport

NULL_TOL = 1e-8
IDENTITY_TOL = 1e-7


class HypersurfaceError(ValueError):
    """Degenerate immersion or unsupported hypersurface."""


@dataclass(frozen=True)
class EmbeddingMap:
    sigma_chart: Chart
    ambient_chart: Chart
    components: tuple[Expr, ...]
    normal_orientation: int = 1

    def __post_init__(self):
        if len(self.components) != self.ambient_chart.dim:
            raise ValueError("embedding needs one component per ambient coordinate")
        if self.sigma_chart.dim != self.ambient_chart.dim - 1:
            raise ValueError("only hypersurfaces (codimension one) are supported")
        if self.normal_orientation not in (1, -1):
            raise ValueError("normal_orientation must be +1 or -1")

    @classmethod
    def from_strings(cls, sigma_chart: Chart, ambient_chart: Chart, comps: Sequence, normal_orientation: int = 1) -> "EmbeddingMap":
        return cls(sigma_chart, ambient_chart, tuple(sigma_chart.parse(c) for c in comps), int(normal_orientation))

    def flipped(self) -> "EmbeddingMap":
        return EmbeddingMap(self.sigma_chart, self.ambient_chart, self.components, -self.normal_orientation)

    def evaluate(self, point_or_env: Sequence, order: int = 3) -> list[Jet]:
        if point_or_env and isinstance(point_or_env[0], Jet):
            env = list(point_or_env)
        else:
            env = [Jet.variable(point_or_env, i, order) for i in range(len(point_or_env))]
        ref = env[0]
        out = []
        for e in self.components:
            v = evaluate(e, env)
            out.append(v if isinstance(v, Jet) else Jet.constant(v, ref.dim, ref.order))
        return out


@dataclass(frozen=True)
class InducedStructure:
    h: np.ndarray
    H_par: np.ndarray
    H_perp: np.ndarray
    xi_par: np.ndarray
    x: float
    X_par: np.ndarray
    e_perp_plus: float
    e_perp_minus: float
    epsilon: int


@dataclass(frozen=True)
class ShapeData:
    n: np.ndarray
    k: np.ndarray
    A: np.ndarray
    K_pure_plus: np.ndarray
    K_pure_minus: np.ndarray
    K_mixed_plus: np.ndarray
    K_mixed_minus: np.ndarray
    T_plus: float
    T_minus: float
    L_plus: np.ndarray
    L_minus: np.ndarray


@dataclass(frozen=True)
class InducedConnection:
    """Christoffel-type symbols of D^Σ on TΣ.

    ``same[s]`` gives D^Σ_{σs A}σs B and ``opposite[s]`` gives D^Σ_{σ−s A}σs B,
    both as Γ[k, i, j] arrays over Σ-coordinates.
    """

    same: dict
    opposite: dict


def _levi_civita_symbol(d: int) -> np.ndarray:
    eps = np.zeros((d,) * d)
    for perm in itertools.permutations(range(d)):
        inv = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


def _v(x) -> np.ndarray:
    return np.asarray(jets.value_of(x), dtype=float)


class SigmaGeometry:
    """Σ-side generalised exterior geometry at one point.

    Subclasses provide ``d``, ``m`` (= d − 1), ``epsilon`` and the jets ``h``,
    ``hinv``, ``k``, ``H_par``, ``H_perp``, ``P_par[±]`` and ``e_perp[±]``.
    The ambient curvature enters only through :meth:`lifted_ambient_riemann`
    and :meth:`ambient_codazzi_sides`, which vanish for a flat ambient.
    """

    d: int
    m: int
    epsilon: int

    @cached_property
    def K_blocks(self) -> dict:
        """(pure, mixed) jets per band: K_pure[a,b] = 𝒦^{n±}(σ±a, σ±b), K_mixed[b,v] = 𝒦^{n±}(σ∓b, σ±v)."""
        out = {}
        for s in (1, -1):
            pure = self.k - (self.e_perp[s] / (self.d - 1.0)) * self.h - (s / 6.0) * self.H_perp
            mixed = self.k - (s / 2.0) * self.H_perp
            out[s] = (pure, mixed)
        return out

    @cached_property
    def L_covector(self) -> dict:
        """ℒ±(σ±A) = ±(ε/(d−1)) g(πe±, A) on tangent A."""
        return {
            s: (s * self.epsilon / (self.d - 1.0)) * einsum("ab,b->a", self.h, self.P_par[s])
            for s in (1, -1)
        }

    # ---------------------------------------------------- generalised on E_Σ
    @cached_property
    def U(self) -> dict:
        return band_selectors(self.m)

    @cached_property
    def K_full(self) -> dict:
        U = self.U
        out = {}
        for s in (1, -1):
            pure, mixed = self.K_blocks[s]
            out[s] = einsum("pa,qb,ab->pq", U[s], U[s], pure) + einsum("pa,qb,ab->pq", U[-s], U[s], mixed)
        return out

    @cached_property
    def L_full(self) -> dict:
        return {s: einsum("pa,a->p", self.U[s], self.L_covector[s]) for s in (1, -1)}

    @cached_property
    def induced_geometry(self) -> GenGeometry:
        """D^Σ: canonical connection of (h, H∥) with dilaton ((d−2)/(d−1)) e∥."""
        c = (self.d - 2.0) / (self.d - 1.0)
        return GenGeometry(self.h, self.H_par, c * self.P_par[1], c * self.P_par[-1], self.hinv)

    @cached_property
    def induced_scalar_geometry(self) -> GenGeometry:
        """(h, H∥, e∥) with the induced divergence div^ℋ − ⟨e∥, ·⟩."""
        return GenGeometry(self.h, self.H_par, self.P_par[1], self.P_par[-1], self.hinv)

    @cached_property
    def Omega_sigma(self) -> Jet:
        Gam = christoffel_from_metric(self.h, self.hinv)
        o = Gam.order
        return canonical_coefficients(
            Gam, self.h.truncate(o), self.hinv.truncate(o), self.H_par.truncate(o),
            self.P_par[1].truncate(o), self.P_par[-1].truncate(o), self.d,
        )

    def _proj_partial(self, T: Jet) -> np.ndarray:
        """∂ along π b_I for a jet over the σ-basis, derivative index first."""
        dT = _v(T.partial())
        dT = dT[..., np.concatenate([np.arange(self.m)] * 2)]
        return np.moveaxis(dT, -1, 0)

    @cached_property
    def DK(self) -> dict:
        """DK[s][I, J, K] = [D^Σ_{b_I} 𝒦^{n_s}](b_J, b_K)."""
        O = _v(self.Omega_sigma)
        out = {}
        for s in (1, -1):
            K = self.K_full[s]
            K0 = _v(K)
            out[s] = self._proj_partial(K) - np.einsum("lij,lk->ijk", O, K0) - np.einsum("lik,jl->ijk", O, K0)
        return out

    @cached_property
    def DL(self) -> dict:
        O = _v(self.Omega_sigma)
        return {
            s: self._proj_partial(self.L_full[s]) - np.einsum("kij,k->ij", O, _v(self.L_full[s]))
            for s in (1, -1)
        }

    @cached_property
    def G_sigma_inv(self) -> np.ndarray:
        hinv = _v(self.hinv)
        z = np.zeros_like(hinv)
        return np.block([[hinv, z], [z, hinv]])

    @cached_property
    def eta_sigma_inv(self) -> np.ndarray:
        return np.linalg.inv(eta_matrix(_v(self.h)))

    # ------------------------------------------------- ambient curvature
    def lifted_ambient_riemann(self) -> np.ndarray:
        """Rm^D on σ-lifted tangent vectors, [a, b, v, w] over the E_Σ σ-basis."""
        return np.zeros((2 * self.m,) * 4)

    def ambient_codazzi_sides(self, s: int) -> tuple:
        """Left-hand sides of the four Codazzi identities for band ``s``."""
        n2 = 2 * self.m
        return np.zeros((n2,) * 3), np.zeros((n2,) * 3), np.zeros((n2, n2)), np.zeros((n2, n2))

    # ----------------------------------------------------------- Gauss
    def gauss_terms(self) -> dict:
        """LHS and RHS arrays of both Gauss equations per band."""
        diff = self.lifted_ambient_riemann() - self.induced_geometry.riemann.full()
        eps = self.epsilon
        out = {}
        for s in (1, -1):
            Us, Uo = self.U[s], self.U[-s]
            Kp = _v(self.K_blocks[s][0])
            Km = _v(self.K_blocks[s][1])
            lhs_p = s * 2.0 * eps * np.einsum("abcd,ai,bj,ck,dl->ijkl", diff, Us, Us, Us, Us)
            rhs_p = (
                np.einsum("wa,vb->abvw", Kp, Kp)
                - np.einsum("va,wb->abvw", Kp, Kp)
                + np.einsum("aw,bv->abvw", Kp, Kp)
                - np.einsum("bw,av->abvw", Kp, Kp)
                + np.einsum("vw,ba->abvw", Kp - Kp.T, Kp - Kp.T)
            )
            lhs_m = s * 2.0 * eps * np.einsum("abcd,ai,bj,ck,dl->ijkl", diff, Us, Uo, Us, Us)
            rhs_m = (
                np.einsum("aw,bv->abvw", Kp, Km)
                - np.einsum("bw,av->abvw", Km, Kp)
                + np.einsum("vw,ba->abvw", Kp - Kp.T, Km)
            )
            out[s] = {"pure": (lhs_p, rhs_p), "mixed": (lhs_m, rhs_m)}
        return out

    # --------------------------------------------------------- Codazzi
    def codazzi_terms(self) -> dict:
        eps = self.epsilon
        G = self.G_sigma_inv
        eta_inv = self.eta_sigma_inv
        K = {s: _v(self.K_full[s]) for s in (1, -1)}
        A = {s: K[s] @ G for s in (1, -1)}  # A[x, J]: (A b_x)^J
        L = {s: _v(self.L_full[s]) for s in (1, -1)}
        out = {}
        for s in (1, -1):
            Us, Uo = self.U[s], self.U[-s]
            Ks, Ko, DK, DL = K[s], K[-s], self.DK[s], self.DL[s]
            lhs1, lhs2, lhs3, lhs4 = self.ambient_codazzi_sides(s)
            # first identity: a, w ∈ s; b̄ ∈ −s
            rhs1 = np.einsum("baw->abw", DK) - DK + eps * np.einsum("ba,w->abw", Ks, L[s])
            c1l = np.einsum("abw,ai,bj,wk->ijk", lhs1, Us, Uo, Us)
            c1r = np.einsum("abw,ai,bj,wk->ijk", rhs1, Us, Uo, Us)
            # second identity: a, b, w ∈ s
            rhs2 = (
                np.einsum("wab->abw", DK)
                - np.einsum("wba->abw", DK)
                + np.einsum("baw->abw", DK)
                - DK
                + eps * (
                    np.einsum("w,ba->abw", L[s], Ks - Ks.T)
                    + np.einsum("b,wa->abw", L[s], Ks)
                    - np.einsum("a,wb->abw", L[s], Ks)
                )
            )
            c2l = np.einsum("abw,ai,bj,wk->ijk", lhs2, Us, Us, Us)
            c2r = np.einsum("abw,ai,bj,wk->ijk", rhs2, Us, Us, Us)
            # third identity: a, b ∈ s
            KAK = Ks @ G @ Ks  # K(A x, y)
            KAt = Ks @ A[s].T  # K(x, A y)
            # The trace over E also runs over n±, which contributes ε ℒ⊗ℒ.
            rhs3 = KAK + KAK.T - KAt - KAt.T - DL - DL.T + s * (Ks.T @ eta_inv @ Ks) + eps * np.outer(L[s], L[s])
            c3l = Us.T @ lhs3 @ Us
            c3r = Us.T @ rhs3 @ Us
            # fourth identity: a ∈ s, b̄ ∈ −s
            rhs4 = (
                (Ks @ G @ Ks).T
                - Ks @ A[s].T
                - Ko @ G @ Ko
                + (Ko @ A[-s].T).T
                + self.DL[-s]
                - DL.T
                + s * (Ks.T @ eta_inv @ Ko)
            )
            c4l = Us.T @ lhs4 @ Uo
            c4r = Us.T @ rhs4 @ Uo
            out[s] = {"first": (c1l, c1r), "second": (c2l, c2r), "third": (c3l, c3r), "fourth": (c4l, c4r)}
        return out


class HypersurfaceGeometry(SigmaGeometry):
    """Everything the Gauss–Codazzi machinery needs at one Σ-point."""

    def __init__(self, amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float]):
        if emb.ambient_chart != amb.chart:
            raise ValueError("embedding and ambient structure use different charts")
        self.amb, self.emb = amb, emb
        self.y = np.asarray(sigma_point, dtype=float)
        self.d = amb.dim
        self.m = self.d - 1
        if self.m < 2:
            raise HypersurfaceError("hypersurface geometry needs dim Σ ≥ 2")
        self.F = emb.evaluate(list(self.y), jets.MAX_ORDER)
        self.p = np.array([float(f.value) for f in self.F])
        self._check_immersion()

    # ------------------------------------------------------------- ambient
    @cached_property
    def ambient_fields(self):
        return self.amb.fields_at(list(self.p), jets.MAX_ORDER)

    @cached_property
    def ambient(self) -> GenGeometry:
        return GenGeometry.from_fields(self.ambient_fields)

    @cached_property
    def pulled(self):
        """Ambient g, g⁻¹, H, X, ξ as jets in the Σ-coordinates."""
        return self.amb.fields_at(self.F, jets.MAX_ORDER, check=False)

    @cached_property
    def Gamma_pulled(self) -> Jet:
        return jets.compose_jets(self.ambient.classical.Gamma, self.F)

    @cached_property
    def E(self) -> Jet:
        """E[μ, a] = ∂_a F^μ."""
        return Jet.stack(self.F, (self.d,)).partial()

    @cached_property
    def h(self) -> Jet:
        return einsum("mn,ma,nb->ab", self.pulled.g, self.E, self.E)

    @cached_property
    def hinv(self) -> Jet:
        return jets.matrix_inverse(self.h)

    def _check_immersion(self) -> None:
        E0 = _v(self.E)
        if np.linalg.matrix_rank(E0, tol=1e-10) < self.m:
            raise HypersurfaceError(f"embedding is not an immersion at {self.y.tolist()}")
        if abs(np.linalg.det(_v(self.h))) < 1e-12:
            raise HypersurfaceError(f"induced metric is degenerate at {self.y.tolist()}")
        nu = self._conormal_value()
        nu = nu / np.linalg.norm(nu)
        if abs(nu @ _v(self.pulled.ginv) @ nu) < NULL_TOL:
            raise HypersurfaceError("null hypersurface unsupported")

    @cached_property
    def conormal(self) -> Jet:
        """ν_μ = ε_{μ ν_1 … ν_m} ∂_1F^{ν_1} ⋯ ∂_mF^{ν_m}."""
        letters = "abcdefgh"[: self.d]
        out = _levi_civita_symbol(self.d)
        for a in range(self.m):
            rank = self.d - a
            idx = letters[:rank]
            out = einsum(f"{idx},{idx[1]}->{idx[0]}{idx[2:]}", out, self.E[:, a])
        return out

    def _conormal_value(self) -> np.ndarray:
        return _v(self.conormal)

    @cached_property
    def epsilon(self) -> int:
        nu = self._conormal_value()
        return 1 if nu @ _v(self.pulled.ginv) @ nu > 0 else -1

    @cached_property
    def n(self) -> Jet:
        nu_up = einsum("mn,n->m", self.pulled.ginv, self.conormal)
        norm2 = einsum("m,m->", self.conormal, nu_up)
        return (self.emb.normal_orientation / jets.sqrt(self.epsilon * norm2)) * nu_up

    # ---------------------------------------------------- classical shape
    @cached_property
    def k(self) -> Jet:
        """k_ab = −g(n, ∂_a∂_b F + Γ(∂_aF, ∂_bF)) (order 1)."""
        ddF = self.E.partial()
        acc = ddF + einsum("nrs,ra,sb->nab", self.Gamma_pulled, self.E, self.E)
        return -1.0 * einsum("mn,m,nab->ab", self.pulled.g, self.n, acc)

    @cached_property
    def H_par(self) -> Jet:
        return einsum("mnr,ma,nb,rc->abc", self.pulled.H, self.E, self.E, self.E)

    @cached_property
    def H_perp(self) -> Jet:
        return einsum("mnr,m,na,rb->ab", self.pulled.H, self.n, self.E, self.E)

    @cached_property
    def P_amb(self) -> dict:
        f = self.pulled
        gxi = einsum("ij,j->i", f.ginv, f.xi)
        return {1: f.X + gxi, -1: f.X - gxi}

    def tangential(self, V: Jet) -> Jet:
        """Σ-components of the tangential part of an ambient vector."""
        return einsum("ab,mb,mn,n->a", self.hinv, self.E, self.pulled.g, V)

    @cached_property
    def P_par(self) -> dict:
        return {s: self.tangential(self.P_amb[s]) for s in (1, -1)}

    @cached_property
    def e_perp(self) -> dict:
        """⟨e, n±⟩ = ±g(πe±, n)."""
        return {s: s * einsum("mn,m,n->", self.pulled.g, self.P_amb[s], self.n) for s in (1, -1)}

    # ----------------------------------------------------- ambient lifts
    @cached_property
    def lift(self) -> np.ndarray:
        """Λ (2d × 2m): σ-basis of E_Σ inside the σ-basis of E."""
        E0 = _v(self.E)
        z = np.zeros_like(E0)
        return np.block([[E0, z], [z, E0]])

    @cached_property
    def normals(self) -> dict:
        n0 = _v(self.n)
        z = np.zeros_like(n0)
        return {1: np.concatenate([n0, z]), -1: np.concatenate([z, n0])}

    @cached_property
    def F_ambient(self) -> np.ndarray:
        return self.ambient.riemann.full()

    def lifted_ambient_riemann(self) -> np.ndarray:
        Lam = self.lift
        return np.einsum("ABCD,Aa,Bb,Cc,Dd->abcd", self.F_ambient, Lam, Lam, Lam, Lam)

    def ambient_codazzi_sides(self, s: int) -> tuple:
        F, Lam, N = self.F_ambient, self.lift, self.normals
        dn = N[s] - N[-s]
        return (
            s * 2.0 * np.einsum("ABCD,Aa,Bb,C,Dw->abw", F, Lam, Lam, N[s], Lam),
            s * 2.0 * np.einsum("ABCD,Aa,Bb,C,Dw->abw", F, Lam, Lam, dn, Lam),
            s * 2.0 * np.einsum("ABCD,Aa,B,C,Db->ab", F, Lam, dn, dn, Lam),
            s * 2.0 * np.einsum("ABCD,Aa,B,C,Db->ab", F, Lam, dn, dn, Lam),
        )

    # -------------------------------------------------------- public data
    def induced_structure(self) -> InducedStructure:
        f = self.pulled
        xi_par = einsum("ma,m->a", self.E, f.xi)
        return InducedStructure(
            h=_v(self.h),
            H_par=_v(self.H_par),
            H_perp=_v(self.H_perp),
            xi_par=_v(xi_par),
            x=float(_v(einsum("m,m->", f.xi, self.n))),
            X_par=_v(self.tangential(f.X)),
            e_perp_plus=float(_v(self.e_perp[1])),
            e_perp_minus=float(_v(self.e_perp[-1])),
            epsilon=self.epsilon,
        )

    def shape_data(self) -> ShapeData:
        k = _v(self.k)
        hinv = _v(self.hinv)
        tr_k = float(np.einsum("ab,ab->", hinv, k))
        T = {s: tr_k - float(_v(self.e_perp[s])) for s in (1, -1)}
        return ShapeData(
            n=_v(self.n),
            k=k,
            A=hinv @ k.T,  # A[c, a] = h^{cb} k_{ab}
            K_pure_plus=_v(self.K_blocks[1][0]),
            K_pure_minus=_v(self.K_blocks[-1][0]),
            K_mixed_plus=_v(self.K_blocks[1][1]),
            K_mixed_minus=_v(self.K_blocks[-1][1]),
            T_plus=T[1],
            T_minus=T[-1],
            L_plus=_v(self.L_covector[1]),
            L_minus=_v(self.L_covector[-1]),
        )

    def connection(self) -> InducedConnection:
        O = _v(self.Omega_sigma)
        U = self.U
        same, opposite = {}, {}
        for s in (1, -1):
            same[s] = np.einsum("pk,qi,rj,pqr->kij", U[s], U[s], U[s], O)
            opposite[s] = np.einsum("pk,qi,rj,pqr->kij", U[s], U[-s], U[s], O)
        return InducedConnection(same, opposite)

    # ------------------------------------------------------- constraints
    def energy_terms(self) -> dict:
        """(lhs, rhs) of 2Rc^±(n∓, n±) − ε𝒮c = −ε𝒮c_Σ − |𝒦^±|² + ((𝒯⁺)² + (𝒯⁻)²)/2."""
        n0 = _v(self.n)
        eps = self.epsilon
        rc = dict(zip((1, -1), self.ambient.ricci_mixed))
        Sc = self.ambient.scalar
        Sc_sigma = self.induced_scalar_geometry.scalar
        hinv = _v(self.hinv)
        shape = self.shape_data()
        T2 = 0.5 * (shape.T_plus**2 + shape.T_minus**2)
        out = {}
        for s in (1, -1):
            Km = _v(self.K_blocks[s][1])
            K2 = float(np.einsum("ac,bd,ab,cd->", hinv, hinv, Km, Km))
            lhs = 2.0 * float(n0 @ rc[s] @ n0) - eps * Sc
            rhs = -eps * Sc_sigma - K2 + T2
            out[s] = (lhs, rhs)
        return out

    def momentum_terms(self, slot: str = "second") -> dict:
        """(lhs, rhs) covectors of Rc^±(a∓, n±) = div^{e±}(k ∓ ι_nH/2)(πa) − ¼H²(n, πa) − πa(𝒯^±)."""
        n0 = _v(self.n)
        E0 = _v(self.E)
        rc = dict(zip((1, -1), self.ambient.ricci_mixed))
        Hsq = h_squared(self.ambient.H0, self.ambient.ginv0)
        Gam_h = christoffel_from_metric(self.h, self.hinv)
        hinv = _v(self.hinv)
        trk = einsum("ab,ab->", self.hinv.truncate(1), self.k)
        out = {}
        for s in (1, -1):
            T = self.k - (s / 2.0) * self.H_perp.truncate(1)
            nT = _v(covariant_derivative(T, Gam_h, "ll"))  # nT[c, a, b] = (∇_c T)(a, b)
            if slot == "second":
                div = np.einsum("cb,cab->a", hinv, nT)
            else:
                div = np.einsum("ca,cab->b", hinv, nT)
            T0 = _v(T)
            div_e = div - s * T0 @ _v(self.P_par[s])
            Tscalar = trk - self.e_perp[s].truncate(1)
            dT = _v(Tscalar.partial())
            lhs = E0.T @ rc[s] @ n0
            rhs = div_e - 0.25 * E0.T @ Hsq @ n0 - dT
            out[s] = (lhs, rhs)
        return out

    def classical_terms(self) -> dict:
        """Residuals (lhs − rhs) of the classical constraint equations for e = 2ξ.

        ``energy`` is a scalar, ``momentum`` and ``antisymmetric`` are covectors
        on Σ.  ⟨H⊥, H∥⟩_a = H⊥^{bc} H∥_{abc} with indices raised by h.
        """
        eps = self.epsilon
        Gam_h = christoffel_from_metric(self.h, self.hinv)
        hinv = _v(self.hinv)
        k = _v(self.k)
        trk = float(np.einsum("ab,ab->", hinv, k))
        k2 = float(np.einsum("ac,bd,ab,cd->", hinv, hinv, k, k))
        Sc_h = float(_v(self.induced_scalar_geometry.classical.Sc))
        Hpar = _v(self.H_par)
        Hperp = _v(self.H_perp)
        xi_par = einsum("ma,m->a", self.E, self.pulled.xi)
        x = einsum("m,m->", self.pulled.xi, self.n)
        xp = _v(xi_par)
        xi_up = hinv @ xp
        codiff_xi = float(_v(codifferential(covariant_derivative(xi_par.truncate(2), Gam_h, "l"), hinv)))
        x0 = float(_v(x))
        Hperp_sq = float(np.einsum("ac,bd,ab,cd->", hinv, hinv, Hperp, Hperp))
        energy_lhs = -eps * Sc_h + trk**2 - k2
        energy_rhs = (
            -eps * float(h_norm2(Hpar, hinv)) / 12.0
            + Hperp_sq / 4.0
            - 2.0 * eps * codiff_xi
            + 2.0 * trk * x0
            - eps * float(xp @ xi_up)
            - x0**2
        )
        nk = _v(covariant_derivative(self.k, Gam_h, "ll"))
        div_k = np.einsum("cb,cab->a", hinv, nk)
        dtrk = _v(einsum("ab,ab->", self.hinv.truncate(1), self.k).partial())
        HH = np.einsum("bd,ce,bc,ade->a", hinv, hinv, Hperp, Hpar)
        dx = _v(x.truncate(1).partial())
        momentum = (div_k - dtrk) - (0.25 * HH - dx + k @ xi_up)
        nHp = _v(covariant_derivative(self.H_perp.truncate(1), Gam_h, "ll"))
        antisymmetric = -np.einsum("ca,cab->b", hinv, nHp) + xi_up @ Hperp
        return {"energy": energy_lhs - energy_rhs, "momentum": momentum, "antisymmetric": antisymmetric}


# ------------------------------------------------------------------ API
def _geometry(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float]) -> HypersurfaceGeometry:
    return HypersurfaceGeometry(amb, emb, sigma_point)


def induce(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float]) -> tuple[InducedStructure, ShapeData]:
    hg = _geometry(amb, emb, sigma_point)
    return hg.induced_structure(), hg.shape_data()


def gen_second_fundamental_form(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float]) -> ShapeData:
    return _geometry(amb, emb, sigma_point).shape_data()


def induced_connection_coefficients(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float]) -> InducedConnection:
    return _geometry(amb, emb, sigma_point).connection()


def _band_name(s: int) -> str:
    return "plus" if s == 1 else "minus"


def gauss_residuals(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float], tol: float = IDENTITY_TOL) -> ResidualReport:
    """Max-abs residuals of the pure and mixed generalised Gauss equations."""
    report = ResidualReport()
    for s, terms in _geometry(amb, emb, sigma_point).gauss_terms().items():
        for kind, (lhs, rhs) in terms.items():
            report.add(f"gauss_{kind}_{_band_name(s)}", lhs - rhs, tol)
    return report


def codazzi_residuals(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float], tol: float = IDENTITY_TOL) -> ResidualReport:
    """Max-abs residuals of the four generalised Codazzi equations per band."""
    report = ResidualReport()
    for s, terms in _geometry(amb, emb, sigma_point).codazzi_terms().items():
        for kind, (lhs, rhs) in terms.items():
            report.add(f"codazzi_{kind}_{_band_name(s)}", lhs - rhs, tol)
    return report


def energy_constraint(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float], band: int = 1) -> tuple[float, float, float]:
    lhs, rhs = _geometry(amb, emb, sigma_point).energy_terms()[band]
    return lhs, rhs, abs(lhs - rhs)


def momentum_constraint(
    amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float], band: int = 1
) -> tuple[np.ndarray, np.ndarray, float]:
    """Both sides of the mixed-Ricci momentum constraint as Σ-covectors.

    This is an identity when the dilaton is exact (X = 0, ξ = dφ) or e = 0.
    For other dilatons Rc^±(·, n) also sees normal derivatives of X and ξ,
    which the Σ-side cannot, so the residual is generally nonzero.
    """
    lhs, rhs = _geometry(amb, emb, sigma_point).momentum_terms()[band]
    return lhs, rhs, float(np.max(np.abs(lhs - rhs)))


def _exactness_defects(f) -> tuple[float, float]:
    """(max |X| over the 1-jet, max |dξ|) for point fields ``f``."""
    X1 = f.X.truncate(1)
    x_size = max(float(np.max(np.abs(_v(X1)))), float(np.max(np.abs(_v(X1.partial())))))
    return x_size, float(np.max(np.abs(_exterior_derivative_1form(f.xi))))


def _exterior_derivative_1form(xi: Jet) -> np.ndarray:
    P = _v(xi.truncate(1).partial())  # P[b, a] = ∂_a ξ_b
    return P.T - P


def classical_constraints(amb: AmbientStructure, emb: EmbeddingMap, sigma_point: Sequence[float], tol: float = IDENTITY_TOL) -> ResidualReport:
    """Residuals of the classical energy, momentum and H⊥ constraints.

    They vanish when the ambient data solves the generalised Einstein
    equations.  In general ``energy`` equals 2Rc^+(n, n) − ε𝒮c, ``momentum``
    equals the symmetrised Rc^+(A, n), and ``antisymmetric`` equals
    Rc^+(n, A) − Rc^+(A, n).
    """
    hg = _geometry(amb, emb, sigma_point)
    x_size, dxi = _exactness_defects(hg.ambient_fields)
    if x_size > 1e-9 or dxi > 1e-9:
        raise HypersurfaceError("classical decomposition requires e = 2ξ, dξ = 0")
    report = ResidualReport()
    for name, value in hg.classical_terms().items():
        report.add(name, value, tol)
    return report


def compatibility_check(amb: AmbientStructure, emb: EmbeddingMap | None, point: Sequence[float], tol: float = IDENTITY_TOL) -> ResidualReport:
    """Residuals of L_X g = 0 and dξ = ι_X H, ambient and (optionally) induced.

    ``point`` is an ambient point when ``emb`` is None and a Σ-point otherwise.
    """
    report = ResidualReport()
    if emb is None:
        f = amb.fields_at(list(point), jets.MAX_ORDER)
        Gam = christoffel_from_metric(f.g, f.ginv)
        X, xi, H, g = f.X, f.xi, _v(f.H), f.g
    else:
        hg = _geometry(amb, emb, point)
        f = hg.ambient_fields
        Gam = hg.ambient.classical.Gamma
        X, xi, H, g = f.X, f.xi, _v(f.H), f.g
    lie = lie_derivative_metric_from(covariant_derivative(X.truncate(2), Gam, "u"), g.truncate(1))
    report.add("lie_X_g", _v(lie), tol)
    report.add("dxi_minus_iXH", _exterior_derivative_1form(xi) - np.einsum("k,kab->ab", _v(X), H), tol)
    if emb is not None:
        Gam_h = christoffel_from_metric(hg.h, hg.hinv)
        X_par = hg.tangential(hg.pulled.X)
        lie_h = lie_derivative_metric_from(covariant_derivative(X_par.truncate(2), Gam_h, "u"), hg.h.truncate(1))
        xi_par = einsum("ma,m->a", hg.E, hg.pulled.xi)
        report.add("induced_lie_X_h", _v(lie_h), tol)
        report.add(
            "induced_dxi_minus_iXH",
            _exterior_derivative_1form(xi_par) - np.einsum("k,kab->ab", _v(X_par), _v(hg.H_par)),
            tol,
        )
    return report
