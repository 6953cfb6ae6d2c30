"""Generalised curvature of the canonical generalised Levi-Civita connection.

Sections of E± are written through the isomorphisms σ±: TM → E±, so every
generalised tensor on a band is a tensor on TM.  Bands are encoded as
``s = +1`` or ``s = -1``.  With P± := π e± = X ± g⁻¹ξ the pairings are

* ⟨σ±A, σ±B⟩ = ±g(A, B), ⟨σ+A, σ−B⟩ = 0,
* 𝒢(σ±A, σ±B) = g(A, B).

The canonical connection D acts as

* D_{σ±A} σ±B = σ±(∇^{±1/3}_A B ± (1/(d−1)) [g(A,B) P± − A g(P±, B)]),
* D_{σ∓A} σ±B = σ±(∇^±_A B),

with ∇^{c} the Levi-Civita connection twisted by c·H (∇^± = twist ±½,
∇^{±1/3} = twist ±1/6).

Block layout of the generalised Riemann tensor (index order a, b, v, w):

* ``pure[s][a,b,v,w]  = Rm^D(σs a, σs b, σs v, σs w)``
* ``mixed[s][a,b,v,w] = Rm^D(σs a, σ−s b, σs v, σs w)``

All remaining blocks follow from the algebraic symmetries or vanish.  The
full tensor on the 2d-dimensional basis (σ+∂_1, …, σ+∂_d, σ−∂_1, …, σ−∂_d)
is available through :meth:`GenRiemann.full`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import jets
from .classical import ClassicalGeometry, antisym, covariant_derivative, sym, twist
from .fields import AmbientStructure, PointFields, h2_form, h_norm2, h_squared
from .jets import Jet, JetOrderError, einsum


def parse_band(band) -> int:
    """Normalise '+', '-', 'plus', 'minus', +1, -1 to ±1."""
    if band in (1, "+", "plus", "+1"):
        return 1
    if band in (-1, "-", "minus", "-1"):
        return -1
    raise ValueError(f"band must be + or -, got {band!r}")


def _val(x) -> np.ndarray:
    return np.asarray(jets.value_of(x), dtype=float)


@dataclass(frozen=True)
class ChiEval:
    """χ±^{e±}(a, b, c) = 𝒢(a,b) 𝒢(e±,c) − 𝒢(a,c) 𝒢(e±,b) over TM via σ±."""

    band: int
    values: np.ndarray

    @classmethod
    def build(cls, g: np.ndarray, P: np.ndarray, band: int) -> "ChiEval":
        Pl = g @ P
        vals = np.einsum("ab,c->abc", g, Pl) - np.einsum("ac,b->abc", g, Pl)
        return cls(band, vals)


@dataclass(frozen=True)
class GenRiemann:
    pure_plus: np.ndarray
    pure_minus: np.ndarray
    mixed_plus: np.ndarray
    mixed_minus: np.ndarray

    def pure(self, band: int) -> np.ndarray:
        return self.pure_plus if band > 0 else self.pure_minus

    def mixed(self, band: int) -> np.ndarray:
        return self.mixed_plus if band > 0 else self.mixed_minus

    @property
    def dim(self) -> int:
        return self.pure_plus.shape[0]

    def full(self) -> np.ndarray:
        """Rm^D on the σ-basis of E, shape (2d, 2d, 2d, 2d)."""
        return assemble_full(self)

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(b)) for b in (self.pure_plus, self.pure_minus, self.mixed_plus, self.mixed_minus)))


def assemble_full(R: GenRiemann) -> np.ndarray:
    d = R.dim
    F = np.zeros((2 * d,) * 4)
    for s in (1, -1):
        o = slice(0, d) if s > 0 else slice(d, 2 * d)
        q = slice(d, 2 * d) if s > 0 else slice(0, d)
        F[o, o, o, o] = R.pure(s)
        m = R.mixed(s)
        F[o, q, o, o] = m
        F[q, o, o, o] = -m.transpose(1, 0, 2, 3)
        F[o, o, o, q] = m.transpose(2, 3, 0, 1)
        F[o, o, q, o] = -m.transpose(2, 3, 1, 0)
    return F


def eta_matrix(g: np.ndarray) -> np.ndarray:
    """⟨·,·⟩ on the σ-basis: diag(g, −g)."""
    d = len(g)
    eta = np.zeros((2 * d, 2 * d))
    eta[:d, :d] = g
    eta[d:, d:] = -g
    return eta


def ricci_from_full(F: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Full generalised Ricci R̄c(u, v) = tr_E Rm^D(·, u, ·, v) with ⟨·,·⟩."""
    eta_inv = np.linalg.inv(eta_matrix(g))
    return np.einsum("mn,munv->uv", eta_inv, F)


def mixed_ricci_from_full(F: np.ndarray, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rc^+(A,B) = R̄c(σ−A, σ+B) and Rc^−(A,B) = R̄c(σ+A, σ−B)."""
    d = len(g)
    Rbar = ricci_from_full(F, g)
    return Rbar[d:, :d].copy(), Rbar[:d, d:].copy()


def scalar_from_full(F: np.ndarray, g: np.ndarray) -> float:
    """𝒮c = ½ tr_𝒢 R̄c with 𝒢 = diag(g, g) on the σ-basis."""
    d = len(g)
    G_inv = np.zeros((2 * d, 2 * d))
    ginv = np.linalg.inv(g)
    G_inv[:d, :d] = ginv
    G_inv[d:, d:] = ginv
    return 0.5 * float(np.einsum("uv,uv->", G_inv, ricci_from_full(F, g)))


class GenGeometry:
    """Generalised curvature data of (g, H, e) from jets at one point.

    ``P_plus`` and ``P_minus`` are the vector jets π e± (X ± g⁻¹ξ).  ``g`` must
    carry order ≥ 2 and ``H``, ``P±`` order ≥ 1.
    """

    def __init__(self, g: Jet, H, P_plus, P_minus, ginv=None):
        if g.order < 2:
            raise JetOrderError("generalised curvature needs second derivatives of g")
        self.classical = ClassicalGeometry(g, ginv)
        self.g = g
        self.ginv = self.classical.ginv
        self.H = H
        self.P = {1: P_plus, -1: P_minus}
        self.d = g.shape[0]
        if self.d < 2:
            raise ValueError("generalised curvature needs dimension d ≥ 2")

    @classmethod
    def from_fields(cls, f: PointFields) -> "GenGeometry":
        gxi = einsum("ij,j->i", f.ginv, f.xi)
        return cls(f.g, f.H, f.X + gxi, f.X - gxi, f.ginv)

    # ---------------------------------------------------------- cached values
    @cached_property
    def g0(self) -> np.ndarray:
        return _val(self.g)

    @cached_property
    def ginv0(self) -> np.ndarray:
        return _val(self.ginv)

    @cached_property
    def H0(self) -> np.ndarray:
        return np.broadcast_to(_val(self.H), (self.d,) * 3)

    @cached_property
    def Rm0(self) -> np.ndarray:
        return _val(self.classical.Rm)

    @cached_property
    def H2(self) -> np.ndarray:
        return h2_form(self.H0, self.ginv0)

    @cached_property
    def nabla_H(self) -> np.ndarray:
        """(∇_c H)(x, y, z) for the Levi-Civita connection."""
        if not isinstance(self.H, Jet):
            return np.zeros((self.d,) * 4)
        return _val(covariant_derivative(self.H, self.classical.Gamma, "lll"))

    def P0(self, band: int) -> np.ndarray:
        return np.broadcast_to(_val(self.P[band]), (self.d,))

    def nabla_P(self, band: int, same: bool) -> np.ndarray:
        """(∇^•_c πe±)^k with ∇^• = ∇^{±1/3} (same) or ∇^± (opposite)."""
        c = band / 6.0 if same else band / 2.0
        P = self.P[band]
        if not isinstance(P, Jet):
            P = Jet.constant(np.broadcast_to(P, (self.d,)), self.d, 1)
        H = self.H if isinstance(self.H, Jet) else Jet.constant(self.H0, self.d, 0)
        Gam = twist(self.classical.Gamma, self.ginv, H, c)
        return _val(covariant_derivative(P, Gam, "u"))

    # ------------------------------------------------------------- χ machinery
    def chi(self, band: int) -> ChiEval:
        return ChiEval.build(self.g0, self.P0(band), band)

    def chi_covariant(self, band: int, same: bool) -> np.ndarray:
        """[D⁰_c χ±](a, v, w) = g(A,V) g(∇^•_C πe±, W) − g(A,W) g(∇^•_C πe±, V)."""
        g = self.g0
        gNP = self.nabla_P(band, same) @ g  # gNP[c, w] = g(∇_c P, ∂_w)
        return np.einsum("av,cw->cavw", g, gNP) - np.einsum("aw,cv->cavw", g, gNP)

    # ------------------------------------------------------------ Rm^D blocks
    def pure_block(self, s: int) -> np.ndarray:
        d, g, H2 = self.d, self.g0, self.H2
        X = self.chi_covariant(s, True)
        Pl = g @ self.P0(s)
        n2 = float(self.P0(s) @ Pl)
        rhs = (
            self.Rm0
            - np.einsum("avbw->abvw", H2) / 36.0
            - np.einsum("bvwa->abvw", H2) / 36.0
            - np.einsum("vwab->abvw", H2) / 18.0
        )
        chi_block = (
            np.einsum("vwba->abvw", X)
            - np.einsum("wvba->abvw", X)
            + np.einsum("bavw->abvw", X)
            - X
        )
        quad = (
            2.0 * n2 * (np.einsum("wa,vb->abvw", g, g) - np.einsum("va,wb->abvw", g, g))
            + np.einsum("a,wb,v->abvw", Pl, g, Pl)
            - np.einsum("a,vb,w->abvw", Pl, g, Pl)
            + np.einsum("b,va,w->abvw", Pl, g, Pl)
            - np.einsum("b,wa,v->abvw", Pl, g, Pl)
        )
        rhs = rhs + (s / (2.0 * (d - 1))) * chi_block + quad / (2.0 * (d - 1) ** 2)
        return s * rhs

    def mixed_block(self, s: int) -> np.ndarray:
        d, H2, nH = self.d, self.H2, self.nabla_H
        X = self.chi_covariant(s, False)
        rhs = (
            self.Rm0
            - (s / 2.0) * nH
            + (s / 6.0) * np.einsum("bavw->abvw", nH)
            - np.einsum("bwav->abvw", H2) / 12.0
            - np.einsum("wabv->abvw", H2) / 12.0
            - H2 / 6.0
            + (s / (d - 1)) * np.einsum("bavw->abvw", X)
        )
        return 0.5 * s * rhs

    @cached_property
    def riemann(self) -> GenRiemann:
        return GenRiemann(self.pure_block(1), self.pure_block(-1), self.mixed_block(1), self.mixed_block(-1))

    # ------------------------------------------------------ Ricci and scalar
    @cached_property
    def X_xi(self):
        """(X, ξ) jets recovered from P± (X = (P₊+P₋)/2, ξ = g(P₊−P₋)/2)."""
        Pp, Pm = self.P[1], self.P[-1]
        X = 0.5 * (Pp + Pm)
        xi = 0.5 * einsum("ij,j->i", self.g, Pp - Pm)
        return X, xi

    def _as_jet(self, v, shape) -> Jet:
        if isinstance(v, Jet):
            return v
        return Jet.constant(np.broadcast_to(np.asarray(v, dtype=float), shape), self.d, 1)

    @cached_property
    def ricci_mixed(self) -> tuple[np.ndarray, np.ndarray]:
        """(Rc⁺, Rc⁻) from 4Rc^± = 4Rc − H² ∓ 2d*H + 4[∇ξ]^sym ± 4[∇gX]^antisym ± 2H(ξ)."""
        ginv, Gam = self.ginv0, self.classical.Gamma
        X, xi = self.X_xi
        X = self._as_jet(X, (self.d,))
        xi = self._as_jet(xi, (self.d,))
        Rc = _val(self.classical.Rc)
        Hsq = h_squared(self.H0, ginv)
        dstarH = -np.einsum("ad,adbc->bc", ginv, self.nabla_H)
        nxi = _val(covariant_derivative(xi, Gam, "l"))
        gX = einsum("ij,j->i", self.g, X)
        ngX = _val(covariant_derivative(gX, Gam, "l"))
        # H(ξ)(a, b) = H(a, g⁻¹ξ, b); the trace of the mixed blocks fixes this slot.
        Hxi = np.einsum("akb,k->ab", self.H0, ginv @ _val(xi))
        base = 4.0 * Rc - Hsq + 4.0 * sym(nxi)
        out = {}
        for s in (1, -1):
            out[s] = 0.25 * (base - s * 2.0 * dstarH + s * 4.0 * antisym(ngX) + s * 2.0 * Hxi)
        return out[1], out[-1]

    def div(self, band: int) -> float:
        """div^𝒢(e±) = tr ∇(π e±) for the Levi-Civita connection."""
        P = self._as_jet(self.P[band], (self.d,))
        return float(np.trace(_val(covariant_derivative(P, self.classical.Gamma, "u"))))

    @cached_property
    def e_norm2(self) -> float:
        """|e|²_𝒢 = g(P₊, P₊) + g(P₋, P₋)."""
        g = self.g0
        return float(sum(self.P0(s) @ g @ self.P0(s) for s in (1, -1)))

    @cached_property
    def h_norm2(self) -> float:
        return float(h_norm2(self.H0, self.ginv0))

    @cached_property
    def scalar(self) -> float:
        """𝒮c = Sc − |H|²/12 + div^𝒢(e₊ − e₋) − ½|e|²_𝒢."""
        Sc = float(_val(self.classical.Sc))
        return Sc - self.h_norm2 / 12.0 + self.div(1) - self.div(-1) - 0.5 * self.e_norm2

    @cached_property
    def codiff_xi(self) -> float:
        """d*ξ = −g^{ab} (∇_a ξ)_b."""
        _, xi = self.X_xi
        xi = self._as_jet(xi, (self.d,))
        nxi = _val(covariant_derivative(xi, self.classical.Gamma, "l"))
        return -float(np.einsum("ab,ab->", self.ginv0, nxi))

    @cached_property
    def dilaton_eom(self) -> float:
        """|H|²/6 − d*ξ − ½|e|²_𝒢."""
        return self.h_norm2 / 6.0 - self.codiff_xi - 0.5 * self.e_norm2

    def mixed_trace(self, band: int = 1) -> float:
        rc = self.ricci_mixed[0 if band > 0 else 1]
        return float(np.einsum("ab,ab->", self.ginv0, rc))

    def mixed_trace_identity(self, band: int = 1) -> float:
        """tr_g Rc^± − (Sc − |H|²/4 − d*ξ)."""
        Sc = float(_val(self.classical.Sc))
        return self.mixed_trace(band) - (Sc - self.h_norm2 / 4.0 - self.codiff_xi)


# ------------------------------------------------------------------ public API
@dataclass(frozen=True)
class GenRicciMixed:
    rc_plus: np.ndarray
    rc_minus: np.ndarray

    def compatibility_defect(self) -> float:
        """max |Rc⁺(a,b) − Rc⁻(b,a)|, zero for compatible pairs."""
        return float(np.max(np.abs(self.rc_plus - self.rc_minus.T)))


def geometry_at(amb: AmbientStructure, point: Sequence[float], order: int = 3) -> GenGeometry:
    return GenGeometry.from_fields(amb.fields_at(point, order))


def chi_covariant(amb: AmbientStructure, point: Sequence[float], band, direction_band: str) -> np.ndarray:
    """[D⁰_c χ±](a,v,w) as an array indexed [c, a, v, w]."""
    if direction_band not in ("pure", "mixed"):
        raise ValueError("direction_band must be 'pure' or 'mixed'")
    return geometry_at(amb, point, 2).chi_covariant(parse_band(band), direction_band == "pure")


def gen_riemann(amb: AmbientStructure, point: Sequence[float]) -> GenRiemann:
    return geometry_at(amb, point).riemann


def gen_ricci_mixed(amb: AmbientStructure, point: Sequence[float]) -> GenRicciMixed:
    return GenRicciMixed(*geometry_at(amb, point).ricci_mixed)


def gen_scalar(amb: AmbientStructure, point: Sequence[float]) -> float:
    return geometry_at(amb, point).scalar


def dilaton_eom(amb: AmbientStructure, point: Sequence[float]) -> float:
    return geometry_at(amb, point, 2).dilaton_eom


def mixed_trace_identity(amb: AmbientStructure, point: Sequence[float], band=1) -> float:
    return geometry_at(amb, point).mixed_trace_identity(parse_band(band))


def band_selectors(d: int) -> dict[int, np.ndarray]:
    """U[s] (2d × d) embeds TM-indices into the σs block of the σ-basis."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return {1: np.vstack([eye, zero]), -1: np.vstack([zero, eye])}


def canonical_coefficients(Gamma: Jet, g, ginv, H, P_plus, P_minus, chi_dim: int) -> Jet:
    """Ω[K, I, J] with D_{b_I} b_J = Ω^K_{IJ} b_K on the σ-basis.

    The same-band correction is ±(1/(chi_dim − 1))[g(A,B)P± − A g(P±, B)];
    ``chi_dim`` is the dimension of the manifold carrying the χ-term (the
    ambient dimension also for an induced connection).
    """
    d = Gamma.shape[0]
    U = band_selectors(d)
    tw = einsum("kl,ijl->kij", ginv, H)
    eye = np.eye(d)
    out = None
    for s, P in ((1, P_plus), (-1, P_minus)):
        Pl = einsum("ij,j->i", g, P)
        corr = einsum("ij,k->kij", g, P) - einsum("ki,j->kij", eye, Pl)
        same = Gamma + (s / 6.0) * tw + (s / (chi_dim - 1.0)) * corr
        opposite = Gamma + (s / 2.0) * tw
        for t, block in ((s, same), (-s, opposite)):
            term = einsum("pk,qi,rj,kij->pqr", U[s], U[t], U[s], block)
            out = term if out is None else out + term
    return out
