"""Classical tensor calculus in a chart, over jets.

Index conventions:

* ``Gamma[k, i, j] = Γ^k_{ij}`` with ∇_{∂_i} ∂_j = Γ^k_{ij} ∂_k.
* ``Rm[w, z, x, y] = Rm(W, Z, X, Y) = g(Rm(X, Y) Z, W)`` with
  Rm(X, Y) = ∇²_{X,Y} − ∇²_{Y,X}; the round sphere has positive sectional
  curvature Rm(X, Y, X, Y) > 0.
* ``Rc[x, y] = tr_g Rm(·, X, ·, Y)`` and ``Sc = tr_g Rc``.
* Covariant derivatives put the derivative index first.
* The codifferential is d*ω = −tr_g ∇ω, contracting the derivative slot with
  the first slot of ω.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import jets
from .fields import MetricField, check_metric
from .jets import Jet, JetOrderError, einsum

TAGS = {"levi_civita": 0.0, "plus": 0.5, "minus": -0.5, "plus_third": 1.0 / 6.0, "minus_third": -1.0 / 6.0}


def christoffel_from_metric(g: Jet, ginv) -> Jet:
    """Levi-Civita symbols from a metric jet (loses one order)."""
    if g.order < 1:
        raise JetOrderError("Christoffel symbols need first derivatives of g")
    dg = g.partial()  # dg[a, b, c] = ∂_c g_ab
    # T[l, i, j] = ∂_i g_lj + ∂_j g_li − ∂_l g_ij
    T = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)
    return 0.5 * einsum("kl,lij->kij", ginv, T)


def twist(Gamma, ginv, H, c: float):
    """Symbols of ∇ + c H_X, where g(H_X Y, Z) = H(X, Y, Z)."""
    if c == 0.0:
        return Gamma
    return Gamma + c * einsum("kl,ijl->kij", ginv, H)


def riemann_from_christoffel(Gamma: Jet, g) -> Jet:
    """Fully covariant Rm[w, z, x, y] (loses one order relative to Γ)."""
    dG = Gamma.partial()  # dG[l, j, k, i] = ∂_i Γ^l_jk
    R = (
        dG.transpose(0, 2, 3, 1)  # [l,k,i,j] <- ∂_i Γ^l_{jk}
        - dG.transpose(0, 2, 1, 3)  # [l,k,i,j] <- ∂_j Γ^l_{ik}
        + einsum("lim,mjk->lkij", Gamma, Gamma)
        - einsum("ljm,mik->lkij", Gamma, Gamma)
    )
    return einsum("lm,mkij->lkij", g, R)


def ricci_from_riemann(Rm, ginv):
    return einsum("lm,lxmy->xy", ginv, Rm)


def scalar_from_ricci(Rc, ginv):
    return einsum("xy,xy->", ginv, Rc)


def kulkarni_nomizu(h, k):
    """(h ⊙ k)_{abcd} = h_ac k_bd + h_bd k_ac − h_ad k_bc − h_bc k_ad."""
    return (
        einsum("ac,bd->abcd", h, k)
        + einsum("bd,ac->abcd", h, k)
        - einsum("ad,bc->abcd", h, k)
        - einsum("bc,ad->abcd", h, k)
    )


def weyl_decomposition(Rm: np.ndarray, Rc: np.ndarray, Sc: float, g: np.ndarray):
    """Split Rm = S + E + W into scalar, trace-free Ricci and Weyl parts.

    S(A,B,A,B) = Sc/(d(d−1)) CS(A,B) and, for A ⊥ B,
    E(A,B,A,B) = (Z(A,A)|B|² + Z(B,B)|A|²)/(d−2) with Z = Rc − (Sc/d) g.
    """
    d = len(g)
    Z = Rc - (Sc / d) * g
    S = (0.5 * Sc / (d * (d - 1))) * kulkarni_nomizu(g, g)
    if d <= 2:
        return S, np.zeros_like(Rm), np.zeros_like(Rm), Z
    E = kulkarni_nomizu(Z, g) / (d - 2)
    return S, E, Rm - S - E, Z


def covariant_derivative(T, Gamma, variance: str):
    """∇T with the derivative index first.

    ``variance`` has one character per index of T: 'l' (lower) or 'u' (upper).
    Γ may carry torsion (twisted symbols), in which case the result is the
    derivative for that connection.
    """
    if not isinstance(T, Jet):
        raise JetOrderError("covariant derivative needs a jet")
    r = len(variance)
    dT = T.partial()
    dT = dT.transpose(r, *range(r))  # derivative index first
    letters = "abcdefgh"[:r]
    out = dT
    for p, kind in enumerate(variance):
        src = list(letters)
        if kind == "l":
            src[p] = "m"
            spec = f"mz{letters[p]},{''.join(src)}->z{letters}"
            out = out - einsum(spec, Gamma, T)
        elif kind == "u":
            src[p] = "m"
            spec = f"{letters[p]}zm,{''.join(src)}->z{letters}"
            out = out + einsum(spec, Gamma, T)
        else:
            raise ValueError(f"unknown variance {kind!r}")
    return out


def codifferential(nabla_omega, ginv):
    """d*ω = −g^{ab} (∇_a ω)_{b ...} for a covariant-derivative array ∇ω."""
    r = len(jets.value_of(nabla_omega).shape) - 2
    rest = "cdefgh"[:r]
    return -einsum(f"ab,ab{rest}->{rest}", ginv, nabla_omega)


def lie_derivative_metric_from(nabla_X, g):
    """(L_X g)_ij = g_jk ∇_i X^k + g_ik ∇_j X^k for ∇X[i, k] = ∇_i X^k."""
    A = einsum("jk,ik->ij", g, nabla_X)
    return A + A.T if not isinstance(A, Jet) else A + A.transpose(1, 0)


def sym(T):
    """[T]^sym(a, b) = ½(T(a, b) + T(b, a))."""
    return 0.5 * (T + (T.transpose(1, 0) if isinstance(T, Jet) else T.T))


def antisym(T):
    """[T]^antisym(a, b) = ½(T(a, b) − T(b, a))."""
    return 0.5 * (T - (T.transpose(1, 0) if isinstance(T, Jet) else T.T))


class ClassicalGeometry:
    """Lazily computed classical quantities from metric jets (any chart)."""

    def __init__(self, g: Jet, ginv=None):
        self.g = g
        self.ginv = ginv if ginv is not None else jets.matrix_inverse(g)
        self.d = g.shape[0]

    @cached_property
    def Gamma(self) -> Jet:
        return christoffel_from_metric(self.g, self.ginv)

    @cached_property
    def Rm(self) -> Jet:
        return riemann_from_christoffel(self.Gamma, self.g)

    @cached_property
    def Rc(self):
        return ricci_from_riemann(self.Rm, self.ginv)

    @cached_property
    def Sc(self):
        return scalar_from_ricci(self.Rc, self.ginv)

    def connection(self, tag: str, H=None):
        c = TAGS[tag]
        return self.Gamma if c == 0.0 else twist(self.Gamma, self.ginv, H, c)

    def nabla(self, T, variance: str, Gamma=None):
        return covariant_derivative(T, self.Gamma if Gamma is None else Gamma, variance)

    def curvature_bundle(self) -> "CurvatureBundle":
        v = jets.value_of
        Rm, Rc, Sc, g = v(self.Rm), v(self.Rc), float(v(self.Sc)), v(self.g)
        S, E, W, Z = weyl_decomposition(Rm, Rc, Sc, g)
        return CurvatureBundle(Rm, Rc, Sc, W, Z, S, E)


@dataclass(frozen=True)
class ConnectionCoefficients:
    Gamma: Jet
    tag: str


@dataclass(frozen=True)
class CurvatureBundle:
    Rm: np.ndarray
    Rc: np.ndarray
    Sc: float
    Weyl: np.ndarray
    Z: np.ndarray
    S: np.ndarray
    E: np.ndarray


def christoffels(g: MetricField, point: Sequence[float], order: int = 0, tag: str = "levi_civita", H=None) -> ConnectionCoefficients:
    """Connection symbols at ``point`` carried to jet order ``order`` (0..2)."""
    if not 0 <= order <= 2:
        raise JetOrderError("Christoffel jets are available up to order 2")
    gj = g.evaluate(point, order + 1)
    check_metric(gj.value, g.signature)
    geo = ClassicalGeometry(gj)
    Gamma = geo.connection(tag, H.evaluate(point, order) if H is not None else None)
    return ConnectionCoefficients(Gamma.truncate(order), tag)


def curvature(g: MetricField, point: Sequence[float]) -> CurvatureBundle:
    gj = g.evaluate(point, 3)
    check_metric(gj.value, g.signature)
    return ClassicalGeometry(gj).curvature_bundle()


def lie_derivative_metric(X_exprs, g: MetricField, point: Sequence[float]) -> np.ndarray:
    """L_X g at ``point`` for a vector field given by expressions over g's chart."""
    from .fields import _env, _jet_array
    from .expr import evaluate

    env = _env(point, 2)
    X = _jet_array([evaluate(e, env) for e in X_exprs], (g.chart.dim,), env)
    geo = ClassicalGeometry(g.evaluate(env))
    return jets.value_of(lie_derivative_metric_from(geo.nabla(X, "u"), geo.g))
