"""Independent oracles used by the test-suite.

Nothing here imports the closed-form curvature blocks; the generalised
Riemann tensor is rebuilt from its definition

    Rm^D(a,b,v,w) = ½{⟨(D²_{v,w} − D²_{w,v}) b, a⟩ + ⟨(D²_{b,a} − D²_{a,b}) v, w⟩
                      − tr_E(⟨D v, w⟩⟨D b, a⟩)}

using connection coefficients of the canonical connection on the σ-basis
(σ+∂_1 … σ+∂_d, σ−∂_1 … σ−∂_d).
"""

from __future__ import annotations

import numpy as np

from gcurv import jets
from gcurv.classical import christoffel_from_metric
from gcurv.jets import Jet, einsum


def canonical_coefficients(g: Jet, H: Jet, Pp: Jet, Pm: Jet) -> Jet:
    """Ω[K, I, J] with D_{b_I} b_J = Ω^K_{IJ} b_K, as a jet of order g.order − 1."""
    d = g.shape[0]
    ginv = jets.matrix_inverse(g)
    Gam = christoffel_from_metric(g, ginv)
    order = Gam.order
    H = H.truncate(order)
    tw = einsum("kl,ijl->kij", ginv, H)  # g^{kl} H_{ijl}
    eye = np.eye(d)
    zero = Jet.constant(np.zeros((d, d, d)), d, order)
    blocks = {}
    for s, P in ((1, Pp), (-1, Pm)):
        P = P.truncate(order)
        Pl = einsum("ij,j->i", g, P)
        same = Gam + (s / 6.0) * tw
        corr = einsum("ij,k->kij", g, P) - einsum("ki,j->kij", Jet.constant(eye, d, order), Pl)
        blocks[(s, s)] = same + (s / (d - 1.0)) * corr  # direction band s, section band s
        blocks[(-s, s)] = Gam + (s / 2.0) * tw  # direction band −s, section band s
    # Assemble Ω[K, I, J]: K and J share the section band.
    rows = []
    for K_band in (1, -1):
        for k in range(d):
            row = []
            for I_band in (1, -1):
                for i in range(d):
                    for J_band in (1, -1):
                        for j in range(d):
                            if J_band == K_band:
                                row.append(blocks[(I_band, J_band)][k, i, j])
                            else:
                                row.append(zero[0, 0, 0])
            rows.append(row)
    flat = [x for row in rows for x in row]
    return Jet.stack(flat, (2 * d, 2 * d, 2 * d))


def gen_riemann_from_definition(g: Jet, H: Jet, Pp: Jet, Pm: Jet) -> np.ndarray:
    """Full (2d)^4 array of Rm^D evaluated from the definition."""
    d = g.shape[0]
    Om = canonical_coefficients(g, H, Pp, Pm)
    O = np.asarray(Om.value)
    dO_full = Om.partial().value  # [K, I, J, m] = ∂_m Ω^K_{IJ}
    proj = np.concatenate([np.arange(d), np.arange(d)])
    dO = dO_full[..., proj]  # derivative along π b_V
    g0 = np.asarray(g.value)
    eta = np.zeros((2 * d, 2 * d))
    eta[:d, :d] = g0
    eta[d:, d:] = -g0
    eta_inv = np.linalg.inv(eta)
    # Curv[K, B, V, W] = ((D²_{V,W} − D²_{W,V}) b_B)^K
    curv = (
        np.einsum("kwbv->kbvw", dO)
        - np.einsum("kvbw->kbvw", dO)
        + np.einsum("lwb,kvl->kbvw", O, O)
        - np.einsum("lvb,kwl->kbvw", O, O)
        - np.einsum("lvw,klb->kbvw", O, O)
        + np.einsum("lwv,klb->kbvw", O, O)
    )
    C = np.einsum("ak,kbvw->abvw", eta, curv)  # ⟨(D²_{v,w} − D²_{w,v}) b, a⟩
    Dvw = np.einsum("kiv,kw->ivw", O, eta)  # ⟨D_{b_I} b_v, b_w⟩
    Dba = np.einsum("kjb,ka->jba", O, eta)
    tr = np.einsum("ij,ivw,jba->abvw", eta_inv, Dvw, Dba)
    return 0.5 * (C + np.einsum("wvba->abvw", C) - tr)


def central_difference(f, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """4th-order central differences of a vector/array-valued function."""
    x = np.asarray(x, dtype=float)
    out = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        out.append((-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h))
    return np.stack(out, axis=-1)
