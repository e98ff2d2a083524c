"""Reference-element Lagrange bases and the interface enrichment functions.

The local space on an interface element is spanned by Lagrange polynomials
multiplied against piecewise-linear enrichment functions.  Two slope
conventions are supported: ``"slopes"`` normalizes each one-sided function to
value 1 at the interface, ``"slopesC"`` uses slopes bounded by 1 (the pair is
then one continuous hat plus one one-sided function).

This module also carries the structural facts the space construction relies
on: bubble Lagrange functions are linearly dependent on the enriched set
(``bubble_dependence``), and any piecewise-polynomial pair is exactly
representable (``represent_piecewise``).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import SingularSystem

_SNAP = 1e-13  # distance below which an evaluation point is treated as a node


class LagrangeBasis:
    """Lagrange nodal basis of order p on [0, 1] with nodes i/p.

    Evaluation uses the barycentric form, which stays accurate near nodes;
    derivatives come from the standard rational-derivative identity with the
    differentiation-matrix rows substituted at (snapped) nodes.
    """

    def __init__(self, p: int):
        if p < 1:
            raise ValueError("order must be >= 1")
        self.p = p
        self.nodes = np.arange(p + 1) / p
        diff = self.nodes[:, None] - self.nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        self.bary = 1.0 / np.prod(diff, axis=1)
        # differentiation matrix D[m, i] = q_i'(node_m)
        D = np.empty((p + 1, p + 1))
        for m in range(p + 1):
            for i in range(p + 1):
                if i != m:
                    D[m, i] = (self.bary[i] / self.bary[m]) / (
                        self.nodes[m] - self.nodes[i]
                    )
        for m in range(p + 1):
            D[m, m] = 0.0
            D[m, m] = -np.sum(D[m])
        self._diffmat = D

    def values(self, x) -> np.ndarray:
        """Array of shape (len(x), p+1) with q_i(x_j) entries."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = x[:, None] - self.nodes[None, :]
        near = np.abs(d) < _SNAP
        is_node = near.any(axis=1)
        d_safe = np.where(near, 1.0, d)
        mu = self.bary[None, :] / d_safe
        denom = mu.sum(axis=1, keepdims=True)
        denom[is_node] = 1.0  # snapped rows are overwritten below
        vals = mu / denom
        if is_node.any():
            vals[is_node] = near[is_node].astype(float)
        return vals

    def derivs(self, x) -> np.ndarray:
        """Array of shape (len(x), p+1) with q_i'(x_j) entries."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = x[:, None] - self.nodes[None, :]
        near = np.abs(d) < _SNAP
        is_node = near.any(axis=1)
        d_safe = np.where(near, 1.0, d)
        mu = self.bary[None, :] / d_safe
        denom = mu.sum(axis=1, keepdims=True)
        denom[is_node] = 1.0  # snapped rows are overwritten below
        mu /= denom
        s = (mu / d_safe).sum(axis=1, keepdims=True)
        out = mu * (s - 1.0 / d_safe)
        if is_node.any():
            idx = near[is_node].argmax(axis=1)
            out[is_node] = self._diffmat[idx]
        return out

    def monomial_coeffs(self) -> np.ndarray:
        """Row i holds the monomial coefficients (low to high) of q_i."""
        out = np.zeros((self.p + 1, self.p + 1))
        for i in range(self.p + 1):
            roots = np.delete(self.nodes, i)
            poly = np.polynomial.Polynomial.fromroots(roots)
            poly = poly / poly(self.nodes[i])
            out[i, : len(poly.coef)] = poly.coef
        return out

    def endpoint_derivatives(self, at: float) -> np.ndarray:
        """All derivatives q_i^(l)(at) for l = 0..p, shape (p+1, p+1) [i, l]."""
        coeffs = self.monomial_coeffs()
        out = np.empty((self.p + 1, self.p + 1))
        for i in range(self.p + 1):
            poly = np.polynomial.Polynomial(coeffs[i])
            for order in range(self.p + 1):
                out[i, order] = poly(at)
                poly = poly.deriv()
        return out


@dataclass(frozen=True)
class Enrichment:
    """A piecewise-linear enrichment on the element [x_lo, x_hi].

    kind is "left" (supported on [x_lo, alpha)), "right" (supported on
    (alpha, x_hi]) or "hat" (continuous, supported on the whole element).
    m1/m2 are the slopes left/right of alpha; unused slope is 0.
    """

    kind: str
    x_lo: float
    x_hi: float
    alpha: float
    m1: float
    m2: float

    def eval(self, x, side):
        """Value and one-sided derivative arrays at points ``x``.

        ``side`` (-1/+1, scalar or array) picks the branch when a point sits
        exactly at alpha; elsewhere it is ignored.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        side = np.broadcast_to(np.asarray(side), x.shape)
        at_alpha = x == self.alpha
        on_left = (x < self.alpha) | (at_alpha & (side < 0))
        on_right = (x > self.alpha) | (at_alpha & (side >= 0))
        in_elem = (x >= self.x_lo) & (x <= self.x_hi)
        val = np.zeros_like(x)
        der = np.zeros_like(x)
        if self.kind in ("left", "hat"):
            m = on_left & in_elem
            val[m] = self.m1 * (x[m] - self.x_lo)
            der[m] = self.m1
        if self.kind in ("right", "hat"):
            m = on_right & in_elem
            val[m] = self.m2 * (x[m] - self.x_hi)
            der[m] = self.m2
        return val, der


def make_enrichments(x_lo, x_hi, alpha, convention="slopes"):
    """The (psi_0, psi_1) pair for a discontinuous interface.

    "slopes": both one-sided functions reach value 1 at the interface.
    "slopesC": the pair is the continuous hat plus the right one-sided
    function, all with slopes bounded by 1.
    """
    h = x_hi - x_lo
    if convention == "slopes":
        psi0 = Enrichment("left", x_lo, x_hi, alpha, 1.0 / (alpha - x_lo), 0.0)
        psi1 = Enrichment("right", x_lo, x_hi, alpha, 0.0, 1.0 / (alpha - x_hi))
    elif convention == "slopesC":
        m1t = (alpha - x_hi) / h
        m2t = (alpha - x_lo) / h
        psi0 = Enrichment("hat", x_lo, x_hi, alpha, m1t, m2t)
        psi1 = Enrichment("right", x_lo, x_hi, alpha, 0.0, m2t)
    else:
        raise ValueError(f"unknown slope convention {convention!r}")
    return psi0, psi1


def make_hat(x_lo, x_hi, alpha) -> Enrichment:
    """The continuous hat enrichment used at continuous interfaces."""
    h = x_hi - x_lo
    return Enrichment("hat", x_lo, x_hi, alpha, (alpha - x_hi) / h, (alpha - x_lo) / h)


def eval_enrichment(f: Enrichment, x, side=1):
    """Scalar convenience wrapper: (value, one-sided derivative) at ``x``."""
    v, d = f.eval(np.array([float(x)]), np.array([side]))
    return float(v[0]), float(d[0])


def bubble_dependence(p: int, alpha_hat: float, convention="slopes"):
    """Express every bubble q_i (1 <= i <= p-1) through the enriched set.

    Returns ``(coeffs, residual)`` where ``coeffs[i]`` has shape (p+1, 2):
    column 0 multiplies q_l*psi_0, column 1 multiplies q_l*psi_1, and
    ``residual`` is the max pointwise mismatch over 200 sample points.

    The coefficients come from two unit-slope Wronskian systems (Taylor
    matching at each endpoint); a least-squares fit over sample points is
    substituted if either system is ill-conditioned.
    """
    if p < 2:
        return [], 0.0
    basis = LagrangeBasis(p)
    psi0, psi1 = make_enrichments(0.0, 1.0, alpha_hat, convention)
    endd0 = basis.endpoint_derivatives(0.0)  # [i, l] = q_i^(l)(0)
    endd1 = basis.endpoint_derivatives(1.0)

    # Row j (j = 1..p+1) matches the x^j Taylor coefficient of q_bubble
    # against that of x * sum_l s_l q_l; columns are scaled Wronskian entries.
    def wronskian_system(endd):
        A = np.empty((p + 1, p + 1))
        for j in range(1, p + 2):
            A[j - 1] = endd[:, j - 1] / factorial(j - 1)
        return A

    A0 = wronskian_system(endd0)
    A1 = wronskian_system(endd1)
    ill_conditioned = max(np.linalg.cond(A0), np.linalg.cond(A1)) > 1e12
    xs = np.linspace(0.0, 1.0, 200)
    sides = np.where(xs <= alpha_hat, -1, 1)
    qv = basis.values(xs)
    p0v, _ = psi0.eval(xs, sides)
    p1v, _ = psi1.eval(xs, sides)
    design = np.hstack([qv * p0v[:, None], qv * p1v[:, None]])

    coeffs = []
    worst = 0.0
    for i in range(1, p):
        if ill_conditioned:
            sol, *_ = np.linalg.lstsq(design, qv[:, i], rcond=None)
            s = sol.reshape(2, p + 1).T
        else:
            # derivative order p+1 of a degree-p polynomial vanishes
            rhs0 = np.array(
                [endd0[i, j] / factorial(j) for j in range(1, p + 1)] + [0.0]
            )
            rhs1 = np.array(
                [endd1[i, j] / factorial(j) for j in range(1, p + 1)] + [0.0]
            )
            try:
                s_left = np.linalg.solve(A0, rhs0)
                s_right = np.linalg.solve(A1, rhs1)
            except np.linalg.LinAlgError as exc:
                raise SingularSystem("endpoint Wronskian is singular") from exc
            # the systems assume unit slopes; rescale to the actual psi pair
            s = np.column_stack([s_left, s_right])
            s[:, 0] /= _left_slope(psi0)
            s[:, 1] /= _right_slope(psi1)
            if psi0.kind == "hat":
                # hat contributes on the right branch too; compensate via psi1
                s[:, 1] -= s[:, 0] * _right_slope(psi0) / _right_slope(psi1)
        coeffs.append(s)
        recon = design @ s.T.ravel()
        worst = max(worst, float(np.max(np.abs(recon - qv[:, i]))))
    return coeffs, worst


def _left_slope(e: Enrichment) -> float:
    return e.m1 if e.kind in ("left", "hat") else 0.0


def _right_slope(e: Enrichment) -> float:
    return e.m2 if e.kind in ("right", "hat") else 0.0


def represent_piecewise(p, alpha_hat, u1, u2, convention="slopes"):
    """Coefficients representing a piecewise-polynomial pair exactly.

    ``u1`` are monomial coefficients about 0 (the function on [0, alpha_hat))
    and ``u2`` monomial coefficients about 1 (on (alpha_hat, 1]); both low to
    high, length p+1.  Returns the dense coefficient vector ``zeta`` of
    length 3p+3 laid out as

        zeta[0..p]        -> q_j  (bubble slots stay 0)
        zeta[p+1..2p+1]   -> q_j * psi_0
        zeta[2p+2..3p+2]  -> q_j * psi_1

    so that the sum reproduces u1 left of the interface and u2 right of it.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if len(u1) != p + 1 or len(u2) != p + 1:
        raise ValueError("coefficient arrays must have length p+1")
    basis = LagrangeBasis(p)
    endd0 = basis.endpoint_derivatives(0.0)
    endd1 = basis.endpoint_derivatives(1.0)
    n = 2 * p + 4
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    # unknown layout: [zeta_0, zeta_p, e0_0..e0_p, e1_0..e1_p] with the
    # enrichment slopes taken as 1 and rescaled afterwards
    E0, E1 = 2, p + 3
    row = 0
    A[row, E0 : E0 + p + 1] = endd0[:, p]  # highest-power match, left
    row += 1
    for l in range(p + 1):
        A[row, 0] = endd0[0, l] / factorial(l)
        A[row, 1] = endd0[p, l] / factorial(l)
        if l >= 1:
            A[row, E0 : E0 + p + 1] = endd0[:, l - 1] / factorial(l - 1)
        rhs[row] = u1[l]
        row += 1
    A[row, E1 : E1 + p + 1] = endd1[:, p]  # highest-power match, right
    row += 1
    for l in range(p + 1):
        A[row, 0] = endd1[0, l] / factorial(l)
        A[row, 1] = endd1[p, l] / factorial(l)
        if l >= 1:
            A[row, E1 : E1 + p + 1] = endd1[:, l - 1] / factorial(l - 1)
        rhs[row] = u2[l]
        row += 1
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("piecewise representation system is singular") from exc

    psi0, psi1 = make_enrichments(0.0, 1.0, alpha_hat, convention)
    zeta = np.zeros(3 * p + 3)
    zeta[0] = sol[0]
    zeta[p] = sol[1]
    left = sol[E0 : E0 + p + 1]
    right = sol[E1 : E1 + p + 1]
    # unit-slope coefficients -> actual enrichment pair
    zeta[p + 1 : 2 * p + 2] = left / _left_slope(psi0)
    zeta[2 * p + 2 :] = right / _right_slope(psi1)
    if psi0.kind == "hat":
        zeta[2 * p + 2 :] -= zeta[p + 1 : 2 * p + 2] * (
            _right_slope(psi0) / _right_slope(psi1)
        )
    return zeta


def eval_piecewise(p, alpha_hat, zeta, xs, sides, convention="slopes"):
    """Evaluate a represent_piecewise coefficient vector at sample points."""
    basis = LagrangeBasis(p)
    psi0, psi1 = make_enrichments(0.0, 1.0, alpha_hat, convention)
    qv = basis.values(xs)
    p0v, _ = psi0.eval(xs, sides)
    p1v, _ = psi1.eval(xs, sides)
    std = qv @ zeta[: p + 1]
    enr0 = (qv * p0v[:, None]) @ zeta[p + 1 : 2 * p + 2]
    enr1 = (qv * p1v[:, None]) @ zeta[2 * p + 2 :]
    return std + enr0 + enr1
