"""Tensor-product solver for the separable 2D interface problem.

The operator is the Kronecker sum

    K_x(beta) (x) M_y  +  M_x (x) K_y  +  J_x (x) M_y

with J_x the rank-one jump penalty in x; it is applied matrix-free by
reshaping the unknown into a (dim_x, dim_y) array.  Both directions use the
same polynomial order; the y direction is a plain (unenriched) space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import PiecewiseField, assemble_term, jump_vectors
from .errors import DimensionMismatch
from .linalg import pcg
from .mesh_space import EnrichedSpace, build_mesh
from .problems import Problem2D
from .quadrature import gauss_rule, split_rule


@dataclass
class KroneckerOperator:
    """Matrix-free sum of Kronecker products plus a rank-one x-jump term."""

    Kx: np.ndarray  # CSR handles, kept as scipy matrices for speed
    Mx: np.ndarray
    Ky: np.ndarray
    My: np.ndarray
    jumps: list  # [(lam, j_vec)] in the x direction
    dim_x: int
    dim_y: int

    @property
    def n(self) -> int:
        return self.dim_x * self.dim_y

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if len(x) != self.n:
            raise DimensionMismatch(f"vector length {len(x)} vs {self.n}")
        U = x.reshape(self.dim_x, self.dim_y)
        out = self.Kx @ U @ self.My + self.Mx @ U @ self.Ky
        for lam, j in self.jumps:
            out += np.outer(j, (j @ U) @ self.My) / lam
        return out.ravel()

    def diagonal(self) -> np.ndarray:
        dK, dM = self.Kx.diagonal(), self.Mx.diagonal()
        dKy, dMy = self.Ky.diagonal(), self.My.diagonal()
        d = np.outer(dK, dMy) + np.outer(dM, dKy)
        for lam, j in self.jumps:
            d += np.outer(j * j, dMy) / lam
        return d.ravel()


@dataclass
class TensorSolution:
    space_x: EnrichedSpace
    space_y: EnrichedSpace
    U: np.ndarray  # (dim_x, dim_y) coefficients
    iters: int


def build_operator(space_x: EnrichedSpace, space_y: EnrichedSpace,
                   beta: PiecewiseField) -> KroneckerOperator:
    one = PiecewiseField.constant(1.0)
    Kx = assemble_term(space_x, "stiffness", beta).to_scipy()
    # the coefficient multiplies both gradient components, so the x-mass
    # paired with K_y is beta-weighted too
    Mx = assemble_term(space_x, "mass", beta).to_scipy()
    Ky = assemble_term(space_y, "stiffness", one).to_scipy()
    My = assemble_term(space_y, "mass", one).to_scipy()
    jumps = jump_vectors(space_x)
    return KroneckerOperator(Kx, Mx, Ky, My, jumps,
                             space_x.dim, space_y.dim)


def load_2d(space_x: EnrichedSpace, space_y: EnrichedSpace, F) -> np.ndarray:
    """Tensor-quadrature load (F, phi_x psi_y); F has signature (x, side, y)."""
    b = np.zeros((space_x.dim, space_y.dim))
    nqx, nqy = space_x.p + 3, space_y.p + 3
    for ix in space_x.elements:
        if ix.interface is None:
            rx = gauss_rule(nqx, (ix.x_lo, ix.x_hi))
        else:
            rx = split_rule((ix.x_lo, ix.x_hi), ix.interface.x, nqx)
        phix, _ = space_x.element_tab(ix.index, rx.points, rx.sides)
        for iy in space_y.elements:
            ry = gauss_rule(nqy, (iy.x_lo, iy.x_hi))
            phiy, _ = space_y.element_tab(iy.index, ry.points, ry.sides)
            Fq = np.array(
                [[F(x, s, y) for y in ry.points]
                 for x, s in zip(rx.points, rx.sides)]
            )
            loc = phix.T @ (Fq * np.outer(rx.weights, ry.weights)) @ phiy
            fx = ix.dofs >= 0
            fy = iy.dofs >= 0
            b[np.ix_(ix.dofs[fx], iy.dofs[fy])] += loc[np.ix_(fx, fy)]
    return b


def solve_2d(prob: Problem2D, p: int, n: int, convention="slopes",
             tol=1e-12) -> TensorSolution:
    """Solve on an n-by-n tensor grid with Jacobi-preconditioned CG."""
    mesh_x = build_mesh(n, prob.interfaces)
    mesh_y = build_mesh(n)
    space_x = EnrichedSpace(mesh_x, p, convention, dirichlet=(True, True))
    space_y = EnrichedSpace(mesh_y, p, dirichlet=(True, True))
    op = build_operator(space_x, space_y, prob.beta)
    b = load_2d(space_x, space_y, prob.F)
    x, iters = pcg(op, b.ravel(), tol=tol)
    return TensorSolution(space_x, space_y, x.reshape(op.dim_x, op.dim_y),
                          iters)


def errors_2d(sol: TensorSolution, prob: Problem2D):
    """(l2, h1, nodal) errors against the separable exact solution.

    The nodal error is the max over the interior breakpoint grid, with the
    x-evaluation taken from the left.
    """
    sx, sy = sol.space_x, sol.space_y
    nq = max(sx.p + 5, 10)
    l2_sq = 0.0
    h1_sq = 0.0
    du = prob.factor_deriv
    u = prob.factor_exact
    for ix in sx.elements:
        if ix.interface is None:
            rx = gauss_rule(nq, (ix.x_lo, ix.x_hi))
        else:
            rx = split_rule((ix.x_lo, ix.x_hi), ix.interface.x, nq)
        phix, dphix = sx.element_tab(ix.index, rx.points, rx.sides)
        fx = ix.dofs >= 0
        for iy in sy.elements:
            ry = gauss_rule(nq, (iy.x_lo, iy.x_hi))
            phiy, dphiy = sy.element_tab(iy.index, ry.points, ry.sides)
            fy = iy.dofs >= 0
            Uloc = sol.U[np.ix_(ix.dofs[fx], iy.dofs[fy])]
            got = phix[:, fx] @ Uloc @ phiy[:, fy].T
            got_dx = dphix[:, fx] @ Uloc @ phiy[:, fy].T
            got_dy = phix[:, fx] @ Uloc @ dphiy[:, fy].T
            ex = np.empty_like(got)
            ex_dx = np.empty_like(got)
            ex_dy = np.empty_like(got)
            for a, (x, s) in enumerate(zip(rx.points, rx.sides)):
                ux, dux = u(x, s), du(x, s)
                for c, y in enumerate(ry.points):
                    g = y * (y - 1.0)
                    ex[a, c] = ux * g
                    ex_dx[a, c] = dux * g
                    ex_dy[a, c] = ux * (2.0 * y - 1.0)
            w2 = np.outer(rx.weights, ry.weights)
            l2_sq += float((w2 * (got - ex) ** 2).sum())
            h1_sq += float(
                (w2 * ((got_dx - ex_dx) ** 2 + (got_dy - ex_dy) ** 2)).sum()
            )
    xb = sx.mesh.breakpoints[1:-1]
    yb = sy.mesh.breakpoints[1:-1]
    Vx = _basis_matrix(sx, xb, sides=-1)
    Vy = _basis_matrix(sy, yb, sides=-1)
    got_nodes = Vx @ sol.U @ Vy.T
    ex_nodes = np.array(
        [[prob.exact_U(x, -1, y) for y in yb] for x in xb]
    )
    nodal = float(np.max(np.abs(got_nodes - ex_nodes)))
    return float(np.sqrt(l2_sq)), float(np.sqrt(h1_sq)), nodal


def _basis_matrix(space: EnrichedSpace, xs, sides=1) -> np.ndarray:
    """Dense (len(xs), dim) table of every free basis function at xs."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    sides = np.broadcast_to(np.asarray(sides), xs.shape)
    out = np.zeros((len(xs), space.dim))
    elems = space.locate(xs)
    for e in np.unique(elems):
        m = elems == e
        vals, _ = space.element_tab(e, xs[m], sides[m])
        info = space.elements[e]
        for j, d in enumerate(info.dofs):
            if d >= 0:
                out[m, d] = vals[:, j]
    return out
