"""Weak-form assembly on an enriched space.

The bilinear form handled here is

    a(u, v) = int c_diff u'v' - 2 int c_drift u v' + int c_reac u v
              + sum_alpha [u]_alpha [v]_alpha / lam_alpha

with the drift derivative landing on the test function, plus a load
``int f v``.  Dirichlet conditions are eliminated (their lift moves to the
right-hand side); a flux condition at an endpoint adds ``g * v(end)`` with
``g`` the outward wall flux ``-c_diff u' + 2 c_drift u`` evaluated there.

Fields are piecewise in the interface partition; diffusion must stay
positive.  Assembly quadrature uses p+3 Gauss points per (sub)element,
which integrates every bilinear term here exactly for polynomial data.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonPositiveDiffusivity
from .linalg import SparseMatrix, from_coo
from .mesh_space import EnrichedSpace, Interface, InterfaceKind
from .quadrature import gauss_rule, split_rule


@dataclass(frozen=True)
class PiecewiseField:
    """A scalar field given piecewise between interface points.

    ``pieces`` holds one entry per region (len(boundaries) + 1), each a
    constant or a callable of x.  Evaluation is side-aware at the
    boundaries themselves.
    """

    boundaries: tuple[float, ...]
    pieces: tuple

    @staticmethod
    def constant(value: float) -> "PiecewiseField":
        return PiecewiseField((), (float(value),))

    def __call__(self, xs, sides=1):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        sides = np.broadcast_to(np.asarray(sides), xs.shape)
        region = np.searchsorted(self.boundaries, xs, side="right")
        for j, b in enumerate(self.boundaries):
            region[(xs == b) & (sides < 0)] = j
        out = np.empty_like(xs)
        for j, piece in enumerate(self.pieces):
            m = region == j
            if not m.any():
                continue
            out[m] = piece(xs[m]) if callable(piece) else piece
        return out


@dataclass(frozen=True)
class BC:
    """Endpoint boundary condition: kind "dirichlet" or "flux"."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("dirichlet", "flux"):
            raise ValueError(f"unknown boundary condition kind {self.kind!r}")


@dataclass
class ProblemSpec:
    """Everything needed to assemble and (optionally) error-check a problem."""

    diffusion: PiecewiseField
    rhs: PiecewiseField
    interfaces: tuple[Interface, ...]
    bc_left: BC
    bc_right: BC
    reaction: PiecewiseField | None = None
    drift: PiecewiseField | None = None
    exact: Callable | None = None         # exact(x, side) -> u
    exact_deriv: Callable | None = None   # exact_deriv(x, side) -> u'
    exact_second: Callable | None = None  # exact_second(x, side) -> u''
    name: str = ""

    @property
    def symmetric(self) -> bool:
        return self.drift is None or all(
            (not callable(pc)) and pc == 0.0 for pc in self.drift.pieces
        )


@dataclass
class LinearSystem:
    """Assembled reduced system together with evaluation context."""

    A: SparseMatrix
    b: np.ndarray
    space: EnrichedSpace
    boundary: tuple[float, float]
    symmetric: bool


def element_rule(space: EnrichedSpace, info, n: int):
    """Gauss rule on an element, split at its interface if it has one."""
    if info.interface is None:
        return gauss_rule(n, (info.x_lo, info.x_hi))
    return split_rule((info.x_lo, info.x_hi), info.interface.x, n)


def _jump_row(space: EnrichedSpace, info):
    """[phi]_alpha for each local function of an interface element."""
    a = info.interface.x
    plus, _ = space.element_tab(info.index, np.array([a]), np.array([1]))
    minus, _ = space.element_tab(info.index, np.array([a]), np.array([-1]))
    return (plus - minus)[0]


def assemble(space: EnrichedSpace, spec: ProblemSpec) -> LinearSystem:
    """Assemble the reduced stiffness system for ``spec`` on ``space``."""
    p = space.p
    nq = p + 3
    rows, cols, vals = [], [], []
    b = np.zeros(space.dim)
    uL = spec.bc_left.value if spec.bc_left.kind == "dirichlet" else 0.0
    uR = spec.bc_right.value if spec.bc_right.kind == "dirichlet" else 0.0

    for info in space.elements:
        rule = element_rule(space, info, nq)
        tab_v, tab_d = space.element_tab(info.index, rule.points, rule.sides)
        c_diff = spec.diffusion(rule.points, rule.sides)
        if np.any(c_diff <= 0.0):
            raise NonPositiveDiffusivity(
                f"diffusion nonpositive inside element {info.index}"
            )
        w = rule.weights
        A_loc = tab_d.T @ (tab_d * (w * c_diff)[:, None])
        if spec.reaction is not None:
            c_reac = spec.reaction(rule.points, rule.sides)
            A_loc += tab_v.T @ (tab_v * (w * c_reac)[:, None])
        if spec.drift is not None:
            c_drift = spec.drift(rule.points, rule.sides)
            A_loc += -2.0 * tab_d.T @ (tab_v * (w * c_drift)[:, None])
        f_q = spec.rhs(rule.points, rule.sides)
        b_loc = tab_v.T @ (w * f_q)

        if (
            info.interface is not None
            and info.interface.kind is InterfaceKind.DISCONTINUOUS
        ):
            jump = _jump_row(space, info)
            A_loc += np.outer(jump, jump) / info.interface.lam

        _scatter(info, A_loc, b_loc, rows, cols, vals, b, uL, uR)

    if spec.bc_left.kind == "flux":
        _add_flux(space, space.elements[0], space.mesh.breakpoints[0],
                  spec.bc_left.value, b)
    if spec.bc_right.kind == "flux":
        _add_flux(space, space.elements[-1], space.mesh.breakpoints[-1],
                  spec.bc_right.value, b)

    A = from_coo(space.dim, rows, cols, vals)
    return LinearSystem(A, b, space, (uL, uR), spec.symmetric)


def _scatter(info, A_loc, b_loc, rows, cols, vals, b, uL, uR):
    dofs = info.dofs
    free = dofs >= 0
    for i in np.flatnonzero(free):
        gi = dofs[i]
        b[gi] += b_loc[i]
        for j in range(info.nloc):
            gj = dofs[j]
            if gj >= 0:
                rows.append(gi)
                cols.append(gj)
                vals.append(A_loc[i, j])
            else:
                is_left = info.index == 0 and info.std_local[j] == 0
                b[gi] -= A_loc[i, j] * (uL if is_left else uR)


def _add_flux(space, info, x_end, g, b):
    tab_v, _ = space.element_tab(
        info.index, np.array([x_end]), np.array([1 if info.index == 0 else -1])
    )
    for j, d in enumerate(info.dofs):
        if d >= 0:
            b[d] += g * tab_v[0, j]


# -- single-term assembly (used by the tensor-product solver) ---------------


def assemble_term(space: EnrichedSpace, kind: str,
                  field: PiecewiseField) -> SparseMatrix:
    """One bilinear term over the free DOFs, homogeneous-Dirichlet only.

    kind: "stiffness" -> int c u'v', "mass" -> int c u v,
    "grad_test" -> int c u v' (no factor, no sign).
    """
    nq = space.p + 3
    rows, cols, vals = [], [], []
    for info in space.elements:
        rule = element_rule(space, info, nq)
        tab_v, tab_d = space.element_tab(info.index, rule.points, rule.sides)
        c = field(rule.points, rule.sides)
        w = rule.weights
        if kind == "stiffness":
            A_loc = tab_d.T @ (tab_d * (w * c)[:, None])
        elif kind == "mass":
            A_loc = tab_v.T @ (tab_v * (w * c)[:, None])
        elif kind == "grad_test":
            A_loc = tab_d.T @ (tab_v * (w * c)[:, None])
        else:
            raise ValueError(f"unknown term kind {kind!r}")
        dofs = info.dofs
        for i in range(info.nloc):
            if dofs[i] < 0:
                continue
            for j in range(info.nloc):
                if dofs[j] >= 0:
                    rows.append(dofs[i])
                    cols.append(dofs[j])
                    vals.append(A_loc[i, j])
    return from_coo(space.dim, rows, cols, vals)


def jump_vectors(space: EnrichedSpace):
    """Dense [phi]_alpha vectors (and lam) for each discontinuous interface."""
    out = []
    for i, e in enumerate(space.mesh.elem_of_interface):
        itf = space.mesh.interfaces[i]
        if itf.kind is not InterfaceKind.DISCONTINUOUS:
            continue
        info = space.elements[e]
        jump = _jump_row(space, info)
        vec = np.zeros(space.dim)
        for j, d in enumerate(info.dofs):
            if d >= 0:
                vec[d] = jump[j]
        out.append((itf.lam, vec))
    return out


def load_vector(space: EnrichedSpace, f: PiecewiseField, nq=None) -> np.ndarray:
    """(f, v) over the free DOFs."""
    nq = space.p + 3 if nq is None else nq
    b = np.zeros(space.dim)
    for info in space.elements:
        rule = element_rule(space, info, nq)
        tab_v, _ = space.element_tab(info.index, rule.points, rule.sides)
        b_loc = tab_v.T @ (rule.weights * f(rule.points, rule.sides))
        for j, d in enumerate(info.dofs):
            if d >= 0:
                b[d] += b_loc[j]
    return b


def residual(system: LinearSystem, x: np.ndarray) -> float:
    """Relative residual ||b - Ax|| / ||b|| of a candidate solution."""
    r = system.b - system.A.matvec(x)
    nb = np.linalg.norm(system.b)
    return float(np.linalg.norm(r) / (nb if nb > 0 else 1.0))
