"""Uniform 1D meshes and the interface-enriched approximation space.

A mesh is a uniform partition of an interval together with a list of
interface points that must fall strictly inside elements.  The enriched
space attaches extra functions to each interface element:

* discontinuous interface: the element keeps only its endpoint Lagrange
  functions (interior bubbles become linearly dependent and are dropped)
  and gains two one-sided families ``q_i * psi_0`` and ``q_i * psi_1``;
* continuous interface: the element keeps all Lagrange functions and gains
  the continuous family ``q_i * psi_hat``.

Degrees of freedom are numbered with all surviving nodal functions first,
then the enrichment blocks interface by interface.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .basis import Enrichment, LagrangeBasis, make_enrichments, make_hat
from .errors import (
    InterfaceOnNode,
    LinearDependence,
    TwoInterfacesOneElement,
    UnsupportedOrder,
)
from .quadrature import split_rule

_NODE_TOL = 1e-12


class InterfaceKind(Enum):
    DISCONTINUOUS = "discontinuous"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class Interface:
    """An interface point; ``lam`` is the jump-law coefficient (discontinuous
    kind only, where [u] = -lam * flux)."""

    x: float
    kind: InterfaceKind
    lam: float | None = None


@dataclass(frozen=True)
class Mesh1D:
    breakpoints: np.ndarray
    interfaces: tuple[Interface, ...]
    elem_of_interface: tuple[int, ...]

    @property
    def n_elems(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def h(self) -> float:
        return float(self.breakpoints[1] - self.breakpoints[0])

    def element(self, e: int) -> tuple[float, float]:
        return float(self.breakpoints[e]), float(self.breakpoints[e + 1])


def build_mesh(n_elems, interfaces=(), domain=(0.0, 1.0)) -> Mesh1D:
    """Uniform mesh with interfaces assigned to their containing elements.

    Raises InterfaceOnNode when an interface sits on (or within 1e-12 of) a
    breakpoint and TwoInterfacesOneElement when one element would have to
    carry two interfaces.
    """
    if n_elems < 1:
        raise ValueError("need at least one element")
    bp = np.linspace(domain[0], domain[1], n_elems + 1)
    taken: dict[int, float] = {}
    elems = []
    for itf in interfaces:
        if np.min(np.abs(bp - itf.x)) < _NODE_TOL:
            raise InterfaceOnNode(
                f"interface at {itf.x} coincides with a mesh node for "
                f"{n_elems} elements"
            )
        if not (domain[0] < itf.x < domain[1]):
            raise InterfaceOnNode(f"interface at {itf.x} outside {domain}")
        e = int(np.searchsorted(bp, itf.x, side="right")) - 1
        if e in taken:
            raise TwoInterfacesOneElement(
                f"interfaces at {taken[e]} and {itf.x} share element {e}"
            )
        taken[e] = itf.x
        elems.append(e)
    return Mesh1D(bp, tuple(interfaces), tuple(elems))


@dataclass
class ElementInfo:
    """Local basis layout of one element.

    Local function order is: surviving nodal functions (ascending node),
    then ``q_i * enrichment`` blocks in enrichment order.  ``dofs`` holds
    the reduced global index of each local function, -1 for a boundary
    function eliminated by a Dirichlet condition.
    """

    index: int
    x_lo: float
    x_hi: float
    interface: Interface | None
    enrichments: tuple[Enrichment, ...]
    std_local: np.ndarray
    dofs: np.ndarray

    @property
    def nloc(self) -> int:
        return len(self.dofs)


class EnrichedSpace:
    """Global enriched space on a mesh; see module docstring for layout."""

    def __init__(self, mesh: Mesh1D, p: int, convention="slopes",
                 dirichlet=(True, True)):
        if not 1 <= p <= 4:
            raise UnsupportedOrder(f"order {p} outside supported range 1..4")
        self.mesh = mesh
        self.p = p
        self.convention = convention
        self.dirichlet = tuple(dirichlet)
        self.basis = LagrangeBasis(p)
        n = mesh.n_elems
        n_std = p * n + 1
        active = np.ones(n_std, dtype=bool)
        itf_of_elem = {e: i for i, e in enumerate(mesh.elem_of_interface)}
        for e, i in itf_of_elem.items():
            if mesh.interfaces[i].kind is InterfaceKind.DISCONTINUOUS and p > 1:
                active[e * p + 1 : e * p + p] = False
        if dirichlet[0]:
            active[0] = False
        if dirichlet[1]:
            active[-1] = False
        std_map = -np.ones(n_std, dtype=int)
        std_map[active] = np.arange(int(active.sum()))
        offset = int(active.sum())

        self.elements: list[ElementInfo] = []
        enr_offsets = []
        for i, e in enumerate(mesh.elem_of_interface):
            itf = mesh.interfaces[i]
            width = 2 * (p + 1) if itf.kind is InterfaceKind.DISCONTINUOUS else p + 1
            enr_offsets.append(offset)
            offset += width
        self.dim = offset

        for e in range(n):
            x_lo, x_hi = mesh.element(e)
            itf = None
            enr: tuple[Enrichment, ...] = ()
            if e in itf_of_elem:
                i = itf_of_elem[e]
                itf = mesh.interfaces[i]
                if itf.kind is InterfaceKind.DISCONTINUOUS:
                    enr = make_enrichments(x_lo, x_hi, itf.x, convention)
                    std_local = np.array([0, p])
                else:
                    enr = (make_hat(x_lo, x_hi, itf.x),)
                    std_local = np.arange(p + 1)
                dofs = [std_map[e * p + j] for j in std_local]
                start = enr_offsets[i]
                dofs += list(range(start, start + len(enr) * (p + 1)))
            else:
                std_local = np.arange(p + 1)
                dofs = [std_map[e * p + j] for j in std_local]
            self.elements.append(
                ElementInfo(e, x_lo, x_hi, itf, enr, std_local,
                            np.asarray(dofs, dtype=int))
            )

        self._check_independence()

    # -- evaluation ---------------------------------------------------------

    def element_tab(self, e, xs, sides):
        """Values and derivatives of element e's local functions at xs.

        Returns (vals, ders), each of shape (len(xs), nloc), columns in the
        element's local function order.
        """
        info = self.elements[e]
        h = info.x_hi - info.x_lo
        t = (np.asarray(xs, dtype=float) - info.x_lo) / h
        V = self.basis.values(t)
        D = self.basis.derivs(t) / h
        vals = [V[:, info.std_local]]
        ders = [D[:, info.std_local]]
        for enr in info.enrichments:
            pv, pd = enr.eval(xs, sides)
            vals.append(V * pv[:, None])
            ders.append(D * pv[:, None] + V * pd[:, None])
        return np.hstack(vals), np.hstack(ders)

    def locate(self, xs) -> np.ndarray:
        bp = self.mesh.breakpoints
        k = np.searchsorted(bp, np.asarray(xs, dtype=float), side="right") - 1
        return np.clip(k, 0, self.mesh.n_elems - 1)

    def eval(self, coeffs, xs, sides=1, deriv=False, boundary=(0.0, 0.0)):
        """Evaluate the discrete function with the given coefficients.

        ``sides`` picks the branch for points lying exactly on an interface.
        ``boundary`` supplies the values of Dirichlet-eliminated endpoint
        functions.
        """
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        sides = np.broadcast_to(np.asarray(sides), xs.shape)
        out = np.empty_like(xs)
        elems = self.locate(xs)
        for e in np.unique(elems):
            m = elems == e
            vals, ders = self.element_tab(e, xs[m], sides[m])
            tab = ders if deriv else vals
            local = self._local_coeffs(e, coeffs, boundary)
            out[m] = tab @ local
        return out

    def _local_coeffs(self, e, coeffs, boundary):
        info = self.elements[e]
        local = np.empty(info.nloc)
        for j, d in enumerate(info.dofs):
            if d >= 0:
                local[j] = coeffs[d]
            else:
                is_left = info.index == 0 and info.std_local[j] == 0
                local[j] = boundary[0] if is_left else boundary[1]
        return local

    # -- interpolation ------------------------------------------------------

    def interpolate(self, f):
        """Nodal/enriched interpolation of ``f(x, side)``.

        Plain elements take nodal values; interface elements reproduce the
        one-sided polynomial interpolants of f exactly.  Returns
        ``(coeffs, boundary)`` with coeffs over the free DOFs and boundary
        the values at the two endpoints (for eliminated functions).
        """
        p = self.p
        mesh = self.mesh
        coeffs = np.zeros(self.dim)
        bp = mesh.breakpoints
        uL = float(f(bp[0], 1))
        uR = float(f(bp[-1], -1))
        for info in self.elements:
            if info.interface is None:
                nodes = info.x_lo + (info.x_hi - info.x_lo) * self.basis.nodes
                vals = [float(f(x, 1)) for x in nodes]
                for j, d in zip(info.std_local, info.dofs):
                    if d >= 0:
                        coeffs[d] = vals[j]
            elif info.interface.kind is InterfaceKind.DISCONTINUOUS:
                self._interp_discontinuous(f, info, coeffs)
            else:
                self._interp_continuous(f, info, coeffs)
        return coeffs, (uL, uR)

    def _side_coeffs(self, f, info, side):
        """Monomial coefficients (in the reference coordinate, about 0 for the
        left side and about 1 for the right) of the one-sided interpolant of f
        at p+1 evenly spaced points on that side of the interface."""
        p = self.p
        h = info.x_hi - info.x_lo
        a_hat = (info.interface.x - info.x_lo) / h
        s = np.arange(p + 1) / p
        V = np.vander(s, increasing=True)
        if side < 0:
            xs = info.x_lo + h * a_hat * s
            vals = np.array([float(f(x, -1)) for x in xs])
            c = np.linalg.solve(V, vals)
            return c / a_hat ** np.arange(p + 1)
        xs = info.x_hi + h * (a_hat - 1.0) * s
        vals = np.array([float(f(x, 1)) for x in xs])
        c = np.linalg.solve(V, vals)
        return c / (a_hat - 1.0) ** np.arange(p + 1)

    def _enr_scale(self, info) -> float:
        """Ratio of the physical enrichment to its reference-element twin."""
        h = info.x_hi - info.x_lo
        if info.interface.kind is InterfaceKind.CONTINUOUS:
            return h
        return 1.0 if self.convention == "slopes" else h

    def _interp_discontinuous(self, f, info, coeffs):
        from .basis import represent_piecewise

        p = self.p
        h = info.x_hi - info.x_lo
        a_hat = (info.interface.x - info.x_lo) / h
        u1 = self._side_coeffs(f, info, -1)
        u2 = self._side_coeffs(f, info, +1)
        zeta = represent_piecewise(p, a_hat, u1, u2, self.convention)
        scale = self._enr_scale(info)
        local = np.concatenate(
            [zeta[[0, p]], zeta[p + 1 :] / scale]
        )
        for j, d in enumerate(info.dofs):
            if d >= 0:
                coeffs[d] = local[j]

    def _interp_continuous(self, f, info, coeffs):
        p = self.p
        h = info.x_hi - info.x_lo
        a_hat = (info.interface.x - info.x_lo) / h
        u1 = self._side_coeffs(f, info, -1)
        c2 = self._side_coeffs(f, info, +1)
        # re-express the right interpolant about 0
        shift = np.polynomial.Polynomial([-1.0, 1.0])
        P2 = sum(
            (np.polynomial.Polynomial([c2[k]]) * shift**k for k in range(p + 1)),
            np.polynomial.Polynomial([0.0]),
        )
        P1 = np.polynomial.Polynomial(u1)
        num = P1 - P2
        den = np.polynomial.Polynomial([a_hat, -1.0])
        d_poly, rem = divmod(num, den)
        # continuity makes the remainder vanish up to roundoff
        m1t = (a_hat - 1.0)
        c_poly = P1 - np.polynomial.Polynomial([0.0, m1t]) * d_poly
        nodes = self.basis.nodes
        local = np.concatenate([c_poly(nodes), d_poly(nodes) / self._enr_scale(info)])
        for j, d in enumerate(info.dofs):
            if d >= 0:
                coeffs[d] = local[j]

    # -- invariants ---------------------------------------------------------

    def _check_independence(self):
        """Numerical-rank check of hat-enriched elements' local Gram matrices.

        Only continuous interfaces need this: their enrichment is added on
        top of the full Lagrange set and the direct sum genuinely degenerates
        when the interface sits very close to a node (the hat is then nearly
        linear over the element, so hat-multiplied functions collapse into
        the polynomial space).  The Gram is diagonally normalized first so
        the check measures angles between the local functions, not their
        amplitudes -- raw amplitudes shrink with h and are rescaled away at
        solve time anyway.  The discontinuous construction is a basis by
        design and is skipped.
        """
        for info in self.elements:
            if info.interface is None or (
                info.interface.kind is InterfaceKind.DISCONTINUOUS
            ):
                continue
            rule = split_rule((info.x_lo, info.x_hi), info.interface.x, self.p + 3)
            vals, _ = self.element_tab(info.index, rule.points, rule.sides)
            gram = vals.T @ (vals * rule.weights[:, None])
            d = np.sqrt(np.diag(gram))
            gram = gram / np.outer(d, d)
            sig = np.linalg.svd(gram, compute_uv=False)
            if sig[-1] < 1e-10 * sig[0]:
                raise LinearDependence(
                    f"local basis on element {info.index} is numerically "
                    f"dependent (sigma ratio {sig[-1] / sig[0]:.2e})"
                )
