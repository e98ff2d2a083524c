"""Registered benchmark problems, their exact solutions, and verification
helpers (interface Green's function, closed-form p=1 diagonals, strong-form
self-consistency checks).

All problems live on [0, 1].  Discontinuous interfaces carry the implicit
jump law [u] = -lam * q(alpha) where q is the flux (-beta u', or
-D u' + 2 delta u for the wall models) and q is continuous across the
interface.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .assembly import BC, PiecewiseField, ProblemSpec
from .errors import InterfaceAtSingularAlpha, OutOfDomain, ReproducingPropertyFailed
from .mesh_space import Interface, InterfaceKind

ALPHA_DEFAULT = 1.0 / np.pi


# ---------------------------------------------------------------------------
# piecewise-polynomial helper used by the manufactured problems


def _piecewise_eval(boundaries, funcs):
    """(x, side) -> value dispatcher over regions split at ``boundaries``."""

    def call(x, side=1):
        x = float(x)
        i = int(np.searchsorted(boundaries, x, side="right"))
        if side < 0 and i > 0 and x == boundaries[i - 1]:
            i -= 1
        return float(funcs[i](x))

    return call


# ---------------------------------------------------------------------------
# diffusion problem with one implicit-jump interface and polynomial load


def p41(beta_minus=100.0, beta_plus=1.0, alpha=ALPHA_DEFAULT, lam=1.0, m=6):
    """-(beta u')' = f with f = x^m left of alpha, (x-1)^m right of it,
    homogeneous Dirichlet ends, jump law [u] = lam * beta u'(alpha).

    The exact solution is polynomial on each side; its linear parts are
    fixed by flux continuity and the jump law.
    """
    bm, bp_, a, lam, m = map(float, (beta_minus, beta_plus, alpha, lam, m))
    m = int(m)
    if not 0.0 < a < 1.0:
        raise OutOfDomain(f"interface {a} outside (0, 1)")
    gamma = -lam * bm * bp_ / (bp_ - bm)
    r1 = (a ** (m + 1) - (a - 1.0) ** (m + 1)) / (m + 1)
    r2 = (
        gamma * a ** (m + 1) / ((m + 1) * bm)
        - gamma * (a - 1.0) ** (m + 1) / ((m + 1) * bp_)
        + (a - 1.0) ** (m + 2) / ((m + 1) * (m + 2) * bp_)
        - a ** (m + 2) / ((m + 1) * (m + 2) * bm)
    )
    den = (a - 1.0 - gamma) * bm + (gamma - a) * bp_
    c1 = ((a - gamma - 1.0) * r1 + bp_ * r2) / den
    c2 = ((a - gamma) * r1 + bm * r2) / den

    s = 1.0 / ((m + 1) * (m + 2))
    u_l = Polynomial([0.0, c1]) - s / bm * Polynomial([0.0, 1.0]) ** (m + 2)
    u_r = (
        Polynomial([-c2, c2])
        - s / bp_ * Polynomial([-1.0, 1.0]) ** (m + 2)
    )
    f_l = Polynomial([0.0, 1.0]) ** m
    f_r = Polynomial([-1.0, 1.0]) ** m

    interface = Interface(a, InterfaceKind.DISCONTINUOUS, lam)
    return ProblemSpec(
        diffusion=PiecewiseField((a,), (bm, bp_)),
        rhs=PiecewiseField((a,), (lambda x: f_l(x), lambda x: f_r(x))),
        interfaces=(interface,),
        bc_left=BC("dirichlet", 0.0),
        bc_right=BC("dirichlet", 0.0),
        exact=_piecewise_eval((a,), (u_l, u_r)),
        exact_deriv=_piecewise_eval((a,), (u_l.deriv(), u_r.deriv())),
        exact_second=_piecewise_eval((a,), (u_l.deriv(2), u_r.deriv(2))),
        name="p41",
    )


# ---------------------------------------------------------------------------
# wall-deposition models: flux -D u' + 2 delta u, mixed interfaces


def _wall_spec(name, boundaries, kinds, lams, D, delta, eta, u_polys,
               u_right_value):
    interfaces = []
    li = iter(lams)
    for b, kind in zip(boundaries, kinds):
        if kind is InterfaceKind.DISCONTINUOUS:
            interfaces.append(Interface(b, kind, next(li)))
        else:
            interfaces.append(Interface(b, kind))
    f_polys = [
        -Dk * u.deriv(2) + 2.0 * dk * u.deriv() + ek * u
        for Dk, dk, ek, u in zip(D, delta, eta, u_polys)
    ]
    return ProblemSpec(
        diffusion=PiecewiseField(boundaries, tuple(D)),
        rhs=PiecewiseField(boundaries, tuple(
            (lambda q: (lambda x: q(x)))(f) for f in f_polys
        )),
        interfaces=tuple(interfaces),
        bc_left=BC("flux", 0.0),
        bc_right=BC("dirichlet", u_right_value),
        reaction=PiecewiseField(boundaries, tuple(eta)),
        drift=PiecewiseField(boundaries, tuple(delta)),
        exact=_piecewise_eval(boundaries, u_polys),
        exact_deriv=_piecewise_eval(boundaries, [u.deriv() for u in u_polys]),
        exact_second=_piecewise_eval(boundaries, [u.deriv(2) for u in u_polys]),
        name=name,
    )


def wall1():
    """Two-layer wall model: one implicit-jump interface at 1/9."""
    x = Polynomial([0.0, 1.0])
    return _wall_spec(
        "wall1",
        boundaries=(1.0 / 9.0,),
        kinds=(InterfaceKind.DISCONTINUOUS,),
        lams=(1.0 / 243.0,),
        D=(1.0, 1.35),
        delta=(0.0, 12.15),
        eta=(0.0, 0.0),
        u_polys=(x**3 / 30.0, x**4 / 3.0),
        u_right_value=1.0 / 3.0,
    )


def wall2():
    """Three-layer wall model: continuous interfaces at 1/3 and 2/3."""
    x = Polynomial([0.0, 1.0])
    return _wall_spec(
        "wall2",
        boundaries=(1.0 / 3.0, 2.0 / 3.0),
        kinds=(InterfaceKind.CONTINUOUS, InterfaceKind.CONTINUOUS),
        lams=(),
        D=(1.35, 0.54, 2.1),
        delta=(12.15, 8.1, 10.8),
        eta=(10.0, 1.0, 0.1),
        u_polys=(x**4 / 3.0, x**5, 3.0 * x**5 - 3.0 * x**6),
        u_right_value=0.0,
    )


def wall3():
    """Four-layer wall model mixing one jump interface with two continuous
    ones."""
    x = Polynomial([0.0, 1.0])
    return _wall_spec(
        "wall3",
        boundaries=(1.0 / 9.0, 1.0 / 3.0, 2.0 / 3.0),
        kinds=(
            InterfaceKind.DISCONTINUOUS,
            InterfaceKind.CONTINUOUS,
            InterfaceKind.CONTINUOUS,
        ),
        lams=(1.0 / 243.0,),
        D=(1.0, 1.35, 0.54, 2.1),
        delta=(0.0, 12.15, 8.1, 10.8),
        eta=(0.0, 10.0, 1.0, 0.1),
        u_polys=(x**3 / 30.0, x**4 / 3.0, x**5, 3.0 * x**5 - 3.0 * x**6),
        u_right_value=0.0,
    )


# ---------------------------------------------------------------------------
# separable 2D problem; the jump coefficient is tied to the interface position


@dataclass
class Problem2D:
    """Tensor-product problem -div(beta grad U) = F on the unit square with
    a vertical interface; U vanishes on the whole boundary."""

    name: str
    beta: PiecewiseField
    interfaces: tuple[Interface, ...]
    lam: float
    F: Callable            # F(x, side, y)
    exact_U: Callable      # U(x, side, y)
    factor_exact: Callable
    factor_deriv: Callable
    factor_second: Callable


def p42(beta_minus=100.0, beta_plus=1.0, alpha=1.0 / 3.0):
    """U = u(x) y(y-1) with u jumping at alpha; the jump coefficient
    lam = (beta_minus - beta_plus) tan(pi alpha) / (pi beta_minus beta_plus)
    is what makes the one-sided sine factors compatible."""
    bm, bp_, a = float(beta_minus), float(beta_plus), float(alpha)
    if not 0.0 < a < 1.0:
        raise OutOfDomain(f"interface {a} outside (0, 1)")
    if abs(np.cos(np.pi * a)) < 1e-8:
        raise InterfaceAtSingularAlpha(
            f"tan(pi*alpha) blows up at alpha={a}; the jump coefficient "
            "is undefined there"
        )
    gamma = -np.tan(np.pi * a) / np.pi
    lam = -gamma * (bm - bp_) / (bm * bp_)
    if lam <= 0.0:
        raise ValueError(
            "jump coefficient must be positive; pick alpha/beta with "
            "(beta_minus - beta_plus) * tan(pi alpha) > 0"
        )

    def u(x, side=1):
        c = bp_ if (x < a or (x == a and side < 0)) else bm
        return float(c * np.sin(np.pi * x))

    def du(x, side=1):
        c = bp_ if (x < a or (x == a and side < 0)) else bm
        return float(c * np.pi * np.cos(np.pi * x))

    def d2u(x, side=1):
        c = bp_ if (x < a or (x == a and side < 0)) else bm
        return float(-c * np.pi**2 * np.sin(np.pi * x))

    def F(x, side, y):
        return float(
            bm * bp_ * np.sin(np.pi * x) * (np.pi**2 * y * (y - 1.0) - 2.0)
        )

    def exact_U(x, side, y):
        return u(x, side) * y * (y - 1.0)

    return Problem2D(
        name="p42",
        beta=PiecewiseField((a,), (bm, bp_)),
        interfaces=(Interface(a, InterfaceKind.DISCONTINUOUS, lam),),
        lam=lam,
        F=F,
        exact_U=exact_U,
        factor_exact=u,
        factor_deriv=du,
        factor_second=d2u,
    )


REGISTRY = {
    "p41": p41,
    "p42": p42,
    "wall1": wall1,
    "wall2": wall2,
    "wall3": wall3,
}


def get_problem(name, **overrides):
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; choices: {sorted(REGISTRY)}"
        ) from None
    return builder(**overrides)


# ---------------------------------------------------------------------------
# strong-form self-consistency of the registered exact solutions


def check_exact(prob, n_samples=160) -> dict:
    """Max pointwise residuals of the exact solution in the strong form,
    the interface conditions, and the boundary conditions."""
    if isinstance(prob, Problem2D):
        return _check_exact_2d(prob, n_samples)
    diff, drift, reac = prob.diffusion, prob.drift, prob.reaction
    zero = PiecewiseField.constant(0.0)
    drift = drift if drift is not None else zero
    reac = reac if reac is not None else zero

    def flux(x, side):
        return float(
            -diff(x, side)[0] * prob.exact_deriv(x, side)
            + 2.0 * drift(x, side)[0] * prob.exact(x, side)
        )

    bounds = [0.0] + [i.x for i in prob.interfaces] + [1.0]
    pde = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        xs = lo + (hi - lo) * (np.arange(1, n_samples + 1) / (n_samples + 1))
        for x in xs:
            r = (
                -diff(x, 1)[0] * prob.exact_second(x, 1)
                + 2.0 * drift(x, 1)[0] * prob.exact_deriv(x, 1)
                + reac(x, 1)[0] * prob.exact(x, 1)
                - prob.rhs(x, 1)[0]
            )
            pde = max(pde, abs(r))

    jump = flux_jump = 0.0
    for itf in prob.interfaces:
        a = itf.x
        u_jump = prob.exact(a, 1) - prob.exact(a, -1)
        flux_jump = max(flux_jump, abs(flux(a, 1) - flux(a, -1)))
        if itf.kind is InterfaceKind.DISCONTINUOUS:
            jump = max(jump, abs(u_jump + itf.lam * flux(a, -1)))
        else:
            jump = max(jump, abs(u_jump))

    bc = 0.0
    for x, side, cond in ((0.0, 1, prob.bc_left), (1.0, -1, prob.bc_right)):
        if cond.kind == "dirichlet":
            bc = max(bc, abs(prob.exact(x, side) - cond.value))
        else:
            bc = max(bc, abs(flux(x, side) - cond.value))
    return {"pde": pde, "jump": jump, "flux": flux_jump, "bc": bc}


def _check_exact_2d(prob: Problem2D, n_samples) -> dict:
    a = prob.interfaces[0].x
    lam = prob.lam
    u, du, d2u = prob.factor_exact, prob.factor_deriv, prob.factor_second

    def beta(x, side):
        return float(prob.beta(x, side)[0])

    pde = 0.0
    ys = np.arange(1, 14) / 14.0
    for lo, hi in ((0.0, a), (a, 1.0)):
        xs = lo + (hi - lo) * (np.arange(1, n_samples + 1) / (n_samples + 1))
        for x in xs:
            for y in ys:
                lap = d2u(x, 1) * y * (y - 1.0) + 2.0 * u(x, 1)
                pde = max(pde, abs(-beta(x, 1) * lap - prob.F(x, 1, y)))

    q_m = -beta(a, -1) * du(a, -1)
    q_p = -beta(a, 1) * du(a, 1)
    jump = abs((u(a, 1) - u(a, -1)) + lam * q_m)
    flux_jump = abs(q_p - q_m)
    bc = max(
        max(abs(prob.exact_U(0.0, 1, y)) for y in ys),
        max(abs(prob.exact_U(1.0, -1, y)) for y in ys),
        max(abs(prob.exact_U(x, 1, 0.0)) for x in ys),
        max(abs(prob.exact_U(x, 1, 1.0)) for x in ys),
    )
    return {"pde": pde, "jump": jump, "flux": flux_jump, "bc": bc}


# ---------------------------------------------------------------------------
# interface Green's function with exact reproduction identity


class GreenFunction:
    """Green's function of -(beta u')' with a single implicit-jump interface.

    Piecewise, beta G' is constant; this makes a(G, v) an exact telescoping
    sum, which ``reproduce`` exploits: a(G, v) = v(xi) for every admissible v
    (zero at the ends, one-sided limits at alpha and xi).
    """

    def __init__(self, xi, beta_minus=1.0, beta_plus=1.0, alpha=0.5, lam=0.0,
                 check=True):
        if not 0.0 < xi < 1.0:
            raise OutOfDomain(f"source point {xi} outside (0, 1)")
        if xi == alpha:
            raise ValueError("source point must differ from the interface")
        self.xi = float(xi)
        self.alpha = float(alpha)
        self.lam = float(lam)
        self.bm = float(beta_minus)
        self.bp = float(beta_plus)
        T = self._K(alpha) + self._Kc(alpha)
        if xi < alpha:
            c2 = -self._K(xi) / (T + lam)
            self.pieces = (0.0, xi, alpha, 1.0)
            self.slopes = (1.0 + c2, c2, c2)  # beta G' per piece
        else:
            d1 = self._Kc(xi) / (T + lam)
            self.pieces = (0.0, alpha, xi, 1.0)
            self.slopes = (d1, d1, d1 - 1.0)
        if check:
            self._self_check()

    def _K(self, x):
        if x < self.alpha:
            return x / self.bm
        return self.alpha / self.bm + (x - self.alpha) / self.bp

    def _Kc(self, x):
        if x > self.alpha:
            return (1.0 - x) / self.bp
        return (self.alpha - x) / self.bm + (1.0 - self.alpha) / self.bp

    def value(self, x, side=1):
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise OutOfDomain(f"{x} outside [0, 1]")
        if self.xi < self.alpha:
            c1, c2, _ = self.slopes
            if x < self.xi:
                return c1 * self._K(x)
            if x < self.alpha or (x == self.alpha and side < 0):
                return self._K(self.xi) + c2 * self._K(x)
            return -c2 * self._Kc(x)
        d1, _, d2 = self.slopes
        if x < self.alpha or (x == self.alpha and side < 0):
            return d1 * self._K(x)
        if x <= self.xi:
            return d1 * self._K(x) + self.lam * d1
        return -d2 * self._Kc(x)

    @property
    def interface_jump(self):
        """[G] at alpha (equals -lam * flux there)."""
        return self.value(self.alpha, 1) - self.value(self.alpha, -1)

    def reproduce(self, v) -> float:
        """a(G, v) computed exactly from one-sided endpoint values of v."""
        acc = 0.0
        for (lo, hi), s in zip(zip(self.pieces[:-1], self.pieces[1:]),
                               self.slopes):
            acc += s * (v(hi, -1) - v(lo, 1))
        if self.lam > 0.0:
            vj = v(self.alpha, 1) - v(self.alpha, -1)
            acc += self.interface_jump * vj / self.lam
        return acc

    def _self_check(self, tol=1e-8):
        a = self.alpha

        def hat_with_jump(x, side):
            if x < a or (x == a and side < 0):
                return x / a
            return 2.0 * (1.0 - x) / (1.0 - a)

        tests = [lambda x, s: x * (1.0 - x), lambda x, s: x * x * (1.0 - x)]
        if self.lam > 0.0:
            # jumps in v are only admissible when the penalty term exists
            tests.append(hat_with_jump)
        for v in tests:
            got = self.reproduce(v)
            want = v(self.xi, -1)
            if abs(got - want) > tol:
                raise ReproducingPropertyFailed(
                    f"a(G, v) = {got} but v(xi) = {want}"
                )


# ---------------------------------------------------------------------------
# closed-form p=1 diagonals of the interface element and their verification


def appendix_diagonals(beta_minus, beta_plus, alpha, lam, n_elems) -> dict:
    """Closed-form diagonal entries of the p=1 system around the interface
    element: the two nodal rows and the four enriched rows (jump penalty
    included).  Slopes follow the interface-normalized convention."""
    bm, bp_, a = float(beta_minus), float(beta_plus), float(alpha)
    h = 1.0 / n_elems
    k = int(a / h)
    xk, xk1 = k * h, (k + 1) * h
    e, t = a - xk, xk1 - a
    m1, m2 = 1.0 / e, 1.0 / (a - xk1)
    node_k = bm / h + bm * e / h**2 + bp_ * t / h**2
    node_k1 = bp_ / h + bm * e / h**2 + bp_ * t / h**2
    a00 = bm * m1**2 / (6.0 * h**2) * ((2.0 * e - h) ** 3 + h**3)
    a10 = bm * m1**2 * (4.0 / (3.0 * h**2)) * e**3
    a01 = bp_ * m2**2 * (4.0 / (3.0 * h**2)) * t**3
    a11 = bp_ * m2**2 / (6.0 * h**2) * ((-2.0 * e + h) ** 3 + h**3)
    r00 = m1**2 * e**2 * t**2 / (h**2 * lam)
    r10 = m1**2 * e**4 / (h**2 * lam)
    r01 = m2**2 * t**4 / (h**2 * lam)
    r11 = m2**2 * e**2 * t**2 / (h**2 * lam)
    return {
        "node_k": node_k,
        "node_k1": node_k1,
        "e00": a00 + r00,
        "e10": a10 + r10,
        "e01": a01 + r01,
        "e11": a11 + r11,
    }


def assembled_interface_diagonals(system) -> dict:
    """The same six diagonal entries read off an assembled p=1 system."""
    space = system.space
    info = next(
        i for i in space.elements
        if i.interface is not None
        and i.interface.kind is InterfaceKind.DISCONTINUOUS
    )
    diag = system.A.diagonal()
    keys = ("node_k", "node_k1", "e00", "e10", "e01", "e11")
    return {k: float(diag[d]) for k, d in zip(keys, info.dofs)}


def interface_block_scn(system) -> float:
    """Condition number of the diagonally rescaled system restricted to the
    interface element's free functions."""
    space = system.space
    info = next(
        i for i in space.elements
        if i.interface is not None
        and i.interface.kind is InterfaceKind.DISCONTINUOUS
    )
    dofs = np.array([d for d in info.dofs if d >= 0])
    A = system.A.to_dense()
    d = np.sqrt(np.diag(A))
    B = A / np.outer(d, d)
    block = B[np.ix_(dofs, dofs)]
    sig = np.linalg.svd(block, compute_uv=False)
    return float(sig[0] / sig[-1])
