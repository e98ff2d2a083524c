"""Convergence-study driver: solves, error norms, delimited reports, verify
suites, and the figures that accompany each report.

CSV layout is fixed:

    p,n_elems,h,dof,l2,l2_rate,h1,h1_rate,nodal,nodal_rate,scn,iters,seconds

with floats in 6-significant-digit scientific notation and empty fields for
undefined entries (first-level rates, rates across the solver noise floor,
condition numbers of matrix-free 2D operators).  ``iters`` is 0 for direct
solves.  Condition numbers of nonsymmetric systems refer to the symmetric
part.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .assembly import assemble
from .basis import bubble_dependence, eval_piecewise, represent_piecewise
from .errors import IoFailure, MissingExact, UnsupportedOrder
from .linalg import direct_solve, scn
from .mesh_space import EnrichedSpace, build_mesh
from .problems import (
    GreenFunction,
    Problem2D,
    appendix_diagonals,
    assembled_interface_diagonals,
    get_problem,
    interface_block_scn,
    p41,
)
from .quadrature import gauss_rule, split_rule
from . import tensor2d

NOISE_FLOOR = 1e-12

CSV_COLUMNS = (
    "p", "n_elems", "h", "dof", "l2", "l2_rate", "h1", "h1_rate",
    "nodal", "nodal_rate", "scn", "iters", "seconds",
)


@dataclass
class SolveReport:
    problem: str
    p: int
    n_elems: int
    h: float
    dof: int
    l2: float
    h1: float
    nodal: float
    scn: float | None
    iters: int
    seconds: float


def error_norms(space: EnrichedSpace, coeffs, boundary, exact,
                exact_deriv=None):
    """(l2, broken_h1, nodal) errors of a discrete solution.

    Quadrature uses max(p+5, 10) Gauss points per (sub)element; the nodal
    error is the max over interior breakpoints.
    """
    if exact is None:
        raise MissingExact("error norms need an exact solution")
    nq = max(space.p + 5, 10)
    l2_sq = 0.0
    h1_sq = 0.0
    for info in space.elements:
        if info.interface is None:
            rule = gauss_rule(nq, (info.x_lo, info.x_hi))
        else:
            rule = split_rule((info.x_lo, info.x_hi), info.interface.x, nq)
        got = space.eval(coeffs, rule.points, rule.sides, boundary=boundary)
        want = np.array(
            [exact(x, s) for x, s in zip(rule.points, rule.sides)]
        )
        l2_sq += float(rule.weights @ (got - want) ** 2)
        if exact_deriv is not None:
            got_d = space.eval(coeffs, rule.points, rule.sides, deriv=True,
                               boundary=boundary)
            want_d = np.array(
                [exact_deriv(x, s) for x, s in zip(rule.points, rule.sides)]
            )
            h1_sq += float(rule.weights @ (got_d - want_d) ** 2)
    bp = space.mesh.breakpoints[1:-1]
    got_n = space.eval(coeffs, bp, sides=-1, boundary=boundary)
    want_n = np.array([exact(x, -1) for x in bp])
    nodal = float(np.max(np.abs(got_n - want_n))) if len(bp) else 0.0
    return float(np.sqrt(l2_sq)), float(np.sqrt(h1_sq)), nodal


def solve_problem(prob, p, n, convention="slopes", compute_scn=True):
    """Solve a registered problem on n elements at order p.

    1D systems go through the sparse direct factorization (the 2-norm
    residual tolerance an iterative method would need is below the
    attainable floor on the finer meshes); the separable 2D problem runs
    Jacobi-preconditioned CG, and its operator is matrix-free so no
    condition number is reported.
    """
    if isinstance(prob, Problem2D):
        t0 = time.perf_counter()
        sol = tensor2d.solve_2d(prob, p, n, convention)
        l2, h1, nodal = tensor2d.errors_2d(sol, prob)
        seconds = time.perf_counter() - t0
        report = SolveReport(prob.name, p, n, 1.0 / n,
                             sol.space_x.dim * sol.space_y.dim,
                             l2, h1, nodal, None, sol.iters, seconds)
        return report, sol
    t0 = time.perf_counter()
    mesh = build_mesh(n, prob.interfaces)
    space = EnrichedSpace(
        mesh, p, convention,
        dirichlet=(prob.bc_left.kind == "dirichlet",
                   prob.bc_right.kind == "dirichlet"),
    )
    system = assemble(space, prob)
    coeffs = direct_solve(system.A, system.b)
    seconds = time.perf_counter() - t0
    l2, h1, nodal = error_norms(space, coeffs, system.boundary,
                                prob.exact, prob.exact_deriv)
    kappa = scn(system.A) if compute_scn else None
    report = SolveReport(prob.name, p, n, mesh.h, space.dim,
                         l2, h1, nodal, kappa, 0, seconds)
    return report, (coeffs, space, system)


def _rate(e_coarse, e_fine, h_coarse, h_fine):
    return float(np.log(e_coarse / e_fine) / np.log(h_coarse / h_fine))


def run_convergence(problem_name, ps, levels, convention="slopes",
                    overrides=None):
    """Rows of the convergence table for each order in ``ps`` over the mesh
    ``levels``; rates are between consecutive levels of the same order."""
    overrides = overrides or {}
    rows = []
    for p in ps:
        prev = None
        for n in levels:
            prob = get_problem(problem_name, **overrides)
            rep, _ = solve_problem(prob, p, n, convention)
            row = {
                "p": p, "n_elems": n, "h": rep.h, "dof": rep.dof,
                "l2": rep.l2, "l2_rate": None, "h1": rep.h1,
                "h1_rate": None, "nodal": rep.nodal, "nodal_rate": None,
                "scn": rep.scn, "iters": rep.iters, "seconds": rep.seconds,
            }
            if prev is not None:
                row["l2_rate"] = _rate(prev["l2"], rep.l2, prev["h"], rep.h)
                row["h1_rate"] = _rate(prev["h1"], rep.h1, prev["h"], rep.h)
                if rep.nodal > NOISE_FLOOR and prev["nodal"] > NOISE_FLOOR:
                    row["nodal_rate"] = _rate(prev["nodal"], rep.nodal,
                                              prev["h"], rep.h)
            prev = row
            rows.append(row)
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.5e}"


def emit_csv(rows, path):
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_csv(path):
    """Parse a convergence CSV back into row dicts (ints, floats, None)."""
    int_cols = {"p", "n_elems", "dof", "iters"}
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_COLUMNS:
                raise IoFailure(f"unexpected header in {path}: {header}")
            for rec in reader:
                row = {}
                for col, cell in zip(CSV_COLUMNS, rec):
                    if cell == "":
                        row[col] = None
                    elif col in int_cols:
                        row[col] = int(cell)
                    else:
                        row[col] = float(cell)
                rows.append(row)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return rows


def render_figure(rows, path, title=""):
    """Log-log error-vs-h plot (L2 solid, nodal dashed) for each order."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for p in sorted({r["p"] for r in rows}):
        sub = [r for r in rows if r["p"] == p]
        hs = [r["h"] for r in sub]
        ax.loglog(hs, [r["l2"] for r in sub], "o-", label=f"L2, p={p}")
        ax.loglog(hs, [max(r["nodal"], 1e-17) for r in sub], "s--",
                  label=f"nodal, p={p}")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    try:
        fig.savefig(path, dpi=150)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)


def render_solution(prob, result, path):
    """Plot a computed solution (1D overlay with the exact curve, 2D color
    map) to an image file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        if isinstance(prob, Problem2D):
            sol = result
            xs = np.linspace(0.0, 1.0, 201)
            bx = tensor2d._basis_matrix(sol.space_x, xs, np.ones_like(xs))
            by = tensor2d._basis_matrix(sol.space_y, xs, np.ones_like(xs))
            z = bx @ sol.U @ by.T
            pcm = ax.pcolormesh(xs, xs, z.T, shading="gouraud")
            fig.colorbar(pcm, ax=ax)
            ax.set_xlabel("x")
            ax.set_ylabel("y")
        else:
            coeffs, space, system = result
            xs = np.linspace(0.0, 1.0, 801)
            uh = space.eval(coeffs, xs, boundary=system.boundary)
            ax.plot(xs, uh, label="computed")
            if prob.exact is not None:
                ex = np.array([prob.exact(x, 1) for x in xs])
                ax.plot(xs, ex, "--", label="exact")
            for itf in prob.interfaces:
                ax.axvline(itf.x, color="gray", lw=0.6, alpha=0.6)
            ax.set_xlabel("x")
            ax.legend(fontsize=8)
        ax.set_title(prob.name)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)


# ---------------------------------------------------------------------------
# verify suites


def verify_suite(suite, p=None):
    """Run one of the named check suites; returns (label, ok, detail) rows."""
    if suite == "all":
        out = []
        for s in ("lemmas", "appendix", "greens"):
            out.extend(verify_suite(s, p))
        return out
    if suite == "lemmas":
        return _verify_lemmas(p)
    if suite == "appendix":
        return _verify_appendix(p)
    if suite == "greens":
        return _verify_greens()
    raise ValueError(f"unknown suite {suite!r}")


def _verify_lemmas(p=None):
    results = []
    alphas = (0.1, 0.37, 0.5, 0.9)
    bubble_ps = (p,) if p is not None else (2, 3, 4)
    for pp in bubble_ps:
        worst = 0.0
        for a in alphas:
            if pp >= 2:
                _, res = bubble_dependence(pp, a)
                worst = max(worst, res)
        results.append(
            (f"bubble dependence p={pp}", worst <= 1e-10, f"residual {worst:.2e}")
        )
    rng = np.random.default_rng(20240817)
    rep_ps = (p,) if p is not None else (1, 2, 3, 4)
    for pp in rep_ps:
        worst = 0.0
        for a in alphas:
            for _ in range(25):
                u1 = rng.standard_normal(pp + 1)
                u2 = rng.standard_normal(pp + 1)
                zeta = represent_piecewise(pp, a, u1, u2)
                xs = np.linspace(0.0, 1.0, 101)
                sides = np.where(xs < a, -1, 1)
                got = eval_piecewise(pp, a, zeta, xs, sides)
                want = np.where(
                    sides < 0,
                    np.polynomial.Polynomial(u1)(xs),
                    np.polynomial.Polynomial(u2)(xs - 1.0),
                )
                worst = max(worst, float(np.max(np.abs(got - want))))
        results.append(
            (f"piecewise representation p={pp}", worst <= 1e-9,
             f"max error {worst:.2e}")
        )
    return results


def _verify_appendix(p=None):
    p = 1 if p is None else p
    if p != 1:
        raise UnsupportedOrder(
            "closed-form diagonal checks exist for order 1 only"
        )
    results = []
    prob = p41()
    mesh = build_mesh(16, prob.interfaces)
    space = EnrichedSpace(mesh, 1)
    system = assemble(space, prob)
    want = appendix_diagonals(100.0, 1.0, prob.interfaces[0].x, 1.0, 16)
    got = assembled_interface_diagonals(system)
    worst = max(abs(got[k] - want[k]) / abs(want[k]) for k in want)
    results.append(
        ("interface-element diagonals vs closed forms", worst <= 1e-12,
         f"max relative gap {worst:.2e}")
    )
    scns = []
    h = 1.0 / 16
    x_k = 5 * h
    for frac in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        prob_eps = p41(alpha=x_k + frac * h)
        mesh = build_mesh(16, prob_eps.interfaces)
        space = EnrichedSpace(mesh, 1)
        system = assemble(space, prob_eps)
        scns.append(interface_block_scn(system))
    ratio = max(scns) / min(scns)
    results.append(
        ("rescaled interface block stays conditioned as alpha -> node",
         ratio < 100.0, f"scn spread {ratio:.2f} over 5 decades")
    )
    return results


def _verify_greens():
    a = 1.0 / np.pi

    def hat_jump(x, s):
        if x < a or (x == a and s < 0):
            return x / a
        return 2.0 * (1.0 - x) / (1.0 - a)

    def quad_jump(x, s):
        if x < a or (x == a and s < 0):
            return x * (a - x)
        return (x - a) * (1.0 - x) + 0.5 * (1.0 - x)

    tests = [
        ("smooth parabola", lambda x, s: x * (1.0 - x)),
        ("smooth cubic", lambda x, s: x * x * (1.0 - x)),
        ("smooth sine", lambda x, s: float(np.sin(np.pi * x))),
        ("jumping hat", hat_jump),
        ("jumping quadratic", quad_jump),
    ]
    results = []
    worst = 0.0
    for betas in ((1.0, 1.0), (100.0, 1.0)):
        for xi in (0.2, 0.7):
            g = GreenFunction(xi, betas[0], betas[1], a, lam=1.0)
            for _, v in tests:
                err = abs(g.reproduce(v) - v(xi, -1))
                worst = max(worst, err)
    results.append(
        ("point-source reproduction a(G, v) = v(xi)", worst <= 1e-8,
         f"max defect {worst:.2e}")
    )
    g0 = GreenFunction(0.3, 1.0, 1.0, 0.5, 0.0)
    gap = abs(g0.value(0.3) - 0.3 * (1.0 - 0.3))
    results.append(
        ("classical limit G(xi, xi) = xi(1-xi)", gap <= 1e-14,
         f"gap {gap:.2e}")
    )
    return results
