"""Command-line entry points: single solves, convergence sweeps, condition
numbers, and verification suites.

Every path that writes a CSV also drops a PNG figure next to it.  Exit code
is 0 exactly when all requested checks pass.
"""
from __future__ import annotations

import os

import click

from .errors import SolverError
from .linalg import scn as _scn
from .mesh_space import EnrichedSpace, build_mesh
from .assembly import assemble
from .problems import REGISTRY, Problem2D, get_problem
from . import harness

_CONVENTIONS = ("slopes", "slopesC")


def _parse_sets(pairs):
    """Split repeated ``--set key=value`` into problem overrides and the
    enrichment convention."""
    overrides = {}
    convention = "slopes"
    for item in pairs:
        key, sep, val = item.partition("=")
        if not sep:
            raise click.BadParameter(f"expected key=value, got {item!r}")
        key, val = key.strip(), val.strip()
        if key == "enrichment":
            if val not in _CONVENTIONS:
                raise click.BadParameter(
                    f"enrichment must be one of {_CONVENTIONS}"
                )
            convention = val
            continue
        try:
            overrides[key] = float(val)
        except ValueError:
            raise click.BadParameter(f"value for {key} must be numeric")
    return overrides, convention


def _int_list(text):
    try:
        values = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated ints, got {text!r}")
    if not values:
        raise click.BadParameter("empty list")
    return values


def _figure_path(csv_path):
    root, _ = os.path.splitext(csv_path)
    return root + ".png"


@click.group()
def main():
    """Enriched finite elements for elliptic interface problems."""


_problem_opt = click.option(
    "--problem", "problem_id", required=True,
    type=click.Choice(sorted(REGISTRY)), help="registered problem id",
)
_set_opt = click.option(
    "--set", "assignments", multiple=True, metavar="KEY=VALUE",
    help="override problem parameters, or enrichment=slopes|slopesC",
)


@main.command()
@_problem_opt
@click.option("--p", "order", required=True, type=int, help="polynomial order")
@click.option("--n", "n_elems", required=True, type=int, help="element count")
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              default=None, help="write a one-row CSV (plus solution figure)")
@_set_opt
def solve(problem_id, order, n_elems, out_path, assignments):
    """Solve one problem instance and report its errors."""
    overrides, convention = _parse_sets(assignments)
    try:
        prob = get_problem(problem_id, **overrides)
        report, result = harness.solve_problem(prob, order, n_elems,
                                               convention)
    except SolverError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"problem={report.problem} p={report.p} "
               f"n_elems={report.n_elems} h={report.h:.5e} dof={report.dof}")
    click.echo(f"l2={report.l2:.5e} h1={report.h1:.5e} "
               f"nodal={report.nodal:.5e}")
    scn_text = "" if report.scn is None else f"{report.scn:.5e}"
    click.echo(f"scn={scn_text} iters={report.iters} "
               f"seconds={report.seconds:.3f}")
    if out_path:
        row = {
            "p": report.p, "n_elems": report.n_elems, "h": report.h,
            "dof": report.dof, "l2": report.l2, "l2_rate": None,
            "h1": report.h1, "h1_rate": None, "nodal": report.nodal,
            "nodal_rate": None, "scn": report.scn, "iters": report.iters,
            "seconds": report.seconds,
        }
        harness.emit_csv([row], out_path)
        harness.render_solution(prob, result, _figure_path(out_path))
        click.echo(f"wrote {out_path} and {_figure_path(out_path)}")


@main.command()
@_problem_opt
@click.option("--p", "orders", required=True, help="orders, e.g. 1,2,3")
@click.option("--levels", required=True, help="element counts, e.g. 8,16,32")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="CSV destination")
@_set_opt
def convergence(problem_id, orders, levels, out_path, assignments):
    """Run a mesh-refinement sweep and write the rate table."""
    overrides, convention = _parse_sets(assignments)
    ps = _int_list(orders)
    ns = _int_list(levels)
    try:
        rows = harness.run_convergence(problem_id, ps, ns, convention,
                                       overrides)
    except SolverError as exc:
        raise click.ClickException(str(exc))
    harness.emit_csv(rows, out_path)
    harness.render_figure(rows, _figure_path(out_path), title=problem_id)
    for row in rows:
        rate = "" if row["l2_rate"] is None else f" rate={row['l2_rate']:.2f}"
        click.echo(f"p={row['p']} n={row['n_elems']:4d} "
                   f"l2={row['l2']:.5e}{rate}")
    click.echo(f"wrote {out_path} and {_figure_path(out_path)}")


@main.command()
@_problem_opt
@click.option("--p", "order", required=True, type=int, help="polynomial order")
@click.option("--n", "n_elems", required=True, type=int, help="element count")
@_set_opt
def scn(problem_id, order, n_elems, assignments):
    """Print the scaled condition number of the assembled system."""
    overrides, convention = _parse_sets(assignments)
    try:
        prob = get_problem(problem_id, **overrides)
        if isinstance(prob, Problem2D):
            raise click.ClickException(
                "the 2D operator is matrix-free; condition numbers are "
                "reported for 1D systems"
            )
        mesh = build_mesh(n_elems, prob.interfaces)
        space = EnrichedSpace(
            mesh, order, convention,
            dirichlet=(prob.bc_left.kind == "dirichlet",
                       prob.bc_right.kind == "dirichlet"),
        )
        system = assemble(space, prob)
        value = _scn(system.A)
    except SolverError as exc:
        raise click.ClickException(str(exc))
    note = "" if system.symmetric else " (symmetric part)"
    click.echo(f"problem={problem_id} p={order} n_elems={n_elems} "
               f"dof={space.dim}")
    click.echo(f"scn={value:.5e}{note}")


@main.command()
@click.option("--suite", required=True,
              type=click.Choice(("lemmas", "appendix", "greens", "all")))
@click.option("--p", "order", type=int, default=None,
              help="restrict checks to one order")
def verify(suite, order):
    """Run a structural check suite; nonzero exit if anything fails."""
    try:
        results = harness.verify_suite(suite, order)
    except SolverError as exc:
        raise click.ClickException(str(exc))
    failed = 0
    for label, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        failed += 0 if ok else 1
        click.echo(f"{status} {label}: {detail}")
    if failed:
        raise click.ClickException(f"{failed} check(s) failed")
    click.echo(f"all {len(results)} checks passed")


if __name__ == "__main__":
    main()
