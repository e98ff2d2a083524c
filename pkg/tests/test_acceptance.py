"""End-to-end acceptance gate.

One test per shipped guarantee; each prints a single structured
``CRITERION n: PASS/FAIL`` line with the measured margins, then asserts.
Shared sweeps are computed once per module.
"""
import numpy as np
import pytest

from enrichfem.assembly import assemble
from enrichfem.basis import bubble_dependence, eval_piecewise, represent_piecewise
from enrichfem.harness import solve_problem
from enrichfem.linalg import scn
from enrichfem.mesh_space import EnrichedSpace, build_mesh
from enrichfem.problems import (
    REGISTRY,
    GreenFunction,
    appendix_diagonals,
    assembled_interface_diagonals,
    check_exact,
    get_problem,
    interface_block_scn,
    p41,
)

NOISE_FLOOR = 1e-12

# reference values for the default configurations (order-1 scaled condition
# numbers at N = 8..256, and two nodal-error spot values)
SCN_REFERENCE = (2.15e3, 4.12e3, 8.58e3, 1.65e4, 3.43e4, 6.69e4)
WALL1_P1_N8_NODAL = 1.27e-2
WALL3_P2_N32_NODAL = 3.72e-6
P42_P1_N8_NODAL = 6.54e-1
P42_P2_N16_NODAL = 1.90e-5


def _line(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"CRITERION {num}: {status} ({detail})")
    assert ok, f"criterion {num}: {detail}"


def _rate(coarse, fine):
    return float(np.log2(coarse / fine))


def _ls_slope(hs, errs):
    logs = np.log(np.asarray(hs))
    a = np.vstack([logs, np.ones_like(logs)]).T
    return float(np.linalg.lstsq(a, np.log(np.asarray(errs)), rcond=None)[0][0])


@pytest.fixture(scope="module")
def p41_sweep():
    out = {}
    for p in (1, 2, 3):
        for n in (8, 16, 32, 64, 128):
            report, _ = solve_problem(p41(), p, n, compute_scn=False)
            out[p, n] = report
    return out


@pytest.fixture(scope="module")
def wall_sweeps():
    out = {}
    for name in ("wall1", "wall2", "wall3"):
        for p in (1, 2, 3):
            for n in (8, 16, 32, 64):
                report, _ = solve_problem(get_problem(name), p, n,
                                          compute_scn=False)
                out[name, p, n] = report
    return out


@pytest.fixture(scope="module")
def p42_sweep():
    out = {}
    prob = get_problem("p42")
    for p in (1, 2):
        for n in (8, 16, 32):
            report, _ = solve_problem(prob, p, n)
            out[p, n] = report
    return out


def test_criterion_1_optimal_convergence_rates(p41_sweep):
    worst = 0.0
    detail = []
    for p in (1, 2, 3):
        l2_rate = _rate(p41_sweep[p, 64].l2, p41_sweep[p, 128].l2)
        h1_rate = _rate(p41_sweep[p, 64].h1, p41_sweep[p, 128].h1)
        worst = max(worst, abs(l2_rate - (p + 1)), abs(h1_rate - p))
        detail.append(f"p={p}: L2 {l2_rate:.2f} H1 {h1_rate:.2f}")
    _line(1, worst <= 0.2,
          f"final-interval rates {'; '.join(detail)}; worst gap {worst:.3f}")


def test_criterion_2_nodal_exactness(p41_sweep):
    worst = max(rep.nodal for rep in p41_sweep.values())
    _line(2, worst <= 1e-10,
          f"max interior nodal error {worst:.2e} over p=1..3, N=8..128")


def test_criterion_3_nodal_superconvergence(wall_sweeps):
    ok = True
    detail = []
    for name in ("wall1", "wall2", "wall3"):
        for p in (1, 2, 3):
            hs, errs = [], []
            for n in (8, 16, 32, 64):
                rep = wall_sweeps[name, p, n]
                if rep.nodal > NOISE_FLOOR:
                    hs.append(rep.h)
                    errs.append(rep.nodal)
            slope = _ls_slope(hs, errs)
            if slope < 2 * p - 0.5:
                ok = False
            detail.append(f"{name} p={p}: {slope:.2f}")
    spot1 = wall_sweeps["wall1", 1, 8].nodal
    spot3 = wall_sweeps["wall3", 2, 32].nodal
    r1 = max(spot1 / WALL1_P1_N8_NODAL, WALL1_P1_N8_NODAL / spot1)
    r3 = max(spot3 / WALL3_P2_N32_NODAL, WALL3_P2_N32_NODAL / spot3)
    ok = ok and r1 <= 10.0 and r3 <= 10.0
    _line(3, ok, f"nodal rates {'; '.join(detail)}; spot ratios "
                 f"{r1:.1f} and {r3:.1f}")


def test_criterion_4_scaled_condition_numbers():
    values = []
    for n in (8, 16, 32, 64, 128, 256):
        prob = p41()
        mesh = build_mesh(n, prob.interfaces)
        space = EnrichedSpace(mesh, 1)
        system = assemble(space, prob)
        values.append(scn(system.A))
    ratios = [max(v / r, r / v) for v, r in zip(values, SCN_REFERENCE)]
    growth = [values[i + 1] / values[i] for i in range(len(values) - 1)]
    ok = max(ratios) <= 10.0 and max(growth) <= 4.0
    _line(4, ok, f"reference ratios max {max(ratios):.2f}, "
                 f"growth per halving max {max(growth):.2f}")


def test_criterion_5_tensor_2d(p42_sweep):
    worst = 0.0
    detail = []
    for p in (1, 2):
        rate = _rate(p42_sweep[p, 16].l2, p42_sweep[p, 32].l2)
        worst = max(worst, abs(rate - (p + 1)))
        detail.append(f"p={p}: L2 {rate:.2f}")
    s1 = p42_sweep[1, 8].nodal
    s2 = p42_sweep[2, 16].nodal
    r1 = max(s1 / P42_P1_N8_NODAL, P42_P1_N8_NODAL / s1)
    r2 = max(s2 / P42_P2_N16_NODAL, P42_P2_N16_NODAL / s2)
    ok = worst <= 0.25 and r1 <= 3.0 and r2 <= 3.0
    _line(5, ok, f"rates {'; '.join(detail)} (worst gap {worst:.3f}); "
                 f"nodal spot ratios {r1:.2f} and {r2:.2f}")


def test_criterion_6_local_space_structure():
    worst_bubble = 0.0
    worst_rep = 0.0
    rng = np.random.default_rng(123)
    xs = np.linspace(0.0, 1.0, 101)
    for a in (0.1, 0.37, 0.5, 0.9):
        sides = np.where(xs < a, -1, 1)
        for p in (2, 3, 4):
            _, res = bubble_dependence(p, a)
            worst_bubble = max(worst_bubble, res)
        for p in (1, 2, 3, 4):
            for _ in range(100):
                u1 = rng.standard_normal(p + 1)
                u2 = rng.standard_normal(p + 1)
                zeta = represent_piecewise(p, a, u1, u2)
                got = eval_piecewise(p, a, zeta, xs, sides)
                want = np.where(
                    sides < 0,
                    np.polynomial.Polynomial(u1)(xs),
                    np.polynomial.Polynomial(u2)(xs - 1.0),
                )
                worst_rep = max(worst_rep, float(np.max(np.abs(got - want))))
    ok = worst_bubble <= 1e-10 and worst_rep <= 1e-9
    _line(6, ok, f"bubble residual {worst_bubble:.2e}, "
                 f"representation error {worst_rep:.2e}")


def test_criterion_7_green_function_reproduction():
    a = 1.0 / np.pi

    def hat_jump(x, s):
        if x < a or (x == a and s < 0):
            return x / a
        return 2.0 * (1.0 - x) / (1.0 - a)

    def quad_jump(x, s):
        if x < a or (x == a and s < 0):
            return x * (a - x)
        return (x - a) * (1.0 - x) + 0.5 * (1.0 - x)

    tests = (
        lambda x, s: x * (1.0 - x),
        lambda x, s: x * x * (1.0 - x),
        lambda x, s: float(np.sin(np.pi * x)),
        hat_jump,
        quad_jump,
    )
    worst = 0.0
    for betas in ((1.0, 1.0), (100.0, 1.0)):
        for xi in (0.2, 0.7):
            g = GreenFunction(xi, betas[0], betas[1], a, 1.0)
            for v in tests:
                worst = max(worst, abs(g.reproduce(v) - v(xi, -1)))
    _line(7, worst <= 1e-8,
          f"max reproduction defect {worst:.2e} over 5 fns x 2 xi x 2 ratios")


def test_criterion_8_interface_block_structure():
    prob = p41()
    mesh = build_mesh(16, prob.interfaces)
    space = EnrichedSpace(mesh, 1)
    system = assemble(space, prob)
    want = appendix_diagonals(100.0, 1.0, prob.interfaces[0].x, 1.0, 16)
    got = assembled_interface_diagonals(system)
    diag_gap = max(abs(got[k] - want[k]) / abs(want[k]) for k in want)

    h = 1.0 / 16
    block = []
    for frac in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        prob_eps = p41(alpha=5 * h + frac * h)
        mesh = build_mesh(16, prob_eps.interfaces)
        space = EnrichedSpace(mesh, 1)
        block.append(interface_block_scn(assemble(space, prob_eps)))
    spread = max(block) / min(block)
    ok = diag_gap <= 1e-12 and spread < 100.0
    _line(8, ok, f"diagonal gap {diag_gap:.2e}, interface-block scn spread "
                 f"{spread:.2f} as the interface approaches a node")


def test_criterion_9_exact_solution_consistency():
    worst = 0.0
    per = []
    for name in sorted(REGISTRY):
        residuals = check_exact(get_problem(name))
        top = max(residuals.values())
        worst = max(worst, top)
        per.append(f"{name} {top:.1e}")
    _line(9, worst <= 1e-10, f"strong-form/jump/boundary residuals: "
                             f"{', '.join(per)}")
