import numpy as np
import pytest

from enrichfem.assembly import assemble
from enrichfem.errors import (
    InterfaceAtSingularAlpha,
    OutOfDomain,
    ReproducingPropertyFailed,
)
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
    p42,
    wall1,
    wall3,
)

EXACTNESS_TOL = 1e-10


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_registered_exact_solutions_satisfy_their_equations(name):
    prob = get_problem(name)
    residuals = check_exact(prob)
    worst = max(residuals.values())
    assert worst <= EXACTNESS_TOL, f"{name}: {residuals}"


def test_registry_contents():
    assert set(REGISTRY) == {"p41", "p42", "wall1", "wall2", "wall3"}


def test_p41_interface_jump_is_flux_proportional():
    prob = p41()
    a = prob.interfaces[0].x
    jump = prob.exact(a, 1) - prob.exact(a, -1)
    beta_left = prob.diffusion(np.array([a]), np.array([-1]))[0]
    flux = -beta_left * prob.exact_deriv(a, -1)
    assert jump == pytest.approx(-prob.interfaces[0].lam * flux, rel=1e-12)


def test_p41_overrides_flow_through():
    prob = p41(beta_minus=10.0, beta_plus=2.0, alpha=0.41, lam=0.5)
    assert prob.interfaces[0].x == pytest.approx(0.41)
    assert prob.interfaces[0].lam == pytest.approx(0.5)
    assert max(check_exact(prob).values()) <= EXACTNESS_TOL


def test_wall_interface_strengths():
    assert wall1().interfaces[0].lam == pytest.approx(1.0 / 243.0)
    w3 = wall3()
    assert len(w3.interfaces) == 3
    assert [i.kind.name for i in w3.interfaces] == [
        "DISCONTINUOUS", "CONTINUOUS", "CONTINUOUS",
    ]


def test_p42_rejects_singular_interface_position():
    with pytest.raises(InterfaceAtSingularAlpha):
        p42(alpha=0.5)


def test_p42_rejects_nonpositive_coupling():
    # past the half-way point the induced coupling strength flips sign
    with pytest.raises(ValueError):
        p42(alpha=0.6)


def test_p42_coupling_strength():
    prob = p42()
    gamma = -np.tan(np.pi / 3.0) / np.pi
    want = -gamma * (100.0 - 1.0) / 100.0
    assert prob.lam == pytest.approx(want, rel=1e-12)
    assert prob.lam > 0


def test_green_function_classical_closed_form():
    # equal coefficients, no interface coupling: G(x; xi) is the classic
    # triangular kernel x(1-xi) / xi(1-x)
    xi = 0.3
    g = GreenFunction(xi, 1.0, 1.0, 0.5, 0.0)
    for x in (0.0, 0.1, 0.25, 0.3, 0.62, 1.0):
        want = x * (1.0 - xi) if x <= xi else xi * (1.0 - x)
        assert g.value(x) == pytest.approx(want, abs=1e-14)


def test_green_function_reproduces_point_values():
    a = 1.0 / np.pi
    for betas in ((1.0, 1.0), (100.0, 1.0)):
        for xi in (0.2, 0.7):
            g = GreenFunction(xi, betas[0], betas[1], a, 1.0)
            for v in (
                lambda x, s: x * (1.0 - x),
                lambda x, s: x * x * (1.0 - x),
                lambda x, s: float(np.sin(np.pi * x)),
            ):
                assert g.reproduce(v) == pytest.approx(v(xi, -1), abs=1e-8)


def test_green_function_jump_sign():
    g = GreenFunction(0.2, 100.0, 1.0, 1.0 / np.pi, 1.0)
    # the jump equals lam times the (continuous) coefficient-weighted slope
    assert g.interface_jump == pytest.approx(g.lam * g.slopes[1], rel=1e-12)


def test_green_function_domain_guard():
    g = GreenFunction(0.2, 1.0, 1.0, 0.5, 0.0)
    with pytest.raises(OutOfDomain):
        g.value(1.5)


def test_green_function_self_check_catches_bad_kernel():
    g = GreenFunction(0.2, 100.0, 1.0, 1.0 / np.pi, 1.0)
    object.__setattr__(g, "slopes", tuple(2.0 * s for s in g.slopes))
    with pytest.raises(ReproducingPropertyFailed):
        g._self_check()


def test_interface_diagonals_match_closed_forms():
    for n, alpha in ((16, 1.0 / np.pi), (24, 0.402)):
        prob = p41(alpha=alpha)
        mesh = build_mesh(n, prob.interfaces)
        space = EnrichedSpace(mesh, 1)
        system = assemble(space, prob)
        want = appendix_diagonals(100.0, 1.0, alpha, 1.0, n)
        got = assembled_interface_diagonals(system)
        for key, val in want.items():
            assert got[key] == pytest.approx(val, rel=1e-12), key


def test_interface_block_stays_conditioned_near_node():
    h = 1.0 / 16
    values = []
    for frac in (1e-1, 1e-3, 1e-6):
        prob = p41(alpha=5 * h + frac * h)
        mesh = build_mesh(16, prob.interfaces)
        space = EnrichedSpace(mesh, 1)
        system = assemble(space, prob)
        values.append(interface_block_scn(system))
    assert max(values) / min(values) < 100.0
