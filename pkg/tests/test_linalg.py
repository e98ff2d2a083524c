import numpy as np
import pytest

from enrichfem.assembly import assemble
from enrichfem.errors import (
    DimensionMismatch,
    MaxIterations,
    NonpositiveDiagonal,
    SingularMatrix,
)
from enrichfem.linalg import SparseMatrix, direct_solve, from_coo, pcg, scn
from enrichfem.mesh_space import EnrichedSpace, build_mesh
from enrichfem.problems import p41


def _random_spd(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    dense = B @ B.T + n * np.eye(n)
    rows, cols = np.nonzero(dense)
    return from_coo(n, rows, cols, dense[rows, cols]), dense


def test_matvec_matches_dense():
    A, dense = _random_spd(12, 0)
    x = np.arange(12, dtype=float)
    assert np.allclose(A.matvec(x), dense @ x)
    assert np.allclose(A.diagonal(), np.diag(dense))
    assert np.allclose(A.to_dense(), dense)


def test_from_coo_sums_duplicates():
    A = from_coo(2, [0, 0, 1], [0, 0, 1], [1.0, 2.0, 5.0])
    assert np.allclose(A.to_dense(), [[3.0, 0.0], [0.0, 5.0]])


def test_add_and_scale():
    A, da = _random_spd(6, 1)
    B, db = _random_spd(6, 2)
    assert np.allclose((A + B).to_dense(), da + db)
    assert np.allclose(A.scaled(-2.0).to_dense(), -2.0 * da)


def test_matvec_dimension_mismatch():
    A, _ = _random_spd(5, 3)
    with pytest.raises(DimensionMismatch):
        A.matvec(np.ones(4))


def test_pcg_matches_direct_on_spd():
    A, dense = _random_spd(40, 4)
    b = np.sin(np.arange(40.0))
    x, iters = pcg(A, b, tol=1e-13)
    assert iters > 0
    assert np.allclose(x, np.linalg.solve(dense, b), atol=1e-9)
    assert np.linalg.norm(b - A.matvec(x)) / np.linalg.norm(b) <= 1e-12


def test_pcg_identity_converges_immediately():
    A = from_coo(5, range(5), range(5), np.ones(5))
    x, iters = pcg(A, np.arange(5.0))
    assert iters == 1
    assert np.allclose(x, np.arange(5.0))


def test_pcg_zero_rhs():
    A, _ = _random_spd(5, 5)
    x, iters = pcg(A, np.zeros(5))
    assert iters == 0
    assert np.all(x == 0.0)


def test_pcg_rejects_nonpositive_diagonal():
    A = from_coo(2, [0, 1], [0, 1], [1.0, -1.0])
    with pytest.raises(NonpositiveDiagonal):
        pcg(A, np.ones(2))


def test_pcg_iteration_budget():
    A, _ = _random_spd(30, 6)
    with pytest.raises(MaxIterations):
        pcg(A, np.ones(30), tol=1e-14, maxiter=2)


def test_pcg_on_assembled_interface_system():
    # order 1, 32 elements: the iteration count stays near the unknown count
    # and the converged residual honors the requested tolerance
    prob = p41()
    mesh = build_mesh(32, prob.interfaces)
    space = EnrichedSpace(mesh, 1)
    system = assemble(space, prob)
    x, iters = pcg(system.A, system.b, tol=1e-12)
    rel = np.linalg.norm(system.b - system.A.matvec(x))
    rel /= np.linalg.norm(system.b)
    assert rel <= 1e-12
    assert iters <= space.dim + 5


def test_direct_solve_matches_numpy():
    A, dense = _random_spd(20, 7)
    b = np.cos(np.arange(20.0))
    assert np.allclose(direct_solve(A, b), np.linalg.solve(dense, b))


def test_direct_solve_singular():
    A = from_coo(2, [0, 0, 1, 1], [0, 1, 0, 1], [1.0, 2.0, 2.0, 4.0])
    with pytest.raises(SingularMatrix):
        direct_solve(A, np.ones(2))


def test_scn_identity_and_known_two_by_two():
    eye = from_coo(3, range(3), range(3), [4.0, 1.0, 9.0])
    # any positive diagonal matrix rescales to the identity
    assert scn(eye) == pytest.approx(1.0)
    A = from_coo(2, [0, 0, 1, 1], [0, 1, 0, 1], [2.0, 1.0, 1.0, 2.0])
    # rescaled matrix [[1, .5], [.5, 1]] has eigenvalues 1.5 and 0.5
    assert scn(A) == pytest.approx(3.0, rel=1e-10)


def test_scn_invariant_under_diagonal_scaling():
    A, dense = _random_spd(25, 8)
    d = np.exp(np.linspace(-3, 3, 25))
    scaled_dense = dense * np.outer(d, d)
    rows, cols = np.nonzero(scaled_dense)
    B = from_coo(25, rows, cols, scaled_dense[rows, cols])
    assert scn(B) == pytest.approx(scn(A), rel=1e-9)


def test_scn_indefinite_is_infinite():
    A = from_coo(2, [0, 1], [0, 1], [1.0, -1.0])
    assert scn(A) == np.inf


def test_scn_lanczos_agrees_with_dense():
    n = 600
    rng = np.random.default_rng(9)
    main = 2.0 + rng.uniform(0.0, 1.0, n)
    off = rng.uniform(-0.5, 0.5, n - 1)
    rows = list(range(n)) + list(range(n - 1)) + list(range(1, n))
    cols = list(range(n)) + list(range(1, n)) + list(range(n - 1))
    vals = np.concatenate([main, off, off])
    A = from_coo(n, rows, cols, vals)
    dense_val = scn(A, dense_cutoff=n + 1)
    lanczos_val = scn(A, dense_cutoff=10)
    assert lanczos_val == pytest.approx(dense_val, rel=1e-4)
