import numpy as np
import pytest

from lchs import (
    DimensionError,
    HermiticityError,
    RangeError,
    TimeSchedule,
    hermitian_split,
    matrix_exponential,
    min_hermitian_eigenvalue,
    spectral_shift,
    unitary_step,
)
from lchs.linalg import HermitianPair, spectral_norm_estimate

from conftest import random_hermitian, random_unitary


def mm1_generator(lam, mu, n):
    Q = np.zeros((n, n))
    for j in range(n):
        Q[j, j] = -(lam + mu)
        if j + 1 < n:
            Q[j, j + 1] = lam
        if j >= 1:
            Q[j, j - 1] = mu
    return Q


class TestHermitianSplit:
    def test_real_scalar(self):
        pair = hermitian_split(np.array([[1.0]]))
        assert pair.L[0, 0] == 1.0
        assert pair.H[0, 0] == 0.0

    def test_imaginary_scalar(self):
        pair = hermitian_split(np.array([[1j]]))
        assert pair.L[0, 0] == 0.0
        assert pair.H[0, 0] == 1.0

    def test_mm1_truncation(self):
        # 4x4 queue generator with lam=1, mu=2, split directly
        Q = mm1_generator(1.0, 2.0, 4)
        pair = hermitian_split(Q)
        assert np.allclose(np.diagonal(pair.L), -3.0)
        assert np.allclose(np.diagonal(pair.L, 1), 1.5)
        assert np.allclose(np.diagonal(pair.H, 1), 0.5j)
        assert np.allclose(np.diagonal(pair.H, -1), -0.5j)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(11)
        for dim in (2, 7, 33, 128, 256):
            A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            pair = hermitian_split(A)
            assert np.max(np.abs(pair.L + 1j * pair.H - A)) <= 1e-12
            assert np.max(np.abs(pair.L - pair.L.conj().T)) <= 1e-12
            assert np.max(np.abs(pair.H - pair.H.conj().T)) <= 1e-12

    def test_lambda0_is_computed(self):
        pair = hermitian_split(np.diag([3.0, -2.0, 5.0]))
        assert pair.lambda0 == pytest.approx(-2.0, abs=1e-12)

    def test_nonsquare_rejected(self):
        with pytest.raises(DimensionError):
            hermitian_split(np.ones((2, 3)))

    def test_nonfinite_rejected(self):
        with pytest.raises(RangeError):
            hermitian_split(np.array([[np.inf, 0], [0, 1.0]]))


class TestMinEigenvalue:
    def test_diagonal(self):
        assert min_hermitian_eigenvalue(np.diag([1.0, 2.0])) == pytest.approx(1.0)

    def test_pauli_x(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert min_hermitian_eigenvalue(X) == pytest.approx(-1.0, abs=1e-14)

    def test_dirichlet_stencil_closed_form(self):
        # interior Laplacian on 32 grid points, h = 1/31; eigenvalues are
        # (4/h^2) sin^2(j pi h / 2) for j = 1..30
        N_grid = 32
        h = 1.0 / (N_grid - 1)
        n = N_grid - 2
        L = (np.diag(2.0 * np.ones(n)) - np.diag(np.ones(n - 1), 1)
             - np.diag(np.ones(n - 1), -1)) / h**2
        expected = (4.0 / h**2) * np.sin(np.pi * h / 2.0) ** 2
        assert min_hermitian_eigenvalue(L) == pytest.approx(expected, rel=1e-10)

    def test_relative_accuracy_random(self):
        rng = np.random.default_rng(5)
        for dim in (8, 64, 300):
            U = random_unitary(rng, dim)
            lam = np.sort(rng.uniform(0.5, 50.0, dim))
            L = (U * lam) @ U.conj().T
            got = min_hermitian_eigenvalue(L)
            assert abs(got - lam[0]) / lam[0] <= 1e-10

    def test_non_hermitian_rejected(self):
        with pytest.raises(HermiticityError):
            min_hermitian_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSpectralShift:
    def test_already_positive(self):
        pair = hermitian_split(np.diag([1.0, 2.0]))
        shifted, c = spectral_shift(pair, 0.5)
        assert c == 0.0
        assert shifted.lambda0 == pytest.approx(1.0)

    def test_negative_diag(self):
        pair = hermitian_split(np.diag([-3.0, -1.0]))
        shifted, c = spectral_shift(pair, 0.1)
        assert c == pytest.approx(3.1, abs=1e-12)
        assert shifted.lambda0 == pytest.approx(0.1, abs=1e-10)

    def test_mm1_L_shift(self):
        Q = mm1_generator(1.0, 2.0, 8)
        pair = hermitian_split(-Q.T)
        lam_min = np.linalg.eigvalsh(pair.L)[0]
        shifted, c = spectral_shift(pair, 0.1)
        assert c == pytest.approx(max(0.0, 0.1 - lam_min), rel=1e-12)

    def test_solution_recovery(self):
        # exp(cT) expm(-(A + cI)T) u0 must equal expm(-AT) u0
        rng = np.random.default_rng(7)
        for dim, T in ((4, 0.1), (16, 1.0), (64, 1.0)):
            A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            pair = hermitian_split(A)
            shifted, c = spectral_shift(pair, 1.0)
            u0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            u0 /= np.linalg.norm(u0)
            A_shift = shifted.L + 1j * shifted.H
            lhs = np.exp(c * T) * (matrix_exponential(-A_shift * T) @ u0)
            rhs = matrix_exponential(-A * T) @ u0
            assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) <= 1e-9

    def test_target_must_be_positive(self):
        pair = hermitian_split(np.diag([1.0]))
        with pytest.raises(RangeError):
            spectral_shift(pair, 0.0)


class TestMatrixExponential:
    def test_zero(self):
        assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_diagonal_decay(self):
        E = matrix_exponential(np.diag([-1.0, -2.0]))
        assert E[0, 0] == pytest.approx(0.36787944117144233, rel=1e-12)
        assert E[1, 1] == pytest.approx(0.1353352832366127, rel=1e-12)

    def test_pauli_rotation(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0]])
        E = matrix_exponential(-1j * np.pi / 2 * X)
        assert np.max(np.abs(E - (-1j * X))) <= 1e-12

    def test_against_eigendecomposition(self):
        rng = np.random.default_rng(3)
        for dim in (2, 16, 64, 128):
            H = random_hermitian(rng, dim, scale=3.0)
            w, V = np.linalg.eigh(H)
            ref = (V * np.exp(w)) @ V.conj().T
            got = matrix_exponential(H)
            assert np.linalg.norm(got - ref, 2) / np.linalg.norm(ref, 2) <= 1e-9
            # normal (non-Hermitian) case: unitary conjugation of complex diag
            U = random_unitary(rng, dim)
            lam = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            N = (U * lam) @ U.conj().T
            ref = (U * np.exp(lam)) @ U.conj().T
            got = matrix_exponential(N)
            assert np.linalg.norm(got - ref, 2) / np.linalg.norm(ref, 2) <= 1e-9

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_overflow_raises(self):
        with pytest.raises(RangeError):
            matrix_exponential(np.diag([1e5, 1e5]))


class TestUnitaryStep:
    def test_dt_zero(self):
        v = np.array([1.0 + 2j, 3.0])
        out = unitary_step(np.diag([1.0, 2.0]), 0.0, v)
        assert np.array_equal(out, v)

    def test_pauli_quarter_turn(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0]])
        out = unitary_step(X, np.pi / 2, np.array([1.0, 0.0]))
        assert np.max(np.abs(out - np.array([0.0, -1j]))) <= 1e-12

    def test_diagonal_phases(self):
        out = unitary_step(np.diag([1.0, 2.0]), 1.0, np.array([1.0, 1.0]))
        assert np.allclose(out, [np.exp(-1j), np.exp(-2j)], atol=1e-13)

    def test_norm_preservation_many(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            dim = int(rng.integers(1, 24))
            G = random_hermitian(rng, dim, scale=rng.uniform(0.1, 5.0))
            dt = rng.uniform(0.0, 10.0)
            v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            out = unitary_step(G, dt, v)
            nv = np.linalg.norm(v)
            assert abs(np.linalg.norm(out) - nv) <= 1e-10 * nv

    def test_large_dim_path(self):
        # above the eigendecomposition cutoff the expm path must still be
        # accurate and norm preserving
        rng = np.random.default_rng(23)
        dim = 520
        d = rng.uniform(-2.0, 2.0, dim)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        out = unitary_step(np.diag(d), 0.7, v)
        ref = np.exp(-1j * d * 0.7) * v
        assert np.linalg.norm(out - ref) / np.linalg.norm(ref) <= 1e-10

    def test_non_hermitian_rejected(self):
        with pytest.raises(HermiticityError):
            unitary_step(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0, np.array([1.0, 0.0]))


class TestSpectralNormEstimate:
    def test_matches_exact(self):
        # used only as a step-count heuristic; modest accuracy is enough
        rng = np.random.default_rng(1)
        A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
        exact = np.linalg.norm(A, 2)
        est = spectral_norm_estimate(A)
        assert est == pytest.approx(exact, rel=1e-3)
        assert est <= exact * (1 + 1e-12)


class TestTimeSchedule:
    def test_piecewise_lookup(self):
        p1 = hermitian_split(np.diag([1.0]))
        p2 = hermitian_split(np.diag([2.0]))
        s = TimeSchedule.piecewise([0.0, 0.5, 1.0], [p1, p2])
        assert s.pair_at(0.2).L[0, 0] == 1.0
        assert s.pair_at(0.7).L[0, 0] == 2.0
        assert s.pair_at(1.0).L[0, 0] == 2.0
        assert s.lambda0 == pytest.approx(1.0)

    def test_breakpoints_must_ascend(self):
        p = hermitian_split(np.diag([1.0]))
        with pytest.raises(RangeError):
            TimeSchedule.piecewise([0.0, 0.5, 0.5], [p, p])
        with pytest.raises(RangeError):
            TimeSchedule.piecewise([0.1, 0.5], [p])

    def test_shifted_recertifies(self):
        p = hermitian_split(np.diag([-1.0, 2.0]))
        s = TimeSchedule.constant(p, 1.0).shifted(1.5)
        assert s.pairs[0].lambda0 == pytest.approx(0.5, abs=1e-12)
        assert s.pairs[0].shift == pytest.approx(1.5)

    def test_callback_sampled(self):
        def rule(t):
            return HermitianPair(
                L=np.array([[1.0 + t]], dtype=complex),
                H=np.zeros((1, 1), dtype=complex),
                shift=0.0,
                lambda0=1.0 + t,
            )

        s = TimeSchedule.from_rule(rule, 2.0, n_check=5)
        assert s.pair_at(0.5).L[0, 0] == pytest.approx(1.5)
        assert s.lambda0 == pytest.approx(1.0)
