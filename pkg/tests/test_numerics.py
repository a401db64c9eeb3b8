import math

import numpy as np
import pytest

from genodyn.errors import NewtonError, SingularMatrixError
from genodyn.numerics import (
    Spectrum,
    Trajectory,
    companion_matrix,
    determinant,
    eigenvalues,
    integrate,
    newton,
    solve_linear,
)


def _poly(roots):
    return np.real(np.poly(roots))


def _matched(found, expected, tol):
    found = list(found)
    for r in expected:
        k = int(np.argmin([abs(f - r) for f in found]))
        assert abs(found[k] - r) <= tol, (found, expected)
        found.pop(k)


@pytest.mark.parametrize("roots", [
    [1.0, 2.0, 3.0],
    [-1 + 2j, -1 - 2j, 4.0],
    [0.5, -0.25, 2j, -2j, 3.0],
    [-6.0, 1j * math.sqrt(11), -1j * math.sqrt(11)],
    [1e-3, 10.0, -10.0, 5 + 1j, 5 - 1j, -2.0],
])
def test_eigenvalues_of_companion_matrices(roots):
    spectrum = eigenvalues(companion_matrix(_poly(roots)))
    _matched(spectrum.eigenvalues, roots, 1e-8)


def test_eigenvalues_of_symmetric_matrix():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(6, 6))
    S = M + M.T
    found = np.sort(eigenvalues(S).eigenvalues.real)
    assert np.allclose(found, np.linalg.eigvalsh(S), atol=1e-10)


def test_eigenvalues_small_cases():
    assert eigenvalues([[3.0]]).eigenvalues.tolist() == [3.0]
    rot = eigenvalues([[0.0, -2.0], [2.0, 0.0]])
    _matched(rot.eigenvalues, [2j, -2j], 1e-12)


def test_spectrum_ordering():
    spectrum = Spectrum.from_values([-3.0, 1 + 2j, 1 - 2j, 0.5])
    assert spectrum.eigenvalues.tolist() == [1 - 2j, 1 + 2j, 0.5, -3.0]
    assert spectrum.leading_real == 1.0
    assert not spectrum.is_stable()
    assert spectrum.product() == pytest.approx(-3.0 * 5.0 * 0.5)


def test_solve_linear_and_determinant():
    A = np.array([[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]])
    x = np.array([1.0, -2.0, 0.5])
    assert np.allclose(solve_linear(A, A @ x), x, atol=1e-14)
    assert determinant(A) == pytest.approx(np.linalg.det(A))


def test_singular_matrix():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve_linear(A, [1.0, 1.0])
    assert determinant(A) == 0.0


def test_newton_converges_quadratically():
    res = newton(lambda x: x * x - 2.0, lambda x: np.diag(2.0 * x), [1.0])
    assert abs(res.x[0] - math.sqrt(2.0)) <= 1e-14
    assert res.residual <= 1e-12
    assert res.iterations <= 7
    assert res.trace[0] == 1.0


def test_newton_reports_failure_with_trace():
    with pytest.raises(NewtonError) as info:
        newton(lambda x: x * x + 1.0, lambda x: np.diag(2.0 * x), [1.0], max_iter=30)
    assert info.value.trace


def test_newton_escape_from_box():
    with pytest.raises(NewtonError) as info:
        newton(lambda x: x - 50.0, lambda x: np.eye(1), [0.5], lower=[0.0], upper=[1.0])
    assert "escaped" in info.value.reason


def test_integrate_exponential_decay():
    traj = integrate(lambda t, x: -x, [1.0], (0.0, 5.0), rtol=1e-10, atol=1e-12)
    assert traj.times[-1] == 5.0
    assert abs(traj.final_state[0] - math.exp(-5.0)) <= 1e-9
    assert traj.accepted == len(traj) - 1


def test_integrate_harmonic_oscillator_and_dense_output():
    def rhs(t, x):
        return np.array([x[1], -x[0]])

    traj = integrate(rhs, [1.0, 0.0], (0.0, 2 * math.pi), rtol=1e-10, atol=1e-12, max_step=0.1)
    assert np.allclose(traj.final_state, [1.0, 0.0], atol=1e-8)
    for t in (0.05, 1.0, 2.345, 6.0):
        assert np.allclose(traj.state_at(t), [math.cos(t), -math.sin(t)], atol=1e-6)
        assert np.allclose(traj.exact_state_at(t), [math.cos(t), -math.sin(t)], atol=1e-8)


def test_trajectory_after_and_concatenate():
    first = integrate(lambda t, x: -x, [1.0], (0.0, 1.0))
    second = integrate(lambda t, x: -x, first.final_state, (1.0, 2.0))
    joined = Trajectory.concatenate([first, second])
    assert len(joined) == len(first) + len(second) - 1
    assert np.all(np.diff(joined.times) > 0)
    tail = joined.after(1.5)
    assert tail.times[0] >= 1.5
    assert tail.dimension == 1


def test_integrate_rejects_backwards_span():
    with pytest.raises(ValueError):
        integrate(lambda t, x: x, [1.0], (1.0, 0.0))


def test_eigenvalue_invariants_on_random_matrices():
    rng = np.random.default_rng(20240611)
    for trial in range(1000):
        n = int(rng.integers(1, 9))
        A = rng.normal(size=(n, n)) * rng.choice([0.1, 1.0, 10.0])
        values = eigenvalues(A).eigenvalues
        scale = 1.0 + np.linalg.norm(A)
        assert len(values) == n
        assert abs(np.sum(values).imag) <= 1e-9 * scale, trial
        assert np.sum(values).real == pytest.approx(np.trace(A), abs=1e-9 * n * scale), trial
        assert np.prod(values).real == pytest.approx(np.linalg.det(A), rel=1e-7, abs=1e-9 * scale ** n), trial
        for z in values:
            if z.imag != 0.0:
                assert np.min(np.abs(values - np.conj(z))) <= 1e-12 * scale, trial


def _separated_roots(rng, degree, gap=0.3):
    roots = []
    while len(roots) < degree:
        if degree - len(roots) >= 2 and rng.random() < 0.5:
            z = complex(rng.uniform(-3, 3), rng.uniform(0.2, 3))
            candidates = [z, z.conjugate()]
        else:
            candidates = [complex(rng.uniform(-3, 3), 0.0)]
        if all(abs(c - r) >= gap for c in candidates for r in roots):
            roots.extend(candidates)
    return roots


def test_companion_roots_up_to_degree_8():
    rng = np.random.default_rng(8)
    for degree in range(1, 9):
        for _ in range(25):
            roots = _separated_roots(rng, degree)
            spectrum = eigenvalues(companion_matrix(_poly(roots)))
            _matched(spectrum.eigenvalues, roots, 1e-6)


def test_global_error_tracks_rtol():
    def rhs(t, x):
        return np.array([x[1], -x[0]])

    errors, steps = [], []
    for rtol in (1e-6, 1e-8, 1e-10):
        traj = integrate(rhs, [1.0, 0.0], (0.0, 10.0), rtol=rtol, atol=1e-2 * rtol)
        exact = np.array([math.cos(10.0), -math.sin(10.0)])
        errors.append(float(np.max(np.abs(traj.final_state - exact))))
        steps.append(traj.accepted)
        assert errors[-1] <= 100.0 * rtol
    assert errors[0] > 10.0 * errors[1] > 100.0 * errors[2]
    assert steps[0] < steps[1] < steps[2]
    assert 3.0 < steps[2] / steps[0] < 15.0
