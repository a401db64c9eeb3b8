# numerics.py - Dense numerical kernels used by every analysis
#
# Small dense problems only (n up to a few dozen): a real eigensolver
# (balancing + Hessenberg + shifted QR), partial-pivot LU, a damped Newton
# root finder and a Dormand-Prince 5(4) integrator with PI step control.
# numpy supplies the array storage; the algorithms are written out here.

from dataclasses import dataclass, field
from math import sqrt
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import (
    EigenvalueConvergenceError,
    NewtonError,
    SingularMatrixError,
    StepUnderflowError,
)

EPS = np.finfo(float).eps


def norm_inf(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0


# =============================================================================
# SPECTRUM
# =============================================================================

@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted by descending real part, ties by ascending imaginary part."""

    eigenvalues: np.ndarray

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        vals = np.asarray(values, dtype=complex).ravel()
        order = np.lexsort((vals.imag, -vals.real))
        return cls(vals[order])

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(self.eigenvalues)

    @property
    def leading(self) -> complex:
        return complex(self.eigenvalues[0])

    @property
    def leading_real(self) -> float:
        return float(self.eigenvalues[0].real)

    @property
    def real_parts(self) -> np.ndarray:
        return self.eigenvalues.real.copy()

    def product(self) -> float:
        return float(np.prod(self.eigenvalues).real)

    def is_stable(self, margin: float = 1e-8) -> bool:
        return bool(np.all(self.eigenvalues.real < -margin))

    def as_pairs(self) -> List[List[float]]:
        return [[float(v.real), float(v.imag)] for v in self.eigenvalues]


def _sign(a: float, b: float) -> float:
    return abs(a) if b >= 0.0 else -abs(a)


def _balance(A: np.ndarray) -> np.ndarray:
    """Diagonal similarity scaling by powers of two (Parlett-Reinsch)."""
    A = A.copy()
    n = A.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = float(np.sum(np.abs(A[:, i])) - abs(A[i, i]))
            r = float(np.sum(np.abs(A[i, :])) - abs(A[i, i]))
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                A[i, :] /= f
                A[:, i] *= f
    return A


def _hessenberg(A: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form."""
    H = A.copy()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = float(np.linalg.norm(x))
        if alpha == 0.0:
            continue
        if x[0] > 0.0:
            alpha = -alpha
        v = x
        v[0] -= alpha
        vnorm = float(np.linalg.norm(v))
        if vnorm == 0.0:
            continue
        v /= vnorm
        H[k + 1:, :] -= 2.0 * np.outer(v, v @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H


def _hqr(H: np.ndarray, max_sweeps: int, original: np.ndarray):
    """Francis double-shift QR on an upper Hessenberg matrix.

    Indices are 1-based inside this routine.
    """
    n = H.shape[0]
    a = [[0.0] * (n + 1) for _ in range(n + 1)]
    for i in range(n):
        for j in range(n):
            a[i + 1][j + 1] = float(H[i, j])
    wr = [0.0] * (n + 1)
    wi = [0.0] * (n + 1)

    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(a[i][j])

    nn = n
    t = 0.0
    x = y = z = w = p = q = r = 0.0
    while nn >= 1:
        its = 0
        while True:
            # look for a single small subdiagonal element
            l = nn
            while l >= 2:
                s = abs(a[l - 1][l - 1]) + abs(a[l][l])
                if s == 0.0:
                    s = anorm
                if abs(a[l][l - 1]) + s == s:
                    a[l][l - 1] = 0.0
                    break
                l -= 1
            x = a[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
            else:
                y = a[nn - 1][nn - 1]
                w = a[nn][nn - 1] * a[nn - 1][nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + _sign(z, p)
                        wr[nn - 1] = wr[nn] = x + z
                        if z:
                            wr[nn] = x - w / z
                        wi[nn - 1] = wi[nn] = 0.0
                    else:
                        wr[nn - 1] = wr[nn] = x + p
                        wi[nn - 1] = -z
                        wi[nn] = z
                    nn -= 2
                else:
                    if its >= max_sweeps:
                        raise EigenvalueConvergenceError(original, its)
                    if its and its % 10 == 0:
                        # exceptional shift
                        t += x
                        for i in range(1, nn + 1):
                            a[i][i] -= x
                        s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                        y = x = 0.75 * s
                        w = -0.4375 * s * s
                    its += 1
                    m = nn - 2
                    while m >= l:
                        z = a[m][m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                        q = a[m + 1][m + 1] - z - r - s
                        r = a[m + 2][m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                        if u + v == v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        a[i][i - 2] = 0.0
                        if i != m + 2:
                            a[i][i - 3] = 0.0
                    k = m
                    while k <= nn - 1:
                        if k != m:
                            p = a[k][k - 1]
                            q = a[k + 1][k - 1]
                            r = 0.0
                            if k != nn - 1:
                                r = a[k + 2][k - 1]
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = _sign(sqrt(p * p + q * q + r * r), p)
                        if s != 0.0:
                            if k == m:
                                if l != m:
                                    a[k][k - 1] = -a[k][k - 1]
                            else:
                                a[k][k - 1] = -s * x
                            p += s
                            x = p / s
                            y = q / s
                            z = r / s
                            q /= p
                            r /= p
                            for j in range(k, nn + 1):
                                p = a[k][j] + q * a[k + 1][j]
                                if k != nn - 1:
                                    p += r * a[k + 2][j]
                                    a[k + 2][j] -= p * z
                                a[k + 1][j] -= p * y
                                a[k][j] -= p * x
                            mmin = nn if nn < k + 3 else k + 3
                            for i in range(l, mmin + 1):
                                p = x * a[i][k] + y * a[i][k + 1]
                                if k != nn - 1:
                                    p += z * a[i][k + 2]
                                    a[i][k + 2] -= p * r
                                a[i][k + 1] -= p * q
                                a[i][k] -= p
                        k += 1
            if not l < nn - 1:
                break
    return np.array(wr[1:]) + 1j * np.array(wi[1:])


def eigenvalues(A, max_sweeps: int = 60) -> Spectrum:
    """
    All eigenvalues of a real square matrix.

    Args:
        A: n x n real matrix (n >= 1, finite entries).
        max_sweeps: QR iterations allowed per eigenvalue before giving up.

    Returns:
        Spectrum ordered by descending real part, conjugates paired.

    Raises:
        EigenvalueConvergenceError: the shifted QR did not converge.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    n = A.shape[0]
    if n == 1:
        return Spectrum.from_values([A[0, 0]])
    H = _hessenberg(_balance(A))
    return Spectrum.from_values(_hqr(H, max_sweeps, A))


def companion_matrix(coeffs: Sequence[float]) -> np.ndarray:
    """Companion matrix of a monic polynomial given highest degree first."""
    c = np.asarray(coeffs, dtype=float)
    if c.size < 2:
        raise ValueError("polynomial must have degree >= 1")
    c = c / c[0]
    n = c.size - 1
    C = np.zeros((n, n))
    C[0, :] = -c[1:]
    C[np.arange(1, n), np.arange(n - 1)] = 1.0
    return C


# =============================================================================
# LINEAR ALGEBRA
# =============================================================================

def _lu(A: np.ndarray, strict: bool):
    """In-place partial-pivot LU; returns (LU, perm, sign) or raises when strict."""
    LU = np.array(A, dtype=float)
    n = LU.shape[0]
    perm = np.arange(n)
    sign = 1.0
    scale = float(np.max(np.abs(LU))) if LU.size else 0.0
    threshold = n * EPS * scale
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        pivot = LU[p, k]
        if abs(pivot) <= threshold:
            if strict:
                raise SingularMatrixError(float(abs(pivot)), k)
            LU[k:, k] = 0.0
            return LU, perm, 0.0
        if p != k:
            LU[[k, p], :] = LU[[p, k], :]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        LU[k + 1:, k] /= pivot
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, perm, sign


def solve_linear(A, b) -> np.ndarray:
    """
    Solve A x = b by Gaussian elimination with partial pivoting.

    Args:
        A: n x n real matrix.
        b: Right-hand side of length n.

    Returns:
        np.ndarray: the solution x.

    Raises:
        SingularMatrixError: a pivot fell below n * eps * max|A|.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ValueError("right-hand side does not conform")
    LU, perm, _ = _lu(A, strict=True)
    n = A.shape[0]
    y = b[perm].astype(float).copy()
    for i in range(n):
        y[i] -= LU[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - LU[i, i + 1:] @ y[i + 1:]) / LU[i, i]
    return y


def determinant(A) -> float:
    A = np.asarray(A, dtype=float)
    LU, _, sign = _lu(A, strict=False)
    if sign == 0.0:
        return 0.0
    return float(sign * np.prod(np.diag(LU)))


# =============================================================================
# NEWTON
# =============================================================================

@dataclass(frozen=True, eq=False)
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    trace: List[float]


def newton(
    F: Callable,
    J: Callable,
    x0,
    tol: float = 1e-12,
    max_iter: int = 50,
    lower=None,
    upper=None,
    escape: float = 0.1,
    max_halvings: int = 20,
) -> NewtonResult:
    """
    Damped Newton iteration on F(x) = 0.

    The step is halved (up to `max_halvings` times) while ||F||_inf fails to
    decrease.

    Args:
        F: Residual function of x.
        J: Jacobian function of x.
        x0: Starting point.
        tol: Accept once ||F(x)||_inf <= tol.
        max_iter: Iteration cap.
        lower, upper: Optional box; an iterate further than `escape` times
            the box width outside it aborts the search.

    Returns:
        NewtonResult with the root, its residual and the residual trace.

    Raises:
        NewtonError: iteration cap, stalled damping, singular Jacobian or
            escape from the box.
    """
    x = np.array(x0, dtype=float)
    fx = np.asarray(F(x), dtype=float)
    r = norm_inf(fx)
    trace = [r]
    if lower is not None:
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        slack = escape * (hi - lo)
    for it in range(max_iter):
        if not np.isfinite(r):
            raise NewtonError("non-finite residual", trace)
        if r <= tol:
            return NewtonResult(x, r, it, trace)
        try:
            dx = solve_linear(J(x), -fx)
        except SingularMatrixError as exc:
            raise NewtonError(f"singular Jacobian ({exc})", trace) from exc
        step = 1.0
        for _ in range(max_halvings + 1):
            x_new = x + step * dx
            f_new = np.asarray(F(x_new), dtype=float)
            r_new = norm_inf(f_new)
            if r_new < r:
                break
            step *= 0.5
        else:
            # no decrease along dx: take the full step and let the cap decide
            x_new = x + dx
            f_new = np.asarray(F(x_new), dtype=float)
            r_new = norm_inf(f_new)
        if lower is not None and (np.any(x_new < lo - slack) or np.any(x_new > hi + slack)):
            trace.append(r_new)
            raise NewtonError("iterate escaped the box", trace)
        x, fx, r = x_new, f_new, r_new
        trace.append(r)
    if r <= tol:
        return NewtonResult(x, r, max_iter, trace)
    raise NewtonError("iteration cap reached", trace)


# =============================================================================
# INTEGRATOR
# =============================================================================

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5


def dp_step(F: Callable, t: float, x: np.ndarray, f: np.ndarray, h: float):
    """One Dormand-Prince step; returns (x_new, f_new, error_vector)."""
    k = [f]
    for i in range(1, 6):
        xi = x + h * sum(a * kj for a, kj in zip(_A[i], k) if a != 0.0)
        k.append(np.asarray(F(t + _C[i] * h, xi), dtype=float))
    x_new = x + h * sum(b * kj for b, kj in zip(_B[:6], k) if b != 0.0)
    f_new = np.asarray(F(t + h, x_new), dtype=float)
    k.append(f_new)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
    return x_new, f_new, err


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(v * v))) if v.size else 0.0


def _initial_step(F, t0, x0, f0, rtol, atol) -> float:
    scale = atol + rtol * np.abs(x0)
    d0 = _rms(x0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = np.asarray(F(t0 + h0, x0 + h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100.0 * h0, h1)


@dataclass(eq=False)
class Trajectory:
    """Accepted integrator steps with their rates (for Hermite dense output)."""

    times: np.ndarray
    states: np.ndarray
    rates: np.ndarray
    accepted: int = 0
    rejected: int = 0
    rhs: Optional[Callable] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def _locate(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), len(self.times) - 2)

    def state_at(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation between accepted steps."""
        if len(self.times) == 1:
            return self.states[0].copy()
        i = self._locate(t)
        t0, t1 = self.times[i], self.times[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        s2, s3 = s * s, s * s * s
        return ((2 * s3 - 3 * s2 + 1) * self.states[i]
                + (s3 - 2 * s2 + s) * h * self.rates[i]
                + (-2 * s3 + 3 * s2) * self.states[i + 1]
                + (s3 - s2) * h * self.rates[i + 1])

    def states_at(self, ts) -> np.ndarray:
        return np.array([self.state_at(t) for t in np.asarray(ts, dtype=float)])

    def exact_state_at(self, t: float) -> np.ndarray:
        """State at t from one embedded step off the preceding accepted point."""
        if self.rhs is None:
            return self.state_at(t)
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), len(self.times) - 1)
        h = t - self.times[i]
        if h == 0.0:
            return self.states[i].copy()
        x_new, _, _ = dp_step(self.rhs, self.times[i], self.states[i], self.rates[i], h)
        return x_new

    def after(self, t_from: float) -> "Trajectory":
        """The part of the trajectory with times >= t_from."""
        keep = self.times >= t_from
        return Trajectory(self.times[keep], self.states[keep], self.rates[keep],
                          self.accepted, self.rejected, self.rhs)

    @classmethod
    def concatenate(cls, parts: Sequence["Trajectory"]) -> "Trajectory":
        """Join consecutive trajectories (each starts where the previous ended)."""
        times, states, rates = [parts[0].times], [parts[0].states], [parts[0].rates]
        for part in parts[1:]:
            times.append(part.times[1:])
            states.append(part.states[1:])
            rates.append(part.rates[1:])
        return cls(np.concatenate(times), np.concatenate(states), np.concatenate(rates),
                   sum(p.accepted for p in parts), sum(p.rejected for p in parts), parts[0].rhs)


def integrate(
    F: Callable,
    x0,
    t_span,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: Optional[float] = None,
    first_step: Optional[float] = None,
    max_steps: int = 5_000_000,
) -> Trajectory:
    """
    Integrate dx/dt = F(t, x) over t_span with the Dormand-Prince 5(4) pair.

    Args:
        F: Right-hand side F(t, x).
        x0: Initial state.
        t_span: (t0, t1) with t1 > t0.
        rtol, atol: The local error estimate is kept below atol + rtol*|x|
            in the RMS norm.
        max_step: Optional cap on the step size.

    Returns:
        Trajectory holding every accepted step, with Hermite dense output.

    Raises:
        StepUnderflowError: the step shrank to rounding level or the step
            budget ran out.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"t_span must be increasing, got {t_span!r}")
    x = np.array(x0, dtype=float)
    f = np.asarray(F(t0, x), dtype=float)
    h_max = (t1 - t0) if max_step is None else min(float(max_step), t1 - t0)
    h = first_step if first_step is not None else _initial_step(F, t0, x, f, rtol, atol)
    h = min(h, h_max)

    times, states, rates = [t0], [x.copy()], [f.copy()]
    t = t0
    accepted = rejected = 0
    err_prev = 1e-4
    last_rejected = False
    while t < t1:
        if accepted + rejected >= max_steps:
            raise StepUnderflowError(t, h)
        h = min(h, h_max)
        last_step = t + h >= t1
        if last_step:
            h = t1 - t
        if h <= 10.0 * EPS * max(1.0, abs(t)):
            raise StepUnderflowError(t, h)
        x_new, f_new, err_vec = dp_step(F, t, x, f, h)
        scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
        err = _rms(err_vec / scale)
        if err <= 1.0 and np.all(np.isfinite(x_new)):
            t = t1 if last_step else t + h
            x, f = x_new, f_new
            times.append(t)
            states.append(x.copy())
            rates.append(f.copy())
            accepted += 1
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** (-_ALPHA) * err_prev ** _BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            if last_rejected:
                factor = min(factor, 1.0)
            err_prev = max(err, 1e-4)
            last_rejected = False
        else:
            rejected += 1
            if not np.isfinite(err):
                factor = _MIN_FACTOR
            else:
                factor = max(_MIN_FACTOR, _SAFETY * err ** (-1.0 / 5.0))
            last_rejected = True
        h *= factor
    return Trajectory(np.array(times), np.array(states), np.array(rates),
                      accepted, rejected, F)
