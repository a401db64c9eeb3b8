# bifurc.py - Continuation, first-bifurcation detection and cyclic-network formulas
#
# A branch of equilibria x(mu) is followed by natural-parameter continuation
# from a stable start. The first sample pair where the leading real part
# turns nonnegative brackets the first bifurcation; a sign change of det J
# marks a real eigenvalue through zero (pitchfork), otherwise a complex pair
# crossed the imaginary axis (Hopf). The bracket is bisected to mu_tol.
#
# Cyclic networks (each gene regulated only by its predecessor on one cycle)
# have the characteristic equation
#
#   prod_i (lambda + alpha_i) = Q,      Q = product of the cycle's Hill slopes
#
# which gives closed forms for the spectrum and for the window of Q with no
# bifurcation.

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Tolerances
from .errors import (
    ContinuationError,
    DegenerateCrossingError,
    NewtonError,
    NotCyclicChainError,
    SingularMatrixError,
    UnboundParameterError,
)
from .field import NetworkField, ParamBinding
from .netgraph import Network, cycle_order
from .numerics import (
    Spectrum,
    companion_matrix,
    determinant,
    eigenvalues,
    integrate,
    newton,
    norm_inf,
    solve_linear,
)
from .orbits import Equilibrium, classify_equilibrium, detect_periodic, search_equilibria

BIFURCATION_KINDS = ("pitchfork", "hopf", "none")

# eigenvalues with |imag| below this count as real
EIG_TOL = 1e-6


# =============================================================================
# BRANCHES
# =============================================================================

@dataclass(frozen=True, eq=False)
class BranchPoint:
    mu: float
    x: np.ndarray
    spectrum: Spectrum
    det: float

    @property
    def leading_real(self) -> float:
        return self.spectrum.leading_real


@dataclass(eq=False)
class Branch:
    param: str
    start: float
    stop: float
    steps: int
    min_step: float
    samples: List[BranchPoint] = field(default_factory=list)
    stalled: bool = False
    rejected: int = 0
    network: Optional[Network] = field(default=None, repr=False)
    binding: Optional[ParamBinding] = field(default=None, repr=False)
    tolerances: Tolerances = field(default_factory=Tolerances, repr=False)

    @property
    def mus(self) -> np.ndarray:
        return np.array([p.mu for p in self.samples])

    @property
    def leading_reals(self) -> np.ndarray:
        return np.array([p.leading_real for p in self.samples])

    @property
    def dets(self) -> np.ndarray:
        return np.array([p.det for p in self.samples])


def param_range(net: Network, param: str) -> Tuple[Optional[float], Optional[float]]:
    decl = net.param(param)
    if decl is None:
        raise UnboundParameterError(f"network {net.name!r} has no parameter {param!r}")
    return decl.min, decl.max


def _equilibrium_at(net: Network, binding: ParamBinding, x_guess, tol: Tolerances):
    fld = NetworkField(net, binding)
    res = newton(fld, fld.jacobian, x_guess, tol=tol.newton_tol, lower=fld.lower, upper=fld.upper)
    J = fld.jacobian(res.x)
    return res.x, eigenvalues(J), determinant(J)


def _stable_start(net: Network, binding: ParamBinding, x_start, tol: Tolerances,
                  grid_per_axis: int) -> np.ndarray:
    fld = NetworkField(net, binding)
    if x_start is not None:
        res = newton(fld, fld.jacobian, x_start, tol=tol.newton_tol, lower=fld.lower, upper=fld.upper)
        eq = classify_equilibrium(fld, res.x, tol.margin)
        if eq.stability != "stable":
            raise ContinuationError(f"start equilibrium {list(res.x)} is {eq.stability}, not stable")
        return eq.x
    found = search_equilibria(fld, grid_per_axis, tolerances=tol).equilibria
    stable = [e for e in found if e.stability == "stable"]
    if not stable:
        raise ContinuationError("no stable equilibrium at the start of the branch "
                                f"({len(found)} equilibria found)")
    if len(stable) > 1:
        warnings.warn(f"{len(stable)} stable equilibria at the branch start; following the first")
    return stable[0].x


def continue_branch(
    net: Network,
    binding: ParamBinding,
    param: str,
    start: Optional[float] = None,
    stop: Optional[float] = None,
    steps: int = 100,
    tolerances: Optional[Tolerances] = None,
    x_start=None,
    grid_per_axis: int = 6,
    max_jump: float = 0.1,
    max_eig_jump: float = 0.25,
) -> Branch:
    """Follow the stable equilibrium present at mu=start towards mu=stop.

    Each step is corrected by Newton from a secant prediction. A step is
    halved when Newton fails, the state moves more than max_jump * max(k),
    or the leading real part jumps by more than max_eig_jump (relative to
    max(1, |previous|)). A step below (stop - start) / 2^16 stalls the branch,
    which is then returned with `stalled` set.

    Args:
        net: The network.
        binding: Parameter values; `param` is overridden along the branch.
        param: Name of the continuation parameter.
        start: First value, defaulting to the declared min.
        stop: Last value, defaulting to the declared max.
        steps: Nominal number of steps between start and stop.
        tolerances: Newton and stability tolerances.
        x_start: Starting guess; a grid search is used when None.
        grid_per_axis: Grid used for that search.
        max_jump: Largest state move per step, as a fraction of max(k).
        max_eig_jump: Largest relative change of the leading real part.

    Returns:
        Branch with one BranchPoint per accepted step.

    Raises:
        ContinuationError: If there is no stable equilibrium at start.
        UnboundParameterError: If start or stop is missing and undeclared.
    """
    tol = tolerances or Tolerances()
    lo, hi = param_range(net, param)
    start = lo if start is None else float(start)
    stop = hi if stop is None else float(stop)
    if start is None or stop is None:
        raise UnboundParameterError(f"parameter {param!r} declares no range; give start and stop")
    if start == stop:
        raise ValueError("start and stop must differ")
    if steps < 1:
        raise ValueError("steps must be positive")

    span = stop - start
    h_nominal = span / steps
    min_step = abs(span) / 2 ** 16
    branch = Branch(param, start, stop, steps, min_step, network=net, binding=binding, tolerances=tol)
    scale = float(np.max(net.k))

    x = _stable_start(net, binding.with_value(param, start), x_start, tol, grid_per_axis)
    x, spectrum, det = _equilibrium_at(net, binding.with_value(param, start), x, tol)
    branch.samples.append(BranchPoint(start, x, spectrum, det))

    mu = start
    h = h_nominal
    while (stop - mu) * np.sign(span) > 1e-12 * abs(span):
        h = math.copysign(min(abs(h), abs(stop - mu)), span)
        trial = stop if abs(stop - (mu + h)) <= 1e-12 * abs(span) else mu + h
        prev = branch.samples[-1]
        guess = prev.x
        if len(branch.samples) >= 2:
            before = branch.samples[-2]
            guess = prev.x + (prev.x - before.x) * ((trial - prev.mu) / (prev.mu - before.mu))
        ok = True
        try:
            x_new, spec_new, det_new = _equilibrium_at(net, binding.with_value(param, trial), guess, tol)
        except NewtonError:
            ok = False
        if ok:
            jump_x = norm_inf(x_new - prev.x)
            jump_eig = abs(spec_new.leading_real - prev.leading_real)
            ok = (jump_x <= max_jump * scale
                  and jump_eig <= max_eig_jump * max(1.0, abs(prev.leading_real)))
        if not ok:
            branch.rejected += 1
            h = 0.5 * h
            if abs(h) < min_step:
                branch.stalled = True
                warnings.warn(f"continuation stalled at {param}={mu!r} (step below {min_step:.3e})")
                break
            continue
        branch.samples.append(BranchPoint(trial, x_new, spec_new, det_new))
        mu = trial
        if abs(h) < abs(h_nominal):
            h = math.copysign(min(2.0 * abs(h), abs(h_nominal)), span)
    return branch


# =============================================================================
# FIRST BIFURCATION
# =============================================================================

@dataclass(frozen=True, eq=False)
class PostCheck:
    kind: str
    passed: bool
    message: str
    details: Dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "message": self.message,
                "details": self.details}


@dataclass(frozen=True, eq=False)
class BifurcationReport:
    kind: str
    param: str
    span: float
    mu0: Optional[float] = None
    x0: Optional[np.ndarray] = None
    spectrum: Optional[Spectrum] = None
    det: Optional[float] = None
    crossing: Optional[Dict] = None
    q_at_mu0: Optional[float] = None
    predicted_kind: Optional[str] = None
    bracket: Optional[Tuple[float, float]] = None
    stalled: bool = False
    supercritical: Optional[bool] = None
    flagged: bool = False
    post_check: Optional[PostCheck] = None

    def with_post_check(self, check: PostCheck) -> "BifurcationReport":
        # a failed check flags the report; only a passed one sets supercritical
        return replace(self, post_check=check, supercritical=True if check.passed else None,
                       flagged=self.flagged or not check.passed)

    def as_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "param": self.param,
            "mu0": self.mu0,
            "x0": None if self.x0 is None else [float(v) for v in self.x0],
            "eigenvalues": None if self.spectrum is None else self.spectrum.as_pairs(),
            "det_j": self.det,
            "crossing": self.crossing,
            "q_at_mu0": self.q_at_mu0,
            "predicted_kind": self.predicted_kind,
            "bracket": None if self.bracket is None else list(self.bracket),
            "stalled": self.stalled,
            "supercritical": self.supercritical,
            "flagged": self.flagged,
            "post_check": None if self.post_check is None else self.post_check.as_dict(),
        }
        return out


def _pair_real(spectrum: Spectrum) -> Optional[float]:
    """Largest real part among the non-real eigenvalues, if any."""
    vals = spectrum.eigenvalues
    cplx = vals[np.abs(vals.imag) > EIG_TOL]
    return float(np.max(cplx.real)) if cplx.size else None


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _bisect(evaluate: Callable, a: BranchPoint, b: BranchPoint, crossed: Callable, mu_tol: float):
    """Shrink [a, b] until |b.mu - a.mu| <= mu_tol, keeping crossed(a) False and crossed(b) True."""
    while abs(b.mu - a.mu) > mu_tol:
        mid = 0.5 * (a.mu + b.mu)
        if mid == a.mu or mid == b.mu:
            break
        p = evaluate(mid, 0.5 * (a.x + b.x))
        if crossed(p):
            b = p
        else:
            a = p
    return a, b


def first_bifurcation(branch: Branch) -> BifurcationReport:
    """
    Locate and classify where the branch first loses stability.

    Args:
        branch: Output of continue_branch.

    Returns:
        BifurcationReport; kind "none" when the branch stays stable.

    Raises:
        ContinuationError: If the branch does not begin stable.
    """
    net, binding, tol = branch.network, branch.binding, branch.tolerances
    span = branch.stop - branch.start
    pts = branch.samples
    if not pts or not pts[0].spectrum.is_stable(tol.margin):
        raise ContinuationError("branch does not begin at a stable equilibrium")

    bracket = None
    for a, b in zip(pts, pts[1:]):
        if a.leading_real < 0.0 <= b.leading_real:
            bracket = (a, b)
            break
    if bracket is None:
        return BifurcationReport("none", branch.param, span, stalled=branch.stalled)
    a, b = bracket

    def evaluate(mu: float, guess) -> BranchPoint:
        x, spectrum, det = _equilibrium_at(net, binding.with_value(branch.param, mu), guess, tol)
        return BranchPoint(mu, x, spectrum, det)

    det_sign_a = _sign(a.det)
    real_cross = _sign(b.det) != det_sign_a
    pa, pb = _pair_real(a.spectrum), _pair_real(b.spectrum)
    pair_cross = pb is not None and pb >= 0.0 and (pa is None or pa < 0.0)
    if not real_cross and not pair_cross:
        raise DegenerateCrossingError(
            f"stability lost between {branch.param}={a.mu!r} and {b.mu!r} without a det J "
            "sign change or a complex pair crossing (non-generic)")

    def pair_value(p: BranchPoint) -> float:
        v = _pair_real(p.spectrum)
        return p.leading_real if v is None else v

    candidates = {}
    if real_cross:
        candidates["pitchfork"] = _bisect(evaluate, a, b,
                                          lambda p: _sign(p.det) != det_sign_a, tol.mu_tol)
    if pair_cross:
        candidates["hopf"] = _bisect(evaluate, a, b, lambda p: pair_value(p) >= 0.0, tol.mu_tol)
    mus = {k: 0.5 * (lo.mu + hi.mu) for k, (lo, hi) in candidates.items()}
    if len(mus) == 2:
        if abs(mus["pitchfork"] - mus["hopf"]) <= tol.degenerate:
            raise DegenerateCrossingError(
                f"real and complex-pair crossings coincide near {branch.param}={mus['hopf']!r}")
        kind = min(mus, key=lambda k: (mus[k] - branch.start) / span)
    else:
        (kind,) = mus
    lo, hi = candidates[kind]
    mu0 = mus[kind]
    p0 = evaluate(mu0, 0.5 * (lo.x + hi.x))

    vals = p0.spectrum.eigenvalues
    if kind == "pitchfork":
        real = vals[np.abs(vals.imag) <= EIG_TOL]
        lam = real[np.argmin(np.abs(real.real))] if real.size else vals[np.argmin(np.abs(vals))]
        crossing = {"eigenvalue": float(lam.real), "det_j": p0.det}
    else:
        upper = vals[vals.imag > EIG_TOL]
        lam = upper[np.argmax(upper.real)] if upper.size else vals[0]
        crossing = {"real": float(lam.real), "gamma": float(abs(lam.imag))}

    b0 = binding.with_value(branch.param, mu0)
    try:
        q = loop_gain(net, b0, p0.x)
    except NotCyclicChainError:
        q = None
    return BifurcationReport(
        kind=kind,
        param=branch.param,
        span=span,
        mu0=mu0,
        x0=p0.x,
        spectrum=p0.spectrum,
        det=p0.det,
        crossing=crossing,
        q_at_mu0=q,
        predicted_kind=None if q is None else predict_kind(q),
        bracket=(lo.mu, hi.mu),
        stalled=branch.stalled,
    )


# =============================================================================
# POST-BIFURCATION CHECK
# =============================================================================

def _null_vector(J: np.ndarray, iterations: int = 8) -> np.ndarray:
    """Approximate kernel direction of a nearly singular J by shifted inverse iteration."""
    n = J.shape[0]
    v = np.array([(-1.0) ** i * (i + 1) for i in range(n)])
    shift = 1e-6 * max(1.0, norm_inf(J))
    for _ in range(iterations):
        try:
            v = solve_linear(J + shift * np.eye(n), v)
        except SingularMatrixError:
            shift *= 10.0
            continue
        v /= norm_inf(v)
    return v


def _check_pitchfork(net, binding, report: BifurcationReport, tol: Tolerances,
                     grid_per_axis: int) -> PostCheck:
    delta = 0.01 * abs(report.span)
    mu1 = report.mu0 + math.copysign(delta, report.span)
    fld0 = NetworkField(net, binding.with_value(report.param, report.mu0))
    v = _null_vector(fld0.jacobian(report.x0))
    fld = NetworkField(net, binding.with_value(report.param, mu1))
    scale = float(np.max(fld.upper - fld.lower))
    seeds = [np.clip(report.x0 + s * r * scale * v, fld.lower, fld.upper)
             for r in (0.001, 0.003, 0.01, 0.03, 0.1) for s in (1.0, -1.0)]
    found = search_equilibria(fld, grid_per_axis, extra_starts=seeds, tolerances=tol).equilibria
    near = [e for e in found if norm_inf(e.x - report.x0) <= 0.25 * scale]
    stable = sum(e.stability == "stable" for e in near)
    saddle = sum(e.stability == "saddle" for e in near)
    passed = len(near) == 3 and stable == 2 and saddle == 1
    details = {
        "mu": mu1,
        "near": [e.as_dict() for e in near],
        "stable": stable,
        "saddle": saddle,
        "total_equilibria": len(found),
    }
    msg = ("two stable equilibria and a saddle branch off" if passed else
           f"expected 2 stable + 1 saddle near x0, found {stable} stable, {saddle} saddle "
           f"among {len(near)}")
    return PostCheck("pitchfork", passed, msg, details)


def _check_hopf(net, binding, report: BifurcationReport, tol: Tolerances,
                fractions: Sequence[float], periods: int) -> PostCheck:
    base = abs(report.mu0) if report.mu0 != 0.0 else abs(report.span)
    direction = math.copysign(1.0, report.span)
    x0 = np.asarray(report.x0, dtype=float)
    k_scale = float(np.max(net.k))
    kick = np.array([(-1.0) ** i for i in range(len(x0))]) * 0.01 * k_scale
    x_start = x0 + kick
    deltas, amps, rows = [], [], []
    for frac in sorted(fractions, reverse=True):
        delta = frac * base
        mu = report.mu0 + direction * delta
        b = binding.with_value(report.param, mu)
        fld = NetworkField(net, b)
        try:
            x_eq, spectrum, _ = _equilibrium_at(net, b, x0, tol)
        except NewtonError as exc:
            return PostCheck("hopf", False, f"equilibrium lost at {report.param}={mu!r}: {exc}",
                             {"rows": rows})
        sigma = spectrum.leading_real
        gamma = abs(spectrum.leading.imag)
        if sigma <= 0.0 or gamma <= EIG_TOL:
            return PostCheck("hopf", False,
                             f"equilibrium at {report.param}={mu!r} is not an unstable focus",
                             {"rows": rows})
        period_guess = 2.0 * math.pi / gamma
        settle = max(12.0 / (2.0 * sigma), 20.0 * period_guess)
        run = integrate(fld.rhs, x_start, (0.0, settle), rtol=tol.rtol, atol=tol.atol)
        x_settled = run.final_state
        tail = integrate(fld.rhs, x_settled, (settle, settle + periods * period_guess),
                         rtol=tol.rtol, atol=tol.atol)
        orbit = detect_periodic(tail, transient_fraction=0.0, closure_tol=1e-4)
        if orbit is None:
            return PostCheck("hopf", False, f"no periodic orbit at {report.param}={mu!r}",
                             {"rows": rows})
        amp = float(np.max(orbit.amplitude))
        deltas.append(delta)
        amps.append(amp)
        rows.append({"mu": mu, "delta": delta, "period": orbit.period, "amplitude": amp})
        x_start = x_settled
    exponent = float(np.polyfit(np.log(deltas), np.log(amps), 1)[0])
    passed = 0.4 <= exponent <= 0.6
    msg = (f"stable orbit with amplitude ~ delta^{exponent:.3f}" if passed else
           f"amplitude exponent {exponent:.3f} outside [0.4, 0.6]")
    return PostCheck("hopf", passed, msg, {"rows": rows, "exponent": exponent})


def post_bifurcation_check(
    net: Network,
    binding: ParamBinding,
    report: BifurcationReport,
    tolerances: Optional[Tolerances] = None,
    grid_per_axis: int = 6,
    fractions: Sequence[float] = (0.01, 0.02, 0.03, 0.04, 0.05),
    periods: int = 40,
) -> PostCheck:
    """Empirical look past mu0: the pitchfork's new equilibria or the Hopf orbit's growth law."""
    tol = tolerances or Tolerances()
    if report.kind == "pitchfork":
        return _check_pitchfork(net, binding, report, tol, grid_per_axis)
    if report.kind == "hopf":
        return _check_hopf(net, binding, report, tol, fractions, periods)
    raise ValueError("post_bifurcation_check needs a pitchfork or hopf report")


# =============================================================================
# CYCLIC NETWORKS
# =============================================================================

@dataclass(frozen=True)
class QWindow:
    a: float
    b: float
    c: float
    q_hopf: float
    q_pitch: float
    gamma: float

    def contains(self, q: float) -> bool:
        return self.q_hopf < q < self.q_pitch

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "q_hopf": self.q_hopf,
                "q_pitch": self.q_pitch, "gamma": self.gamma}


def q_window(a: float, b: float, c: float) -> QWindow:
    """
    Range of Q for which a 3-gene cycle with degradations a, b, c is stable.

    Args:
        a: Degradation rate of the first gene.
        b: Degradation rate of the second gene.
        c: Degradation rate of the third gene.

    Returns:
        QWindow with q_hopf < Q < q_pitch as the stable range.

    Raises:
        ValueError: If a rate is not positive.
    """
    a, b, c = float(a), float(b), float(c)
    if min(a, b, c) <= 0.0:
        raise ValueError("degradation rates must be positive")
    q_hopf = -2.0 * a * b * c - (a * a * b + a * a * c + a * b * b + a * c * c + b * b * c + b * c * c)
    return QWindow(a, b, c, q_hopf, a * b * c, math.sqrt(a * b + a * c + b * c))


def predict_kind(q: float) -> str:
    """Sign rule for cycles: positive loop gain loses stability through a real eigenvalue."""
    if q > 0.0:
        return "pitchfork"
    if q < 0.0:
        return "hopf"
    return "none"


def loop_gain(net: Network, binding: ParamBinding, eq) -> float:
    """Product of the Hill slopes around a cyclic chain at state eq."""
    cycle_order(net)
    x = eq.x if isinstance(eq, Equilibrium) else np.asarray(eq, dtype=float)
    _, deriv = NetworkField(net, binding).terms(x)
    return float(np.prod(deriv))


def cyclic_jacobian(degrades: Sequence[float], derivatives: Sequence[float]) -> np.ndarray:
    """J with -alpha_i on the diagonal and d_i at (i, i-1), wrapping around."""
    alpha = np.asarray(degrades, dtype=float)
    d = np.asarray(derivatives, dtype=float)
    n = alpha.size
    if d.size != n:
        raise ValueError("need one derivative per gene")
    J = np.diag(-alpha)
    for i in range(n):
        J[i, (i - 1) % n] += d[i]
    return J


def det_cyclic(degrades: Sequence[float], q: float) -> float:
    """det of the cyclic Jacobian: (-1)^n (prod alpha_i - Q)."""
    alpha = np.asarray(degrades, dtype=float)
    return float((-1) ** alpha.size * (np.prod(alpha) - q))


def _roots_of(q: float, n: int) -> np.ndarray:
    """All n-th roots of a real q, conjugates paired exactly."""
    if q == 0.0:
        return np.zeros(n, dtype=complex)
    radius = float(np.cbrt(abs(q))) if n == 3 else abs(q) ** (1.0 / n)
    offset = 0.0 if q > 0.0 else math.pi
    roots = []
    for k in range(n):
        theta = (offset + 2.0 * math.pi * k) / n
        # angles 0 and pi are the real roots
        if (q > 0.0 and k == 0) or (n % 2 == 0 and q > 0.0 and 2 * k == n) \
                or (q < 0.0 and n % 2 == 1 and 2 * k + 1 == n):
            roots.append(complex(radius * round(math.cos(theta)), 0.0))
            continue
        roots.append(complex(radius * math.cos(theta), radius * math.sin(theta)))
    # pair k with n-1-k (q<0) or n-k (q>0) so conjugates carry identical real parts
    out = np.array(roots)
    for k in range(n):
        j = (n - 1 - k) if q < 0.0 else (n - k) % n
        if j > k:
            out[j] = np.conj(out[k])
    return out


def cyclic_spectrum(degrades: Sequence[float], q: float, mean_degradation: bool = False) -> Spectrum:
    """Roots of prod_i (lambda + alpha_i) = Q.

    Equal rates use lambda = -alpha + Q^(1/n) (all n-th roots); n = 2 uses
    the quadratic formula; anything else goes through the companion matrix.
    With mean_degradation, the rates are replaced by their mean first.

    Args:
        degrades: Degradation rates around the cycle.
        q: Loop gain Q.
        mean_degradation: Use the mean rate for every gene.

    Returns:
        Spectrum of the n roots.

    Raises:
        ValueError: If no rate is given or a rate is not positive.
    """
    alpha = np.asarray(degrades, dtype=float)
    n = alpha.size
    if n < 1:
        raise ValueError("need at least one degradation rate")
    if np.any(alpha <= 0.0):
        raise ValueError("degradation rates must be positive")
    q = float(q)
    if mean_degradation:
        alpha = np.full(n, float(np.mean(alpha)))
    if np.all(alpha == alpha[0]):
        return Spectrum.from_values(-alpha[0] + _roots_of(q, n))
    if n == 2:
        a, b = alpha
        disc = (a - b) ** 2 + 4.0 * q
        mid = -0.5 * (a + b)
        if disc >= 0.0:
            r = 0.5 * math.sqrt(disc)
            return Spectrum.from_values([mid + r, mid - r])
        r = 0.5 * math.sqrt(-disc)
        return Spectrum.from_values([complex(mid, r), complex(mid, -r)])
    coeffs = np.array([1.0])
    for ai in alpha:
        coeffs = np.convolve(coeffs, [1.0, ai])
    coeffs[-1] -= q
    return eigenvalues(companion_matrix(coeffs))


# =============================================================================
# NORMAL FORMS
# =============================================================================

@dataclass(frozen=True)
class NormalForm:
    """Reference systems: pitchfork dx/dt = mu x - x^3, and the Hopf example
    dx/dt = y - (x^3 - mu x), dy/dt = -x."""

    kind: str
    mu: float
    half_width: float = 2.0

    def __post_init__(self):
        if self.kind not in ("pitchfork", "hopf"):
            raise ValueError(f"unknown normal form {self.kind!r}")

    @property
    def n(self) -> int:
        return 1 if self.kind == "pitchfork" else 2

    @property
    def lower(self) -> np.ndarray:
        return np.full(self.n, -self.half_width)

    @property
    def upper(self) -> np.ndarray:
        return np.full(self.n, self.half_width)

    def __call__(self, x, t: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "pitchfork":
            return np.array([self.mu * x[0] - x[0] ** 3])
        return np.array([x[1] - (x[0] ** 3 - self.mu * x[0]), -x[0]])

    def rhs(self, t: float, x) -> np.ndarray:
        return self(x, t)

    def jacobian(self, x, t: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "pitchfork":
            return np.array([[self.mu - 3.0 * x[0] ** 2]])
        return np.array([[self.mu - 3.0 * x[0] ** 2, 1.0], [-1.0, 0.0]])


def normal_form(kind: str, mu: float) -> NormalForm:
    return NormalForm(kind, float(mu))
