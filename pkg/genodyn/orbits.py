# orbits.py - Equilibria, periodic orbits, basins and induced solutions
#
# Everything here works on a `system`: an object with __call__(x) -> F(x),
# jacobian(x), rhs(t, x), box bounds `lower`/`upper` and dimension `n`.
# NetworkField is one; the normal forms in bifurc are the other.

import itertools
import warnings
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .config import Tolerances
from .errors import GenodynError, InducedStateError, NewtonError, StepUnderflowError
from .field import NetworkField, ParamBinding
from .netgraph import LayerDecomposition, Network, core_and_layers, core_is_closed
from .numerics import Spectrum, Trajectory, eigenvalues, integrate, newton, norm_inf
from .workers import map_parallel

STABILITY_CLASSES = ("stable", "saddle", "unstable", "marginal")


# =============================================================================
# EQUILIBRIA
# =============================================================================

@dataclass(frozen=True, eq=False)
class Equilibrium:
    x: np.ndarray
    spectrum: Spectrum
    stability: str
    det_sign: int
    residual: float

    def as_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "stability": self.stability,
            "det_sign": self.det_sign,
            "residual": self.residual,
            "eigenvalues": self.spectrum.as_pairs(),
        }


@dataclass(frozen=True, eq=False)
class EquilibriumSearch:
    equilibria: List[Equilibrium]
    starts: int
    failures: int


def classify_equilibrium(system, x, margin: float = 1e-8) -> Equilibrium:
    x = np.asarray(x, dtype=float)
    spectrum = eigenvalues(system.jacobian(x))
    re = spectrum.real_parts
    if np.any(np.abs(re) <= margin):
        stability = "marginal"
    elif np.all(re < -margin):
        stability = "stable"
    elif np.all(re > margin):
        stability = "unstable"
    else:
        stability = "saddle"
    if np.any(np.abs(spectrum.eigenvalues) <= margin):
        det_sign = 0
    else:
        det_sign = 1 if spectrum.product() > 0.0 else -1
    return Equilibrium(x, spectrum, stability, det_sign, norm_inf(system(x)))


def grid_points(lower, upper, grid_per_axis: int) -> np.ndarray:
    """Tensor grid over the box, endpoints included, in lexicographic order."""
    if grid_per_axis < 2:
        raise ValueError("grid_per_axis must be at least 2")
    axes = [np.linspace(lo, hi, grid_per_axis) for lo, hi in zip(lower, upper)]
    return np.array(list(itertools.product(*axes)), dtype=float)


def _dedup(points: List[np.ndarray], tol: float) -> List[np.ndarray]:
    if not points:
        return []
    arr = np.array(points)
    order = np.lexsort(arr.T[::-1])
    kept: List[np.ndarray] = []
    for i in order:
        if all(norm_inf(arr[i] - k) > tol for k in kept):
            kept.append(arr[i])
    return kept


def search_equilibria(
    system,
    grid_per_axis: int = 8,
    extra_starts: Sequence = (),
    seed: Optional[int] = None,
    jitter: float = 0.25,
    tolerances: Optional[Tolerances] = None,
    workers: Optional[int] = None,
) -> EquilibriumSearch:
    """Multistart Newton from a grid over the system's box.

    With a seed, each grid start is moved by a uniform offset of up to
    `jitter` grid spacings (clipped to the box). Roots outside the box, or
    whose residual fails an independent re-check, are dropped.
    """
    tol = tolerances or Tolerances()
    lower = np.asarray(system.lower, dtype=float)
    upper = np.asarray(system.upper, dtype=float)
    width = upper - lower
    starts = grid_points(lower, upper, grid_per_axis)
    if seed is not None and jitter > 0.0:
        rng = np.random.default_rng(seed)
        spacing = width / (grid_per_axis - 1)
        starts = np.clip(starts + rng.uniform(-jitter, jitter, starts.shape) * spacing, lower, upper)
    if len(extra_starts):
        starts = np.vstack([starts, np.atleast_2d(np.asarray(extra_starts, dtype=float))])

    def solve(x0):
        try:
            res = newton(system, system.jacobian, x0, tol=tol.newton_tol,
                         lower=lower, upper=upper)
        except (NewtonError, ValueError, FloatingPointError):
            return None
        return res.x

    roots = map_parallel(solve, list(starts), workers)
    slack = 1e-9 * width
    scale = float(np.max(width))
    accepted = []
    for x in roots:
        if x is None:
            continue
        if np.any(x < lower - slack) or np.any(x > upper + slack):
            continue
        if norm_inf(system(x)) > tol.residual_check:
            continue
        accepted.append(x)
    failures = len(starts) - len(accepted)
    kept = _dedup(accepted, tol.dedup * scale)
    equilibria = [classify_equilibrium(system, x, tol.margin) for x in kept]
    return EquilibriumSearch(equilibria, len(starts), failures)


def find_equilibria(net: Network, binding: ParamBinding, grid_per_axis: int = 8,
                    **kwargs) -> List[Equilibrium]:
    """
    All equilibria of a network found by multistart Newton over its box.

    Args:
        net: A validated network.
        binding: Param values.
        grid_per_axis: Grid starts per gene axis (grid_per_axis^n starts).
        **kwargs: Passed to search_equilibria (seed, jitter, tolerances, ...).

    Returns:
        list of Equilibrium, deduplicated, in lexicographic order of state,
            each classified as stable, unstable, saddle or marginal.
    """
    return search_equilibria(NetworkField(net, binding), grid_per_axis, **kwargs).equilibria


@dataclass(frozen=True, eq=False)
class IndexReport:
    equilibria: List[Equilibrium]
    index_sum: int
    expected: int
    consistent: bool
    excluded: int = 0

    def as_dict(self) -> dict:
        return {
            "index_sum": self.index_sum,
            "expected": self.expected,
            "consistent": self.consistent,
            "excluded_marginal": self.excluded,
        }


def index_report(equilibria: Sequence[Equilibrium], n: int) -> IndexReport:
    excluded = sum(1 for e in equilibria if e.det_sign == 0)
    if excluded:
        warnings.warn(f"{excluded} marginal equilibrium(s) excluded from the index sum")
    total = sum(e.det_sign for e in equilibria)
    expected = (-1) ** n
    return IndexReport(list(equilibria), total, expected, total == expected, excluded)


def index_sum(net: Network, binding: ParamBinding, grid_per_axis: int = 8, **kwargs) -> IndexReport:
    """Sum of sign(det J) over the equilibria in the box, against (-1)^n."""
    return index_report(find_equilibria(net, binding, grid_per_axis, **kwargs), net.n)


# =============================================================================
# SIMULATION AND PERIODIC ORBITS
# =============================================================================

def simulate(net: Network, binding: ParamBinding, x0=None, t_end: float = 50.0,
             rtol: float = 1e-8, atol: float = 1e-10, max_step: Optional[float] = None) -> Trajectory:
    fld = NetworkField(net, binding)
    if x0 is None:
        x0 = 0.5 * fld.upper
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n,):
        raise ValueError(f"initial state needs {net.n} components, got {x0.size}")
    return integrate(fld.rhs, x0, (0.0, t_end), rtol=rtol, atol=atol, max_step=max_step)


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    period: float
    cycle: Trajectory  # one period, times starting at 0
    amplitude: np.ndarray
    closure: float
    section_coordinate: int
    section_level: float

    @property
    def samples(self) -> np.ndarray:
        return self.cycle.states

    @property
    def times(self) -> np.ndarray:
        return self.cycle.times

    def state_at(self, t: float) -> np.ndarray:
        return self.cycle.state_at(float(np.mod(t, self.period)))

    def as_dict(self) -> dict:
        return {
            "period": self.period,
            "amplitude": [float(a) for a in self.amplitude],
            "closure": self.closure,
            "section_coordinate": self.section_coordinate,
            "section_level": self.section_level,
        }


def _bisect_crossing(traj: Trajectory, c: int, level: float, t_lo: float, t_hi: float,
                     iterations: int = 60) -> float:
    g_lo = traj.exact_state_at(t_lo)[c] - level
    for _ in range(iterations):
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid <= t_lo or t_mid >= t_hi:
            break
        g_mid = traj.exact_state_at(t_mid)[c] - level
        if (g_mid < 0.0) == (g_lo < 0.0):
            t_lo, g_lo = t_mid, g_mid
        else:
            t_hi = t_mid
    return 0.5 * (t_lo + t_hi)


def detect_periodic(
    traj: Trajectory,
    transient_fraction: float = 0.5,
    min_amplitude: float = 1e-6,
    closure_tol: float = 1e-6,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> Optional[PeriodicOrbit]:
    """Find a periodic orbit in the tail of a trajectory, or None.

    The section is the hyperplane x_c = mean(x_c) over the tail, with c the
    first coordinate (or the most active one when the first is flat). The
    period is the mean interval between upward crossings; the last two
    crossing states must agree to closure_tol times the amplitude scale.
    """
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError("transient_fraction must lie in [0, 1)")
    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    tail = traj.after(t0 + transient_fraction * (t1 - t0))
    if len(tail) < 4:
        return None
    states = tail.states
    amplitude = 0.5 * (states.max(axis=0) - states.min(axis=0))
    if float(np.max(amplitude)) < min_amplitude:
        return None
    c = 0 if amplitude[0] >= min_amplitude else int(np.argmax(amplitude))
    level = float(np.mean(states[:, c]))
    s = states[:, c]
    ups = np.flatnonzero((s[:-1] < level) & (s[1:] >= level))
    if len(ups) < 3:
        return None
    crossings = np.array([
        _bisect_crossing(tail, c, level, tail.times[i], tail.times[i + 1]) for i in ups
    ])
    period = float(np.mean(np.diff(crossings)))
    if not period > 0.0:
        return None
    x_prev = tail.exact_state_at(crossings[-2])
    x_last = tail.exact_state_at(crossings[-1])
    closure = norm_inf(x_last - x_prev)
    if closure > closure_tol * float(np.max(amplitude)):
        return None
    if tail.rhs is None:
        return None

    t_start = float(crossings[-1])
    rhs = tail.rhs
    one = integrate(lambda t, x: rhs(t + t_start, x), x_last, (0.0, period),
                    rtol=rtol, atol=atol, max_step=period / 128)
    cycle_amp = 0.5 * (one.states.max(axis=0) - one.states.min(axis=0))
    return PeriodicOrbit(period, one, cycle_amp, closure, c, level)


# =============================================================================
# INDUCED EQUILIBRIUM / OSCILLATION
# =============================================================================

def _check_closed(net: Network, decomposition: LayerDecomposition) -> None:
    if not core_is_closed(net, decomposition):
        raise InducedStateError("core genes have predecessors outside the core; "
                                "induced solutions need the upstream core reading")


def induced_equilibrium(
    core_eq: Mapping[str, float],
    net: Network,
    binding: ParamBinding,
    decomposition: Optional[LayerDecomposition] = None,
    tol: float = 1e-10,
) -> np.ndarray:
    """
    Extend a core equilibrium layer by layer: y_g = H_g(predecessors) / degrade_g.

    Args:
        core_eq: Value for every core gene, and only core genes.
        net: The network.
        binding: Parameter values.
        decomposition: Precomputed core and layers, or None to compute them.
        tol: Largest core residual accepted.

    Returns:
        The full state vector in gene order.

    Raises:
        InducedStateError: If the core is not closed, the keys differ from
            the core, or the core values do not zero the core field.
    """
    decomposition = decomposition or core_and_layers(net)
    _check_closed(net, decomposition)
    core = set(decomposition.core)
    given = set(core_eq)
    if given != core:
        missing = sorted(core - given)
        extra = sorted(given - core)
        raise InducedStateError(f"core values must cover exactly the core genes "
                                f"(missing {missing}, not in core {extra})")
    fld = NetworkField(net, binding)
    x = np.zeros(net.n)
    core_idx = [net.gene_index(g) for g in net.genes if g in core]
    for g, value in core_eq.items():
        x[net.gene_index(g)] = float(value)
    if core_idx:
        residual = norm_inf(fld(x)[core_idx])
        if residual > tol:
            raise InducedStateError(f"core values do not zero the core field "
                                    f"(residual {residual:.3e})")
    for k in range(1, decomposition.max_layer + 1):
        idx = [net.gene_index(g) for g in decomposition.layer(k) if g in net.genes]
        H = fld.production(x)
        x[idx] = H[idx] / fld.degrade[idx]
    return x


def _adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 50) -> np.ndarray:
    """Adaptive Simpson quadrature of a vector-valued integrand."""
    def simpson(fa, fm, fb, h):
        return (h / 6.0) * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth <= 0 or np.max(np.abs(delta)) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, max_depth)


def _orbit_forcing(core_orbit: PeriodicOrbit, gene: str, net: Network, binding: ParamBinding,
                   decomposition: Optional[LayerDecomposition]):
    """(H_g(t) on the orbit, degrade_g, period) for a first-layer gene."""
    decomposition = decomposition or core_and_layers(net)
    _check_closed(net, decomposition)
    if gene not in net.genes:
        raise InducedStateError(f"unknown gene {gene!r}")
    if decomposition.layer_of[gene] != 1:
        raise InducedStateError(f"gene {gene!r} is on layer {decomposition.layer_of[gene]}, "
                                f"not layer 1")
    period = float(core_orbit.period) if core_orbit.period is not None else float("nan")
    if not period > 0.0:
        raise InducedStateError("orbit period is missing or nonpositive")
    g = net.gene_index(gene)
    b = net.degrade[g]
    if not b > 0.0:
        raise InducedStateError(f"gene {gene!r} has nonpositive degradation")
    dim = core_orbit.cycle.dimension
    if dim == net.n:
        positions = list(range(net.n))
    else:
        core_genes = [x for x in net.genes if x in decomposition.core]
        if dim != len(core_genes):
            raise InducedStateError(f"orbit has {dim} coordinates; expected {net.n} "
                                    f"(full) or {len(core_genes)} (core)")
        positions = [net.gene_index(x) for x in core_genes]
    fld = NetworkField(net, binding)

    def forcing(t: float) -> float:
        x = np.zeros(net.n)
        x[positions] = core_orbit.state_at(t)
        return float(fld.production(x, t)[g])

    return forcing, b, period


def induced_oscillation_ic(
    core_orbit: PeriodicOrbit,
    gene: str,
    net: Network,
    binding: ParamBinding,
    decomposition: Optional[LayerDecomposition] = None,
    tol: float = 1e-9,
) -> float:
    """Initial value y(0) making the first-layer gene periodic along the core orbit.

        y(0) = int_0^T e^{bt} H(t) dt / (e^{bT} - 1)

    evaluated as a weighted mean of H with the normalized weight
    w(t) = b e^{b(t-T)} / (1 - e^{-bT}) (which integrates to 1), so a constant
    forcing c returns exactly c / b.

    Args:
        core_orbit: Periodic orbit of the core, full state or core coordinates.
        gene: A gene on layer 1.
        net: The network.
        binding: Parameter values.
        decomposition: Precomputed core and layers, or None to compute them.
        tol: Quadrature tolerance.

    Returns:
        y(0) for the periodic solution of the gene's equation.

    Raises:
        InducedStateError: If the gene is not on layer 1 or the orbit has no
            positive period.
    """
    forcing, b, period = _orbit_forcing(core_orbit, gene, net, binding, decomposition)
    norm = -np.expm1(-b * period)

    def integrand(t):
        w = b * np.exp(b * (t - period)) / norm
        return np.array([w * forcing(t), w])

    num, den = _adaptive_simpson(integrand, 0.0, period, tol)
    return float(num / den / b)


def induced_oscillation_residual(
    core_orbit: PeriodicOrbit,
    gene: str,
    net: Network,
    binding: ParamBinding,
    y0: float,
    decomposition: Optional[LayerDecomposition] = None,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> float:
    """|y(T) - y(0)| after integrating the gene's equation once around the orbit."""
    forcing, b, period = _orbit_forcing(core_orbit, gene, net, binding, decomposition)
    traj = integrate(lambda t, y: np.array([forcing(t) - b * y[0]]), [y0], (0.0, period),
                     rtol=rtol, atol=atol, max_step=period / 128)
    return abs(float(traj.final_state[0]) - y0)


# =============================================================================
# BASINS
# =============================================================================

@dataclass(frozen=True, eq=False)
class BasinMap:
    points: np.ndarray
    labels: List[Union[int, str]]
    equilibria: List[Equilibrium]

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for label in self.labels:
            out[str(label)] = out.get(str(label), 0) + 1
        return out


def basin_sample(
    net: Network,
    binding: ParamBinding,
    grid_per_axis: int = 8,
    equilibria: Optional[Sequence[Equilibrium]] = None,
    tolerances: Optional[Tolerances] = None,
    near: float = 1e-6,
    chunks: int = 20,
    workers: Optional[int] = None,
) -> BasinMap:
    """Label each grid start by the equilibrium it settles on, "orbit" or "undecided".

    Each start is integrated in chunks up to a cap of 200 / min(degrade); the
    run stops as soon as the state is within near * max(k) of a listed
    equilibrium. At the cap, the last half of the run is searched for a
    periodic orbit.

    Args:
        net: The network.
        binding: Parameter values.
        grid_per_axis: Starts per axis of the box grid.
        equilibria: Known equilibria; searched for when None.
        tolerances: Integration and orbit-closure tolerances.
        near: Capture radius as a fraction of max(k).
        chunks: Number of integration chunks up to the cap.
        workers: Thread count for map_parallel; None uses the configured default.

    Returns:
        A BasinMap of grid points, one label per point and the equilibria.
    """
    tol = tolerances or Tolerances()
    fld = NetworkField(net, binding)
    if equilibria is None:
        equilibria = search_equilibria(fld, grid_per_axis, tolerances=tol).equilibria
    eq_states = [e.x for e in equilibria]
    cap = 200.0 / min(net.degrade)
    chunk = cap / chunks
    radius = near * float(np.max(fld.upper))
    points = grid_points(fld.lower, fld.upper, grid_per_axis)

    def label(x0):
        parts = []
        x = np.asarray(x0, dtype=float)
        try:
            for i in range(chunks):
                part = integrate(fld.rhs, x, (i * chunk, (i + 1) * chunk), rtol=tol.rtol, atol=tol.atol)
                parts.append(part)
                x = part.final_state
                for j, xe in enumerate(eq_states):
                    if norm_inf(x - xe) <= radius:
                        return j
        except (StepUnderflowError, GenodynError):
            return "undecided"
        tail = Trajectory.concatenate(parts[chunks // 2:])
        orbit = detect_periodic(tail, transient_fraction=0.0, closure_tol=tol.orbit_closure)
        return "orbit" if orbit is not None else "undecided"

    labels = map_parallel(label, list(points), workers)
    return BasinMap(points, labels, list(equilibria))
