# field.py - Hill-type vector fields and their analytic Jacobians
#
#   dx_g/dt = H_g(x) - degrade_g * x_g
#
# where H_g aggregates one Hill term per incoming edge (sum by default,
# product for genes declared with combine=product):
#
#   activate:  beta * u^p / (1 + u^p)      u = x_source / K
#   repress:   beta / (1 + u^q)
#
# Negative arguments are clamped to 0 so integrator overshoot never produces
# complex powers.

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .errors import Diagnostic, NetworkValidationError, UnboundParameterError
from .netgraph import Network
from .netlang import Ref, Value

# named time functions usable as input signals
_SIGNALS: Dict[str, Callable[[float], float]] = {}


def register_signal(name: str, fn: Callable[[float], float]) -> None:
    """Make `signal=name` resolve to fn(t) for input nodes."""
    _SIGNALS[name] = fn


def unregister_signal(name: str) -> None:
    _SIGNALS.pop(name, None)


# =============================================================================
# HILL TERMS
# =============================================================================

def hill_terms(activate, beta, K, exp, v) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized Hill values and d/dv for arrays of edges."""
    activate = np.asarray(activate, dtype=bool)
    beta = np.asarray(beta, dtype=float)
    K = np.asarray(K, dtype=float)
    exp = np.asarray(exp, dtype=float)
    u = np.maximum(np.asarray(v, dtype=float), 0.0) / K
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        up = u ** exp
        denom = 1.0 + up
        frac = np.where(np.isinf(up), 1.0, up / denom)
        inv = np.where(np.isinf(up), 0.0, 1.0 / denom)
        # d(u^e)/dv, with the u = 0 corner taken from the limit
        dup = np.where(exp == 0.0, 0.0, exp * u ** (exp - 1.0) / K)
        dup = np.where((u == 0.0) & (exp == 1.0), 1.0 / K, dup)
        dup = np.where((u == 0.0) & (exp > 1.0), 0.0, dup)
        dfrac = np.where(np.isinf(up), 0.0, dup / (denom * denom))
    value = np.where(activate, beta * frac, beta * inv)
    deriv = np.where(activate, beta * dfrac, -beta * dfrac)
    return value, deriv


@dataclass(frozen=True)
class HillEdge:
    kind: str
    beta: float
    K: float
    exp: float

    def __post_init__(self):
        if self.kind not in ("activate", "repress"):
            raise ValueError(f"unknown edge kind {self.kind!r}")
        if self.beta <= 0.0 or self.K <= 0.0:
            raise ValueError("beta and K must be positive")
        if self.exp < 0.0:
            raise ValueError("exp must be nonnegative")

    def __call__(self, x: float) -> float:
        return hill_eval(self, x)[0]


def hill_eval(edge: HillEdge, x: float) -> Tuple[float, float]:
    """
    Evaluate one Hill term and its slope.

    Args:
        edge: The regulation (kind, beta, K, exp).
        x: Source concentration; negative values are treated as 0.

    Returns:
        tuple: (value, d value / dx). Activation gives beta u^p / (1 + u^p),
            repression beta / (1 + u^p), with u = x / K.
    """
    value, deriv = hill_terms(edge.kind == "activate", edge.beta, edge.K, edge.exp, x)
    return float(value), float(deriv)


# =============================================================================
# PARAMETER BINDING
# =============================================================================

@dataclass(frozen=True, eq=False)
class ParamBinding:
    values: Mapping[str, float] = field(default_factory=dict)

    def __getitem__(self, ident: str) -> float:
        try:
            return self.values[ident]
        except KeyError:
            raise UnboundParameterError(f"parameter {ident!r} is not bound") from None

    def __contains__(self, ident: str) -> bool:
        return ident in self.values

    def __eq__(self, other) -> bool:
        return isinstance(other, ParamBinding) and dict(self.values) == dict(other.values)

    def with_value(self, ident: str, value: float) -> "ParamBinding":
        values = dict(self.values)
        values[ident] = float(value)
        return ParamBinding(values)

    def as_dict(self) -> dict:
        return {k: self.values[k] for k in sorted(self.values)}


def bind(net: Network, overrides: Optional[Mapping[str, float]] = None) -> ParamBinding:
    """Param defaults of `net` with overrides applied; unknown ids are rejected."""
    values = {p.id: float(p.default) for p in net.params}
    for ident, value in (overrides or {}).items():
        if ident not in values:
            raise UnboundParameterError(f"unknown parameter {ident!r} in override")
        values[ident] = float(value)
    return ParamBinding(values)


def _resolve(value: Value, binding: ParamBinding) -> float:
    if isinstance(value, Ref):
        return float(binding[value.name])
    return float(value)


# =============================================================================
# COMPILED FIELD
# =============================================================================

class NetworkField:
    """F and J for one (Network, ParamBinding), evaluated with numpy arrays.

    Also serves as the `system` protocol used by the orbit and bifurcation
    code: __call__(x), jacobian(x), rhs(t, x), lower, upper, n.
    """

    def __init__(self, net: Network, binding: ParamBinding):
        self.net = net
        self.binding = binding
        self.n = net.n
        self.degrade = np.array(net.degrade, dtype=float)
        self.lower = np.zeros(self.n)
        self.upper = np.array(net.k, dtype=float)

        diags = []
        beta, K, exp = [], [], []
        for e in net.edges:
            b, k, p = (_resolve(v, binding) for v in (e.beta, e.K, e.exp))
            label = f"edge {e.source} -> {e.target}"
            if b <= 0.0:
                diags.append(Diagnostic("bad-binding", f"{label}: beta={b!r} must be positive"))
            if k <= 0.0:
                diags.append(Diagnostic("bad-binding", f"{label}: K={k!r} must be positive"))
            if p < 0.0:
                diags.append(Diagnostic("bad-binding", f"{label}: exp={p!r} must be nonnegative"))
            beta.append(b)
            K.append(k)
            exp.append(p)
        if diags:
            raise NetworkValidationError(diags)
        self.beta = np.array(beta)
        self.K = np.array(K)
        self.exp = np.array(exp)
        self.activate = np.array([e.kind == "activate" for e in net.edges], dtype=bool)
        self.target = np.array([net.gene_index(e.target) for e in net.edges], dtype=int)
        self.from_gene = np.array([not net.is_input(e.source) for e in net.edges], dtype=bool)
        self.source = np.array([
            net.gene_index(e.source) if not net.is_input(e.source) else net.inputs.index(e.source)
            for e in net.edges
        ], dtype=int)

        self._constant_signals = np.zeros(len(net.inputs))
        self._signal_fns: List[Tuple[int, Callable[[float], float]]] = []
        for i, sig in enumerate(net.signals):
            if isinstance(sig, Ref):
                if sig.name in binding:
                    self._constant_signals[i] = binding[sig.name]
                elif sig.name in _SIGNALS:
                    self._signal_fns.append((i, _SIGNALS[sig.name]))
                else:
                    raise UnboundParameterError(
                        f"input {net.inputs[i]!r} refers to unknown signal {sig.name!r}")
            else:
                self._constant_signals[i] = float(sig)

        product = np.array([c == "product" for c in net.combine], dtype=bool)
        self._sum_edges = ~product[self.target] if len(net.edges) else np.zeros(0, dtype=bool)
        self._product_genes = [
            (g, np.flatnonzero(self.target == g)) for g in np.flatnonzero(product)
        ]

    def signals(self, t: float = 0.0) -> np.ndarray:
        if not self._signal_fns:
            return self._constant_signals
        s = self._constant_signals.copy()
        for i, fn in self._signal_fns:
            s[i] = float(fn(t))
        return s

    def _source_values(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.empty(len(self.source))
        g = self.from_gene
        v[g] = x[self.source[g]]
        if not np.all(g):
            v[~g] = self.signals(t)[self.source[~g]]
        return v

    def terms(self, x, t: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        """Per-edge Hill values and derivatives at state x."""
        return hill_terms(self.activate, self.beta, self.K, self.exp, self._source_values(x, t))

    def production(self, x, t: float = 0.0) -> np.ndarray:
        """The aggregated production vector H(x)."""
        value, _ = self.terms(x, t)
        H = np.bincount(self.target[self._sum_edges], weights=value[self._sum_edges],
                        minlength=self.n).astype(float)
        for g, idx in self._product_genes:
            H[g] = float(np.prod(value[idx]))
        return H

    def __call__(self, x, t: float = 0.0) -> np.ndarray:
        return self.production(x, t) - self.degrade * np.asarray(x, dtype=float)

    def rhs(self, t: float, x) -> np.ndarray:
        return self(x, t)

    def jacobian(self, x, t: float = 0.0) -> np.ndarray:
        value, deriv = self.terms(x, t)
        J = np.diag(-self.degrade)
        mask = self._sum_edges & self.from_gene
        np.add.at(J, (self.target[mask], self.source[mask]), deriv[mask])
        for g, idx in self._product_genes:
            for e in idx:
                if not self.from_gene[e]:
                    continue
                others = np.prod(value[idx[idx != e]])
                J[g, self.source[e]] += deriv[e] * others
        return J

    def edge_derivative(self, edge_index: int, x) -> float:
        _, deriv = self.terms(x)
        return float(deriv[edge_index])


def eval_field(net: Network, binding: ParamBinding, x, t: float = 0.0) -> np.ndarray:
    """
    Rate vector dx/dt = H(x) - degrade * x.

    Args:
        net: A validated network.
        binding: Values for every param the network refers to.
        x: State, one value per gene in declaration order.
        t: Time, used only by registered input signals.

    Returns:
        np.ndarray of length n.
    """
    return NetworkField(net, binding)(x, t)


def jacobian(net: Network, binding: ParamBinding, x, t: float = 0.0) -> np.ndarray:
    """Analytic n x n Jacobian of eval_field at x."""
    return NetworkField(net, binding).jacobian(x, t)


# =============================================================================
# BOUNDARY CONDITIONS
# =============================================================================

@dataclass(frozen=True)
class FieldReport:
    genes: Tuple[str, ...]
    sup: Tuple[float, ...]
    inf: Tuple[float, ...]
    bounded_ok: Tuple[bool, ...]
    positive_ok: Tuple[bool, ...]
    feasible_ok: Tuple[Optional[bool], ...]

    @property
    def all_bounded(self) -> bool:
        return all(self.bounded_ok)

    @property
    def all_positive(self) -> bool:
        return all(self.positive_ok)

    def as_dict(self) -> dict:
        return {
            g: {
                "sup": self.sup[i],
                "inf": self.inf[i],
                "bounded_ok": self.bounded_ok[i],
                "positive_ok": self.positive_ok[i],
                "feasible_ok": self.feasible_ok[i],
            }
            for i, g in enumerate(self.genes)
        }


def check_conditions(net: Network, binding: ParamBinding) -> FieldReport:
    """
    Check the box conditions gene by gene.

    Extremes are exact over the box: each Hill term is monotone in its source,
    so its range is attained at the source's bounds.

    Args:
        net: A validated network.
        binding: Param values.

    Returns:
        FieldReport: boundedness (sup H_g <= degrade_g k_g), positivity
            (inf H_g > 0) and, for genes whose incoming exps are all 0,
            feasibility (H_g / degrade_g < k_g). Violations are reported,
            never raised.
    """
    fld = NetworkField(net, binding)
    m = len(net.edges)
    lo_v = np.zeros(m)
    hi_v = np.zeros(m)
    dynamic = np.zeros(m, dtype=bool)
    sig = fld.signals(0.0)
    fn_inputs = {i for i, _ in fld._signal_fns}
    for e in range(m):
        s = fld.source[e]
        if fld.from_gene[e]:
            hi_v[e] = fld.upper[s]
        elif s in fn_inputs:
            dynamic[e] = True
        else:
            lo_v[e] = hi_v[e] = sig[s]
    at_lo, _ = hill_terms(fld.activate, fld.beta, fld.K, fld.exp, lo_v)
    at_hi, _ = hill_terms(fld.activate, fld.beta, fld.K, fld.exp, hi_v)
    term_sup = np.maximum(at_lo, at_hi)
    term_inf = np.minimum(at_lo, at_hi)
    # time-varying inputs: assume any nonnegative signal
    half = np.where(fld.exp == 0.0, 0.5 * fld.beta, 0.0)
    term_sup = np.where(dynamic, np.where(fld.exp == 0.0, half, fld.beta), term_sup)
    term_inf = np.where(dynamic, half, term_inf)

    sup, inf, bounded, positive, feasible = [], [], [], [], []
    for g in range(net.n):
        idx = np.flatnonzero(fld.target == g)
        if net.combine[g] == "product":
            s, i = float(np.prod(term_sup[idx])), float(np.prod(term_inf[idx]))
        else:
            s, i = float(np.sum(term_sup[idx])), float(np.sum(term_inf[idx]))
        cap = fld.degrade[g] * fld.upper[g]
        sup.append(s)
        inf.append(i)
        bounded.append(s <= cap)
        positive.append(i > 0.0)
        if idx.size and np.all(fld.exp[idx] == 0.0):
            feasible.append(s / fld.degrade[g] < fld.upper[g])
        else:
            feasible.append(None)
    return FieldReport(net.genes, tuple(sup), tuple(inf), tuple(bounded),
                       tuple(positive), tuple(feasible))
