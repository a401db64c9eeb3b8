# netgraph.py - Validated network graphs, core/layer decomposition, silencing
#
# A Network is the checked form of a RawNetwork: inputs have no predecessors,
# every gene has at least one, and the underlying undirected graph is
# connected. The core is the set of genes on a directed cycle plus (in the
# default "upstream" reading) the genes with a directed path to a cycle;
# every other gene sits on a layer above the core.

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple

from .errors import Diagnostic, NetworkValidationError, NotCyclicChainError
from .netlang import EdgeDecl, ParamDecl, RawNetwork, Value

READINGS = ("upstream", "downstream")


@dataclass(frozen=True)
class Network:
    name: str
    genes: Tuple[str, ...]
    inputs: Tuple[str, ...]
    edges: Tuple[EdgeDecl, ...]
    k: Tuple[float, ...]
    degrade: Tuple[float, ...]
    combine: Tuple[str, ...]
    signals: Tuple[Value, ...]
    params: Tuple[ParamDecl, ...]
    tf_set: FrozenSet[str]
    raw: RawNetwork = field(compare=False, repr=False)
    predecessors: Mapping[str, Tuple[str, ...]] = field(compare=False, repr=False, default=None)

    @property
    def n(self) -> int:
        return len(self.genes)

    @property
    def nodes(self) -> Tuple[str, ...]:
        return self.genes + self.inputs

    def gene_index(self, gene: str) -> int:
        try:
            return self.genes.index(gene)
        except ValueError:
            raise KeyError(f"unknown gene {gene!r}") from None

    def is_input(self, node: str) -> bool:
        return node in self.inputs

    def param(self, ident: str) -> Optional[ParamDecl]:
        for p in self.params:
            if p.id == ident:
                return p
        return None

    def successors(self, node: str) -> Tuple[str, ...]:
        return tuple(e.target for e in self.edges if e.source == node)

    def incoming(self, gene: str) -> Tuple[EdgeDecl, ...]:
        return tuple(e for e in self.edges if e.target == gene)


@dataclass(frozen=True)
class LayerDecomposition:
    core: FrozenSet[str]
    layer_of: Mapping[str, int] = field(compare=False)
    max_layer: int
    reading: str = "upstream"

    def layer(self, k: int) -> List[str]:
        return sorted(node for node, lv in self.layer_of.items() if lv == k)

    def as_dict(self, net: Network) -> dict:
        return {
            "core": [g for g in net.genes if g in self.core],
            "layers": {node: self.layer_of[node] for node in net.nodes},
            "max_layer": self.max_layer,
            "reading": self.reading,
        }


# =============================================================================
# VALIDATION
# =============================================================================

def _components(nodes: Tuple[str, ...], edges) -> List[Set[str]]:
    """Connected components of the underlying undirected graph."""
    adj: Dict[str, Set[str]] = {v: set() for v in nodes}
    for e in edges:
        adj[e.source].add(e.target)
        adj[e.target].add(e.source)
    seen: Set[str] = set()
    comps = []
    for start in nodes:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def validate(raw: RawNetwork, require_connected: bool = True) -> Network:
    """
    Check the graph hypotheses and build a Network.

    Args:
        raw: Parsed network.
        require_connected: Reject graphs whose underlying undirected graph
            has more than one component.

    Returns:
        Network with predecessor lists and the transcription-factor set.

    Raises:
        NetworkValidationError: naming every violated rule (orphan gene,
            input with a predecessor, disconnected graph, ...).
    """
    diags = []
    genes = tuple(g.id for g in raw.genes)
    inputs = tuple(i.id for i in raw.inputs)
    if not genes:
        diags.append(Diagnostic("no-genes", "network declares no genes"))

    preds: Dict[str, List[str]] = {v: [] for v in genes + inputs}
    for e in raw.edges:
        if e.target not in preds or e.source not in preds:
            diags.append(Diagnostic("dangling-endpoint",
                                    f"edge {e.source} -> {e.target} names an undeclared node"))
            continue
        preds[e.target].append(e.source)
    if diags:
        raise NetworkValidationError(diags)

    for i in inputs:
        if preds[i]:
            diags.append(Diagnostic("input-with-predecessor",
                                    f"input {i!r} has predecessor(s) {', '.join(preds[i])}"))
    for g in genes:
        if not preds[g]:
            diags.append(Diagnostic("orphan-node", f"node {g!r} has no predecessor"))
    if require_connected:
        comps = _components(genes + inputs, raw.edges)
        if len(comps) > 1:
            listing = "; ".join("{" + ", ".join(sorted(c)) + "}" for c in comps)
            diags.append(Diagnostic("disconnected", f"graph is disconnected: {listing}"))
    if diags:
        raise NetworkValidationError(diags)

    gene_set = set(genes)
    return Network(
        name=raw.name,
        genes=genes,
        inputs=inputs,
        edges=tuple(raw.edges),
        k=tuple(float(g.k_max) for g in raw.genes),
        degrade=tuple(float(g.degrade) for g in raw.genes),
        combine=tuple(g.combine for g in raw.genes),
        signals=tuple(i.signal for i in raw.inputs),
        params=tuple(raw.params),
        tf_set=frozenset(e.source for e in raw.edges if e.source in gene_set and e.target in gene_set),
        raw=raw,
        predecessors={v: tuple(ps) for v, ps in preds.items()},
    )


# =============================================================================
# CORE AND LAYERS
# =============================================================================

def strongly_connected_components(nodes, successors: Mapping[str, Tuple[str, ...]]) -> Iterator[Set[str]]:
    """Iterative Tarjan: yields each strongly connected component once."""
    preorder: Dict[str, int] = {}
    lowlink: Dict[str, int] = {}
    found: Set[str] = set()
    scc_queue: List[str] = []
    counter = 0
    for source in nodes:
        if source in found:
            continue
        queue = [source]
        while queue:
            v = queue[-1]
            if v not in preorder:
                counter += 1
                preorder[v] = counter
            done = True
            for w in successors[v]:
                if w not in preorder:
                    queue.append(w)
                    done = False
                    break
            if not done:
                continue
            lowlink[v] = preorder[v]
            for w in successors[v]:
                if w not in found:
                    if preorder[w] > preorder[v]:
                        lowlink[v] = min(lowlink[v], lowlink[w])
                    else:
                        lowlink[v] = min(lowlink[v], preorder[w])
            queue.pop()
            if lowlink[v] == preorder[v]:
                scc = {v}
                while scc_queue and preorder[scc_queue[-1]] > preorder[v]:
                    scc.add(scc_queue.pop())
                found.update(scc)
                yield scc
            else:
                scc_queue.append(v)


def cycle_nodes(net: Network) -> FrozenSet[str]:
    """Nodes on a directed cycle: SCC of size > 1, or a self-loop."""
    succ = {v: net.successors(v) for v in net.nodes}
    on_cycle: Set[str] = set()
    for scc in strongly_connected_components(sorted(net.nodes), succ):
        if len(scc) > 1:
            on_cycle |= scc
        else:
            (v,) = scc
            if v in succ[v]:
                on_cycle.add(v)
    return frozenset(on_cycle)


def _reach(starts, step) -> Set[str]:
    seen = set(starts)
    stack = list(starts)
    while stack:
        v = stack.pop()
        for w in step(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def core_and_layers(net: Network, reading: str = "upstream") -> LayerDecomposition:
    """
    Split a network into its core and the layers stacked on it.

    Args:
        net: A validated network.
        reading: "upstream" puts the cycle nodes and every node with a
            directed path into a cycle in the core; "downstream" takes the
            cycle nodes and everything reachable from them.

    Returns:
        LayerDecomposition: core genes at layer 0, every other gene at one
            more than its highest predecessor. Inputs are never core but
            always sit at layer 0.
    """
    if reading not in READINGS:
        raise ValueError(f"unknown core reading {reading!r}")
    cyc = cycle_nodes(net)
    if reading == "upstream":
        reached = _reach(cyc, lambda v: net.predecessors[v])
    else:
        reached = _reach(cyc, net.successors)
    core = frozenset(v for v in reached if v in net.genes)

    layer_of: Dict[str, int] = {v: 0 for v in core}
    layer_of.update({i: 0 for i in net.inputs})
    pending = [g for g in net.genes if g not in layer_of]
    # non-core genes form a DAG above layer 0
    while pending:
        progressed = []
        for g in pending:
            ps = net.predecessors[g]
            if all(p in layer_of for p in ps):
                layer_of[g] = 1 + max(layer_of[p] for p in ps)
                progressed.append(g)
        if not progressed:
            raise AssertionError(f"layer assignment stuck on {pending!r}")
        pending = [g for g in pending if g not in layer_of]
    return LayerDecomposition(core, layer_of, max(layer_of.values(), default=0), reading)


def core_is_closed(net: Network, decomposition: LayerDecomposition) -> bool:
    """True when every core gene's predecessors lie in the core or the inputs."""
    allowed = set(decomposition.core) | set(net.inputs)
    return all(p in allowed for g in decomposition.core for p in net.predecessors[g])


def _raw_subset(net: Network, keep_genes: Set[str], keep_inputs: Set[str]) -> RawNetwork:
    raw = net.raw
    kept = keep_genes | keep_inputs
    return RawNetwork(
        name=raw.name,
        genes=tuple(g for g in raw.genes if g.id in keep_genes),
        inputs=tuple(i for i in raw.inputs if i.id in keep_inputs),
        edges=tuple(e for e in raw.edges if e.source in kept and e.target in kept),
        params=raw.params,
    )


def core_subnetwork(net: Network, decomposition: Optional[LayerDecomposition] = None) -> Network:
    """The closed core system: core genes plus the inputs that feed them."""
    decomposition = decomposition or core_and_layers(net)
    if not core_is_closed(net, decomposition):
        raise NetworkValidationError([Diagnostic(
            "open-core", "core genes have predecessors outside the core; "
                         "use the upstream reading")])
    feeding = {p for g in decomposition.core for p in net.predecessors[g] if net.is_input(p)}
    return validate(_raw_subset(net, set(decomposition.core), feeding), require_connected=False)


def silence(net: Network, gene: str, require_connected: bool = True) -> Network:
    """
    Remove a gene and its incident edges, then re-validate.

    Args:
        net: The network to reduce.
        gene: Id of the gene to silence.
        require_connected: Passed on to validate().

    Returns:
        Network without the gene.

    Raises:
        NetworkValidationError: unknown gene, or a reduced graph that breaks
            a hypothesis (for example a gene left without predecessors).
    """
    if gene not in net.genes:
        raise NetworkValidationError([Diagnostic("unknown-gene", f"unknown gene {gene!r}")])
    return validate(_raw_subset(net, set(net.genes) - {gene}, set(net.inputs)),
                    require_connected=require_connected)


def cycle_order(net: Network) -> Tuple[str, ...]:
    """Genes of a single directed cycle through every gene, each preceded by its predecessor.

    The order starts at the first declared gene. Raises NotCyclicChainError
    for any other shape (inputs, extra edges, several cycles).
    """
    if net.inputs and any(e.source in net.inputs for e in net.edges):
        raise NotCyclicChainError(f"network {net.name!r} has input edges")
    for g in net.genes:
        ps = net.predecessors[g]
        if len(ps) != 1:
            raise NotCyclicChainError(
                f"gene {g!r} has {len(ps)} predecessors; a cyclic chain needs exactly one")
    succ = {g: net.successors(g) for g in net.genes}
    order = [net.genes[0]]
    while True:
        nxt = succ[order[-1]]
        if len(nxt) != 1:
            raise NotCyclicChainError(f"gene {order[-1]!r} has {len(nxt)} successors")
        if nxt[0] == order[0]:
            break
        if nxt[0] in order:
            raise NotCyclicChainError("cycle does not pass through the first gene")
        order.append(nxt[0])
    if len(order) != net.n:
        raise NotCyclicChainError(
            f"cycle through {order[0]!r} covers {len(order)} of {net.n} genes")
    return tuple(order)
