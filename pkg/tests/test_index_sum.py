import numpy as np
import pytest

from genodyn.field import bind, check_conditions
from genodyn.netgraph import validate
from genodyn.netlang import parse_network
from genodyn.orbits import index_sum


def random_network_text(rng, n: int) -> str:
    """A repression ring through every gene plus a few random activations."""
    genes = [f"g{i}" for i in range(n)]
    edges = []
    incoming = {g: 0.0 for g in genes}
    for i, g in enumerate(genes):
        beta = rng.uniform(1.0, 3.0)
        edges.append((genes[i - 1], g, "repress", beta, rng.uniform(0.5, 2.0), int(rng.integers(1, 3))))
        incoming[g] += beta
    for src in genes:
        for dst in genes:
            if src == dst or rng.random() > 0.2:
                continue
            if any(e[0] == src and e[1] == dst for e in edges):
                continue
            beta = rng.uniform(1.0, 3.0)
            edges.append((src, dst, "activate", beta, rng.uniform(0.5, 2.0), int(rng.integers(1, 3))))
            incoming[dst] += beta
    lines = [f"network random{n}"]
    for g in genes:
        degrade = rng.uniform(0.5, 2.0)
        lines.append(f"gene {g} max={1.2 * incoming[g] / degrade!r} degrade={degrade!r}")
    for src, dst, kind, beta, K, exp in edges:
        lines.append(f"edge {src} -> {dst} {kind}(beta={beta!r}, K={K!r}, exp={exp})")
    return "\n".join(lines) + "\n"


@pytest.mark.slow
def test_index_sum_is_minus_one_to_the_n():
    rng = np.random.default_rng(20240611)
    checked = 0
    for _ in range(100):
        if checked == 25:
            break
        n = int(rng.integers(2, 5))
        net = validate(parse_network(random_network_text(rng, n)))
        binding = bind(net)
        conditions = check_conditions(net, binding)
        assert conditions.all_bounded and conditions.all_positive
        report = index_sum(net, binding, 7 if n < 4 else 5)
        if report.excluded:
            continue
        assert report.index_sum == (-1) ** n, (net.name, [e.as_dict() for e in report.equilibria])
        checked += 1
    assert checked == 25
