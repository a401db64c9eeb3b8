import pytest

from genodyn.errors import NetworkValidationError, NotCyclicChainError
from genodyn.netgraph import (
    core_and_layers,
    core_is_closed,
    core_subnetwork,
    cycle_nodes,
    cycle_order,
    silence,
    strongly_connected_components,
)

FEEDING_RING = """\
network feeding
gene a max=5 degrade=1
gene x max=5 degrade=1
gene y max=5 degrade=1
input u signal=1
edge u -> a activate(beta=1, K=1, exp=1)
edge a -> x activate(beta=1, K=1, exp=1)
edge y -> x repress(beta=2, K=1, exp=2)
edge x -> y repress(beta=2, K=1, exp=2)
"""


def _codes(info):
    return {d.code for d in info.value.diagnostics}


def test_validate_builds_network(toggle):
    assert toggle.genes == ("x", "y")
    assert toggle.k == (10.0, 10.0)
    assert toggle.predecessors["x"] == ("y",)
    assert toggle.tf_set == frozenset({"x", "y"})


def test_orphan_gene_rejected(build):
    with pytest.raises(NetworkValidationError) as info:
        build("network t\ngene x max=1 degrade=1\ngene y max=1 degrade=1\n"
              "edge x -> y activate(beta=1, K=1, exp=1)\n")
    assert "orphan-node" in _codes(info)
    assert "node 'x' has no predecessor" in str(info.value)


def test_input_with_predecessor_rejected(build):
    with pytest.raises(NetworkValidationError) as info:
        build("network t\ngene x max=1 degrade=1\ninput u signal=1\n"
              "edge u -> x activate(beta=1, K=1, exp=1)\n"
              "edge x -> u activate(beta=1, K=1, exp=1)\n")
    assert "input-with-predecessor" in _codes(info)


def test_disconnected_graph_rejected(build):
    src = ("network t\ngene x max=1 degrade=1\ngene y max=1 degrade=1\n"
           "edge x -> x repress(beta=1, K=1, exp=1)\n"
           "edge y -> y repress(beta=1, K=1, exp=1)\n")
    with pytest.raises(NetworkValidationError) as info:
        build(src)
    assert "disconnected" in _codes(info)
    assert build(src, require_connected=False).n == 2


def test_no_genes_rejected(build):
    with pytest.raises(NetworkValidationError) as info:
        build("network t\ninput u signal=1\n")
    assert "no-genes" in _codes(info)


def test_strongly_connected_components():
    succ = {"a": ("b",), "b": ("c",), "c": ("a", "d"), "d": ("e",), "e": ("d",), "f": ("a",)}
    comps = sorted(sorted(c) for c in strongly_connected_components(sorted(succ), succ))
    assert comps == [["a", "b", "c"], ["d", "e"], ["f"]]


def test_self_loop_is_a_cycle(build):
    net = build("network t\ngene x max=1 degrade=1\ngene y max=1 degrade=1\n"
                "edge x -> x repress(beta=1, K=1, exp=1)\n"
                "edge x -> y activate(beta=1, K=1, exp=1)\n")
    assert cycle_nodes(net) == frozenset({"x"})


def test_layers_of_two_layer(shipped):
    net = shipped("two_layer")
    dec = core_and_layers(net)
    assert dec.core == frozenset({"x", "y"})
    assert dec.layer_of == {"x": 0, "y": 0, "z": 1, "w": 2}
    assert dec.max_layer == 2
    assert dec.layer(1) == ["z"]
    assert dec.as_dict(net)["core"] == ["x", "y"]


def test_feedforward_has_empty_core(shipped):
    net = shipped("feedforward")
    dec = core_and_layers(net)
    assert dec.core == frozenset()
    assert dec.layer_of == {"u": 0, "g1": 1, "g2": 2}


def test_core_readings_differ_on_genes_feeding_a_cycle(build):
    net = build(FEEDING_RING)
    up = core_and_layers(net, "upstream")
    down = core_and_layers(net, "downstream")
    assert up.core == frozenset({"a", "x", "y"})
    assert down.core == frozenset({"x", "y"})
    assert down.layer_of["a"] == 1
    assert core_is_closed(net, up)
    assert not core_is_closed(net, down)


def test_open_core_has_no_subnetwork(build):
    net = build(FEEDING_RING)
    with pytest.raises(NetworkValidationError) as info:
        core_subnetwork(net, core_and_layers(net, "downstream"))
    assert "open-core" in _codes(info)
    sub = core_subnetwork(net, core_and_layers(net, "upstream"))
    assert sub.genes == ("a", "x", "y")
    assert sub.inputs == ("u",)


def test_unknown_reading_rejected(toggle):
    with pytest.raises(ValueError):
        core_and_layers(toggle, "sideways")


def test_core_subnetwork_of_two_layer(shipped):
    sub = core_subnetwork(shipped("two_layer"))
    assert sub.genes == ("x", "y")
    assert len(sub.edges) == 2


def test_silence_revalidates(shipped, toggle):
    assert silence(shipped("two_layer"), "w").genes == ("x", "y", "z")
    with pytest.raises(NetworkValidationError) as info:
        silence(toggle, "x")
    assert "orphan-node" in _codes(info)
    with pytest.raises(NetworkValidationError) as info:
        silence(toggle, "q")
    assert "unknown-gene" in _codes(info)


def test_cycle_order(shipped, toggle, repressilator):
    assert cycle_order(toggle) == ("x", "y")
    assert cycle_order(repressilator) == ("x", "y", "z")
    assert cycle_order(shipped("c1")) == ("x", "y", "z")


@pytest.mark.parametrize("name", ["two_layer", "feedforward", "repressilator_w"])
def test_cycle_order_rejects_other_shapes(shipped, name):
    with pytest.raises(NotCyclicChainError):
        cycle_order(shipped(name))
