import numpy as np
import pytest

from genodyn.errors import NetworkValidationError, UnboundParameterError
from genodyn.field import (
    HillEdge,
    NetworkField,
    bind,
    check_conditions,
    hill_eval,
    hill_terms,
    register_signal,
    unregister_signal,
)
from genodyn.orbits import search_equilibria


def test_hill_values():
    assert hill_eval(HillEdge("activate", 2.0, 1.0, 3.0), 1.0)[0] == pytest.approx(1.0)
    assert hill_eval(HillEdge("repress", 2.0, 1.0, 3.0), 0.0)[0] == 2.0
    assert hill_eval(HillEdge("activate", 2.0, 1.0, 3.0), 0.0)[0] == 0.0
    value, deriv = hill_eval(HillEdge("repress", 3.0, 2.0, 2.0), 2.0)
    assert value == pytest.approx(1.5)
    assert deriv == pytest.approx(-3.0 * 2.0 * (1 / 2.0) / 4.0)


def test_zero_exponent_is_flat_half_strength():
    value, deriv = hill_terms([True, False], [4.0, 4.0], [1.0, 1.0], [0.0, 0.0], [0.0, 7.0])
    assert np.all(value == 2.0)
    assert np.all(deriv == 0.0)


def test_derivative_at_zero_source():
    _, deriv = hill_terms([True, True, True], [2.0, 2.0, 2.0], [0.5, 0.5, 0.5],
                          [1.0, 2.0, 0.5], [0.0, 0.0, 0.0])
    assert deriv[0] == pytest.approx(4.0)
    assert deriv[1] == 0.0
    assert np.isinf(deriv[2])


def test_huge_source_saturates():
    value, deriv = hill_terms([True, False], [2.0, 2.0], [1.0, 1.0], [400.0, 400.0], [1e10, 1e10])
    assert value.tolist() == [2.0, 0.0]
    assert deriv.tolist() == [0.0, 0.0]


@pytest.mark.parametrize("kind, beta, K, exp", [("switch", 1, 1, 1), ("activate", 0, 1, 1),
                                                 ("repress", 1, -1, 1), ("repress", 1, 1, -1)])
def test_hill_edge_validation(kind, beta, K, exp):
    with pytest.raises(ValueError):
        HillEdge(kind, beta, K, exp)


def test_bind_overrides_and_rejects_unknown(toggle):
    binding = bind(toggle, {"m": 3})
    assert binding["m"] == 3.0
    assert binding.with_value("m", 2)["m"] == 2.0
    assert binding["m"] == 3.0
    with pytest.raises(UnboundParameterError):
        bind(toggle, {"n": 1})
    with pytest.raises(UnboundParameterError):
        binding["n"]


def test_negative_exponent_binding_rejected(toggle):
    with pytest.raises(NetworkValidationError) as info:
        NetworkField(toggle, bind(toggle, {"m": -1}))
    assert info.value.diagnostics[0].code == "bad-binding"


def test_toggle_field_values(toggle):
    fld = NetworkField(toggle, bind(toggle, {"m": 2}))
    assert np.allclose(fld([1.0, 1.0]), 0.0)
    assert np.allclose(fld.production([0.0, 10.0]), [2.0 / 101.0, 2.0])
    J = fld.jacobian([1.0, 1.0])
    assert np.allclose(J, [[-1.0, -1.0], [-1.0, -1.0]])


def test_jacobian_matches_finite_differences(any_shipped):
    net = any_shipped
    fld = NetworkField(net, bind(net))
    rng = np.random.default_rng(7)
    upper = np.array(net.k)
    for _ in range(100):
        x = upper * rng.uniform(0.05, 0.95, net.n)
        J = fld.jacobian(x)
        fd = np.empty_like(J)
        for j in range(net.n):
            h = 1e-6 * max(1.0, abs(x[j]))
            e = np.zeros(net.n)
            e[j] = h
            fd[:, j] = (fld(x + e) - fld(x - e)) / (2.0 * h)
        assert np.all(np.abs(J - fd) <= 1e-6 * np.maximum(1.0, np.abs(J))), net.name


def test_zero_exponent_equilibrium_is_half_beta_over_degrade(build):
    net = build("network flat\n"
                "gene x max=4 degrade=2\ngene y max=4 degrade=0.5\n"
                "edge y -> x activate(beta=3, K=1, exp=0)\n"
                "edge x -> y repress(beta=1.5, K=1, exp=0)\n")
    fld = NetworkField(net, bind(net))
    eqs = search_equilibria(fld, 4).equilibria
    assert len(eqs) == 1
    assert abs(eqs[0].x[0] - 3.0 / (2 * 2.0)) <= 1e-12
    assert abs(eqs[0].x[1] - 1.5 / (2 * 0.5)) <= 1e-12


def test_product_combine(build):
    net = build("network prod\n"
                "gene g max=4 degrade=1 combine=product\ngene h max=4 degrade=1\n"
                "edge h -> g activate(beta=2, K=1, exp=1)\n"
                "edge g -> g repress(beta=3, K=1, exp=1)\n"
                "edge g -> h activate(beta=2, K=1, exp=1)\n")
    fld = NetworkField(net, bind(net))
    x = np.array([1.0, 3.0])
    assert fld.production(x)[0] == pytest.approx((2 * 3 / 4) * (3 / 2))
    h = 1e-6
    fd = (fld(x + [h, 0]) - fld(x - [h, 0])) / (2 * h)
    assert np.allclose(fld.jacobian(x)[:, 0], fd, atol=1e-7)


def test_registered_signal_drives_input(build):
    register_signal("ramp", lambda t: t)
    try:
        net = build("network driven\ngene g max=10 degrade=1\ninput u signal=ramp\n"
                    "edge u -> g activate(beta=2, K=1, exp=1)\n")
        fld = NetworkField(net, bind(net))
        assert fld.production([0.0], 0.0)[0] == 0.0
        assert fld.production([0.0], 1.0)[0] == pytest.approx(1.0)
    finally:
        unregister_signal("ramp")


def test_unknown_signal_name(build):
    net = build("network driven\ngene g max=10 degrade=1\ninput u signal=nothing\n"
                "edge u -> g activate(beta=2, K=1, exp=1)\n")
    with pytest.raises(UnboundParameterError):
        NetworkField(net, bind(net))


def test_conditions_on_toggle(toggle):
    report = check_conditions(toggle, bind(toggle, {"m": 2}))
    assert report.all_bounded and report.all_positive
    assert report.sup == (2.0, 2.0)
    assert report.inf[0] == pytest.approx(2.0 / 101.0)


def test_conditions_flag_small_box(build):
    net = build("network tight\ngene x max=1 degrade=1\ngene y max=1 degrade=1\n"
                "edge y -> x activate(beta=3, K=1, exp=1)\n"
                "edge x -> y repress(beta=3, K=1, exp=1)\n")
    report = check_conditions(net, bind(net))
    assert report.bounded_ok == (False, False)
    assert report.positive_ok == (False, True)
