from fractions import Fraction

import numpy as np
import pytest

from misp.acceptance import matroid_axiom_violations, six_element_partition
from misp.errors import ResourceLimitError
from misp.harness import (
    ALGORITHMS,
    FAMILIES,
    ORDERS,
    ArrivalOrder,
    SecretaryInstance,
    build_algorithm,
    generate_instance,
    monte_carlo,
)
from misp.matroids import PartitionMatroid, UniformMatroid
from misp.submodular import CoverageFunction


def test_same_seed_same_report():
    inst = generate_instance("bipartite-matching-intersection", 8, 3)
    choice = build_algorithm("combine-opt", inst)
    a = monte_carlo(inst, choice.factory, "uniform", 300, 5, bound=choice.bound)
    b = monte_carlo(inst, choice.factory, "uniform", 300, 5, bound=choice.bound)
    assert a.to_json() == b.to_json()
    assert a.to_csv() == b.to_csv()
    c = monte_carlo(inst, choice.factory, "uniform", 300, 6)
    assert c.to_csv() != a.to_csv()


def test_worker_count_does_not_change_results():
    inst = generate_instance("partition×transversal", 8, 2)
    choice = build_algorithm("combine-rs", inst)
    one = monte_carlo(inst, choice.factory, "uniform", 120, 9, workers=1)
    two = monte_carlo(inst, choice.factory, "uniform", 120, 9, workers=2)
    assert one.to_json() == two.to_json()


def test_offline_greedy_is_optimal_for_one_matroid():
    inst = generate_instance("random-graph", 8, 4)
    choice = build_algorithm("offline-greedy", inst)
    rep = monte_carlo(inst, choice.factory, "uniform", 50, 0)
    assert rep.mean_ratio == 1.0 and rep.stderr == 0.0


def test_six_element_partition_frequencies():
    inst = six_element_partition()
    choice = build_algorithm("simple-partition", inst)
    rep = monte_carlo(inst, choice.factory, "uniform", 4000, 1)
    assert set(rep.opt) == {0, 2, 4}
    for e in rep.opt:
        assert rep.frequency_margin(e, Fraction(1, 4)) >= 0


def test_report_fields():
    inst = six_element_partition()
    choice = build_algorithm("simple-partition", inst)
    rep = monte_carlo(inst, choice.factory, "weight-decreasing", 200, 1, bound=choice.bound)
    assert rep.threshold == pytest.approx(float(choice.bound) - 3 * rep.stderr)
    assert rep.margin == pytest.approx(rep.mean_ratio - rep.threshold)
    lines = rep.to_csv().split("\r\n")
    assert lines[0] == "trial,ratio,accepted_ids,seed"
    assert len([ln for ln in lines if ln]) == 201
    assert "wall_time" not in rep.to_dict()


@pytest.mark.parametrize("family", FAMILIES)
def test_generators_deterministic(family):
    a = generate_instance(family, 8, 17)
    b = generate_instance(family, 8, 17)
    assert a.to_dict() == b.to_dict()
    assert a.n == 8
    assert len(set(a.weights)) == a.n


def test_generator_details():
    with pytest.raises(ValueError):
        generate_instance("no-such-family", 5, 0)
    inst = generate_instance("bipartite-matching-intersection", 8, 1)
    assert inst.k == 2 and all(isinstance(m, PartitionMatroid) for m in inst.matroids)
    assert matroid_axiom_violations(generate_instance("random-graph", 7, 2).matroids[0]) == []
    assert generate_instance("partition-x-transversal", 6, 1).to_dict() == \
        generate_instance("partition×transversal", 6, 1).to_dict()


@pytest.mark.parametrize("kind", ORDERS)
def test_orders_are_permutations(kind):
    rng = np.random.default_rng(0)
    w = [5, 1, 4, 2, 3, 6]
    got = ArrivalOrder(kind).realize([0, 2, 3, 5], w, frozenset({0, 3}), rng)
    assert sorted(got) == [0, 2, 3, 5]


def test_opt_aware_orders():
    w = [5, 1, 4, 2, 3, 6]
    opt = frozenset({0, 3})
    last = ArrivalOrder("opt-last").realize(range(6), w, opt)
    assert last == [5, 2, 4, 1, 3, 0]
    first = ArrivalOrder("opt-first").realize(range(6), w, opt)
    assert first == [0, 3, 5, 2, 4, 1]


def test_explicit_order():
    order = ArrivalOrder.parse("2,0,1")
    assert order.realize([0, 1, 2], [1, 2, 3]) == [2, 0, 1]
    assert order.realize([0, 2], [1, 2, 3]) == [2, 0]
    assert ArrivalOrder.parse([1, 0]).realize([0, 1], [1, 1]) == [1, 0]
    with pytest.raises(ValueError):
        ArrivalOrder.parse("sideways")


def test_instance_round_trip(tmp_path):
    inst = SecretaryInstance([UniformMatroid(3, 1), PartitionMatroid([[0, 1], [2]])], [Fraction(1, 2), 2, 3],
                             CoverageFunction([{0}, {0, 1}, {2}]), name="mixed")
    path = tmp_path / "inst.json"
    inst.save(path)
    back = SecretaryInstance.load(path)
    assert back.weights == inst.weights and back.name == "mixed"
    assert back.optimum() == inst.optimum()
    assert back.objective({0, 1, 2}) == 3


def test_instance_validation():
    with pytest.raises(ValueError):
        SecretaryInstance([UniformMatroid(3, 1)], [1, 2])
    with pytest.raises(ValueError):
        SecretaryInstance([UniformMatroid(2, 1)], [1, -1])
    with pytest.raises(ValueError):
        SecretaryInstance([], [])


def test_resource_limit_without_opt():
    inst = SecretaryInstance([UniformMatroid(21, 1)], list(range(1, 22)))
    choice = build_algorithm("simple-partition", inst)
    with pytest.raises(ResourceLimitError):
        monte_carlo(inst, choice.factory, "uniform", 10, 0)
    rep = monte_carlo(inst, choice.factory, "uniform", 10, 0, opt={20})
    assert rep.opt == (20,)


def test_unknown_algorithm():
    inst = six_element_partition()
    with pytest.raises(ValueError):
        build_algorithm("nope", inst)
    assert "combine-rs" in ALGORITHMS


def test_zero_trials_rejected():
    inst = six_element_partition()
    with pytest.raises(ValueError):
        monte_carlo(inst, build_algorithm("simple-partition", inst).factory, "uniform", 0, 0)
