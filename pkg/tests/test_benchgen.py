import math

import numpy as np
import pytest

from benchgen.sampler import (
    SamplerConfig,
    SplitConfig,
    check_inductive_pair,
    make_split,
    sample_inductive_pair,
    split_test_edges,
    write_split,
)
from benchgen.synthetic import BODY_FIRST, BODY_SECOND, TARGET, generate_rule_graph, generate_rule_triples
from core.graph import KnowledgeGraph, read_triples_file
from utils.errors import ConfigError, SamplingError


def ring_graph(size=50):
    triples = [(f"n{i}", "r1", f"n{(i + 1) % size}") for i in range(size)]
    triples += [(f"n{i}", "r2", f"n{(i + 2) % size}") for i in range(size)]
    return KnowledgeGraph.from_labeled(triples)


@pytest.fixture(scope="module")
def source_graph():
    return generate_rule_graph(300, 400, np.random.default_rng(5))


def sampler_configs(seed):
    train_cfg = SamplerConfig(num_roots=5, hops=2, max_new_per_hop=10, target_edges=150, seed=seed)
    test_cfg = SamplerConfig(num_roots=4, hops=2, max_new_per_hop=10, target_edges=80, seed=seed + 1000)
    return train_cfg, test_cfg


def test_generated_target_follows_rule():
    triples = generate_rule_triples(30, 40, np.random.default_rng(1))
    first = {(h, t) for h, r, t in triples if r == BODY_FIRST}
    second = {(h, t) for h, r, t in triples if r == BODY_SECOND}
    implied = {(x, y) for x, z in first for z2, y in second if z == z2 and x != y}
    assert {(h, t) for h, r, t in triples if r == TARGET} == implied


def test_generator_rejects_impossible_sizes():
    with pytest.raises(ValueError):
        generate_rule_triples(2, 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        generate_rule_triples(4, 13, np.random.default_rng(0))


def test_inductive_pairs_are_disjoint(source_graph):
    source = set(source_graph.labeled_triples())
    for seed in range(10):
        train, test = sample_inductive_pair(source_graph, *sampler_configs(seed))
        check_inductive_pair(train, test)

        train_entities = {e for h, _, t in train.labeled_triples() for e in (h, t)}
        test_entities = {e for h, _, t in test.labeled_triples() for e in (h, t)}
        assert not train_entities & test_entities
        assert {r for _, r, _ in test.labeled_triples()} <= {r for _, r, _ in train.labeled_triples()}
        assert set(train.labeled_triples()) <= source
        assert set(test.labeled_triples()) <= source


def test_sampler_is_deterministic(source_graph):
    first = sample_inductive_pair(source_graph, *sampler_configs(3))
    second = sample_inductive_pair(source_graph, *sampler_configs(3))
    assert [g.labeled_triples() for g in first] == [g.labeled_triples() for g in second]


def test_check_inductive_pair_flags_overlap():
    train = KnowledgeGraph.from_labeled([("a", "r", "b")])
    test = KnowledgeGraph.from_labeled([("b", "r", "c")], relations=train.relations)
    with pytest.raises(SamplingError, match="'b'"):
        check_inductive_pair(train, test)
    unseen = KnowledgeGraph.from_labeled([("x", "q", "y")])
    with pytest.raises(SamplingError, match="q"):
        check_inductive_pair(train, unseen)


def test_sampler_config_validation():
    with pytest.raises(ConfigError):
        SamplerConfig(num_roots=0).validate()
    with pytest.raises(ConfigError):
        SplitConfig(test_fraction=1.0).validate()


def test_split_hundred_edges():
    g = ring_graph()
    assert g.num_triples == 100
    message, test_edges = split_test_edges(g, 0.1, np.random.default_rng(0))
    assert len(test_edges) == 10
    assert message.num_triples == 90


def test_split_partitions_the_graph(rng):
    for _ in range(20):
        g = generate_rule_graph(25, 40, rng)
        fraction = float(rng.uniform(0.05, 0.3))
        message, test_edges = split_test_edges(g, fraction, rng)

        assert not set(test_edges) & set(message.triples)
        assert sorted(set(test_edges) | set(message.triples)) == sorted(g.triples)
        assert len(test_edges) + message.num_triples == g.num_triples
        assert len(test_edges) <= math.ceil(fraction * g.num_triples)

        remaining = {e for h, _, t in message.triples for e in (h, t)}
        for h, _, t in test_edges:
            assert h in remaining and t in remaining


def test_split_errors():
    g = ring_graph(4)
    with pytest.raises(ConfigError):
        split_test_edges(g, 0.0, np.random.default_rng(0))
    with pytest.raises(SamplingError):
        split_test_edges(KnowledgeGraph.from_labeled([("a", "r", "b")]), 0.5, np.random.default_rng(0))


def test_split_is_seeded():
    g = ring_graph()
    _, first = split_test_edges(g, 0.2, np.random.default_rng(42))
    _, second = split_test_edges(g, 0.2, np.random.default_rng(42))
    assert first == second


def test_write_split(tmp_path, source_graph):
    train_cfg, test_cfg = sampler_configs(7)
    split = make_split(source_graph, train_cfg, test_cfg, SplitConfig())
    write_split(tmp_path, split)

    for name in ("train.txt", "valid.txt", "test.txt", "ind_test_graph.txt", "stats.txt"):
        assert (tmp_path / name).exists()

    train_msg = read_triples_file(tmp_path / "train.txt")
    valid_lines = (tmp_path / "valid.txt").read_text(encoding="utf-8").splitlines()
    assert len(valid_lines) == len(split.valid_edges)
    assert train_msg.num_triples + len(valid_lines) == split.train_graph.num_triples

    stats = dict(line.split("=") for line in (tmp_path / "stats.txt").read_text(encoding="utf-8").splitlines())
    assert int(stats["train.links"]) == split.train_graph.num_triples
    assert int(stats["test.links"]) == len(split.test_edges)
