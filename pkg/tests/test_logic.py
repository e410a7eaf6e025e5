from itertools import product

import numpy as np
import pytest

from core.graph import KnowledgeGraph, Vocabulary, load_triples
from logic.construction import construct_rule_params, rule_score, rule_set_score, whole_graph_subgraph
from logic.rules import PathRule, count_satisfied, count_walks, rule_satisfied
from logic.verify import VerifierConfig, random_graph, random_rule, rule_set_instance, verify_rule_encoding
from utils.errors import ConfigError, RuleError


def enumerate_walks(g, body, u, v):
    """Every node sequence u, z_1, ..., v whose hops carry the body relations."""
    walks = []
    for middle in product(range(g.num_entities), repeat=len(body) - 1):
        nodes = (u,) + middle + (v,)
        if all(g.has_triple(nodes[i], r, nodes[i + 1]) for i, r in enumerate(body)):
            walks.append(middle)
    return walks


@pytest.fixture
def chain():
    # u -r1-> z -r2-> v, relation ids r_t=0, r1=1, r2=2
    relations = Vocabulary(["r_t", "r1", "r2"])
    return KnowledgeGraph.from_labeled([("u", "r1", "z"), ("z", "r2", "v")], relations=relations)


def ids(g, *labels):
    return [g.entities.id_of(label) for label in labels]


def test_rule_satisfied_with_witness(chain):
    u, z, v = ids(chain, "u", "z", "v")
    assert rule_satisfied(chain, PathRule(0, [1, 2]), u, v) == (True, (z,))
    assert rule_satisfied(chain, PathRule(0, [2, 1]), u, v) == (False, None)
    assert rule_satisfied(chain, PathRule(0, [1]), u, z) == (True, ())


def test_rule_shape_errors():
    with pytest.raises(RuleError):
        PathRule(0, [])
    with pytest.raises(RuleError):
        PathRule(0, [1, 7]).check(3)
    assert PathRule(0, [1, 2]).describe() == "r0(X,Y) <- r1(X,Z1) & r2(Z1,Y)"


def test_count_satisfied(chain):
    u, _, v = ids(chain, "u", "z", "v")
    assert count_satisfied(chain, [], u, v) == 0
    assert count_satisfied(chain, [PathRule(0, [1, 2]), PathRule(0, [2, 1])], u, v) == 1
    with pytest.raises(RuleError):
        count_satisfied(chain, [PathRule(0, [1, 2]), PathRule(1, [2])], u, v)


def test_oracles_match_walk_enumeration(rng):
    for _ in range(200):
        g = random_graph(rng, max_nodes=10, max_relations=3, edge_probability=0.12)
        rule = random_rule(rng, g.num_relations, 3)
        u, v = (int(x) for x in rng.choice(g.num_entities, size=2, replace=False))
        walks = enumerate_walks(g, rule.body, u, v)
        satisfied, witness = rule_satisfied(g, rule, u, v)
        assert satisfied == bool(walks)
        if satisfied:
            assert witness in walks
        assert count_walks(g, rule.body, u, v) == len(walks)


def test_count_satisfied_matches_oracle(rng):
    for _ in range(100):
        g = random_graph(rng, max_nodes=8, max_relations=3, edge_probability=0.2)
        rules = [random_rule(rng, g.num_relations, 3, head=0) for _ in range(3)]
        u, v = (int(x) for x in rng.choice(g.num_entities, size=2, replace=False))
        assert count_satisfied(g, rules, u, v) == sum(rule_satisfied(g, rule, u, v)[0] for rule in rules)


def test_construction_scores_chain(chain):
    u, z, v = ids(chain, "u", "z", "v")
    rule = PathRule(0, [1, 2])
    assert rule_score(chain, rule, u, v) > 0.0
    assert rule_score(chain, PathRule(0, [2, 1]), u, v) == 0.0

    broken = chain.without_triples([(z, 2, v)])
    assert rule_score(broken, rule, u, v) == 0.0


def test_construction_on_empty_graph():
    g = KnowledgeGraph(Vocabulary(["a", "b"]), Vocabulary(["r0", "r1"]), [])
    rule = PathRule(0, [1])
    assert rule_score(g, rule, 0, 1) == 0.0
    assert rule_satisfied(g, rule, 0, 1) == (False, None)


def test_construction_rejects_long_rules_and_equal_targets(chain):
    with pytest.raises(RuleError):
        construct_rule_params(PathRule(0, [1, 2, 1, 2]), 3, max_layers=3)
    with pytest.raises(RuleError):
        whole_graph_subgraph(chain, 0, 0, 0)


def test_params_depend_only_on_rule(rng):
    rule = PathRule(1, [2, 0, 2])
    first, cfg = construct_rule_params(rule, 3)
    second, _ = construct_rule_params(rule, 3)
    assert first.equals(second)
    first.check(cfg)
    assert cfg.verifier_mode and cfg.aggregate_in_neighbors
    assert cfg.num_layers == 3 and cfg.hidden_dim == 1


def test_whole_graph_features_mark_source(chain):
    u, _, v = ids(chain, "u", "z", "v")
    sub = whole_graph_subgraph(chain, u, v, 0)
    assert sub.nodes[:2] == [u, v]
    assert sub.features[:, 0].tolist() == [1.0, 0.0, 0.0]
    assert sub.num_edges == chain.num_triples


def test_score_counts_walks(rng):
    for _ in range(100):
        g = random_graph(rng, max_nodes=8, max_relations=3, edge_probability=0.25)
        rule = random_rule(rng, g.num_relations, 3)
        u, v = (int(x) for x in rng.choice(g.num_entities, size=2, replace=False))
        assert rule_score(g, rule, u, v) == float(count_walks(g, rule.body, u, v))


def test_rule_set_scores_scale_with_satisfied_rules():
    scores = []
    for beta in (1, 2, 3):
        g, rules = rule_set_instance(beta)
        assert count_satisfied(g, rules, 0, 1) == beta
        scores.append(rule_set_score(g, rules, 0, 1))
    assert np.allclose(np.array(scores) / scores[0], [1.0, 2.0, 3.0], rtol=1e-9)

    g, rules = rule_set_instance(0)
    assert rule_set_score(g, rules, 0, 1) == 0.0
    with pytest.raises(ConfigError):
        rule_set_instance(4)


def test_rule_set_needs_shared_head(chain):
    with pytest.raises(RuleError):
        rule_set_score(chain, [PathRule(0, [1]), PathRule(1, [2])], 0, 1)


def test_self_loop_walks_are_counted():
    g = load_triples("u\tr1\tu\nu\tr1\tv\n")
    rule = PathRule(0, [0, 0])
    assert count_walks(g, rule.body, 0, 1) == 1
    assert rule_score(g, rule, 0, 1) == 1.0


def test_verifier_agrees_on_random_graphs():
    report = verify_rule_encoding(200, 3, np.random.default_rng(31))
    assert report.passed
    assert report.trials == 200
    assert report.checks == 200 * VerifierConfig().pairs_per_trial
    assert report.agreement_rate == 1.0
    assert report.rule_set_agreements == report.rule_set_checks == 200


def test_verifier_report_file(tmp_path):
    report = verify_rule_encoding(5, 2, np.random.default_rng(4), VerifierConfig(pairs_per_trial=2))
    path = tmp_path / "verify.txt"
    report.write(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "trials=5"
    assert "checks=10" in lines
    assert "disagreements=0" in lines


def test_verifier_config_validation():
    with pytest.raises(ConfigError):
        verify_rule_encoding(1, 0, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        VerifierConfig(edge_probability=1.5).validate()


@pytest.mark.slow
def test_verifier_thousand_trials():
    report = verify_rule_encoding(1000, 3, np.random.default_rng(2024))
    assert report.passed
    assert report.checks == 4000
