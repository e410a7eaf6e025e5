import numpy as np
import pytest

from benchgen.sampler import split_test_edges
from benchgen.synthetic import generate_rule_graph
from evaluation.ablation import ABLATIONS, ablation_study
from evaluation.evaluator import EvalConfig
from model.gnn import GnnConfig
from training.config import TrainConfig


def inductive_split(train_entities, test_entities, edges):
    g = generate_rule_graph(train_entities, edges, np.random.default_rng(21))
    g_train, valid = split_test_edges(g, 0.1, np.random.default_rng(22))
    full_test = generate_rule_graph(test_entities, edges, np.random.default_rng(23), prefix="x", relations=g.relations)
    g_test, test_edges = split_test_edges(full_test, 0.1, np.random.default_rng(24))
    return g_train, valid, g_test, test_edges


def test_every_variant_runs_per_seed():
    g_train, valid, g_test, test_edges = inductive_split(20, 20, 30)
    cfg = TrainConfig(epochs=1, hops=2, batch_size=16, deterministic=True)
    gnn_cfg = GnnConfig(num_layers=2, hidden_dim=4, num_bases=2)
    results = ablation_study(g_train, valid, g_test, test_edges[:3], cfg, gnn_cfg, EvalConfig(num_negatives=5), seeds=[1, 2])

    assert list(results) == list(ABLATIONS)
    for result in results.values():
        assert len(result.test_auc_pr) == len(result.test_hits) == 2
        assert 0.0 <= result.mean_auc_pr <= 1.0
        assert 0.0 <= result.mean_hits <= 1.0


def test_variant_subset():
    g_train, valid, g_test, test_edges = inductive_split(20, 20, 30)
    cfg = TrainConfig(epochs=1, hops=2, batch_size=16, deterministic=True)
    gnn_cfg = GnnConfig(num_layers=2, hidden_dim=4, num_bases=2)
    results = ablation_study(g_train, valid, g_test, test_edges[:2], cfg, gnn_cfg, EvalConfig(num_negatives=3), [0], variants=["no_attention"])
    assert list(results) == ["no_attention"]


@pytest.mark.slow
def test_ablation_means_over_five_seeds():
    g_train, valid, g_test, test_edges = inductive_split(150, 120, 200)
    cfg = TrainConfig(epochs=10, hops=2, deterministic=True)
    gnn_cfg = GnnConfig(num_layers=3, hidden_dim=16, num_bases=4)
    results = ablation_study(g_train, valid, g_test, test_edges, cfg, gnn_cfg, EvalConfig(), seeds=range(5))
    assert all(len(result.test_auc_pr) == 5 for result in results.values())
    default = results["default"].mean_auc_pr
    for variant in ("full_khop", "constant_labels", "no_attention"):
        assert default > results[variant].mean_auc_pr, variant
