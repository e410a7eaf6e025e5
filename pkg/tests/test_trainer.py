from dataclasses import replace

import numpy as np
import pytest

from benchgen.sampler import split_test_edges
from benchgen.synthetic import TARGET, generate_rule_graph
from core.executor import SerialExecutor
from core.graph import load_triples
from core.subgraph import SubgraphExtractor
from evaluation.evaluator import EvalConfig, evaluate
from evaluation.metrics import auc_pr
from evaluation.scorers import GrailScorer
from model.gnn import GnnConfig, init_params
from training.config import TrainConfig
from training.events import EventHub, TrainingEvent
from training.optim import AdamState, adam_step, clip_gradients, global_norm
from training.trainer import batch_loss, example_loss, hinge_loss, sample_negative, score_triples, train
from utils.errors import ConfigError, SamplingError, TrainingError


@pytest.fixture
def small_split():
    g = generate_rule_graph(20, 30, np.random.default_rng(11))
    g_train, valid = split_test_edges(g, 0.1, np.random.default_rng(12))
    return g_train, valid


def small_configs(**train_overrides):
    values = dict(epochs=2, hops=2, batch_size=8, eval_every=1, seed=3, deterministic=True)
    values.update(train_overrides)
    gnn_cfg = GnnConfig(num_layers=2, hidden_dim=8, num_bases=2, edge_dropout_rate=0.5)
    return TrainConfig(**values), gnn_cfg


@pytest.mark.parametrize("pos, neg, expected", [(5.0, 1.0, 6.0), (20.0, 1.0, 0.0), (3.0, 3.0, 10.0)])
def test_hinge_loss(pos, neg, expected):
    assert hinge_loss(pos, neg, 10.0).item() == expected


def test_negative_differs_and_keeps_relation(rng, chain_graph):
    for triple in chain_graph.triples:
        for _ in range(50):
            neg = sample_negative(chain_graph, triple, rng)
            assert neg != triple
            assert neg[1] == triple[1]
            assert neg[0] == triple[0] or neg[2] == triple[2]


def test_negative_entities_are_uniform():
    g = load_triples("a\tr\tb\nb\tr\tc\nc\tr\td\nd\tr\te\n")
    rng = np.random.default_rng(99)
    pos = (0, 0, 1)
    heads = []
    tails = []
    for _ in range(10_000):
        h, _, t = sample_negative(g, pos, rng)
        (heads if h != pos[0] else tails).append(h if h != pos[0] else t)

    for replaced, allowed in ((heads, [1, 2, 3, 4]), (tails, [0, 2, 3, 4])):
        n = len(replaced)
        counts = np.bincount(replaced, minlength=5)
        sigma = np.sqrt(n * 0.25 * 0.75)
        for e in allowed:
            assert abs(counts[e] - n / 4) <= 5 * sigma
    assert abs(len(heads) - 5000) <= 5 * np.sqrt(10_000 * 0.25)


def test_negative_sampling_needs_entities():
    with pytest.raises(SamplingError):
        sample_negative(load_triples("a\tr\ta\n"), (0, 0, 0), np.random.default_rng(0))
    with pytest.raises(SamplingError):
        sample_negative(load_triples("a\tr\tb\n"), (0, 0, 1), np.random.default_rng(0), allow_self_loops=False)


def test_negatives_without_self_loops(rng, chain_graph):
    for _ in range(200):
        h, _, t = sample_negative(chain_graph, (0, 0, 1), rng, allow_self_loops=False)
        assert h != t


def test_adam_first_step_moves_by_lr():
    params = {"w": np.array([1.0, -2.0, 0.3])}
    grads = {"w": np.array([0.5, -3.0, 2e-3])}
    before = params["w"].copy()
    adam_step(params, grads, AdamState(), lr=0.01)
    assert np.allclose(params["w"] - before, -0.01 * np.sign(grads["w"]), atol=1e-7)


def test_adam_zero_gradient_is_a_no_op():
    params = {"w": np.array([1.0, -2.0])}
    state = AdamState()
    adam_step(params, {"w": np.zeros(2)}, state, lr=0.01)
    assert params["w"].tolist() == [1.0, -2.0]
    assert state.step == 1


def test_adam_l2_shrinks_weights():
    params = {"w": np.array([1.0, -2.0])}
    adam_step(params, {"w": np.zeros(2)}, AdamState(), lr=0.01, l2=0.1)
    assert params["w"][0] < 1.0 and params["w"][1] > -2.0


def test_adam_converges_on_quadratic():
    params = {"w": np.array(0.0)}
    state = AdamState()
    for _ in range(100):
        adam_step(params, {"w": 2.0 * (params["w"] - 3.0)}, state, lr=0.1)
    assert abs(float(params["w"]) - 3.0) < 0.1


def test_adam_rejects_non_finite_gradient():
    with pytest.raises(TrainingError, match="'w'"):
        adam_step({"w": np.zeros(2)}, {"w": np.array([np.nan, 0.0])}, AdamState(), lr=0.01)


def test_clip_gradients():
    clipped = clip_gradients({"g": np.array([3.0, 4.0])}, 1.0)
    assert np.allclose(clipped["g"], [0.6, 0.8])

    grads = {"a": np.full(4, 250.0)}
    assert global_norm(grads) == 500.0
    assert clip_gradients(grads, 1000.0)["a"].tolist() == grads["a"].tolist()

    with pytest.raises(ValueError):
        clip_gradients(grads, 0.0)


def test_clipped_norm_never_exceeds_max(rng):
    for _ in range(50):
        grads = {"a": rng.normal(size=(3, 4)) * 100, "b": rng.normal(size=5) * 100}
        limit = float(rng.uniform(0.1, 500.0))
        assert global_norm(clip_gradients(grads, limit)) <= limit + 1e-9


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(margin=-1.0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(lr=0.0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(mode="nearby").validate()


def test_one_step_decreases_example_loss(small_split):
    g_train, _ = small_split
    cfg, gnn_cfg = small_configs()
    gnn_cfg = replace(gnn_cfg, edge_dropout_rate=0.0, input_dim=8)
    params = init_params(gnn_cfg, g_train.num_relations, np.random.default_rng(4))
    extractor = SubgraphExtractor(g_train, cfg.hops)

    pos = next(triple for triple in g_train.triples if triple[0] != triple[2])
    neg = sample_negative(g_train, pos, np.random.default_rng(5), allow_self_loops=False)
    before, grads = example_loss(params, extractor, gnn_cfg, cfg, pos, [neg], dropout_seed=0)
    assert before > 0.0
    adam_step(params, grads, AdamState(), lr=1e-4)
    after, _ = example_loss(params, extractor, gnn_cfg, cfg, pos, [neg], dropout_seed=0)
    assert after < before


def test_batch_loss_ignores_job_order(small_split):
    g_train, _ = small_split
    cfg, gnn_cfg = small_configs()
    gnn_cfg = replace(gnn_cfg, input_dim=8)
    params = init_params(gnn_cfg, g_train.num_relations, np.random.default_rng(4))
    extractor = SubgraphExtractor(g_train, cfg.hops)
    rng = np.random.default_rng(8)

    positives = [triple for triple in g_train.triples if triple[0] != triple[2]][:8]
    jobs = [(idx, pos, [sample_negative(g_train, pos, rng, allow_self_loops=False)], 100 + idx) for idx, pos in enumerate(positives)]
    loss, grads = batch_loss(params, extractor, gnn_cfg, cfg, jobs, SerialExecutor())
    for _ in range(3):
        shuffled = [jobs[i] for i in rng.permutation(len(jobs))]
        again, again_grads = batch_loss(params, extractor, gnn_cfg, cfg, shuffled, SerialExecutor())
        assert again == loss
        assert sorted(again_grads) == sorted(grads)
        assert all(np.array_equal(again_grads[name], grads[name]) for name in grads)


def test_train_rejects_empty_graph_and_self_loop_validation():
    cfg, gnn_cfg = small_configs()
    g = load_triples("a\tr\tb\nb\tr\tc\n")
    with pytest.raises(TrainingError):
        train(g.without_triples(g.triples), [], cfg, gnn_cfg)
    with pytest.raises(TrainingError, match="self-loop"):
        train(g, [(0, 0, 0)], cfg, gnn_cfg)


def test_train_is_deterministic_and_leaves_graph_alone(small_split):
    g_train, valid = small_split
    triples_before = list(g_train.triples)
    cfg, gnn_cfg = small_configs()

    first = train(g_train, valid, cfg, gnn_cfg)
    second = train(g_train, valid, cfg, gnn_cfg)

    assert [r.loss for r in first.history] == [r.loss for r in second.history]
    assert first.best.params.equals(second.best.params)
    assert g_train.triples == triples_before
    assert len(first.history) == 2
    assert all(0.0 <= r.val_auc_pr <= 1.0 for r in first.history)


def test_threaded_training_matches_serial(small_split):
    g_train, valid = small_split
    cfg, gnn_cfg = small_configs(epochs=1)
    serial = train(g_train, valid, cfg, gnn_cfg)
    threaded = train(g_train, valid, replace(cfg, threads=3, deterministic=False), gnn_cfg)
    assert [r.loss for r in serial.history] == [r.loss for r in threaded.history]
    assert serial.last.params.equals(threaded.last.params)


def test_first_epoch_loss_is_near_margin(small_split):
    g_train, valid = small_split
    cfg, gnn_cfg = small_configs(epochs=1, lr=1e-6)
    result = train(g_train, valid, cfg, gnn_cfg)
    assert 5.0 < result.history[0].loss < 15.0


def test_resume_continues_the_same_run(small_split):
    g_train, valid = small_split
    cfg, gnn_cfg = small_configs()
    full = train(g_train, valid, cfg, gnn_cfg)

    first = train(g_train, valid, replace(cfg, epochs=1), gnn_cfg)
    resumed = train(g_train, valid, cfg, gnn_cfg, resume=first.last, resume_best=first.best)

    assert [r.epoch for r in resumed.history] == [2]
    assert resumed.history[0].loss == full.history[1].loss
    assert resumed.last.params.equals(full.last.params)
    assert resumed.last.adam.step == full.last.adam.step


def test_resume_rejects_other_vocabulary(small_split):
    g_train, valid = small_split
    cfg, gnn_cfg = small_configs(epochs=1)
    first = train(g_train, valid, cfg, gnn_cfg)
    first.last.relations = list(reversed(first.last.relations))
    with pytest.raises(TrainingError, match="vocabulary"):
        train(g_train, valid, replace(cfg, epochs=2), gnn_cfg, resume=first.last)


def test_training_events_fire(small_split):
    g_train, valid = small_split
    cfg, gnn_cfg = small_configs()
    seen = {TrainingEvent.EPOCH_END: [], TrainingEvent.VALIDATION: [], TrainingEvent.NEW_BEST: []}
    hub = EventHub()
    hub.register_callback(TrainingEvent.EPOCH_END, lambda record, checkpoint: seen[TrainingEvent.EPOCH_END].append(record.epoch))
    hub.register_callback(TrainingEvent.VALIDATION, lambda epoch, val_auc_pr: seen[TrainingEvent.VALIDATION].append(epoch))
    hub.register_callback(TrainingEvent.NEW_BEST, lambda checkpoint: seen[TrainingEvent.NEW_BEST].append(checkpoint.epoch))
    hub.register_callback("unknown", lambda **_: None)

    result = train(g_train, valid, cfg, gnn_cfg, events=hub)
    assert seen[TrainingEvent.EPOCH_END] == [1, 2]
    assert seen[TrainingEvent.VALIDATION] == [1, 2]
    assert seen[TrainingEvent.NEW_BEST][0] == 1
    assert result.best.epoch == seen[TrainingEvent.NEW_BEST][-1]


@pytest.mark.slow
def test_learns_synthetic_rule():
    rng = np.random.default_rng(2024)
    g = generate_rule_graph(200, 200, rng)
    target = g.relations.id_of(TARGET)
    rule_edges = [triple for triple in g.triples if triple[1] == target]
    valid = [rule_edges[i] for i in np.random.default_rng(7).choice(len(rule_edges), size=40, replace=False)]
    g_train = g.without_triples(valid)

    cfg = TrainConfig(epochs=25, hops=2, eval_every=5, seed=1)
    gnn_cfg = GnnConfig(num_layers=2, hidden_dim=16, num_bases=4)
    result = train(g_train, valid, cfg, gnn_cfg)
    assert result.best.val_auc_pr >= 0.95

    negatives = [sample_negative(g_train, triple, rng, allow_self_loops=False) for triple in valid]
    extractor = SubgraphExtractor(g_train, cfg.hops)
    best_cfg = result.best.gnn_config
    pos_scores = score_triples(result.best.params, extractor, best_cfg, valid, SerialExecutor())
    neg_scores = score_triples(result.best.params, extractor, best_cfg, negatives, SerialExecutor())
    assert auc_pr(pos_scores, neg_scores) > 0.8

    ind_graph = generate_rule_graph(200, 200, rng, prefix="x", relations=g.relations)
    assert not set(ind_graph.entities.labels) & set(g.entities.labels)
    ind_rule_edges = [triple for triple in ind_graph.triples if triple[1] == target]
    test_edges = [ind_rule_edges[i] for i in np.random.default_rng(8).choice(len(ind_rule_edges), size=40, replace=False)]
    scorer = GrailScorer(result.best)
    try:
        report = evaluate(scorer, ind_graph, test_edges, EvalConfig(seed=1))
    finally:
        scorer.cleanup()
    assert report.auc_pr >= 0.95
    assert report.hits_at_10 >= 0.90
