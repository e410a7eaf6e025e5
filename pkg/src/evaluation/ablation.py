import logging
from dataclasses import dataclass, field, replace

import numpy as np

from core.subgraph import ExtractionMode, LabelingScheme
from evaluation.evaluator import evaluate
from evaluation.scorers import GrailScorer
from training.trainer import train

logger = logging.getLogger(__name__)

# variant -> (train config overrides, gnn config overrides)
ABLATIONS = {
    "default": ({}, {}),
    "full_khop": ({"mode": ExtractionMode.FULL_KHOP}, {}),
    "constant_labels": ({"labeling": LabelingScheme.CONSTANT}, {}),
    "no_attention": ({}, {"attention_enabled": False}),
}


@dataclass
class AblationResult:
    variant: str
    test_auc_pr: list = field(default_factory=list)
    test_hits: list = field(default_factory=list)

    @property
    def mean_auc_pr(self):
        return float(np.mean(self.test_auc_pr))

    @property
    def mean_hits(self):
        return float(np.mean(self.test_hits))


def ablation_study(g_train, valid_triples, g_test, test_edges, cfg, gnn_cfg, eval_cfg, seeds, variants=None):
    """Train and evaluate every variant once per seed on the same split."""
    results = {}
    for variant in variants or list(ABLATIONS):
        train_overrides, gnn_overrides = ABLATIONS[variant]
        result = AblationResult(variant)
        for seed in seeds:
            run_cfg = replace(cfg, seed=seed, **train_overrides)
            run_gnn = replace(gnn_cfg, **gnn_overrides)
            trained = train(g_train, valid_triples, run_cfg, run_gnn)
            scorer = GrailScorer(trained.best, threads=cfg.threads)
            try:
                report = evaluate(scorer, g_test, test_edges, replace(eval_cfg, seed=seed))
            finally:
                scorer.cleanup()
            result.test_auc_pr.append(report.auc_pr)
            result.test_hits.append(report.hits)
        logger.info(f"Ablation {variant}: mean test AUC-PR {result.mean_auc_pr:.4f} over {len(seeds)} seeds")
        results[variant] = result
    return results
