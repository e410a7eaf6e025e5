import numpy as np

from utils.errors import EvaluationError


def auc_pr(pos_scores, neg_scores):
    """Step-integrated area under the precision-recall curve.

    Thresholds run over the distinct scores in descending order; tied
    positives and negatives cross a threshold together.
    """
    pos = np.asarray(pos_scores, dtype=np.float64).reshape(-1)
    neg = np.asarray(neg_scores, dtype=np.float64).reshape(-1)
    if pos.size == 0 or neg.size == 0:
        raise EvaluationError(f"auc_pr needs positives and negatives, got {pos.size} and {neg.size}")
    scores = np.concatenate([pos, neg])
    if not np.all(np.isfinite(scores)):
        raise EvaluationError("auc_pr got non-finite scores")
    labels = np.concatenate([np.ones(pos.size), np.zeros(neg.size)])

    order = np.argsort(-scores, kind="stable")
    scores = scores[order]
    labels = labels[order]
    tp = np.cumsum(labels)
    fp = np.cumsum(1.0 - labels)

    # last position of every run of equal scores
    group_end = np.flatnonzero(np.append(scores[1:] != scores[:-1], True))
    tp = tp[group_end]
    fp = fp[group_end]
    precision = tp / (tp + fp)
    recall = tp / pos.size
    delta = np.diff(np.concatenate([[0.0], recall]))
    return float(np.sum(delta * precision))


def rank_from_scores(true_score, neg_scores):
    """1 + #negatives above, ties split in half (rounded down)."""
    neg = np.asarray(neg_scores, dtype=np.float64)
    greater = int(np.sum(neg > true_score))
    ties = int(np.sum(neg == true_score))
    return 1 + greater + ties // 2


def hits_at(ranks, k):
    ranks = np.asarray(ranks)
    if ranks.size == 0:
        raise EvaluationError("no ranks to summarize")
    return float(np.mean(ranks <= k))


def mean_rank(ranks):
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.size == 0:
        raise EvaluationError("no ranks to summarize")
    return float(np.mean(ranks))


def relative_gain(best_single, fused):
    if best_single <= 0:
        raise EvaluationError(f"gain needs a positive baseline, got {best_single}")
    return (fused - best_single) / best_single


def ensemble_gain(p1, p2, p12):
    for name, value in (("p1", p1), ("p2", p2), ("p12", p12)):
        if value <= 0:
            raise EvaluationError(f"{name} must be positive, got {value}")
    return relative_gain(max(p1, p2), p12)
