import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from evaluation.metrics import auc_pr, ensemble_gain, relative_gain
from utils.constants import EvalConstants as EC
from utils.errors import ConfigError, FusionError

logger = logging.getLogger(__name__)


@dataclass
class FusionConfig:
    learning_rate: float = EC.FUSION_LEARNING_RATE
    iterations: int = EC.FUSION_ITERATIONS

    def validate(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"fusion learning_rate must be > 0, got {self.learning_rate}")
        if self.iterations < 1:
            raise ConfigError(f"fusion iterations must be >= 1, got {self.iterations}")


@dataclass
class FusionResult:
    weights: np.ndarray
    bias: float
    valid_scores: np.ndarray
    test_keys: list
    test_scores: np.ndarray
    loss_history: list = field(default_factory=list)


def _read_columns(path, expected):
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != expected:
                raise FusionError(f"{path} line {line_number}: expected {expected} tab-separated fields, got {len(parts)}")
            rows.append((tuple(parts[:3]), parts[3], line_number))
    return rows


def read_score_file(path):
    """(key, score) rows of a `head<TAB>rel<TAB>tail<TAB>score` file."""
    rows = []
    for key, value, line_number in _read_columns(path, 4):
        try:
            rows.append((key, float(value)))
        except ValueError:
            raise FusionError(f"{path} line {line_number}: score '{value}' is not a number") from None
    return rows


def read_label_file(path):
    rows = []
    for key, value, line_number in _read_columns(path, 4):
        if value not in ("0", "1"):
            raise FusionError(f"{path} line {line_number}: label must be 0 or 1, got '{value}'")
        rows.append((key, int(value)))
    return rows


def write_score_file(path, keys, scores):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, score in zip(keys, scores):
            f.write("\t".join([*key, repr(float(score))]) + "\n")


def _check_aligned(reference, other, what):
    for idx, (a, b) in enumerate(zip(reference, other)):
        if a != b:
            raise FusionError(f"{what}: row {idx + 1} has key {'/'.join(b)}, expected {'/'.join(a)}")
    if len(reference) != len(other):
        raise FusionError(f"{what}: {len(other)} rows, expected {len(reference)}")


def split_rows(method_rows, valid_labels):
    """Validation block (aligned with the labels) and test block of every method."""
    valid_keys = [key for key, _ in valid_labels]
    n_valid = len(valid_keys)
    reference = [key for key, _ in method_rows[0]]
    if len(reference) < n_valid:
        raise FusionError(f"score file has {len(reference)} rows but {n_valid} validation labels")

    for m, rows in enumerate(method_rows):
        keys = [key for key, _ in rows]
        _check_aligned(valid_keys, keys[:n_valid], f"method {m + 1} vs validation labels")
        _check_aligned(reference, keys, f"method {m + 1} vs method 1")

    valid = np.array([[score for _, score in rows[:n_valid]] for rows in method_rows]).T
    test = np.array([[score for _, score in rows[n_valid:]] for rows in method_rows]).T.reshape(-1, len(method_rows))
    return valid, test, reference[n_valid:]


def fit_logistic(features, labels, cfg):
    """Logistic regression by full-batch gradient descent on the mean log-loss."""
    n, m = features.shape
    w = np.zeros(m)
    b = 0.0
    history = []
    for _ in range(cfg.iterations):
        logits = features @ w + b
        history.append(float(np.mean(np.logaddexp(0.0, logits) - labels * logits)))
        residual = expit(logits) - labels
        w = w - cfg.learning_rate * (features.T @ residual) / n
        b = b - cfg.learning_rate * float(np.mean(residual))
    if not (np.all(np.isfinite(w)) and np.isfinite(b)):
        raise FusionError("fusion weights diverged")
    return w, b, history


def late_fusion(method_rows, valid_labels, cfg=None):
    """Linear fusion of per-method scores fitted on the validation rows."""
    cfg = cfg or FusionConfig()
    cfg.validate()
    if len(method_rows) < 2:
        raise FusionError(f"late fusion needs at least 2 score sources, got {len(method_rows)}")
    labels = np.array([label for _, label in valid_labels], dtype=np.float64)
    if labels.size == 0 or labels.min() == labels.max():
        raise FusionError("validation labels must contain both positives and negatives")

    valid, test, test_keys = split_rows(method_rows, valid_labels)
    mean = valid.mean(axis=0)
    std = valid.std(axis=0)
    std[std == 0] = 1.0

    w, b, history = fit_logistic((valid - mean) / std, labels, cfg)
    logger.info(f"Fitted fusion weights {np.round(w, 4).tolist()}, bias {b:.4f}")
    valid_scores = ((valid - mean) / std) @ w + b
    test_scores = ((test - mean) / std) @ w + b if len(test_keys) else np.zeros(0)
    return FusionResult(w, b, valid_scores, test_keys, test_scores, history)


def _auc_by_label(scores, labels):
    labels = np.asarray(labels)
    return auc_pr(scores[labels == 1], scores[labels == 0])


def gain_table(method_rows, result, valid_labels, test_labels=None, names=None):
    """Per-method AUC-PR, fused AUC-PR and the relative gain of fusion."""
    valid, test, test_keys = split_rows(method_rows, valid_labels)
    names = names or [f"method_{m + 1}" for m in range(len(method_rows))]
    if test_labels is not None:
        _check_aligned(test_keys, [key for key, _ in test_labels], "test labels vs score rows")
        columns, fused, labels = test, result.test_scores, [label for _, label in test_labels]
        split = "test"
    else:
        columns, fused, labels = valid, result.valid_scores, [label for _, label in valid_labels]
        split = "valid"

    singles = [_auc_by_label(columns[:, m], labels) for m in range(columns.shape[1])]
    fused_auc = _auc_by_label(fused, labels)
    if len(singles) == 2:
        gain = ensemble_gain(singles[0], singles[1], fused_auc)
    else:
        gain = relative_gain(max(singles), fused_auc)

    rows = [(name, auc) for name, auc in zip(names, singles)]
    rows.append(("fused", fused_auc))
    return {"split": split, "rows": rows, "gain": gain}


def write_gain_table(path, table):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"split={table['split']}\n")
        for name, auc in table["rows"]:
            f.write(f"auc_pr.{name}={auc!r}\n")
        f.write(f"gain={table['gain']!r}\n")
