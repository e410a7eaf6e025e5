import logging
from dataclasses import dataclass, field, replace

import numpy as np
from tqdm import tqdm

from core import tape
from core.executor import create_executor
from core.subgraph import SubgraphExtractor, feature_dim
from evaluation.metrics import auc_pr
from model.gnn import init_params, sample_dropout_masks, score_triplet
from training.checkpoint import Checkpoint
from training.events import EventHub, TrainingEvent
from training.optim import AdamState, adam_step, clip_gradients
from utils.errors import SamplingError, TrainingError
from utils.rng import substream

logger = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    val_auc_pr: float = float("nan")


@dataclass
class TrainResult:
    best: Checkpoint
    last: Checkpoint
    history: list = field(default_factory=list)


def sample_negative(g, pos, rng, allow_self_loops=True):
    """Corrupt head or tail of `pos` with a uniform entity (unfiltered)."""
    if g.num_entities < 2:
        raise SamplingError(f"cannot corrupt a triple in a graph with {g.num_entities} entity")
    if not allow_self_loops and g.num_entities < 3:
        raise SamplingError(f"need at least 3 entities to corrupt without self-loops, graph has {g.num_entities}")
    h, r, t = pos
    while True:
        corrupt_head = rng.random() < 0.5
        e = int(rng.integers(g.num_entities))
        candidate = (e, r, t) if corrupt_head else (h, r, e)
        if candidate == tuple(pos):
            continue
        if not allow_self_loops and candidate[0] == candidate[2]:
            continue
        return candidate


def hinge_loss(pos_score, neg_score, margin):
    return tape.hinge(tape.add(tape.add(neg_score, tape.scale(pos_score, -1.0)), float(margin)))


def example_loss(params, extractor, gnn_cfg, cfg, pos, negatives, dropout_seed):
    """Summed hinge loss of one positive against its negatives, with gradients."""
    rng = np.random.default_rng(dropout_seed)
    bound = params.bind()

    pos_sub = extractor.extract(*pos)
    pos_score = score_triplet(pos_sub, bound, gnn_cfg, sample_dropout_masks(pos_sub, gnn_cfg, rng))
    loss = None
    for neg in negatives:
        neg_sub = extractor.extract(*neg)
        neg_score = score_triplet(neg_sub, bound, gnn_cfg, sample_dropout_masks(neg_sub, gnn_cfg, rng))
        term = hinge_loss(pos_score, neg_score, cfg.margin)
        loss = term if loss is None else tape.add(loss, term)

    tape.backward(loss)
    return loss.item(), bound.grads()


def score_triples(params, extractor, gnn_cfg, triples, executor):
    def score(triple):
        return score_triplet(extractor.extract(*triple), params.bind(), gnn_cfg).item()

    return executor.map(score, list(triples))


def resolve_gnn_config(gnn_cfg, cfg, num_relations, aux_dim=0):
    """Input width from the labeling, bases clamped to the relation count."""
    num_bases = gnn_cfg.num_bases
    if num_bases > num_relations:
        logger.warning(f"num_bases {num_bases} exceeds the {num_relations} relations of the graph, using {num_relations}")
        num_bases = num_relations
    resolved = replace(gnn_cfg, num_bases=num_bases, input_dim=feature_dim(cfg.hops, aux_dim), verifier_mode=False)
    resolved.validate(num_relations)
    return resolved


def validation_negatives(g, valid_triples, seed):
    rng = substream(seed, "valid")
    return [sample_negative(g, triple, rng, allow_self_loops=False) for triple in valid_triples]


def _check_valid_triples(g, valid_triples):
    for h, r, t in valid_triples:
        g.check_entity(h)
        g.check_entity(t)
        g.check_relation(r)
        if h == t:
            raise TrainingError(f"validation triple {(h, r, t)} is a self-loop and cannot be scored")


def _reduce(results):
    total = 0.0
    grads = {}
    for loss, example_grads in results:
        total += loss
        for name in sorted(example_grads):
            grads[name] = grads[name] + example_grads[name] if name in grads else example_grads[name].copy()
    return total, grads


def batch_loss(params, extractor, gnn_cfg, cfg, batch, executor):
    """Summed loss and gradients of (index, positive, negatives, dropout seed) jobs, reduced by ascending index."""
    ordered = sorted(batch, key=lambda job: job[0])
    results = executor.map(lambda job: example_loss(params, extractor, gnn_cfg, cfg, *job[1:]), ordered)
    return _reduce(results)


def train(g_train, valid_triples, cfg, gnn_cfg, aux_features=None, events=None, resume=None, resume_best=None, progress=False):
    cfg.validate()
    if g_train.num_triples == 0:
        raise TrainingError("training graph has no triples")
    valid_triples = [tuple(triple) for triple in valid_triples]
    _check_valid_triples(g_train, valid_triples)

    aux_dim = len(next(iter(aux_features.values()))) if aux_features else 0
    gnn_cfg = resolve_gnn_config(gnn_cfg, cfg, g_train.num_relations, aux_dim)
    events = events or EventHub()
    extractor = SubgraphExtractor(g_train, cfg.hops, cfg.mode, cfg.labeling, aux_features)
    relations = g_train.relations.labels

    positives = [triple for triple in g_train.triples if triple[0] != triple[2]]
    if not positives:
        raise TrainingError("training graph only holds self-loops")
    if len(positives) < g_train.num_triples:
        logger.info(f"Skipping {g_train.num_triples - len(positives)} self-loop triples as training positives")
    valid_negatives = validation_negatives(g_train, valid_triples, cfg.seed)

    if resume is not None:
        if resume.adam is None:
            raise TrainingError("checkpoint has no optimizer state to resume from")
        if list(resume.relations) != relations:
            raise TrainingError("checkpoint relation vocabulary does not match the training graph")
        params = resume.params.copy()
        adam = resume.adam.copy()
        gnn_cfg = resume.gnn_config
        start_epoch = resume.epoch + 1
        best_val = resume.best_val_auc_pr
        best = resume_best
        logger.info(f"Resuming from epoch {resume.epoch} (best validation AUC-PR {best_val:.4f})")
    else:
        params = init_params(gnn_cfg, g_train.num_relations, substream(cfg.seed, "init"))
        adam = AdamState()
        start_epoch = 1
        best_val = float("nan")
        best = None

    def snapshot(epoch, val):
        return Checkpoint(params.copy(), gnn_cfg, cfg, relations, epoch, val, best_val, adam.copy())

    history = []
    last = None
    with create_executor(cfg.threads, cfg.deterministic) as executor:
        epochs = range(start_epoch, cfg.epochs + 1)
        for epoch in tqdm(epochs, desc="epochs", disable=not progress):
            rng = substream(cfg.seed, "train", epoch)
            jobs = []
            for idx in rng.permutation(len(positives)):
                pos = positives[idx]
                negatives = [sample_negative(g_train, pos, rng, allow_self_loops=False) for _ in range(cfg.neg_per_pos)]
                jobs.append((int(idx), pos, negatives, int(rng.integers(np.iinfo(np.int64).max))))

            epoch_loss = 0.0
            for start in range(0, len(jobs), cfg.batch_size):
                loss, grads = batch_loss(params, extractor, gnn_cfg, cfg, jobs[start:start + cfg.batch_size], executor)
                grads = clip_gradients(grads, cfg.clip_norm)
                adam_step(params, grads, adam, cfg.lr, l2=cfg.l2)
                epoch_loss += loss
                logger.debug(f"Epoch {epoch} batch {start // cfg.batch_size}: loss {loss:.4f}")

            record = EpochRecord(epoch, epoch_loss / len(jobs))
            if valid_triples and (epoch % cfg.eval_every == 0 or epoch == cfg.epochs):
                pos_scores = score_triples(params, extractor, gnn_cfg, valid_triples, executor)
                neg_scores = score_triples(params, extractor, gnn_cfg, valid_negatives, executor)
                record.val_auc_pr = auc_pr(pos_scores, neg_scores)
                events.emit(TrainingEvent.VALIDATION, epoch=epoch, val_auc_pr=record.val_auc_pr)
                if np.isnan(best_val) or record.val_auc_pr > best_val:
                    best_val = record.val_auc_pr
                    best = snapshot(epoch, record.val_auc_pr)
                    events.emit(TrainingEvent.NEW_BEST, checkpoint=best)
                    logger.info(f"Epoch {epoch}: new best validation AUC-PR {best_val:.4f}")

            logger.info(f"Epoch {epoch}: loss {record.loss:.4f}, validation AUC-PR {record.val_auc_pr:.4f}")
            history.append(record)
            last = snapshot(epoch, record.val_auc_pr)
            events.emit(TrainingEvent.EPOCH_END, record=record, checkpoint=last)

    if last is None:
        raise TrainingError(f"nothing to train: resumed at epoch {start_epoch} with epochs = {cfg.epochs}")
    if best is None:
        best = last
    return TrainResult(best, last, history)
