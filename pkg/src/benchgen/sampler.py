import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass

from core.graph import KnowledgeGraph, dump_triples, graph_stats, write_triples
from utils.constants import SamplerConstants as SC
from utils.constants import TrainConstants as TC
from utils.errors import ConfigError, SamplingError
from utils.rng import substream

logger = logging.getLogger(__name__)


@dataclass
class SamplerConfig:
    num_roots: int = SC.NUM_ROOTS
    hops: int = SC.HOPS
    max_new_per_hop: int = SC.MAX_NEW_PER_HOP
    target_edges: int = SC.TARGET_EDGES
    seed: int = TC.SEED

    def validate(self):
        for name in ("num_roots", "hops", "max_new_per_hop", "target_edges"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass
class SplitConfig:
    valid_fraction: float = SC.VALID_FRACTION
    test_fraction: float = SC.TEST_FRACTION

    def validate(self):
        for name in ("valid_fraction", "test_fraction"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must be in (0, 1), got {value}")


@dataclass
class InductiveSplit:
    train_graph: KnowledgeGraph
    valid_edges: list
    ind_test_graph: KnowledgeGraph
    test_edges: list


def _incident_triples(triples):
    incident = defaultdict(list)
    for triple in triples:
        h, _, t = triple
        incident[h].append(triple)
        if t != h:
            incident[t].append(triple)
    return incident


def sample_neighborhoods(triples, cfg, rng):
    """Entities of capped BFS neighborhoods around uniform roots.

    Only `triples` are walked. Every frontier node contributes at most
    `max_new_per_hop` unvisited neighbors; growth stops once the induced edge
    count reaches `target_edges`.
    """
    incident = _incident_triples(triples)
    neighbors = defaultdict(set)
    for h, _, t in triples:
        neighbors[h].add(t)
        neighbors[t].add(h)

    candidates = sorted(incident)
    if not candidates:
        return set()
    roots = rng.choice(len(candidates), size=min(cfg.num_roots, len(candidates)), replace=False)

    nodes = set()
    edge_count = 0

    def add(node):
        nonlocal edge_count
        nodes.add(node)
        for h, _, t in incident[node]:
            other = t if h == node else h
            if other in nodes:
                edge_count += 1

    for root_idx in roots:
        root = candidates[root_idx]
        if root in nodes:
            continue
        add(root)
        frontier = [root]
        for _ in range(cfg.hops):
            next_frontier = []
            for node in frontier:
                fresh = sorted(n for n in neighbors[node] if n not in nodes)
                if len(fresh) > cfg.max_new_per_hop:
                    fresh = sorted(rng.choice(fresh, size=cfg.max_new_per_hop, replace=False).tolist())
                for n in fresh:
                    add(n)
                next_frontier.extend(fresh)
                if edge_count >= cfg.target_edges:
                    return nodes
            frontier = next_frontier
    return nodes


def _induced(triples, nodes):
    return [(h, r, t) for h, r, t in triples if h in nodes and t in nodes]


def sample_inductive_pair(g, cfg_train, cfg_test):
    """Train graph and an entity-disjoint inductive test graph drawn from `g`."""
    cfg_train.validate()
    cfg_test.validate()

    train_nodes = sample_neighborhoods(g.triples, cfg_train, substream(cfg_train.seed, "split", "train"))
    train_triples = _induced(g.triples, train_nodes)
    if not train_triples:
        raise SamplingError("training sample holds no edges; increase num_roots or hops")

    remainder = [(h, r, t) for h, r, t in g.triples if h not in train_nodes and t not in train_nodes]
    if not remainder:
        raise SamplingError("nothing left after removing the training sample; use a smaller train sampler config")

    test_nodes = sample_neighborhoods(remainder, cfg_test, substream(cfg_test.seed, "split", "test"))
    test_triples = _induced(remainder, test_nodes)

    train_relations = {r for _, r, _ in train_triples}
    kept = [triple for triple in test_triples if triple[1] in train_relations]
    if len(kept) < len(test_triples):
        logger.info(f"Dropped {len(test_triples) - len(kept)} test triples with relations unseen in training")
    if not kept:
        raise SamplingError("inductive test sample holds no edges with training relations")

    train = KnowledgeGraph.from_labeled([g.labeled(triple) for triple in train_triples])
    test = KnowledgeGraph.from_labeled([g.labeled(triple) for triple in kept], relations=train.relations)
    logger.info(f"Sampled train graph {graph_stats(train)} and ind-test graph {graph_stats(test)} (relations, nodes, links)")
    return train, test


def check_inductive_pair(train, test):
    shared = set(train.entities.labels) & {label for h, _, t in test.labeled_triples() for label in (h, t)}
    if shared:
        raise SamplingError(f"train and test graphs share {len(shared)} entities, e.g. '{sorted(shared)[0]}'")
    unseen = {r for _, r, _ in test.labeled_triples()} - {r for _, r, _ in train.labeled_triples()}
    if unseen:
        raise SamplingError(f"test relations missing from the train graph: {', '.join(sorted(unseen))}")


def split_test_edges(g, fraction, rng):
    """Withdraw ceil(fraction * |E|) edges whose endpoints stay in the remaining graph."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"fraction must be in (0, 1), got {fraction}")
    target = math.ceil(fraction * g.num_triples - 1e-9)
    if target >= g.num_triples:
        raise SamplingError(f"withdrawing {target} of {g.num_triples} edges leaves an empty message graph")

    degree = defaultdict(int)
    for h, _, t in g.triples:
        degree[h] += 1
        degree[t] += 1

    chosen = []
    for idx in rng.permutation(g.num_triples):
        if len(chosen) == target:
            break
        h, r, t = g.triples[idx]
        if h == t:
            if degree[h] - 2 < 1:
                continue
        elif degree[h] - 1 < 1 or degree[t] - 1 < 1:
            continue
        degree[h] -= 1
        degree[t] -= 1
        chosen.append((h, r, t))

    if len(chosen) < target:
        logger.warning(f"Only {len(chosen)} of {target} edges could be withdrawn without isolating an entity")
    return g.without_triples(chosen), chosen


def make_split(g, cfg_train, cfg_test, split_cfg):
    split_cfg.validate()
    train, test = sample_inductive_pair(g, cfg_train, cfg_test)
    check_inductive_pair(train, test)
    _, valid_edges = split_test_edges(train, split_cfg.valid_fraction, substream(cfg_train.seed, "split", "valid"))
    _, test_edges = split_test_edges(test, split_cfg.test_fraction, substream(cfg_test.seed, "split", "holdout"))
    return InductiveSplit(train, valid_edges, test, test_edges)


def write_split(out_dir, split):
    os.makedirs(out_dir, exist_ok=True)
    train_message = split.train_graph.without_triples(split.valid_edges)
    dump_triples(train_message, os.path.join(out_dir, "train.txt"))
    write_triples(os.path.join(out_dir, "valid.txt"), [split.train_graph.labeled(e) for e in split.valid_edges])
    test_message = split.ind_test_graph.without_triples(split.test_edges)
    dump_triples(test_message, os.path.join(out_dir, "ind_test_graph.txt"))
    write_triples(os.path.join(out_dir, "test.txt"), [split.ind_test_graph.labeled(e) for e in split.test_edges])

    with open(os.path.join(out_dir, "stats.txt"), "w", encoding="utf-8", newline="\n") as f:
        for name, graph in (("train", split.train_graph), ("ind_test", split.ind_test_graph)):
            relations, nodes, links = graph_stats(graph)
            f.write(f"{name}.relations={relations}\n{name}.nodes={nodes}\n{name}.links={links}\n")
        f.write(f"valid.links={len(split.valid_edges)}\ntest.links={len(split.test_edges)}\n")
    logger.info(f"Wrote split to {out_dir}")
