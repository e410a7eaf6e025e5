import logging
from collections import defaultdict

import numpy as np

from utils.errors import GraphFormatError, InvalidIdError

logger = logging.getLogger(__name__)


class Vocabulary:
    """Label <-> dense id map, ids assigned in first-appearance order."""

    def __init__(self, labels=()):
        self._ids = {}
        self._labels = []
        for label in labels:
            self.add(label)

    def add(self, label):
        if label not in self._ids:
            self._ids[label] = len(self._labels)
            self._labels.append(label)
        return self._ids[label]

    def id_of(self, label):
        try:
            return self._ids[label]
        except KeyError:
            raise InvalidIdError(f"unknown label '{label}'") from None

    def label_of(self, idx):
        if not 0 <= idx < len(self._labels):
            raise InvalidIdError(f"id {idx} outside vocabulary of size {len(self._labels)}")
        return self._labels[idx]

    def copy(self):
        return Vocabulary(self._labels)

    @property
    def labels(self):
        return list(self._labels)

    def __contains__(self, label):
        return label in self._ids

    def __len__(self):
        return len(self._labels)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self._labels == other._labels


class KnowledgeGraph:
    def __init__(self, entities, relations, triples):
        self.entities = entities
        self.relations = relations

        seen = set()
        kept = []
        for triple in triples:
            h, r, t = (int(x) for x in triple)
            if not (0 <= h < len(entities) and 0 <= t < len(entities)):
                raise InvalidIdError(f"triple {(h, r, t)} references an entity outside the vocabulary")
            if not 0 <= r < len(relations):
                raise InvalidIdError(f"triple {(h, r, t)} references a relation outside the vocabulary")
            if (h, r, t) in seen:
                continue
            seen.add((h, r, t))
            kept.append((h, r, t))

        self.triples = kept
        self.duplicates_dropped = len(triples) - len(kept) if hasattr(triples, "__len__") else 0
        self._triple_set = seen
        self.out_index, self.in_index, self.undirected_index, self._out_edges = self._build_indices()

    @classmethod
    def from_labeled(cls, labeled_triples, relations=None, entities=None):
        entities = entities.copy() if entities is not None else Vocabulary()
        relations = relations.copy() if relations is not None else Vocabulary()
        triples = []
        for h, r, t in labeled_triples:
            triples.append((entities.add(h), relations.add(r), entities.add(t)))
        return cls(entities, relations, triples)

    @property
    def num_entities(self):
        return len(self.entities)

    @property
    def num_relations(self):
        return len(self.relations)

    @property
    def num_triples(self):
        return len(self.triples)

    def _build_indices(self):
        out_index = defaultdict(list)
        in_index = defaultdict(list)
        undirected = [set() for _ in range(self.num_entities)]
        out_edges = [[] for _ in range(self.num_entities)]

        for h, r, t in self.triples:
            out_index[(h, r)].append(t)
            in_index[(t, r)].append(h)
            undirected[h].add(t)
            undirected[t].add(h)
            out_edges[h].append((r, t))

        out_index = {key: sorted(value) for key, value in out_index.items()}
        in_index = {key: sorted(value) for key, value in in_index.items()}
        undirected = [sorted(neighbors) for neighbors in undirected]
        out_edges = [sorted(edges) for edges in out_edges]
        return out_index, in_index, undirected, out_edges

    def rebuild_indices(self):
        out_index, in_index, undirected, _ = self._build_indices()
        return out_index, in_index, undirected

    def check_entity(self, node):
        if not isinstance(node, (int, np.integer)) or not 0 <= node < self.num_entities:
            raise InvalidIdError(f"invalid entity id {node} (graph has {self.num_entities} entities)")

    def check_relation(self, rel):
        if not isinstance(rel, (int, np.integer)) or not 0 <= rel < self.num_relations:
            raise InvalidIdError(f"invalid relation id {rel} (graph has {self.num_relations} relations)")

    def has_triple(self, h, r, t):
        return (h, r, t) in self._triple_set

    def out_neighbors(self, node, rel):
        self.check_entity(node)
        self.check_relation(rel)
        return list(self.out_index.get((node, rel), []))

    def in_neighbors(self, node, rel):
        self.check_entity(node)
        self.check_relation(rel)
        return list(self.in_index.get((node, rel), []))

    def out_edges(self, node):
        return self._out_edges[node]

    def neighbors(self, node):
        return self.undirected_index[node]

    def degree(self, node):
        return len(self.undirected_index[node])

    def khop_nodes(self, node, k):
        self.check_entity(node)
        if k < 1:
            raise ValueError(f"hop count must be >= 1, got {k}")

        seen = {node}
        frontier = [node]
        for _ in range(k):
            next_frontier = []
            for current in frontier:
                for neighbor in self.undirected_index[current]:
                    if neighbor not in seen:
                        seen.add(neighbor)
                        next_frontier.append(neighbor)
            if not next_frontier:
                break
            frontier = next_frontier
        return seen

    def labeled(self, triple):
        h, r, t = triple
        return self.entities.label_of(h), self.relations.label_of(r), self.entities.label_of(t)

    def labeled_triples(self):
        return [self.labeled(triple) for triple in self.triples]

    def encode_triples(self, labeled_triples):
        encoded = []
        for h, r, t in labeled_triples:
            encoded.append((self.entities.id_of(h), self.relations.id_of(r), self.entities.id_of(t)))
        return encoded

    def without_triples(self, triples):
        removed = set(tuple(triple) for triple in triples)
        kept = [triple for triple in self.triples if triple not in removed]
        return KnowledgeGraph(self.entities, self.relations, kept)

    def to_lines(self):
        return ["\t".join(labels) for labels in self.labeled_triples()]


def parse_triple_lines(lines):
    labeled = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise GraphFormatError(f"line {line_number}: expected 3 tab-separated fields, got {len(fields)}")
        labeled.append(tuple(fields))
    return labeled


def load_triples(source, relations=None):
    """Build a graph from `head<TAB>relation<TAB>tail` lines.

    `source` is the text itself or an iterable of lines. A seed `relations`
    vocabulary keeps relation ids aligned with another graph; relations it does
    not know are appended after the seeded ones.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    labeled = parse_triple_lines(lines)
    if not labeled:
        raise GraphFormatError("no triples found in input")

    g = KnowledgeGraph.from_labeled(labeled, relations=relations)
    g.duplicates_dropped = len(labeled) - g.num_triples
    if g.duplicates_dropped:
        logger.info(f"Dropped {g.duplicates_dropped} duplicate triples")
    logger.debug(f"Loaded {g.num_triples} triples, {g.num_entities} entities, {g.num_relations} relations")
    return g


def read_triples_file(path, relations=None):
    with open(path, "r", encoding="utf-8") as f:
        return load_triples(f.read(), relations=relations)


def read_labeled_file(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_triple_lines(f.read().splitlines())


def write_triples(path, labeled_triples):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for h, r, t in labeled_triples:
            f.write(f"{h}\t{r}\t{t}\n")


def dump_triples(g, path):
    write_triples(path, g.labeled_triples())


def khop_nodes(g, node, k):
    return g.khop_nodes(node, k)


def out_neighbors(g, node, rel):
    return g.out_neighbors(node, rel)


def in_neighbors(g, node, rel):
    return g.in_neighbors(node, rel)


def graph_stats(g):
    """(#relations used, #nodes touching an edge, #links)."""
    used_relations = {r for _, r, _ in g.triples}
    used_nodes = {h for h, _, _ in g.triples} | {t for _, _, t in g.triples}
    return len(used_relations), len(used_nodes), g.num_triples
