import logging

import numpy as np
import scipy.sparse as ssp
from scipy.sparse.csgraph import shortest_path

from utils.errors import GraphFormatError, SubgraphError

logger = logging.getLogger(__name__)


class ExtractionMode:
    ENCLOSING = "enclosing"
    FULL_KHOP = "full_khop"

    ALL = (ENCLOSING, FULL_KHOP)


class LabelingScheme:
    DOUBLE_RADIUS = "double_radius"
    CONSTANT = "constant"

    ALL = (DOUBLE_RADIUS, CONSTANT)


class LabeledSubgraph:
    """Enclosing subgraph around a candidate triple.

    Local position 0 is the head target u and 1 the tail target v for every
    extracted subgraph. The candidate edge (u, r_t, v) is always the last entry
    of `edges`. `features` stays None until the subgraph has been labeled.
    """

    def __init__(self, nodes, edges, target, k, mode=ExtractionMode.ENCLOSING):
        self.nodes = list(nodes)
        self.local_index = {node: i for i, node in enumerate(self.nodes)}
        self.edges = list(edges)
        self.target = target
        self.k = k
        self.mode = mode
        self.dist_u = None
        self.dist_v = None
        self.features = None
        self.scheme = None
        self._edge_arrays = None

    @property
    def labeled(self):
        return self.features is not None

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def target_edge_index(self):
        return len(self.edges) - 1

    def edge_arrays(self):
        if self._edge_arrays is None:
            if self.edges:
                heads, rels, tails = (np.array(column, dtype=np.int64) for column in zip(*self.edges))
            else:
                heads = rels = tails = np.zeros(0, dtype=np.int64)
            self._edge_arrays = (heads, rels, tails)
        return self._edge_arrays

    def original_edges(self):
        return [(self.nodes[h], r, self.nodes[t]) for h, r, t in self.edges]

    def with_labels(self, dist_u, dist_v, features, scheme):
        labeled = LabeledSubgraph(self.nodes, self.edges, self.target, self.k, self.mode)
        labeled.dist_u = dist_u
        labeled.dist_v = dist_v
        labeled.features = features
        labeled.scheme = scheme
        return labeled


def feature_dim(k, aux_dim=0):
    return 2 * (k + 2) + aux_dim


def hop_distances(num_nodes, pairs, source, removed=None):
    """Unit-weight undirected distances from `source`, ignoring `removed`.

    Unreachable nodes come back as inf.
    """
    rows = []
    cols = []
    for a, b in pairs:
        if a == b or a == removed or b == removed:
            continue
        rows.append(a)
        cols.append(b)
    rows = np.array(rows, dtype=np.int64)
    cols = np.array(cols, dtype=np.int64)
    adj = ssp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(num_nodes, num_nodes))
    return shortest_path(adj, directed=False, unweighted=True, indices=source)


def _undirected_pairs(g, order, index):
    pairs = []
    for node in order:
        for neighbor in g.neighbors(node):
            if neighbor in index:
                pairs.append((index[node], index[neighbor]))
    return pairs


def prune_enclosing(g, candidates, u, v, k):
    # a node survives when it sits on a u-v walk of length <= k+1 whose interior
    # avoids both targets; repeated until nothing else drops out
    rest = sorted(set(candidates) - {u, v})
    order = [u, v] + rest
    while True:
        index = {node: i for i, node in enumerate(order)}
        pairs = _undirected_pairs(g, order, index)
        dist_u = hop_distances(len(order), pairs, source=0, removed=1)
        dist_v = hop_distances(len(order), pairs, source=1, removed=0)

        keep = [u, v]
        for node in order[2:]:
            du = dist_u[index[node]]
            dv = dist_v[index[node]]
            if du <= k and dv <= k and du + dv <= k + 1:
                keep.append(node)

        if len(keep) == len(order):
            return set(order)
        order = keep


def _induce(g, node_set, u, r_t, v, k, mode):
    order = [u, v] + sorted(node_set - {u, v})
    index = {node: i for i, node in enumerate(order)}

    edges = []
    for node in order:
        for rel, tail in g.out_edges(node):
            if tail in index and (node, rel, tail) != (u, r_t, v):
                edges.append((index[node], rel, index[tail]))

    # candidate edge so the two targets can exchange messages
    edges.append((0, r_t, 1))
    return LabeledSubgraph(order, edges, (0, r_t, 1), k, mode)


def enclosing_nodes(g, u, v, k, mode=ExtractionMode.ENCLOSING):
    if mode not in ExtractionMode.ALL:
        raise SubgraphError(f"unknown extraction mode '{mode}'")
    reach_u = g.khop_nodes(u, k)
    reach_v = g.khop_nodes(v, k)
    if mode == ExtractionMode.FULL_KHOP:
        return reach_u | reach_v
    candidates = (reach_u & reach_v) | {u, v}
    kept = prune_enclosing(g, candidates, u, v, k)
    logger.debug(f"Enclosing subgraph ({u}, {v}): {len(candidates)} candidates, {len(candidates) - len(kept)} pruned")
    return kept


def extract_enclosing(g, u, v, r_t, k, mode=ExtractionMode.ENCLOSING):
    g.check_entity(u)
    g.check_entity(v)
    g.check_relation(r_t)
    if u == v:
        raise SubgraphError(f"target nodes must differ, got u = v = {u}")
    if k < 1:
        raise SubgraphError(f"hop count must be >= 1, got {k}")
    return _induce(g, enclosing_nodes(g, u, v, k, mode), u, r_t, v, k, mode)


def label_nodes(sub, k=None, scheme=LabelingScheme.DOUBLE_RADIUS, aux_features=None, entities=None):
    if scheme not in LabelingScheme.ALL:
        raise SubgraphError(f"unknown labeling scheme '{scheme}'")
    if sub.num_nodes < 2:
        raise SubgraphError("subgraph is missing its target nodes")
    k = sub.k if k is None else k
    cap = k + 1
    u, _, v = sub.target

    pairs = [(h, t) for h, _, t in sub.edges]
    dist_u = np.minimum(hop_distances(sub.num_nodes, pairs, source=u, removed=v), cap)
    dist_v = np.minimum(hop_distances(sub.num_nodes, pairs, source=v, removed=u), cap)
    dist_u = dist_u.astype(np.int64)
    dist_v = dist_v.astype(np.int64)
    dist_u[u], dist_v[u] = 0, 1
    dist_u[v], dist_v[v] = 1, 0

    width = k + 2
    rows = np.arange(sub.num_nodes)
    if scheme == LabelingScheme.DOUBLE_RADIUS:
        slot_u, slot_v = dist_u, dist_v
    else:
        slot_u = slot_v = np.ones(sub.num_nodes, dtype=np.int64)

    features = np.zeros((sub.num_nodes, 2 * width), dtype=np.float64)
    features[rows, slot_u] = 1.0
    features[rows, width + slot_v] = 1.0

    if aux_features is not None:
        extra = []
        for node in sub.nodes:
            if node not in aux_features:
                name = entities.label_of(node) if entities is not None else node
                raise SubgraphError(f"no auxiliary features for entity '{name}'")
            extra.append(aux_features[node])
        features = np.hstack([features, np.vstack(extra)])

    return sub.with_labels(dist_u, dist_v, features, scheme)


def load_aux_features(path, g):
    vectors = {}
    dim = None
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise GraphFormatError(f"{path} line {line_number}: expected 'entity<TAB>f1,f2,...'")
            try:
                vector = np.array([float(x) for x in fields[1].split(",")], dtype=np.float64)
            except ValueError:
                raise GraphFormatError(f"{path} line {line_number}: non-numeric feature value") from None
            if dim is None:
                dim = len(vector)
            elif len(vector) != dim:
                raise GraphFormatError(f"{path} line {line_number}: expected {dim} values, got {len(vector)}")
            if fields[0] in g.entities:
                vectors[g.entities.id_of(fields[0])] = vector
    return vectors


class SubgraphExtractor:
    """Extract + label with one fixed setting, memoizing pruned node sets."""

    def __init__(self, g, k, mode=ExtractionMode.ENCLOSING, scheme=LabelingScheme.DOUBLE_RADIUS, aux_features=None):
        self.graph = g
        self.k = k
        self.mode = mode
        self.scheme = scheme
        self.aux_features = aux_features
        self.cache = {}

    def extract(self, u, r_t, v):
        g = self.graph
        g.check_entity(u)
        g.check_entity(v)
        g.check_relation(r_t)
        if u == v:
            raise SubgraphError(f"target nodes must differ, got u = v = {u}")

        key = (u, v, self.k, self.mode)
        node_set = self.cache.get(key)
        if node_set is None:
            node_set = enclosing_nodes(g, u, v, self.k, self.mode)
            self.cache[key] = node_set

        sub = _induce(g, node_set, u, r_t, v, self.k, self.mode)
        return label_nodes(sub, self.k, self.scheme, self.aux_features, entities=g.entities)
