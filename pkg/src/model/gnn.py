import logging
from dataclasses import asdict, dataclass

import numpy as np

from core import tape
from core.subgraph import feature_dim
from utils.constants import GnnConstants as GC
from utils.constants import TrainConstants as TC
from utils.constants import VerifierConstants as VC
from utils.errors import ConfigError, ShapeError, SubgraphError

logger = logging.getLogger(__name__)


@dataclass
class GnnConfig:
    num_layers: int = GC.NUM_LAYERS
    hidden_dim: int = GC.HIDDEN_DIM
    num_bases: int = GC.NUM_BASES
    attention_enabled: bool = GC.ATTENTION_ENABLED
    jk_enabled: bool = GC.JK_ENABLED
    edge_dropout_rate: float = GC.EDGE_DROPOUT_RATE
    input_dim: int = feature_dim(TC.HOPS)
    aggregate_in_neighbors: bool = GC.AGGREGATE_IN_NEIGHBORS
    # 0 means "same as hidden_dim"
    attention_hidden_dim: int = 0
    verifier_mode: bool = False

    @property
    def attention_width(self):
        return self.attention_hidden_dim or self.hidden_dim

    def layer_dims(self):
        dims = [(self.input_dim, self.hidden_dim)]
        dims += [(self.hidden_dim, self.hidden_dim)] * (self.num_layers - 1)
        return dims

    def readout_dim(self):
        per_layer = 4 * self.hidden_dim
        return per_layer * self.num_layers if self.jk_enabled else per_layer

    def validate(self, num_relations=None):
        if self.num_layers < 1:
            raise ConfigError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.hidden_dim < 1:
            raise ConfigError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.input_dim < 1:
            raise ConfigError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.num_bases < 1:
            raise ConfigError(f"num_bases must be >= 1, got {self.num_bases}")
        if num_relations is not None and self.num_bases > num_relations:
            raise ConfigError(f"num_bases ({self.num_bases}) exceeds the number of relations ({num_relations})")
        if not 0.0 <= self.edge_dropout_rate < 1.0:
            raise ConfigError(f"edge_dropout_rate must be in [0, 1), got {self.edge_dropout_rate}")
        if self.attention_hidden_dim < 0:
            raise ConfigError(f"attention_hidden_dim must be >= 0, got {self.attention_hidden_dim}")

    def to_dict(self):
        return asdict(self)


def layer_prefix(layer):
    return f"layers.{layer}"


def expected_shapes(cfg, num_relations):
    d = cfg.hidden_dim
    shapes = {}
    for k, (d_in, d_out) in enumerate(cfg.layer_dims()):
        prefix = layer_prefix(k)
        shapes[f"{prefix}.basis"] = (cfg.num_bases, d_in, d_out)
        shapes[f"{prefix}.coeff"] = (num_relations, cfg.num_bases)
        shapes[f"{prefix}.self"] = (d_in, d_out)
        shapes[f"{prefix}.attn_w1"] = (2 * d_in + 2 * d, cfg.attention_width)
        shapes[f"{prefix}.attn_b1"] = (1, cfg.attention_width)
        shapes[f"{prefix}.attn_w2"] = (cfg.attention_width, 1)
        shapes[f"{prefix}.attn_b2"] = (1, 1)
    shapes["attn_rel_emb"] = (num_relations, d)
    shapes["rel_emb"] = (num_relations, d)
    shapes["score_w"] = (cfg.readout_dim(), 1)
    return shapes


class GnnParams:
    """Named float64 tensors of the scoring network."""

    def __init__(self, tensors):
        self.tensors = {name: np.asarray(value, dtype=np.float64) for name, value in tensors.items()}

    def __getitem__(self, name):
        return self.tensors[name]

    def __setitem__(self, name, value):
        self.tensors[name] = np.asarray(value, dtype=np.float64)

    def __contains__(self, name):
        return name in self.tensors

    def names(self):
        return sorted(self.tensors)

    @property
    def num_relations(self):
        return self.tensors["rel_emb"].shape[0]

    def copy(self):
        return GnnParams({name: value.copy() for name, value in self.tensors.items()})

    def bind(self):
        return BoundParams(self)

    def check(self, cfg):
        shapes = expected_shapes(cfg, self.num_relations)
        if set(shapes) != set(self.tensors):
            missing = sorted(set(shapes) - set(self.tensors))
            extra = sorted(set(self.tensors) - set(shapes))
            raise ShapeError(f"parameter set does not match config (missing {missing}, unexpected {extra})")
        for name, shape in shapes.items():
            if self.tensors[name].shape != shape:
                raise ShapeError(f"parameter '{name}' has shape {self.tensors[name].shape}, expected {shape}")
            if not np.all(np.isfinite(self.tensors[name])):
                raise ShapeError(f"parameter '{name}' holds non-finite values")

    def equals(self, other):
        if self.names() != other.names():
            return False
        return all(np.array_equal(self.tensors[name], other.tensors[name]) for name in self.names())


class BoundParams:
    """Fresh tape leaves over the arrays of one GnnParams.

    Every forward pass that needs its own gradients binds anew, so concurrent
    workers never share a gradient slot.
    """

    def __init__(self, params):
        self.params = params
        self.leaves = {name: tape.parameter(value) for name, value in params.tensors.items()}

    def __getitem__(self, name):
        return self.leaves[name]

    @property
    def num_relations(self):
        return self.params.num_relations

    def values(self):
        return [self.leaves[name] for name in sorted(self.leaves)]

    def grads(self):
        return {name: leaf.grad for name, leaf in self.leaves.items()}


def _as_bound(p):
    return p.bind() if isinstance(p, GnnParams) else p


def _glorot(rng, shape):
    fan_in, fan_out = shape[-2], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(cfg, num_relations, rng, zero=False):
    if num_relations < 1:
        raise ConfigError(f"need at least one relation, got {num_relations}")
    cfg.validate(num_relations)

    tensors = {}
    for name, shape in expected_shapes(cfg, num_relations).items():
        if zero or name.endswith("_b1") or name.endswith("_b2"):
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = _glorot(rng, shape)
    return GnnParams(tensors)


def relation_weight(p, layer, rel):
    """W_r for one layer, assembled from the shared basis."""
    params = p.params if isinstance(p, BoundParams) else p
    prefix = layer_prefix(layer)
    coeff = params[f"{prefix}.coeff"][rel]
    return np.tensordot(coeff, params[f"{prefix}.basis"], axes=1)


def _one_hot(indices, size):
    out = np.zeros((len(indices), size))
    out[np.arange(len(indices)), indices] = 1.0
    return out


def _attention(p, layer, h_send, h_recv, rel_rows, target_rows):
    prefix = layer_prefix(layer)
    x = tape.concat([h_send, h_recv, rel_rows, target_rows])
    hidden = tape.relu(tape.add(tape.matmul(x, p[f"{prefix}.attn_w1"]), p[f"{prefix}.attn_b1"]))
    return tape.sigmoid(tape.add(tape.matmul(hidden, p[f"{prefix}.attn_w2"]), p[f"{prefix}.attn_b2"]))


def _snap(alpha):
    data = alpha.data.copy()
    data[data < VC.ALPHA_FLOOR] = 0.0
    data[data > 1.0 - VC.ALPHA_FLOOR] = 1.0
    return tape.constant(data)


def attention_weight(h_s, h_t, rel, r_t, layer, p, cfg):
    if not cfg.attention_enabled:
        return tape.constant(np.ones((1, 1)))
    p = _as_bound(p)
    h_s = h_s if isinstance(h_s, tape.TapeValue) else tape.constant(np.atleast_2d(h_s))
    h_t = h_t if isinstance(h_t, tape.TapeValue) else tape.constant(np.atleast_2d(h_t))
    d_in = cfg.layer_dims()[layer][0]
    if h_s.shape != (1, d_in) or h_t.shape != (1, d_in):
        raise ShapeError(f"attention: layer {layer} expects (1, {d_in}) states, got {h_s.shape} and {h_t.shape}")
    emb = p["attn_rel_emb"]
    alpha = _attention(p, layer, h_s, h_t, tape.slice_rows(emb, rel, rel + 1), tape.slice_rows(emb, r_t, r_t + 1))
    return _snap(alpha) if cfg.verifier_mode else alpha


def message_endpoints(sub, cfg):
    """(senders, relations, receivers) as local index arrays."""
    heads, rels, tails = sub.edge_arrays()
    if cfg.aggregate_in_neighbors:
        return heads, rels, tails
    # t gathers from its out-neighbors: edge (t, r, s) carries s -> t
    return tails, rels, heads


def layer_forward(sub, h_prev, layer, r_t, p, cfg, dropout_mask=None):
    p = _as_bound(p)
    h_prev = tape.as_value(h_prev)
    n = sub.num_nodes
    d_in, _ = cfg.layer_dims()[layer]
    if h_prev.shape != (n, d_in):
        raise ShapeError(f"layer {layer}: expected node states of shape {(n, d_in)}, got {h_prev.shape}")

    prefix = layer_prefix(layer)
    combined = tape.matmul(h_prev, p[f"{prefix}.self"])
    if sub.num_edges == 0:
        return tape.relu(combined)

    if dropout_mask is None:
        dropout_mask = np.ones(sub.num_edges)
    dropout_mask = np.asarray(dropout_mask, dtype=np.float64)
    if dropout_mask.shape != (sub.num_edges,):
        raise ShapeError(f"layer {layer}: edge mask of shape {dropout_mask.shape} for {sub.num_edges} edges")

    senders, rels, receivers = message_endpoints(sub, cfg)
    num_relations = p.num_relations
    gather_send = tape.constant(_one_hot(senders, n))
    gather_recv = _one_hot(receivers, n)
    rel_hot = tape.constant(_one_hot(rels, num_relations))

    h_send = tape.matmul(gather_send, h_prev)
    edge_coeff = tape.matmul(rel_hot, p[f"{prefix}.coeff"])
    basis = p[f"{prefix}.basis"]

    message = None
    for b in range(cfg.num_bases):
        pick = np.zeros((cfg.num_bases, 1))
        pick[b, 0] = 1.0
        projected = tape.mul(tape.matmul(h_send, tape.slice_rows(basis, b)), tape.matmul(edge_coeff, pick))
        message = projected if message is None else tape.add(message, projected)

    if cfg.attention_enabled:
        h_recv = tape.matmul(tape.constant(gather_recv), h_prev)
        emb = p["attn_rel_emb"]
        rel_rows = tape.matmul(rel_hot, emb)
        target_rows = tape.matmul(tape.constant(np.ones((sub.num_edges, 1))), tape.slice_rows(emb, r_t, r_t + 1))
        alpha = _attention(p, layer, h_send, h_recv, rel_rows, target_rows)
        if cfg.verifier_mode:
            alpha = _snap(alpha)
        gate = tape.apply_mask(alpha, dropout_mask.reshape(-1, 1))
    else:
        gate = tape.constant(dropout_mask.reshape(-1, 1))

    message = tape.mul(message, gate)
    aggregated = tape.matmul(tape.constant(gather_recv.T), message)
    return tape.relu(tape.add(combined, aggregated))


def node_states(sub, p, cfg, dropout_masks=None):
    """Per-layer node states h^1..h^L."""
    if not sub.labeled:
        raise SubgraphError("subgraph must be labeled before scoring")
    p = _as_bound(p)
    features = np.asarray(sub.features, dtype=np.float64)
    if features.shape != (sub.num_nodes, cfg.input_dim):
        raise ShapeError(f"features of shape {features.shape} do not match input_dim {cfg.input_dim}")

    _, r_t, _ = sub.target
    h = tape.constant(features)
    states = []
    for layer in range(cfg.num_layers):
        mask = None if dropout_masks is None else dropout_masks[layer]
        h = layer_forward(sub, h, layer, r_t, p, cfg, mask)
        states.append(h)
    return states


def score_triplet(sub, p, cfg, dropout_masks=None):
    p = _as_bound(p)
    states = node_states(sub, p, cfg, dropout_masks)
    u, r_t, v = sub.target

    if cfg.verifier_mode:
        return tape.slice_rows(states[-1], v, v + 1)

    target_emb = tape.slice_rows(p["rel_emb"], r_t, r_t + 1)
    used = states if cfg.jk_enabled else states[-1:]
    pieces = []
    for h in used:
        pieces += [tape.mean_rows(h), tape.slice_rows(h, u, u + 1), tape.slice_rows(h, v, v + 1), target_emb]
    return tape.matmul(tape.concat(pieces), p["score_w"])


def sample_dropout_masks(sub, cfg, rng):
    masks = []
    for _ in range(cfg.num_layers):
        if sub.num_edges == 0:
            masks.append(np.ones(0))
            continue
        mask = (rng.random(sub.num_edges) >= cfg.edge_dropout_rate).astype(np.float64)
        mask[sub.target_edge_index] = 1.0
        masks.append(mask)
    return masks
