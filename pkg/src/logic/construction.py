"""Hand-set network parameters that encode a path rule.

Every layer passes messages along edge direction (head to tail) with unit
relation weights and no self term. Layer l lets through only edges whose
relation is the l-th body relation: the attention gate reads a 1-d relation
embedding e_r = r and fires on a triangular bump centred at r_l. Starting from
an indicator on u, the state of v after the last layer counts the walks that
realise the body.
"""
import numpy as np

from core.subgraph import LabeledSubgraph
from model.gnn import GnnConfig, GnnParams, expected_shapes, layer_prefix, score_triplet
from logic.rules import check_shared_head
from utils.constants import VerifierConstants as VC
from utils.errors import RuleError

SOURCE_INDICATOR = "source_indicator"


def verifier_config(num_layers):
    return GnnConfig(
        num_layers=num_layers,
        hidden_dim=1,
        num_bases=1,
        attention_enabled=True,
        jk_enabled=False,
        edge_dropout_rate=0.0,
        input_dim=1,
        aggregate_in_neighbors=True,
        attention_hidden_dim=3,
        verifier_mode=True,
    )


def construct_rule_params(rule, num_relations, max_layers=VC.MAX_RULE_LENGTH):
    if len(rule.body) > max_layers:
        raise RuleError(f"rule of length {len(rule.body)} needs more than the {max_layers} configured layers")
    rule.check(num_relations)

    cfg = verifier_config(len(rule.body))
    gain = VC.ATTENTION_GAIN
    tensors = {name: np.zeros(shape) for name, shape in expected_shapes(cfg, num_relations).items()}
    # attention input rows: [h_s, h_t, e_r, e_rt]
    rel_row = 2 * cfg.input_dim
    for layer, r_l in enumerate(rule.body):
        prefix = layer_prefix(layer)
        tensors[f"{prefix}.basis"] = np.ones((1, 1, 1))
        tensors[f"{prefix}.coeff"] = np.ones((num_relations, 1))
        tensors[f"{prefix}.attn_w1"][rel_row, :] = 1.0
        tensors[f"{prefix}.attn_b1"] = np.array([[-(r_l - 1.0), -float(r_l), -(r_l + 1.0)]])
        tensors[f"{prefix}.attn_w2"] = np.array([[2.0 * gain], [-4.0 * gain], [2.0 * gain]])
        tensors[f"{prefix}.attn_b2"] = np.array([[-gain]])
    tensors["attn_rel_emb"] = np.arange(num_relations, dtype=np.float64).reshape(-1, 1)
    return GnnParams(tensors), cfg


def whole_graph_subgraph(g, u, v, head):
    """The full graph as one subgraph, u first and v second, source-indicator features."""
    if u == v:
        raise RuleError(f"target nodes must differ, got u = v = {u}")
    order = [u, v] + [n for n in range(g.num_entities) if n not in (u, v)]
    index = {node: i for i, node in enumerate(order)}
    edges = [(index[h], r, index[t]) for h, r, t in g.triples]
    sub = LabeledSubgraph(order, edges, (0, head, 1), k=0)
    features = np.zeros((len(order), 1))
    features[0, 0] = 1.0
    return sub.with_labels(None, None, features, SOURCE_INDICATOR)


def rule_score(g, rule, u, v, max_layers=VC.MAX_RULE_LENGTH):
    params, cfg = construct_rule_params(rule, g.num_relations, max_layers)
    return score_triplet(whole_graph_subgraph(g, u, v, rule.head), params, cfg).item()


def rule_set_score(g, rules, u, v, max_layers=VC.MAX_RULE_LENGTH):
    """Summed construction: one encoded network per rule, outputs added."""
    check_shared_head(rules)
    return float(sum(rule_score(g, rule, u, v, max_layers) for rule in rules))
