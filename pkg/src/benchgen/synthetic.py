import logging

from core.graph import KnowledgeGraph

logger = logging.getLogger(__name__)

BODY_FIRST = "r1"
BODY_SECOND = "r2"
NOISE = "noise"
TARGET = "r_t"


def _random_edges(rng, num_entities, count):
    edges = set()
    while len(edges) < count:
        h, t = (int(x) for x in rng.integers(num_entities, size=2))
        if h != t:
            edges.add((h, t))
    return sorted(edges)


def generate_rule_triples(num_entities, edges_per_relation, rng, prefix="e"):
    """Labeled triples governed by r_t(X, Y) <- r1(X, Z) and r2(Z, Y).

    r1, r2 and a noise relation get `edges_per_relation` random edges each;
    r_t holds for exactly the pairs X != Y the body reaches.
    """
    max_edges = num_entities * (num_entities - 1)
    if num_entities < 3 or edges_per_relation < 1 or edges_per_relation > max_edges:
        raise ValueError(f"cannot place {edges_per_relation} edges per relation on {num_entities} entities")

    def name(i):
        return f"{prefix}{i}"

    body_first = _random_edges(rng, num_entities, edges_per_relation)
    body_second = _random_edges(rng, num_entities, edges_per_relation)
    noise = _random_edges(rng, num_entities, edges_per_relation)

    second_out = {}
    for z, y in body_second:
        second_out.setdefault(z, []).append(y)
    implied = sorted({(x, y) for x, z in body_first for y in second_out.get(z, []) if x != y})

    triples = [(name(h), BODY_FIRST, name(t)) for h, t in body_first]
    triples += [(name(h), BODY_SECOND, name(t)) for h, t in body_second]
    triples += [(name(h), NOISE, name(t)) for h, t in noise]
    triples += [(name(h), TARGET, name(t)) for h, t in implied]
    logger.debug(f"Generated {len(triples)} triples, {len(implied)} implied by the rule")
    return triples


def generate_rule_graph(num_entities, edges_per_relation, rng, prefix="e", relations=None):
    return KnowledgeGraph.from_labeled(generate_rule_triples(num_entities, edges_per_relation, rng, prefix), relations=relations)
