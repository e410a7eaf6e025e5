from collections import defaultdict
from dataclasses import dataclass

from utils.errors import RuleError


@dataclass(frozen=True)
class PathRule:
    """r_t(X, Y) <- r_1(X, Z_1) and ... and r_k(Z_{k-1}, Y)."""

    head: int
    body: tuple

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(int(r) for r in self.body))
        if not self.body:
            raise RuleError("rule body must hold at least one relation")

    def check(self, num_relations):
        for r in (self.head,) + self.body:
            if not 0 <= r < num_relations:
                raise RuleError(f"rule relation {r} outside vocabulary of size {num_relations}")

    def describe(self, relations=None):
        def name(r):
            return relations.label_of(r) if relations is not None else f"r{r}"

        variables = ["X"] + [f"Z{i}" for i in range(1, len(self.body))] + ["Y"]
        atoms = [f"{name(r)}({variables[i]},{variables[i + 1]})" for i, r in enumerate(self.body)]
        return f"{name(self.head)}(X,Y) <- " + " & ".join(atoms)


def rule_satisfied(g, rule, u, v):
    """(satisfied, witness) where witness binds Z_1..Z_{k-1}; bindings may repeat."""
    g.check_entity(u)
    g.check_entity(v)
    body = rule.body
    dead = set()

    def search(node, depth):
        if depth == len(body):
            return [] if node == v else None
        if (node, depth) in dead:
            return None
        for nxt in g.out_index.get((node, body[depth]), []):
            rest = search(nxt, depth + 1)
            if rest is not None:
                return [nxt] + rest
        dead.add((node, depth))
        return None

    path = search(u, 0)
    if path is None:
        return False, None
    return True, tuple(path[:-1])


def count_walks(g, body, u, v):
    """Number of relation-labeled walks u -> v following `body`."""
    counts = {u: 1}
    for r in body:
        reached = defaultdict(int)
        for node, c in counts.items():
            for nxt in g.out_index.get((node, r), []):
                reached[nxt] += c
        counts = reached
    return counts.get(v, 0)


def check_shared_head(rules):
    heads = {rule.head for rule in rules}
    if len(heads) > 1:
        raise RuleError(f"rules in a set must share their head relation, got {sorted(heads)}")


def count_satisfied(g, rules, u, v):
    check_shared_head(rules)
    return sum(1 for rule in rules if rule_satisfied(g, rule, u, v)[0])
