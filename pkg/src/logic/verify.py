import logging
from dataclasses import dataclass, field, replace

from tqdm import tqdm

from core.graph import KnowledgeGraph, Vocabulary
from logic.construction import rule_score, rule_set_score
from logic.rules import PathRule, count_walks, rule_satisfied
from utils.constants import VerifierConstants as VC
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class VerifierConfig:
    max_nodes: int = VC.MAX_NODES
    max_relations: int = VC.MAX_RELATIONS
    max_rule_len: int = VC.MAX_RULE_LENGTH
    edge_probability: float = VC.EDGE_PROBABILITY
    pairs_per_trial: int = VC.PAIRS_PER_TRIAL
    max_rules_per_set: int = VC.MAX_RULES_PER_SET
    tolerance: float = VC.RELATIVE_TOLERANCE

    def validate(self):
        if self.max_nodes < 2:
            raise ConfigError(f"max_nodes must be >= 2, got {self.max_nodes}")
        for name in ("max_relations", "max_rule_len", "pairs_per_trial", "max_rules_per_set"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0.0 <= self.edge_probability <= 1.0:
            raise ConfigError(f"edge_probability must be in [0, 1], got {self.edge_probability}")


@dataclass
class Disagreement:
    kind: str
    rules: list
    u: int
    v: int
    score: float
    expected: float
    witness: tuple = None
    triples: list = field(default_factory=list)

    def lines(self):
        out = [f"[{self.kind}] u={self.u} v={self.v} score={self.score!r} expected={self.expected!r}"]
        out += [f"  rule: {rule.describe()}" for rule in self.rules]
        if self.witness is not None:
            out.append(f"  witness: {', '.join(str(z) for z in self.witness)}")
        out += [f"  {h}\t{r}\t{t}" for h, r, t in self.triples]
        return out


@dataclass
class VerificationReport:
    trials: int = 0
    checks: int = 0
    agreements: int = 0
    rule_set_checks: int = 0
    rule_set_agreements: int = 0
    disagreements: list = field(default_factory=list)

    @property
    def agreement_rate(self):
        return self.agreements / self.checks if self.checks else 1.0

    @property
    def passed(self):
        return not self.disagreements

    def lines(self):
        out = [
            f"trials={self.trials}",
            f"checks={self.checks}",
            f"agreements={self.agreements}",
            f"agreement_rate={self.agreement_rate!r}",
            f"rule_set_checks={self.rule_set_checks}",
            f"rule_set_agreements={self.rule_set_agreements}",
            f"disagreements={len(self.disagreements)}",
        ]
        for disagreement in self.disagreements:
            out += disagreement.lines()
        return out

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(self.lines()) + "\n")


def random_graph(rng, max_nodes=VC.MAX_NODES, max_relations=VC.MAX_RELATIONS, edge_probability=VC.EDGE_PROBABILITY):
    """Small random multigraph; self-loops and parallel edges of distinct relations allowed."""
    num_nodes = int(rng.integers(2, max_nodes + 1))
    num_relations = int(rng.integers(1, max_relations + 1))
    triples = []
    for h in range(num_nodes):
        for t in range(num_nodes):
            for r in range(num_relations):
                if rng.random() < edge_probability:
                    triples.append((h, r, t))
    entities = Vocabulary(f"n{i}" for i in range(num_nodes))
    relations = Vocabulary(f"r{j}" for j in range(num_relations))
    return KnowledgeGraph(entities, relations, triples)


def random_rule(rng, num_relations, max_rule_len, head=None):
    length = int(rng.integers(1, max_rule_len + 1))
    body = tuple(int(r) for r in rng.integers(num_relations, size=length))
    head = int(rng.integers(num_relations)) if head is None else head
    return PathRule(head, body)


def _pair(rng, num_nodes):
    u, v = (int(x) for x in rng.choice(num_nodes, size=2, replace=False))
    return u, v


def rule_set_instance(beta, num_rules=VC.MAX_RULES_PER_SET):
    """Graph plus a rule set of `num_rules` length-2 rules, exactly `beta` of them satisfied
    between node 0 and node 1 by one walk each."""
    if not 0 <= beta <= num_rules:
        raise ConfigError(f"beta must be in [0, {num_rules}], got {beta}")
    relations = Vocabulary(["target"] + [f"r{j}" for j in range(2 * num_rules)])
    entities = Vocabulary(["x", "y"] + [f"z{i}" for i in range(num_rules)])
    rules = []
    triples = []
    for i in range(num_rules):
        first, second = 1 + 2 * i, 2 + 2 * i
        rules.append(PathRule(0, (first, second)))
        if i < beta:
            triples += [(0, first, 2 + i), (2 + i, second, 1)]
    return KnowledgeGraph(entities, relations, triples), rules


def verify_rule_encoding(trials, max_rule_len, rng, cfg=None, progress=False):
    """Compare the encoded network against the rule oracle on random graphs.

    Each trial checks single rules on several node pairs (score != 0 iff the
    rule holds) and one shared-head rule set (summed score equals the summed
    walk count).
    """
    cfg = replace(cfg or VerifierConfig(), max_rule_len=max_rule_len)
    cfg.validate()
    report = VerificationReport()

    for _ in tqdm(range(trials), desc="verify", unit="trial", disable=not progress):
        g = random_graph(rng, cfg.max_nodes, cfg.max_relations, cfg.edge_probability)
        rule = random_rule(rng, g.num_relations, cfg.max_rule_len)
        report.trials += 1

        for _ in range(cfg.pairs_per_trial):
            u, v = _pair(rng, g.num_entities)
            score = rule_score(g, rule, u, v, cfg.max_rule_len)
            satisfied, witness = rule_satisfied(g, rule, u, v)
            report.checks += 1
            if (score != 0.0) == satisfied:
                report.agreements += 1
            else:
                report.disagreements.append(
                    Disagreement("rule", [rule], u, v, score, float(satisfied), witness, g.labeled_triples())
                )

        num_rules = int(rng.integers(1, cfg.max_rules_per_set + 1))
        rules = [rule] + [random_rule(rng, g.num_relations, cfg.max_rule_len, head=rule.head) for _ in range(num_rules - 1)]
        u, v = _pair(rng, g.num_entities)
        score = rule_set_score(g, rules, u, v, cfg.max_rule_len)
        expected = float(sum(count_walks(g, r.body, u, v) for r in rules))
        report.rule_set_checks += 1
        if abs(score - expected) <= cfg.tolerance * max(1.0, abs(expected)):
            report.rule_set_agreements += 1
        else:
            report.disagreements.append(Disagreement("rule_set", rules, u, v, score, expected, None, g.labeled_triples()))

    if report.disagreements:
        logger.error(f"Verifier found {len(report.disagreements)} disagreements in {report.trials} trials")
    else:
        logger.info(f"Verifier agreed on all {report.checks} rule checks and {report.rule_set_checks} rule-set checks")
    return report
