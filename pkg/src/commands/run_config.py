import logging
import os
from dataclasses import dataclass, field, fields, replace

from benchgen.sampler import SamplerConfig, SplitConfig
from evaluation.evaluator import EvalConfig
from evaluation.fusion import FusionConfig
from model.gnn import GnnConfig
from training.config import TrainConfig
from utils.config import coerce, dataclass_from_mapping, dataclass_lines, format_value, read_key_values
from utils.constants import EvalConstants as EC
from utils.constants import TrainConstants as TC
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

# (attribute, config class, key prefix, fields that never come from the file)
SECTIONS = (
    ("gnn", GnnConfig, "", ("input_dim", "verifier_mode")),
    ("train", TrainConfig, "", ("seed",)),
    ("train_sampler", SamplerConfig, "train_", ("seed",)),
    ("test_sampler", SamplerConfig, "test_", ("seed",)),
    ("split", SplitConfig, "", ()),
    ("eval", EvalConfig, "", ("seed",)),
    ("fusion", FusionConfig, "fusion_", ()),
)

GLOBAL_DEFAULTS = {
    "seed": TC.SEED,
    "aux_features": "",
    "transductive_fraction": EC.TRANSDUCTIVE_FRACTION,
}


def key_table():
    """Every accepted key with its default, in file order."""
    table = {}
    for _, cls, prefix, hidden in SECTIONS:
        hidden_keys = {prefix + name for name in hidden}
        for key, value in dataclass_lines(cls(), prefix).items():
            if key not in hidden_keys:
                table[key] = value
    for key, value in GLOBAL_DEFAULTS.items():
        table[key] = format_value(value)
    return table


def help_epilog():
    width = max(len(key) for key in key_table())
    lines = ["config keys (key=value lines, defaults shown):"]
    lines += [f"  {key.ljust(width)} = {value}" for key, value in key_table().items()]
    return "\n".join(lines)


@dataclass
class RunConfig:
    gnn: GnnConfig = field(default_factory=GnnConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    train_sampler: SamplerConfig = field(default_factory=SamplerConfig)
    test_sampler: SamplerConfig = field(default_factory=SamplerConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    seed: int = TC.SEED
    aux_features: str = ""
    transductive_fraction: float = EC.TRANSDUCTIVE_FRACTION

    @classmethod
    def from_mapping(cls, mapping, seed=None, threads=None):
        unknown = sorted(set(mapping) - set(key_table()))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

        sections = {attr: dataclass_from_mapping(section_cls, mapping, prefix) for attr, section_cls, prefix, _ in SECTIONS}
        extras = {key: coerce(key, mapping[key], default) for key, default in GLOBAL_DEFAULTS.items() if key in mapping}
        rc = cls(**sections, **extras)
        if seed is not None:
            rc.seed = seed
        if threads is not None:
            rc.train = replace(rc.train, threads=threads)
        rc.apply_seed()
        rc.validate()
        return rc

    @classmethod
    def load(cls, path=None, seed=None, threads=None):
        mapping = {}
        if path is not None:
            if not os.path.isfile(path):
                raise FileNotFoundError(f"config file not found: {path}")
            mapping = read_key_values(path)
            logger.debug(f"Read {len(mapping)} config keys from {path}")
        return cls.from_mapping(mapping, seed=seed, threads=threads)

    def apply_seed(self):
        self.train = replace(self.train, seed=self.seed)
        self.train_sampler = replace(self.train_sampler, seed=self.seed)
        self.test_sampler = replace(self.test_sampler, seed=self.seed)
        self.eval = replace(self.eval, seed=self.seed)

    def validate(self):
        self.gnn.validate()
        self.train.validate()
        self.train_sampler.validate()
        self.test_sampler.validate()
        self.split.validate()
        self.eval.validate()
        self.fusion.validate()
        if not 0.0 < self.transductive_fraction < 1.0:
            raise ConfigError(f"transductive_fraction must be in (0, 1), got {self.transductive_fraction}")

    def lines(self):
        values = {}
        for attr, _, prefix, hidden in SECTIONS:
            section = getattr(self, attr)
            values.update({prefix + f.name: format_value(getattr(section, f.name)) for f in fields(section) if f.name not in hidden})
        values.update({key: format_value(getattr(self, key)) for key in GLOBAL_DEFAULTS})
        return [f"{key}={value}" for key, value in values.items()]
