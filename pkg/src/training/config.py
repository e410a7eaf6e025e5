from dataclasses import asdict, dataclass

from core.subgraph import ExtractionMode, LabelingScheme
from utils.constants import TrainConstants as TC
from utils.errors import ConfigError


@dataclass
class TrainConfig:
    margin: float = TC.MARGIN
    lr: float = TC.LEARNING_RATE
    l2: float = TC.L2
    clip_norm: float = TC.CLIP_NORM
    epochs: int = TC.EPOCHS
    eval_every: int = TC.EVAL_EVERY
    batch_size: int = TC.BATCH_SIZE
    neg_per_pos: int = TC.NEG_PER_POS
    hops: int = TC.HOPS
    seed: int = TC.SEED
    mode: str = TC.EXTRACTION_MODE
    labeling: str = TC.LABELING_SCHEME
    threads: int = 1
    deterministic: bool = False

    def validate(self):
        if self.margin < 0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if self.l2 < 0:
            raise ConfigError(f"l2 must be >= 0, got {self.l2}")
        if self.clip_norm <= 0:
            raise ConfigError(f"clip_norm must be > 0, got {self.clip_norm}")
        for name in ("epochs", "eval_every", "batch_size", "neg_per_pos", "hops", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.mode not in ExtractionMode.ALL:
            raise ConfigError(f"mode must be one of {', '.join(ExtractionMode.ALL)}, got '{self.mode}'")
        if self.labeling not in LabelingScheme.ALL:
            raise ConfigError(f"labeling must be one of {', '.join(LabelingScheme.ALL)}, got '{self.labeling}'")

    def to_dict(self):
        return asdict(self)
