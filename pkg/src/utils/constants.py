class GnnConstants:
    NUM_LAYERS = 3
    HIDDEN_DIM = 32
    NUM_BASES = 4
    EDGE_DROPOUT_RATE = 0.5

    ATTENTION_ENABLED = True
    JK_ENABLED = True
    AGGREGATE_IN_NEIGHBORS = False


class TrainConstants:
    MARGIN = 10.0
    LEARNING_RATE = 0.01
    L2 = 5e-4
    CLIP_NORM = 1000.0
    EPOCHS = 50
    EVAL_EVERY = 3
    BATCH_SIZE = 16
    NEG_PER_POS = 1
    HOPS = 3
    SEED = 0

    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPS = 1e-8

    EXTRACTION_MODE = "enclosing"
    LABELING_SCHEME = "double_radius"


class EvalConstants:
    NUM_NEGATIVES = 50
    HITS_AT = 10
    TRANSDUCTIVE_FRACTION = 0.10

    FUSION_LEARNING_RATE = 0.1
    FUSION_ITERATIONS = 500


class SamplerConstants:
    NUM_ROOTS = 20
    HOPS = 3
    MAX_NEW_PER_HOP = 50
    TARGET_EDGES = 5000

    VALID_FRACTION = 0.10
    TEST_FRACTION = 0.10


class CheckpointConstants:
    MAGIC = b"GRAILCK1"
    NAME_LENGTH_FORMAT = "<H"
    COUNT_FORMAT = "<I"
    RANK_FORMAT = "<B"
    DIM_FORMAT = "<I"
    REAL_DTYPE = "<f8"

    ADAM_FIRST_PREFIX = "adam.m."
    ADAM_SECOND_PREFIX = "adam.v."

    # written next to the best checkpoint after every epoch
    LAST_SUFFIX = ".last"
    LOSS_LOG_SUFFIX = ".loss.csv"


class VerifierConstants:
    # pre-activation magnitude of the hand-set attention gate
    ATTENTION_GAIN = 20.0
    ALPHA_FLOOR = 1e-6

    MAX_NODES = 12
    MAX_RELATIONS = 4
    MAX_RULE_LENGTH = 3
    EDGE_PROBABILITY = 0.15
    PAIRS_PER_TRIAL = 4
    MAX_RULES_PER_SET = 3

    RELATIVE_TOLERANCE = 1e-9


class ExitCodes:
    OK = 0
    RUNTIME_ERROR = 1
    CONFIG_ERROR = 2
