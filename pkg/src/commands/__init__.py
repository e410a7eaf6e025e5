# Import commands to register
from commands.split import SplitCommand
from commands.train import TrainCommand
from commands.eval import EvalCommand
from commands.verify import VerifyCommand
from commands.ensemble import EnsembleCommand

# Command registry with metadata
COMMANDS = {
    "split": (SplitCommand, {
        "name": "Split",
        "description": "Sample an entity-disjoint train / inductive-test benchmark from one graph",
    }),
    "train": (TrainCommand, {
        "name": "Train",
        "description": "Train the subgraph scoring network and write checkpoints plus a loss log",
    }),
    "eval": (EvalCommand, {
        "name": "Evaluate",
        "description": "AUC-PR and Hits@K of a scorer on held-out edges",
    }),
    "verify": (VerifyCommand, {
        "name": "Verify",
        "description": "Check the path-rule encoding against the rule oracle on random graphs",
    }),
    "ensemble": (EnsembleCommand, {
        "name": "Ensemble",
        "description": "Late fusion of per-method score files and the resulting gain table",
    }),
}
