import logging

logger = logging.getLogger(__name__)


class TrainingEvent:
    EPOCH_END = "epoch_end"
    VALIDATION = "validation"
    NEW_BEST = "new_best"


class EventHub:
    def __init__(self):
        self.callbacks = {
            TrainingEvent.EPOCH_END: [],
            TrainingEvent.VALIDATION: [],
            TrainingEvent.NEW_BEST: [],
        }

    def register_callback(self, event_type, callback):
        if event_type not in self.callbacks:
            logger.warning(f"Ignoring callback for unknown training event '{event_type}'")
            return
        self.callbacks[event_type].append(callback)

    def emit(self, event_type, **payload):
        for callback in self.callbacks.get(event_type, []):
            callback(**payload)
