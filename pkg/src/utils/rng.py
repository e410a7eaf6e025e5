import hashlib

import numpy as np


def _stream_key(part):
    if isinstance(part, (int, np.integer)):
        return int(part)
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed, *names):
    """Named random stream derived from one seed.

    substream(7, "train", 3) never shares state with substream(7, "eval"), so
    changing how evaluation samples leaves training untouched.
    """
    entropy = [int(seed)] + [_stream_key(name) for name in names]
    return np.random.default_rng(np.random.SeedSequence(entropy))
