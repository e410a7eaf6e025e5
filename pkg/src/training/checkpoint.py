import json
import logging
import struct
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from model.gnn import GnnConfig, GnnParams
from training.config import TrainConfig
from training.optim import AdamState
from utils.config import coerce, dataclass_lines, format_value
from utils.constants import CheckpointConstants as CC
from utils.errors import CheckpointError, ConfigError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class Checkpoint:
    params: GnnParams
    gnn_config: GnnConfig
    train_config: TrainConfig
    relations: list
    epoch: int = 0
    val_auc_pr: float = float("nan")
    best_val_auc_pr: float = float("nan")
    adam: Optional[AdamState] = None


class _Reader:
    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, count, what):
        end = self.offset + count
        if end > len(self.data):
            raise CheckpointError(f"truncated checkpoint: expected {count} bytes of {what} at offset {self.offset}")
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))[0]


class CheckpointCodec:
    """Binary layout: magic, tensor table, then a key=value config blob."""

    @staticmethod
    def tensors_of(ck):
        tensors = dict(ck.params.tensors)
        if ck.adam is not None:
            for name, value in ck.adam.m.items():
                tensors[CC.ADAM_FIRST_PREFIX + name] = value
            for name, value in ck.adam.v.items():
                tensors[CC.ADAM_SECOND_PREFIX + name] = value
        return tensors

    @staticmethod
    def config_blob(ck):
        entries = {
            "epoch": str(ck.epoch),
            "val_auc_pr": format_value(float(ck.val_auc_pr)),
            "best_val_auc_pr": format_value(float(ck.best_val_auc_pr)),
            "relations": json.dumps(list(ck.relations), ensure_ascii=False),
            "adam_step": str(ck.adam.step) if ck.adam is not None else "-1",
        }
        entries.update(dataclass_lines(ck.gnn_config, prefix="gnn."))
        entries.update(dataclass_lines(ck.train_config, prefix="train."))
        return "".join(f"{key}={entries[key]}\n" for key in sorted(entries)).encode("utf-8")

    @staticmethod
    def encode(ck):
        tensors = CheckpointCodec.tensors_of(ck)
        out = bytearray(CC.MAGIC)
        out += struct.pack(CC.COUNT_FORMAT, len(tensors))
        for name in sorted(tensors):
            value = np.asarray(tensors[name], dtype=CC.REAL_DTYPE)
            encoded = name.encode("utf-8")
            out += struct.pack(CC.NAME_LENGTH_FORMAT, len(encoded))
            out += encoded
            out += struct.pack(CC.RANK_FORMAT, value.ndim)
            for dim in value.shape:
                out += struct.pack(CC.DIM_FORMAT, dim)
            out += value.tobytes(order="C")

        blob = CheckpointCodec.config_blob(ck)
        out += struct.pack(CC.COUNT_FORMAT, len(blob))
        out += blob
        return bytes(out)

    @staticmethod
    def decode(data):
        reader = _Reader(data)
        magic = reader.take(len(CC.MAGIC), "magic")
        if magic != CC.MAGIC:
            raise CheckpointError(f"bad checkpoint magic {magic!r}, expected {CC.MAGIC!r}")

        tensors = {}
        count = reader.unpack(CC.COUNT_FORMAT, "tensor count")
        real_size = np.dtype(CC.REAL_DTYPE).itemsize
        for _ in range(count):
            length = reader.unpack(CC.NAME_LENGTH_FORMAT, "name length")
            try:
                name = reader.take(length, "tensor name").decode("utf-8")
            except UnicodeDecodeError:
                raise CheckpointError("tensor name is not valid UTF-8") from None
            rank = reader.unpack(CC.RANK_FORMAT, "rank")
            shape = tuple(reader.unpack(CC.DIM_FORMAT, "dimension") for _ in range(rank))
            size = int(np.prod(shape, dtype=np.int64))
            raw = reader.take(size * real_size, f"tensor '{name}'")
            tensors[name] = np.frombuffer(raw, dtype=CC.REAL_DTYPE).reshape(shape).astype(np.float64)

        blob_length = reader.unpack(CC.COUNT_FORMAT, "config length")
        try:
            blob = reader.take(blob_length, "config blob").decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError("config blob is not valid UTF-8") from None
        if reader.offset != len(data):
            raise CheckpointError(f"{len(data) - reader.offset} trailing bytes after config blob")
        return CheckpointCodec._assemble(tensors, CheckpointCodec._parse_blob(blob))

    @staticmethod
    def _parse_blob(blob):
        entries = {}
        for line in blob.splitlines():
            key, sep, value = line.partition("=")
            if not sep:
                raise CheckpointError(f"malformed config line '{line}'")
            entries[key] = value
        return entries

    @staticmethod
    def _section(cls, entries, prefix):
        defaults = cls()
        kwargs = {}
        for f in fields(cls):
            key = prefix + f.name
            if key not in entries:
                raise CheckpointError(f"config blob is missing '{key}'")
            kwargs[f.name] = coerce(key, entries.pop(key), getattr(defaults, f.name))
        return cls(**kwargs)

    @staticmethod
    def _assemble(tensors, entries):
        entries = dict(entries)
        try:
            gnn_config = CheckpointCodec._section(GnnConfig, entries, "gnn.")
            train_config = CheckpointCodec._section(TrainConfig, entries, "train.")
            epoch = int(entries.pop("epoch"))
            val = float(entries.pop("val_auc_pr"))
            best = float(entries.pop("best_val_auc_pr"))
            relations = json.loads(entries.pop("relations"))
            adam_step = int(entries.pop("adam_step"))
        except (KeyError, ValueError, ConfigError) as e:
            raise CheckpointError(f"bad checkpoint config blob: {e}") from None
        if entries:
            raise CheckpointError(f"unexpected config keys: {', '.join(sorted(entries))}")

        adam = None
        if adam_step >= 0:
            adam = AdamState(step=adam_step)
        params = {}
        for name, value in tensors.items():
            if name.startswith(CC.ADAM_FIRST_PREFIX):
                (adam or AdamState()).m[name[len(CC.ADAM_FIRST_PREFIX):]] = value
            elif name.startswith(CC.ADAM_SECOND_PREFIX):
                (adam or AdamState()).v[name[len(CC.ADAM_SECOND_PREFIX):]] = value
            else:
                params[name] = value

        ck = Checkpoint(GnnParams(params), gnn_config, train_config, relations, epoch, val, best, adam)
        try:
            ck.params.check(gnn_config)
        except ShapeError as e:
            raise CheckpointError(str(e)) from None
        return ck


def save_checkpoint(ck, path):
    data = CheckpointCodec.encode(ck)
    with open(path, "wb") as f:
        f.write(data)
    logger.debug(f"Wrote checkpoint {path} ({len(data)} bytes, epoch {ck.epoch})")


def load_checkpoint(path):
    with open(path, "rb") as f:
        data = f.read()
    try:
        return CheckpointCodec.decode(data)
    except CheckpointError as e:
        raise CheckpointError(f"{path}: {e}") from None
