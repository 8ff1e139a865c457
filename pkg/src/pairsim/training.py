"""AdaDelta optimization, the mini-batch training loop, and checkpoints.

The update rule keeps two decayed accumulators per parameter entry,
mean squared gradient and mean squared update:

    Eg2  <- rho * Eg2  + (1 - rho) * g^2
    dx    = - sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g
    Edx2 <- rho * Edx2 + (1 - rho) * dx^2
    theta <- theta + dx

There is no learning rate.  Training is deterministic given (seed,
data, config): batch order comes from the "shuffle" stream, dropout
masks from the "dropout" stream, and initialization from "init".
Embedding tables are never updated.

Checkpoints are a versioned binary format: magic ``PSIM``, a uint32
format version, a uint64-length-prefixed canonical JSON metadata block
(model spec, parameter shapes, config echo, epoch, rng states), then
every parameter array as little-endian float64 in the canonical order
of ``model.named_parameters``, then optionally the two optimizer
accumulators per parameter in the same order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import model as md
from . import numcore as nc
from . import objectives as obj
from .errors import CheckpointError, ConfigError, DataError, NumericError
from .evaldata import PairDataset
from .rng import stream

MAGIC = b"PSIM"
FORMAT_VERSION = 1


@dataclass
class AdaDeltaState:
    """Decayed squared-gradient and squared-update accumulators."""

    rho: float
    epsilon: float
    Eg2: dict[str, np.ndarray] = field(default_factory=dict)
    Edx2: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros(cls, params: md.ModelParams, rho: float = 0.95,
              epsilon: float = 1e-6) -> "AdaDeltaState":
        state = cls(rho=rho, epsilon=epsilon)
        for name, arr in md.named_parameters(params):
            state.Eg2[name] = np.zeros_like(arr)
            state.Edx2[name] = np.zeros_like(arr)
        return state


def adadelta_step(state: AdaDeltaState, params: md.ModelParams,
                  grads: dict[str, np.ndarray], weight_decay: float = 0.0,
                  clip_norm: float = 0.0):
    """One in-place update of every parameter array."""
    named = md.named_parameters(params)
    if clip_norm > 0.0:
        sq = sum(float((grads[n] ** 2).sum()) for n, _ in named if n in grads)
        norm = np.sqrt(sq)
        if norm > clip_norm:
            grads = {k: g * (clip_norm / norm) for k, g in grads.items()}
    rho, eps = state.rho, state.epsilon
    for name, arr in named:
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(arr)
        if g.shape != arr.shape:
            raise ConfigError(
                f"gradient shape {g.shape} does not match parameter "
                f"{name} {arr.shape}")
        if weight_decay > 0.0:
            g = g + weight_decay * arr
        Eg2, Edx2 = state.Eg2[name], state.Edx2[name]
        Eg2 *= rho
        Eg2 += (1.0 - rho) * g * g
        dx = -np.sqrt(Edx2 + eps) / np.sqrt(Eg2 + eps) * g
        Edx2 *= rho
        Edx2 += (1.0 - rho) * dx * dx
        arr += dx


@dataclass
class TrainConfig:
    batch_size: int = 30
    epochs: int = 50
    rho: float = 0.95
    epsilon: float = 1e-6
    seed: int = 13
    patience: int = 10
    shuffle: bool = True
    weight_decay: float = 0.0
    clip_norm: float = 0.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid_metric: Optional[float]


@dataclass
class TrainResult:
    params: md.ModelParams          # best checkpointed parameters
    state: AdaDeltaState
    history: list[EpochRecord]
    best_epoch: int
    best_metric: Optional[float]
    rng_states: dict


def _snapshot_params(params: md.ModelParams) -> md.ModelParams:
    return md.with_leaves(params, {n: a.copy() for n, a in md.named_parameters(params)})


def _snapshot_state(state: AdaDeltaState) -> AdaDeltaState:
    return AdaDeltaState(rho=state.rho, epsilon=state.epsilon,
                         Eg2={k: v.copy() for k, v in state.Eg2.items()},
                         Edx2={k: v.copy() for k, v in state.Edx2.items()})


def train_step(params: md.ModelParams, state: AdaDeltaState, lex, batch,
               dropout_rng, weight_decay: float = 0.0,
               clip_norm: float = 0.0) -> float:
    """Forward, backward, and one AdaDelta update; returns the batch loss."""
    with nc.GradTape() as tape:
        leaves = {n: tape.leaf(a) for n, a in md.named_parameters(params)}
        m = md.with_leaves(params, leaves)
        loss = md.batch_loss(m, lex, batch, training=True, rng=dropout_rng)
        loss_value = float(nc._value(loss))
        if np.isfinite(loss_value):
            tape.backward(loss)
    if not np.isfinite(loss_value):
        raise NumericError(f"non-finite loss {loss_value}", batch_index=None)
    grads = {n: leaf.grad for n, leaf in leaves.items() if leaf.grad is not None}
    adadelta_step(state, params, grads, weight_decay, clip_norm)
    return loss_value


def train(params: md.ModelParams, lex, data: PairDataset, cfg: TrainConfig,
          valid: Optional[PairDataset] = None, on_epoch=None) -> TrainResult:
    """Mini-batch loop with validation-based selection and early stopping.

    The best checkpoint is the epoch with the highest validation metric
    (Pearson for sts, accuracy otherwise); without a validation set the
    final epoch wins.  Training stops early after ``patience``
    consecutive epochs without improvement.  ``on_epoch`` is called with
    each EpochRecord as it completes.
    """
    if not data.examples:
        raise DataError("training set is empty")
    state = AdaDeltaState.zeros(params, cfg.rho, cfg.epsilon)
    dropout_rng = stream(cfg.seed, "dropout")
    shuffle_rng = stream(cfg.seed, "shuffle")

    history: list[EpochRecord] = []
    best = None  # (metric, epoch, params, state, rng_states)
    stale = 0
    n = len(data.examples)
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n) if cfg.shuffle else np.arange(n)
        losses = []
        for bi, lo in enumerate(range(0, n, cfg.batch_size)):
            batch = [data.examples[i] for i in order[lo:lo + cfg.batch_size]]
            try:
                losses.append(train_step(params, state, lex, batch, dropout_rng,
                                         cfg.weight_decay, cfg.clip_norm))
            except NumericError as exc:
                raise NumericError(f"epoch {epoch} batch {bi}: {exc}",
                                   batch_index=bi) from None
        mean_loss = float(np.mean(losses))
        metric = md.dataset_metric(params, lex, valid) if valid is not None else None
        record = EpochRecord(epoch, mean_loss, metric)
        history.append(record)
        if on_epoch is not None:
            on_epoch(record)

        rng_states = {"dropout": dropout_rng.bit_generator.state,
                      "shuffle": shuffle_rng.bit_generator.state}
        if valid is None:
            best = (None, epoch, _snapshot_params(params), _snapshot_state(state),
                    rng_states)
            continue
        if best is None or metric > best[0]:
            best = (metric, epoch, _snapshot_params(params), _snapshot_state(state),
                    rng_states)
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    metric, epoch, best_params, best_state, rng_states = best
    return TrainResult(params=best_params, state=best_state, history=history,
                       best_epoch=epoch, best_metric=metric, rng_states=rng_states)


# ---------------------------------------------------------------------------
# checkpoint io


def _spec_to_meta(spec: md.ModelSpec) -> dict:
    meta = {"task": spec.task, "encoder": spec.encoder,
            "comparison": spec.comparison, "total_dim": spec.total_dim,
            "H": spec.H, "l": spec.l, "L": spec.L, "d_neu": spec.d_neu,
            "C": spec.C, "dropout_p": spec.dropout_p,
            "label_names": spec.label_names}
    if spec.score is not None:
        meta["score"] = {"K": spec.score.K, "raw_min": spec.score.raw_min,
                         "raw_max": spec.score.raw_max}
    return meta


def _spec_from_meta(meta: dict) -> md.ModelSpec:
    score = None
    if "score" in meta:
        s = meta["score"]
        score = obj.ScoreSpec(K=s["K"], raw_min=s["raw_min"], raw_max=s["raw_max"])
    return md.ModelSpec(task=meta["task"], encoder=meta["encoder"],
                        comparison=meta["comparison"], total_dim=meta["total_dim"],
                        H=meta["H"], l=meta["l"], L=meta["L"], d_neu=meta["d_neu"],
                        C=meta["C"], dropout_p=meta["dropout_p"], score=score,
                        label_names=meta["label_names"])


def _canonical_json(obj_) -> bytes:
    return json.dumps(obj_, sort_keys=True, separators=(",", ":"),
                      default=_json_default).encode("utf-8")


def _json_default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer, np.floating)):
        return x.item()
    raise TypeError(f"not serializable: {type(x)}")


def save_checkpoint(path, params: md.ModelParams,
                    state: Optional[AdaDeltaState] = None,
                    meta: Optional[dict] = None):
    """Write a deterministic, bit-reproducible checkpoint file."""
    named = md.named_parameters(params)
    header = {
        "format_version": FORMAT_VERSION,
        "spec": _spec_to_meta(params.spec),
        "param_order": [n for n, _ in named],
        "param_shapes": {n: list(a.shape) for n, a in named},
        "has_state": state is not None,
    }
    if state is not None:
        header["rho"] = state.rho
        header["epsilon"] = state.epsilon
    header.update(meta or {})
    blob = _canonical_json(header)
    out = [MAGIC, struct.pack("<I", FORMAT_VERSION),
           struct.pack("<Q", len(blob)), blob]
    for _, arr in named:
        out.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    if state is not None:
        for group in (state.Eg2, state.Edx2):
            for name, _ in named:
                out.append(np.ascontiguousarray(group[name], dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(out))


def _config_mismatch(meta_spec: dict, cfg) -> Optional[str]:
    pairs = [("filters", "H"), ("lstm_dim", "l"), ("max_len", "L"),
             ("d_neu", "d_neu"), ("task", "task"), ("encoder", "encoder"),
             ("comparison", "comparison")]
    for key, field_ in pairs:
        have = meta_spec[field_]
        want = getattr(cfg, key, None)
        if want is not None and want != have:
            return (f"checkpoint has {key} = {have}, configuration says {want}")
    return None


def load_checkpoint(path, cfg=None):
    """Read (params, state, meta); bit-exact round trip of save_checkpoint."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version = struct.unpack("<I", raw[4:8])[0]
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: format version {version}, this build reads {FORMAT_VERSION}")
    (meta_len,) = struct.unpack("<Q", raw[8:16])
    ofs = 16 + meta_len
    if len(raw) < ofs:
        raise CheckpointError(f"{path}: truncated metadata block")
    try:
        meta = json.loads(raw[16:ofs].decode("utf-8"))
    except ValueError as exc:
        raise CheckpointError(f"{path}: corrupt metadata ({exc})") from exc

    spec = _spec_from_meta(meta["spec"])
    if cfg is not None:
        problem = _config_mismatch(meta["spec"], cfg)
        if problem:
            raise CheckpointError(f"{path}: {problem}")

    def take(shape):
        nonlocal ofs
        size = int(np.prod(shape)) if shape else 1
        end = ofs + 8 * size
        if len(raw) < end:
            raise CheckpointError(f"{path}: truncated parameter data")
        arr = np.frombuffer(raw[ofs:end], dtype="<f8").reshape(shape).copy()
        ofs = end
        return arr

    shapes = meta["param_shapes"]
    leaves = {name: take(shapes[name]) for name in meta["param_order"]}
    params = md.with_leaves(md.build_model(spec, seed=0), leaves)

    state = None
    if meta.get("has_state"):
        state = AdaDeltaState(rho=meta["rho"], epsilon=meta["epsilon"])
        state.Eg2 = {name: take(shapes[name]) for name in meta["param_order"]}
        state.Edx2 = {name: take(shapes[name]) for name in meta["param_order"]}
    if ofs != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - ofs} trailing bytes")
    return params, state, meta
