"""Two-stage FCN-8s fine-tuning plans, emitted as key-value text.

Stage ``baseline`` fine-tunes every layer on the box-derived real labels;
stage ``synthetic`` then fine-tunes only the score/upsampling head on the
rendered set.  Nothing here trains anything; the plan is handed to an
external training system.

Schema, one ``key = value`` per line, in this order::

    stage             baseline | synthetic
    trainable_layers  "all" or a comma-separated layer list
    base_learning_rate
    optimizer
    loss
    dataset_refs      comma-separated manifest paths (may be empty)
    batch_size        optional, empty when unset
    epochs            optional, empty when unset
    lr_schedule       optional, empty when unset
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

SYNTHETIC_LAYERS = ("score_pool3", "score_pool4", "upscore2", "upscore_pool4", "upscore8")

STAGES = {
    "baseline": ("all", 1e-5),
    "synthetic": (SYNTHETIC_LAYERS, 1e-6),
}


@dataclass(frozen=True)
class FineTunePlan:
    stage: str
    trainable_layers: str | tuple[str, ...]
    base_learning_rate: float
    optimizer: str = "Adam"
    loss: str = "pixelwise_softmax_cross_entropy"
    dataset_refs: tuple[str, ...] = ()
    batch_size: int | None = None
    epochs: int | None = None
    lr_schedule: str | None = None

    def __post_init__(self):
        if self.base_learning_rate <= 0:
            raise ValueError("learning rate must be positive")

    def to_text(self) -> str:
        layers = self.trainable_layers
        if not isinstance(layers, str):
            layers = ",".join(layers)
        fields = [
            ("stage", self.stage),
            ("trainable_layers", layers),
            ("base_learning_rate", repr(self.base_learning_rate)),
            ("optimizer", self.optimizer),
            ("loss", self.loss),
            ("dataset_refs", ",".join(self.dataset_refs)),
            ("batch_size", "" if self.batch_size is None else str(self.batch_size)),
            ("epochs", "" if self.epochs is None else str(self.epochs)),
            ("lr_schedule", self.lr_schedule or ""),
        ]
        return "".join(f"{k} = {v}\n" for k, v in fields)

    @classmethod
    def from_text(cls, text: str) -> "FineTunePlan":
        kv = {}
        for line in text.splitlines():
            if line.strip():
                k, _, v = line.partition("=")
                kv[k.strip()] = v.strip()
        layers = kv["trainable_layers"]
        return cls(
            stage=kv["stage"],
            trainable_layers=layers if layers == "all" else tuple(layers.split(",")),
            base_learning_rate=float(kv["base_learning_rate"]),
            optimizer=kv["optimizer"],
            loss=kv["loss"],
            dataset_refs=tuple(r for r in kv.get("dataset_refs", "").split(",") if r),
            batch_size=int(kv["batch_size"]) if kv.get("batch_size") else None,
            epochs=int(kv["epochs"]) if kv.get("epochs") else None,
            lr_schedule=kv.get("lr_schedule") or None,
        )


def emit_plan(stage: str, manifests: Sequence[str | os.PathLike] = (),
              check_exists: bool = True) -> FineTunePlan:
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}; expected one of {sorted(STAGES)}")
    refs = tuple(os.fspath(m) for m in manifests)
    if check_exists:
        missing = [m for m in refs if not os.path.isfile(m)]
        if missing:
            raise FileNotFoundError(f"manifest not found: {missing[0]}")
    layers, lr = STAGES[stage]
    return FineTunePlan(stage=stage, trainable_layers=layers, base_learning_rate=lr,
                        dataset_refs=refs)
