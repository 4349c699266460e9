"""
Scoring predictions and writing fine-tuning plans
=================================================

Render a tiny synthetic set, corrupt its labels to stand in for a model's
predictions, score them with the dataset-level mean IoU, and emit the
two training-stage plans that reference the rendered manifest.
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from synseg.evaluation import evaluate_dataset, mean_of_image_ious
from synseg.forge import ForgeConfig, generate_dataset
from synseg.plan import emit_plan
from synseg.voc import VOC, read_label, write_label

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="synseg_demo_"))

##############################################################################
# Three classes, four samples each, at a small frame size.
config = ForgeConfig(width=96, height=72, samples_per_class=4,
                     classes=tuple(VOC.index(n) for n in ("aeroplane", "car", "bottle")))
generate_dataset(config, root / "syn")

##############################################################################
# Fake predictions: erode every object by one pixel and flip a few labels.
rng = np.random.default_rng(0)
(root / "pred").mkdir(exist_ok=True)
pairs = []
for path in sorted((root / "syn" / "labels").glob("*.png")):
    gt = read_label(path)
    pred = gt.copy()
    edge = (gt != np.roll(gt, 1, axis=0)) | (gt != np.roll(gt, 1, axis=1))
    pred[edge] = 0
    noise = rng.random(gt.shape) < 0.01
    pred[noise] = rng.choice(config.classes, size=int(noise.sum()))
    write_label(root / "pred" / path.name, pred)
    pairs.append((gt, pred))

report = evaluate_dataset(root / "pred", root / "syn" / "labels")
print(report.format_table())

# Averaging per-image scores gives a different (and non-standard) number.
print(f"dataset-level mean IoU {report.mean:.4f} vs per-image average {mean_of_image_ious(pairs):.4f}")

##############################################################################
# The plans only describe the training runs; something else executes them.
for stage in ("baseline", "synthetic"):
    print(f"--- {stage}")
    print(emit_plan(stage, [root / "syn" / "manifest.txt"]).to_text())
