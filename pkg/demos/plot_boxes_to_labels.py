"""
From bounding boxes to pixel labels
===================================

Build an image with two coloured objects, annotate them with boxes only,
and compare the two conversions: per-box GrabCut and the box-prior dense
CRF.  Since the image is synthetic, the true mask is known and both
results can be scored.
"""
import numpy as np

from synseg.evaluation import evaluate_pairs
from synseg.voc import VOC, Box, BoxAnnotation
from synseg.weak import CrfParams, GrabCutParams
from synseg.weak.convert import label_image

rng = np.random.default_rng(0)
h, w = 90, 120

##############################################################################
# A textured greenish background, a red disc (a "person") and an olive
# rectangle (a "dog") that the disc partly overlaps.
image = np.clip(rng.normal([60, 120, 60], 25, (h, w, 3)), 0, 255)
truth = np.zeros((h, w), np.uint8)
truth[50:80, 60:110] = VOC.index("dog")
image[50:80, 60:110] = (120, 150, 70)
yy, xx = np.mgrid[:h, :w]
disc = (yy - 40) ** 2 + (xx - 45) ** 2 <= 25 ** 2
truth[disc] = VOC.index("person")
image[disc] = (200, 30, 30)
image = np.clip(image + rng.normal(0, 18, image.shape), 0, 255).astype(np.uint8)

# Boxes are a few pixels loose, as human annotations usually are.
annotation = BoxAnnotation("demo", (
    Box(VOC.index("person"), 17, 12, 74, 69),
    Box(VOC.index("dog"), 57, 47, 113, 83),
))

##############################################################################
# Run both methods and score them against the known truth.
for method in ("grabcut", "crf"):
    labels = label_image(image, annotation, method, GrabCutParams(), CrfParams(), seed=1)
    report = evaluate_pairs([(truth, labels)])
    scores = {VOC.names[c]: report.per_class[c] for c in (0, 8, 12, 15) if not np.isnan(report.per_class[c])}
    print(f"{method:8s} mean IoU {report.mean:.3f}  " +
          "  ".join(f"{k}={v:.3f}" for k, v in scores.items()))

##############################################################################
# A box taken literally, i.e. every pixel inside it labelled with its class,
# is the baseline both methods should beat.
boxes_only = np.zeros_like(truth)
for b in sorted(annotation.boxes, key=lambda b: -b.area):
    boxes_only[b.slices] = b.class_index
print(f"{'boxes':8s} mean IoU {evaluate_pairs([(truth, boxes_only)]).mean:.3f}")
