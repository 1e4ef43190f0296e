"""Measure transfer between two learning domains.

Trains a small within-domain model for each side, then re-fits it on the
other domain with the feature block frozen (hard) and fine-tuned (soft).
The gap between those runs and the destination's own baseline gives the
specificity, generality and transferability indices.

    python3 demos/03_transfer_indices.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from transferlens.corpus import load_corpus
from transferlens.harness import TrainConfig, evaluate_pair, prepare_datasets

corpus = load_corpus(Path(__file__).resolve().parents[1] / "corpora" / "mini_flights")
cfg = TrainConfig(epochs=60, ensemble=4)

datasets = prepare_datasets(
    [corpus.domain("A1"), corpus.domain("A2"), corpus.domain("B3")], cfg
)
by_id = {ds.id: ds for ds in datasets}

for src, dst in [("A1", "A2"), ("A1", "B3")]:
    rec = evaluate_pair(by_id[src], by_id[dst], cfg)
    print(f"{src} -> {dst}:")
    print(f"  baseline AUC {rec.auc_base:.3f}  hard {rec.auc_hard:.3f}  "
          f"soft {rec.auc_soft:.3f}")
    print(f"  shift {rec.fsi:+.3f}  gain {rec.fgi:+.3f}  "
          f"index {rec.fti():+.3f}")
