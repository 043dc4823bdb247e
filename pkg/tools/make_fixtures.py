"""Regenerate the checked-in synthetic dataset excerpts under tests/data/.

The excerpts mimic the shape and label statistics of the Yeast and Scene
multi-label benchmarks (which cannot be redistributed here): label totals
are fixed exactly so the label cardinality / density of each file is a
known rational number that the tests assert against.
"""

from __future__ import annotations

import pathlib

import numpy as np

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"

# name -> (rows, features, labels, total positive labels, seed)
SPECS = {
    "yeast_shaped_50.csv": (50, 103, 14, 212, 101),  # LC = 212/50 = 4.24
    "scene_shaped_50.csv": (50, 294, 6, 53, 202),  # LC = 53/50 = 1.06
}


def make_file(path: pathlib.Path, rows: int, n_feat: int, n_lab: int,
              ones: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    features = rng.uniform(-1.0, 1.0, size=(rows, n_feat))
    labels = np.zeros(rows * n_lab, dtype=np.int8)
    labels[rng.choice(rows * n_lab, size=ones, replace=False)] = 1
    labels = labels.reshape(rows, n_lab)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(rows):
            feats = ",".join(f"{v:.4f}" for v in features[i])
            labs = ",".join(str(v) for v in labels[i])
            fh.write(f"{feats},{labs}\n")
    assert int(labels.sum()) == ones


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, (rows, n_feat, n_lab, ones, seed) in SPECS.items():
        make_file(OUT_DIR / name, rows, n_feat, n_lab, ones, seed)
        print(f"wrote {OUT_DIR / name}")


if __name__ == "__main__":
    main()
