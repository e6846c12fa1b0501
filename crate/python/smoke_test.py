#!/usr/bin/env python3
"""Builds the hgk_py extension module and exercises the bindings."""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_module(tmp: Path) -> None:
    subprocess.run(
        ["cargo", "build", "-p", "hgk-py"], cwd=REPO, check=True
    )
    built = REPO / "target" / "debug" / "libhgk_py.so"
    if not built.exists():  # macOS
        built = REPO / "target" / "debug" / "libhgk_py.dylib"
    shutil.copy(built, tmp / "hgk_py.so")
    sys.path.insert(0, str(tmp))


def main() -> None:
    tmp = Path(tempfile.mkdtemp(prefix="hgk_py_"))
    build_module(tmp)
    import hgk_py

    # graph construction and accessors
    g = hgk_py.Graph(
        3,
        [(0, 1), (1, 2)],
        attributes=[[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]],
        class_label=1,
    )
    assert g.node_count == 3 and g.edge_count == 2
    assert g.neighbors(1) == [0, 2]
    assert g.labeled_by_degree().labels == [1, 2, 1]

    # synthetic benchmark generation
    c = hgk_py.gen_synthie(seed=11, graphs_per_superclass=10, seeds_per_graph=4,
                           seed_graph_size=8, attr_dim=6)
    assert len(c) == 20
    assert c.attribute_dim == 6
    assert sorted(set(c.class_labels())) == [0, 1, 2, 3]

    # featurization is seed-deterministic
    f1 = hgk_py.featurize(c.standardized(), iterations=4, seed=5)
    f2 = hgk_py.featurize(c.standardized(), iterations=4, seed=5)
    assert f1 == f2 and len(f1) == 20
    assert all(k.startswith("i") for k in f1[0])

    # normalized gram: symmetric with unit diagonal
    k = hgk_py.gram(c.standardized(), iterations=4, base="sp", seed=5)
    n = len(k)
    assert all(abs(k[i][i] - 1.0) < 1e-12 for i in range(n))
    assert all(k[i][j] == k[j][i] for i in range(n) for j in range(n))

    # TU round trip
    out = tmp / "synth"
    hgk_py.save_tu_dataset(c, str(out))
    back = hgk_py.load_tu_dataset(str(out), c.name)
    assert len(back) == len(c)
    assert back[0].node_count == c[0].node_count

    # cross validation end to end
    report = hgk_py.cross_validate(
        c.standardized().labeled_by_degree(),
        iterations=4,
        label_mode="label-cont",
        wl_depth=2,
        folds=4,
        repetitions=1,
        inner_folds=2,
        c_grid=[1.0],
        epochs=5,
        seed=9,
    )
    assert 0.0 <= report["mean_accuracy"] <= 100.0
    assert len(report["fold_accuracies"]) == 4

    print("smoke test passed")


if __name__ == "__main__":
    main()
