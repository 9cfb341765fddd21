#!/usr/bin/env python3
"""Smoke test for the coopwatch Python extension.

Builds nothing itself: it expects `cargo build -p coopwatch-py` (or
--release) to have produced target/{debug,release}/libcoopwatch.so, copies
that next to a temp dir as an importable module, and exercises the bound
operations, including a full evaluation of the shipped replay corpus.

Run from the repository root:  python3 python/smoke_test.py
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_cdylib() -> Path:
    candidates = [
        REPO / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libcoopwatch.so", "libcoopwatch.dylib", "coopwatch.dll")
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit("libcoopwatch not found; run `cargo build -p coopwatch-py` first")


def import_module():
    src = locate_cdylib()
    tmp = Path(tempfile.mkdtemp(prefix="coopwatch_py_"))
    dest = tmp / ("coopwatch" + (".pyd" if src.suffix == ".dll" else ".so"))
    shutil.copyfile(src, dest)
    sys.path.insert(0, str(tmp))
    import coopwatch  # noqa: E402

    return coopwatch


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main() -> None:
    cw = import_module()
    failures = []

    def check(name, cond):
        print(f"{'ok' if cond else 'FAIL'}  {name}")
        if not cond:
            failures.append(name)

    # geometry
    check("iou identity", approx(cw.iou((0, 0, 10, 10), (0, 0, 10, 10)), 1.0))
    check("iou disjoint", cw.iou((0, 0, 1, 1), (5, 5, 6, 6)) == 0.0)
    check("iou partial 1/3", approx(cw.iou((0, 0, 2, 2), (1, 0, 3, 2)), 1 / 3, 1e-12))

    kept = cw.nms(
        [(0, 0.9, (0.0, 0.0, 10.0, 1.0)), (0, 0.8, (2.0, 0.0, 12.0, 1.0))], 0.5
    )
    check("nms suppresses overlap", len(kept) == 1 and kept[0][1] == 0.9)
    kept = cw.nms(
        [(0, 0.9, (0.0, 0.0, 10.0, 1.0)), (1, 0.8, (2.0, 0.0, 12.0, 1.0))], 0.5
    )
    check("nms keeps distinct classes", len(kept) == 2)

    pixel = cw.norm_to_pixel((0.25, 0.25, 0.5, 0.5), 200, 100)
    check("norm_to_pixel quarter", pixel == (0.0, 0.0, 100.0, 50.0))
    back = cw.pixel_to_norm(pixel, 200, 100)
    check("pixel_to_norm roundtrip", all(approx(a, b) for a, b in zip(back, (0.25, 0.25, 0.5, 0.5))))

    # labels
    rows = cw.parse_label_file("1 0.5 0.5 0.2 0.1\n", list(cw.DEFAULT_CLASSES))
    check("parse_label_file", rows == [(1, 0.5, 0.5, 0.2, 0.1)])
    text = cw.serialize_label_file(rows)
    check("serialize roundtrip", cw.parse_label_file(text, list(cw.DEFAULT_CLASSES)) == rows)
    try:
        cw.parse_label_file("7 0.5 0.5 0.2 0.1", list(cw.DEFAULT_CLASSES))
        check("out-of-range class rejected", False)
    except ValueError as e:
        check("out-of-range class rejected", "line 1" in str(e))

    # split
    ids = [f"img_{i:03}" for i in range(10)]
    split_a = cw.split_dataset(ids, (0.7, 0.2, 0.1), 42)
    split_b = cw.split_dataset(ids, (0.7, 0.2, 0.1), 42)
    sizes = {s: sum(1 for v in split_a.values() if v == s) for s in ("train", "test", "val")}
    check("split sizes 7/2/1", sizes == {"train": 7, "test": 2, "val": 1})
    check("split deterministic", split_a == split_b)

    # postprocess
    out = cw.postprocess([(0, 0.1, (0, 0, 5, 5)), (0, 0.9, (0, 0, 5, 5))])
    check("postprocess filters and keeps", out == [(0, 0.9, (0.0, 0.0, 5.0, 5.0))])

    # average precision: TP, FP, TP over 2 ground truths
    ap = cw.average_precision([(0.9, True), (0.8, False), (0.7, True)], 2)
    check("average_precision near exact envelope", abs(ap - (0.5 + 0.5 * 2 / 3)) <= 0.01)
    check("average_precision undefined case", cw.average_precision([], 0) is None)

    # full evaluation of the shipped corpus
    corpus = REPO / "fixtures" / "replay_corpus"
    summary = cw.evaluate_files(str(corpus), str(corpus / "detections.jsonl"))
    best = summary["best_f1"]
    check("fixture best F1", approx(best["f1"], 86 / 93, 1e-9))
    check("fixture best confidence", approx(best["confidence"], 0.497, 1e-9))
    expected_confusion = [
        [9, 0, 0, 0, 1],
        [1, 16, 0, 0, 2],
        [0, 0, 12, 0, 4],
        [1, 0, 0, 6, 0],
        [1, 0, 0, 4, 0],
    ]
    check("fixture confusion matrix", summary["confusion"]["counts"] == expected_confusion)
    overall = summary["overall"]
    check(
        "fixture overall metrics finite",
        all(math.isfinite(overall[k]) for k in ("precision", "recall", "map50", "map50_95")),
    )

    if failures:
        print(f"\n{len(failures)} smoke checks failed: {failures}")
        sys.exit(1)
    print(f"\nall smoke checks passed")


if __name__ == "__main__":
    main()
