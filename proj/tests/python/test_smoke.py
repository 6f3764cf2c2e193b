"""Smoke tests for the python bindings.

Runs either against an installed `hbtrack` wheel or against a build tree with
PYTHONPATH pointing at the directory containing the `_hbtrack` extension.
"""

import math

import pytest

try:
    import hbtrack as ht
except ImportError:  # build-tree run: the bare extension is on PYTHONPATH
    import _hbtrack as ht


def test_geometry():
    a = ht.BBox(0, 0, 10, 10)
    b = ht.BBox(5, 5, 10, 10)
    assert ht.iou(a, a) == pytest.approx(1.0)
    assert ht.iou(a, b) == pytest.approx(25.0 / 175.0)
    kept = ht.nms([ht.BBox(0, 0, 10, 10, 0.9), ht.BBox(0, 0, 10, 10, 0.8)], 0.7)
    assert len(kept) == 1 and kept[0].score == 0.9


def test_assignment():
    result = ht.solve_assignment([[1.0, 2.0], [3.0, 0.0]])
    assert result.matches == [(0, 0), (1, 1)]
    assert result.total_cost == pytest.approx(1.0)

    gated = ht.solve_assignment([[9.0]], gate=5.0)
    assert gated.matches == []
    assert gated.unmatched_rows == [0]


def test_loss_kernel():
    batch = ht.LossBatch()
    batch.body_embeddings = [[1.0, 0.0]]
    batch.head_embeddings = [[0.0, 0.0]]
    batch.body_identity = [1]
    batch.head_identity = [1]
    batch.body_box_distances = [[0.0]]
    batch.head_box_distances = [[0.0]]

    assert ht.pull_loss(batch) == pytest.approx(1.5, abs=1e-12)
    assert ht.push_loss(batch) == pytest.approx(0.0, abs=1e-12)
    assert ht.aml_loss(batch) == pytest.approx(1.5, abs=1e-12)

    grad = ht.aml_gradient(batch)
    assert grad.body[0][0] == pytest.approx(3.0, abs=1e-12)
    assert grad.head[0][0] == pytest.approx(-3.0, abs=1e-12)

    line = ht.loss_batch_to_json(batch)
    again = ht.loss_batch_from_json(line)
    assert again.body_embeddings == batch.body_embeddings


def test_pairing_and_tracking():
    def detection(part, x, y, w, h, emb, frame):
        d = ht.Detection()
        d.part = part
        d.box = ht.BBox(x, y, w, h, 0.9)
        d.embedding = emb
        d.frame = frame
        return d

    ids = set()
    tracker = ht.Tracker()
    for frame in range(1, 16):
        cx = 50 + 4.0 * frame
        body = detection(ht.Part.Body, cx - 15, 100, 30, 80, [3.0, 0.0], frame)
        head = detection(ht.Part.Head, cx - 6, 100, 12, 18, [3.0, 0.2], frame)
        paired = ht.pair_by_embedding([body], [head], 2.0)
        assert len(paired) == 1
        assert paired[0].body is not None and paired[0].head is not None
        for row in tracker.step(frame, paired):
            ids.add(row.id)
    assert len(ids) == 1


def test_tiling():
    plan = ht.plan_tiles(8000, 8000, [6400], 0.3)
    assert len(plan.windows) == 4
    xs = sorted({w.x for w in plan.windows})
    assert xs == [0, 1600]


def test_scenario_and_metrics():
    spec = ht.ScenarioSpec()
    spec.num_pedestrians = 6
    spec.num_frames = 30
    spec.seed = 3
    scenario = ht.generate_scenario(spec)
    assert len(scenario.detections) == 30

    gt = {}
    for entry in scenario.truth:
        gt.setdefault(entry.frame, []).append((entry.id, entry.body))

    tracker = ht.Tracker()
    hyp = {}
    for f, dets in enumerate(scenario.detections, start=1):
        for row in tracker.step(f, dets):
            hyp.setdefault(row.frame, []).append((row.id, row.box))

    report = ht.evaluate(gt, hyp)
    assert report.gt_count == 6 * 30
    assert report.mota > 0.0
    assert 0.0 <= report.idf1 <= 1.0
    assert not math.isnan(report.mota)
