"""Head-body multi-object tracking toolkit: python surface of the C++ core."""

from ._hbtrack import (  # noqa: F401
    BBox,
    Detection,
    EvalReport,
    Gradient,
    LossBatch,
    LossWeights,
    PairedDetection,
    Part,
    Scenario,
    ScenarioSpec,
    TilePlan,
    TrackOutput,
    Tracker,
    TrackerConfig,
    Window,
    aml_gradient,
    aml_loss,
    center_distance,
    evaluate,
    fuse_detections,
    generate_scenario,
    iou,
    lift_detections,
    loss_batch_from_json,
    loss_batch_to_json,
    nms,
    pair_by_embedding,
    pair_by_position,
    plan_tiles,
    pull_loss,
    push_loss,
    solve_assignment,
    strip_heads,
)

__all__ = [name for name in dir() if not name.startswith("_")]
