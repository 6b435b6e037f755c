"""Python bindings for the foi tracking and retrieval engine."""

from ._foi import (
    AlertEvent,
    AssociationMode,
    BoundingBox,
    ClassTaxonomy,
    CompositeWeights,
    ContractViolation,
    Detection,
    FrameDetections,
    InputError,
    LogitModel,
    Match,
    PipelineConfig,
    Point,
    ReferenceStore,
    Session,
    TrackerConfig,
    Tracker,
    Zone,
    aggregate_label,
    average_precision,
    bce_logit_gradient,
    bce_multilabel,
    bench_store,
    cosine_similarity,
    dice_loss,
    id_switches,
    iou,
    l2_normalize,
    majority_vote,
    precision_recall_f1,
    random_store,
    squared_l2_distance,
    total_loss,
    triplet_loss,
    zone_contains,
    approaching,
    center,
    run_cli,
)

__all__ = [name for name in dir() if not name.startswith("_")]
