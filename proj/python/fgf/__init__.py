"""Feature graph fusion for multimodal recognition."""

from ._fgf import (
    Affinity,
    FgfError,
    Graph,
    Samplers,
    build_ejg,
    build_samplers,
    concat_zscore,
    fuse_graphs,
    jaccard,
    knn,
    knn_classify,
    make_splits,
    normalize_affinity,
    run_pipeline,
    sgd_step,
    surrogate_loss,
    sweep_report,
    synth_multimodal,
    train,
)

__all__ = [
    "Affinity",
    "FgfError",
    "Graph",
    "Samplers",
    "build_ejg",
    "build_samplers",
    "concat_zscore",
    "fuse_graphs",
    "jaccard",
    "knn",
    "knn_classify",
    "make_splits",
    "normalize_affinity",
    "run_pipeline",
    "sgd_step",
    "surrogate_loss",
    "sweep_report",
    "synth_multimodal",
    "train",
]
