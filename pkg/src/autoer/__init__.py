"""Auto-configuring end-to-end entity resolution.

Public API: the datamodel, the five-step pipeline, ground-truth-driven
configuration search, dataset profiling, and the learned config recommender.
"""
from .cluster import (
    SimilarityGraph,
    build_graph,
    connected_components,
    kiraly,
    make_graph,
    prune,
    unique_mapping,
)
from .datamodel import (
    CLUSTERING_ALGORITHMS,
    DEFAULT_CONFIG,
    ClusterSet,
    EntityCollection,
    EntityProfile,
    GroundTruth,
    PipelineConfig,
    serialize_entity,
)
from .embed import (
    EmbedderRegistry,
    EmbeddingMatrix,
    HashedNgramEmbedder,
    default_registry,
    embed_collection,
    embed_hashed_ngrams,
    load_external_embeddings,
)
from .errors import AutoERError
from .ingest import (
    DatasetBundle,
    load_collection,
    load_ground_truth,
    validate_bundle,
)
from .knn import batch_query, build_index, query_topk
from .pipeline import (
    Metrics,
    PipelineExecutor,
    RunResult,
    evaluate,
    pairs_from_clusters,
    run_pipeline,
)
from .predict import (
    ConfigEncoder,
    ForestModel,
    ForestParams,
    Instance,
    InstanceSet,
    fit_forest,
    generate_instances,
    lodo_evaluate,
    recommend,
    tune_forest,
)
from .profiling import FEATURE_NAMES, DatasetFeatures, profile_dataset
from .samplers import (
    CatDim,
    FloatDim,
    GPSampler,
    IntDim,
    QMCSampler,
    RandomSampler,
    SAMPLERS,
    TPESampler,
    make_sampler,
)
from .tune import (
    SearchSpace,
    Trial,
    TrialLog,
    f1_ratio,
    grid_search,
    runtime_ratio,
    tune,
)

__version__ = "0.1.0"
