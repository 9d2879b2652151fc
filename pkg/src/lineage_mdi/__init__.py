"""Model lineage network reconstruction and disruption analytics.

Reconstructs the derivation graph of an open-source model hub from its
metadata (lineage tags, adapter configs, card fields), then measures
which models redirect downstream development versus consolidating their
predecessors, alongside structural and temporal statistics of the
network.
"""

__version__ = "0.1.0"

from .analytics import (
    MdiSummary,
    TemporalReport,
    TrendFit,
    fit_trend,
    group_summaries,
    lowess,
    spearman,
    summarize_mdi,
    temporal_report,
    zero_crossing,
)
from .disruption import (
    DEFAULT_EPSILON,
    DEFAULT_WINDOW_DAYS,
    MdiResult,
    ParentSet,
    classify_subsequent,
    compute_mdi,
    eligible_focal_models,
    mdi_oracle,
    mdi_sweep,
    parent_set,
)
from .estimators import (
    DisruptionIndex,
    LineageGraphBuilder,
    LowessSmoother,
    PowerLawEstimator,
)
from .ingest import (
    ModelRecord,
    RecordRejected,
    Snapshot,
    fetch_live,
    normalize,
    read_dump,
    write_snapshot,
)
from .lineage import (
    CleaningReport,
    LineageGraph,
    ParentLink,
    build_graph,
    census,
    extract_links,
    load_graph,
    node_roles,
    write_graph,
)
from .scales import ParamScale, extract_param_scale
from .structure import (
    DegreeDistribution,
    PowerLawFit,
    WccSummary,
    fit_power_law,
    in_degrees,
    weakly_connected_components,
)
from .synth import generate_snapshot, sample_discrete_power_law

__all__ = [
    "__version__",
    "CleaningReport",
    "DEFAULT_EPSILON",
    "DEFAULT_WINDOW_DAYS",
    "DegreeDistribution",
    "DisruptionIndex",
    "LineageGraph",
    "LineageGraphBuilder",
    "LowessSmoother",
    "MdiResult",
    "MdiSummary",
    "ModelRecord",
    "ParamScale",
    "ParentLink",
    "ParentSet",
    "PowerLawEstimator",
    "PowerLawFit",
    "RecordRejected",
    "Snapshot",
    "TemporalReport",
    "TrendFit",
    "WccSummary",
    "build_graph",
    "census",
    "classify_subsequent",
    "compute_mdi",
    "eligible_focal_models",
    "extract_links",
    "extract_param_scale",
    "fetch_live",
    "fit_power_law",
    "fit_trend",
    "generate_snapshot",
    "group_summaries",
    "in_degrees",
    "load_graph",
    "lowess",
    "mdi_oracle",
    "mdi_sweep",
    "node_roles",
    "normalize",
    "parent_set",
    "read_dump",
    "sample_discrete_power_law",
    "spearman",
    "summarize_mdi",
    "temporal_report",
    "weakly_connected_components",
    "write_graph",
    "write_snapshot",
    "zero_crossing",
]
