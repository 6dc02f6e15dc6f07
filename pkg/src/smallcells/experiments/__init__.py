from .statistics import (  # noqa
    Histogram,
    histogram,
    ks_statistic,
    dkw_bound,
    uniform_cdf,
    ShapeEvent,
    SizeEvent,
    CondEstimate,
    conditional_counts,
    conditional_estimate,
    conditional_sigma_samples,
    slab_uniformity_sample,
)
from .selection import (  # noqa
    SelectedCell,
    TopKSelection,
    TopKAccumulator,
    merge_accumulators,
    select_k_smallest,
)
from .study import StudyReport, FunctionalSummary, run_small_cell_study  # noqa
from .convergence import (  # noqa
    ConvergenceRow,
    ConvergenceReport,
    run_convergence_study,
)
