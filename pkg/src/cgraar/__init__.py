"""Complexity-guided RAAR phase retrieval.

Core layers: rasters and transforms (field), projections (constraints),
complexity guidance (complexity), iteration engines (solvers), multi-trial
averaging (ensemble), quality metrics (metrics), and data synthesis/import
(datagen). A FastAPI service (service) exposes the pipeline to clients; the
command line (cli) is a thin front end over the same job layer.
"""

from .complexity import (
    ComplexityBudget,
    ComplexityTrace,
    TraceRecord,
    complexity_gradient,
    complexity_spatial,
    complexity_spectral,
    reduce_complexity_region,
)
from .constraints import (
    IntensityData,
    SupportMask,
    project_magnitude,
    project_support,
    reflect,
    relaxed_reflect,
)
from .container import RasterRecord, read_container, write_container
from .datagen import (
    PHANTOM_KINDS,
    apply_beamstop,
    exact_intensity,
    import_raw,
    make_phantom,
    simulate_intensity,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleReport,
    TrialRun,
    TrialSummary,
    align_trial,
    correlation,
    run_trials,
    select_and_average,
)
from .field import ComplexField, Spectrum, dft_forward, dft_inverse
from .metrics import (
    DetectorGeometry,
    PRTFCurve,
    Resolution,
    error_fourier,
    error_real,
    prtf_map,
    prtf_radial,
    resolution_from_prtf,
    twin_field,
)
from .solvers import (
    ALGORITHMS,
    SolverConfig,
    TrialSolution,
    dm_iterate,
    er_iterate,
    hio_iterate,
    init_random,
    raar_iterate,
    run_cg_raar,
    run_raar_er,
    run_reconstruction,
)

__version__ = "0.1.0"
