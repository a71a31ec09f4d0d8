"""Random-walk scrambling analysis for the 3x3x3 cube.

Simulate the 18-generator random walk, compute exact move-count distances
(IDA* with pattern databases), estimate total-variation decay with bootstrap
error bars, and cross-check against the exactly evolved corner-projection
chain (88,179,840 states).
"""

from .cube import (
    ALL_MOVES,
    CHECKERBOARD,
    CubeState,
    Move,
    MoveParseError,
    FaceletError,
    ORIGIN,
    SUPERFLIP,
    apply_move,
    apply_sequence,
    compose,
    format_moves,
    format_state,
    generator_state,
    inverse,
    named_state,
    parse_moves,
    parse_state,
    relative_state,
    validate,
)
from .errors import (
    BudgetExhaustedError,
    CorruptManifestError,
    CubemixError,
    DepthGuardError,
    MemoryGuardError,
)
from .rng import (
    GROUP_ORDER,
    RngStream,
    random_move,
    random_moves,
    row_stream,
    uniform_state,
    walk,
    walk_trajectory,
)
from .solver import (
    OptimalResult,
    PatternDatabase,
    PdbSet,
    bfs_enumerate,
    build_pdb,
    distance,
    load_or_build_pdbs,
    solve_optimal,
)
from .corner_chain import (
    CornerDistanceTable,
    corner_bfs,
    exact_decay,
    exact_tv_uniform,
    project_distribution,
)
from .stats import (
    DecayCurve,
    TvEstimate,
    bootstrap_tv,
    empirical,
    mixing_threshold,
    threshold_report,
    tv,
)
from .pipeline import (
    DatasetManifest,
    emit_decay,
    emit_histograms,
    init_dataset,
    load_manifest,
    run_dataset,
)

__version__ = "0.1.0"
