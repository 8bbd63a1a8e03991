"""Product space construction and specialization dynamics."""

from ._core import (
    ExportMatrix,
    ParseError,
    PhiStats,
    ProximityMatrix,
    PspaceError,
    RcaMatrix,
    SpecializationMatrix,
    UndefinedError,
    UnknownCodeError,
    YearWindow,
    binarize,
    classify_transitions,
    component_curve,
    convergence_sweep,
    density,
    diffuse,
    hierarchical_order,
    load_trade,
    phi_stats,
    prody,
    product_network,
    proximity,
    rca,
    run_cli,
)

__all__ = [name for name in dir() if not name.startswith("_")]
