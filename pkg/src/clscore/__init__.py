"""Combinatorial Laplacian scores for feature selection on simplicial complexes."""

from .complex import (
    CofaceSum,
    SimplicialComplex,
    Unit,
    betti_numbers,
    boundary_faces,
    build_vietoris_rips,
    compute_distances,
    compute_weights,
    export_complex,
    import_complex,
)
from .features import (
    FeatureSet,
    PointTable,
    induce_from_point_feature,
    induce_from_qpoint_feature,
    validate_features,
)
from .inference import (
    PermutationConfig,
    ScoreReport,
    bh_adjust,
    permutation_pvalues,
    score_features,
    score_report,
    sweep_epsilon,
)
from .spectral import (
    Cochain,
    LaplacianOperator,
    Spectrum,
    apply_laplacian_direct,
    assemble_boundary,
    assemble_laplacian,
    center_cochain,
    eigendecompose,
    eigenmap,
    inner_product,
    rayleigh_score,
)

__version__ = "0.1.0"
