"""Asymmetric latent semantic indexing for binary incidence data."""

__version__ = "0.1.0"

from .exceptions import (AlsiError, ContractViolation, DataError,
                         FactorizationError, NumericsWarning,
                         SingularMatrixError)
from .linalg import (EigResult, PolarParts, SvdResult, polar_decompose,
                     psd_clip, svd, sym_eig)
from .ingest import (ExpressionMatrix, FilterReport, IncidenceMatrix,
                     binarize, cv_filter, load_expression)
from .similarity import (AsymmetricSimilarity, NormDiagnostics,
                         asymmetric_similarity, baseline_distances,
                         norm_diagnostics, skew_split)
from .fusion import (FusionConfig, LabelKernel, asymmetry_sources,
                     combiner_geometric, combiner_harmonic, fuse,
                     kernel_sum_feature_map, label_kernel,
                     membership_from_incidence)
from .latent import LatentEmbedding, alsi_embed, induced_distance, lsi_embed
from .mixture import (CrossTable, GmmConfig, MixtureModel, Responsibilities,
                      cross_table, fit_gmm, responsibilities, top_members)
from .viz import (Projection2D, SammonConfig, classical_mds, emit_csv,
                  emit_scatter, profile_distances, sammon)
from .synth import generate_synthetic
from .pipeline import Pipeline, RunConfig, RunManifest, load_config, save_config
from .estimators import (AsymmetricLSIEmbedding, CVFilterBinarizer,
                         LatentClassMixture)

__all__ = [
    "__version__",
    "AlsiError", "ContractViolation", "DataError", "FactorizationError",
    "NumericsWarning", "SingularMatrixError",
    "SvdResult", "EigResult", "PolarParts", "svd", "sym_eig",
    "polar_decompose", "psd_clip",
    "ExpressionMatrix", "FilterReport", "IncidenceMatrix",
    "load_expression", "cv_filter", "binarize",
    "AsymmetricSimilarity", "NormDiagnostics", "asymmetric_similarity",
    "skew_split", "norm_diagnostics", "baseline_distances",
    "FusionConfig", "LabelKernel", "asymmetry_sources", "label_kernel",
    "membership_from_incidence", "fuse", "combiner_geometric",
    "combiner_harmonic", "kernel_sum_feature_map",
    "LatentEmbedding", "lsi_embed", "alsi_embed", "induced_distance",
    "GmmConfig", "MixtureModel", "Responsibilities", "CrossTable",
    "fit_gmm", "responsibilities", "cross_table", "top_members",
    "Projection2D", "SammonConfig", "classical_mds", "sammon",
    "profile_distances", "emit_scatter", "emit_csv",
    "generate_synthetic",
    "Pipeline", "RunConfig", "RunManifest", "load_config", "save_config",
    "AsymmetricLSIEmbedding", "CVFilterBinarizer", "LatentClassMixture",
]
