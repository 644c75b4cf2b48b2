"""privlevels: graded privacy for tabular data.

Transform or simulate a dataset at one of six privacy levels, attack the
output with membership/attribute/property-inference evaluators, and certify
it with privacy, fidelity, and utility scores plus a regulation-risk matrix.
"""

from .attacks import (
    ATTRIBUTE_INFERENCE,
    MIA,
    MODEL_INFERENCE,
    PROPERTY_INFERENCE,
    AttackReport,
    CertificationThresholds,
    CertificationVerdict,
    PropertySpec,
    certify,
    run_attribute_inference,
    run_mia,
    run_property_inference,
)
from .copula import CopulaModel, fit_copula, load_copula, sample_copula, save_copula
from .data import (
    CATEGORICAL,
    IDENTIFIER,
    NUMERIC_CONTINUOUS,
    NUMERIC_INTEGER,
    ColumnSpec,
    Dataset,
    SchemaViolation,
    SplitResult,
    concat_rows,
    load_csv,
    load_schema,
    save_schema,
    split_holdout,
    write_csv,
)
from .kdtree import KDTreeModel, fit_kdtree, load_kdtree, sample_kdtree, save_kdtree
from .metrics import FidelityReport, UtilityReport, UtilityTask, fidelity, utility_tstr
from .noise import (
    Gaussian,
    Laplace,
    NoiseConfig,
    RandomizedResponse,
    Swap,
    add_noise,
    randomized_response,
    swap_columns,
    total_epsilon,
)
from .obscure import (
    Drop,
    HashPseudonym,
    Mask,
    ObscurePolicy,
    SurrogateReplace,
    audit_policy,
    obscure,
)
from .pipeline import (
    PipelineConfig,
    audit_synthetic,
    compare_levels,
    load_config,
    run_pipeline,
)
from .report import CertificationReport, regulation_matrix
from .simulate import (
    CalibrationTarget,
    Scenario,
    SimulatorSpec,
    TargetStat,
    calibrate,
    corner_case_sweep,
    plant_scenarios,
    simulate,
)
from .version import __version__

__all__ = [name for name in dir() if not name.startswith("_")]
