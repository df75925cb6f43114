"""rslab: sparse random relational structures, their dimension calculus,
extension machinery, and desk-scale scaling experiments."""

from .core import (
    HOM,
    ISO,
    Embedding,
    FiniteStructure,
    InputError,
    Relation,
    Signature,
    are_isomorphic,
    binary_signature,
    canonical_key,
    enumerate_embeddings,
    load_structure,
    parse_structure,
)
from .dimension import (
    NEGATIVE,
    POSITIVE,
    ZERO,
    DimForm,
    d_cap,
    delta,
    delta_of_subset,
    delta_rel,
    e_rel,
    gamma_prod,
    zero_form,
)
from .extcalc import (
    ExtensionPattern,
    chi,
    chi_star,
    closure,
    has_negative_subset,
    in_K0_plus,
    intrinsic_chain,
    intrinsic_in,
    is_intrinsic,
    is_primitive,
    is_strong,
    minimal_strong_superset,
    primitive_in,
    strong_in,
)
from .sampler import SampleConfig, edge_probability, log_prob, sample, trial_rng
from .amalgam import (
    GenericChain,
    TaskType,
    build_generic,
    check_full_amalgamation,
    closure_matches,
    enumerate_extension_tasks,
    free_join,
    semigeneric_witness,
    validate_chain,
)
from .detect import has_weak_copy
from .harness import (
    ExperimentReport,
    empty_closure,
    ext_stats,
    fit_loglog,
    formula_agreement,
    qe_probe,
    rare_substructure,
    zero_one,
)

__version__ = "0.1.0"
