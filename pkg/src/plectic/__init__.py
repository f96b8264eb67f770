"""Plectic Hodge structures, complex tori with real multiplication,
refined Hodge theory on flat tori, and plectic Abel-Jacobi maps."""

from .config import DEFAULT_PRECISION, default_tolerance, get_precision, set_precision
from .errors import DegenerateInputError, InputError, PlecticError, SearchExhaustedError
from .lattices import (
    IntMatrix,
    Lattice,
    lattice_membership,
    smith_normal_form,
    torsion_free_quotient,
)
from .hodge import (
    Bidegree,
    ClassicalHodgeStructure,
    PlecticHodgeStructure,
    check_morphism,
    elliptic_h1,
    hodge_filtration,
    is_effective_weight_one,
    orthogonality_check,
    plectic_jacobian,
    refine_to_classical,
    tensor,
    trivial_structure,
    validate,
)
from .numberfields import FieldOrder, FractionalIdealRep
from .tori import (
    AlgebraizationResult,
    ComplexTorus,
    RMCertificate,
    RMStructure,
    algebraize_rm,
    construct_rm_torus,
    detect_rm,
    dual_torus,
    endomorphisms,
    enlarge_to_maximal,
    jacobian_is_abelian_certificate,
    steinitz_decompose,
    tori_isomorphic,
)
from .flat import (
    FlatTorus,
    FourierFormSpace,
    OperatorMatrix,
    adjoint,
    build_space,
    d_operator,
    extract_plectic_structure,
    harmonic_space,
    hodge_star,
    metric_independence_check,
    verify_laplacian_sum,
    verify_refined_identities,
    xi_operator,
)
from .shimura import (
    CupOperator,
    StronglyPrimitiveDatum,
    build_plectic_from_frobenii,
    character_decompose,
    nu_hodge_structure,
    plectic_jacobian_qsv,
    strongly_primitive,
)
from .abeljacobi import (
    PlecticCycle,
    QuotientDatum,
    abel_jacobi,
    classical_aj,
    iterated_integral,
    period_lattice,
    relift,
    theorem_b_harness,
)

__version__ = "0.1.0"
