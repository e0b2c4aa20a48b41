"""wittlab: exact inner product spaces over finite commutative local rings."""

from .rings import (
    LocalRing,
    NonUnitError,
    NotLocalError,
    RingElement,
    RingError,
    RingSyntaxError,
    TooLargeError,
    parse_ring,
)
from .bilinear import (
    BilinearSpace,
    CongruenceWitness,
    DecompositionReport,
    DegenerateError,
    DegenerateSubspaceError,
    DimensionMismatchError,
    IsometryResult,
    check_representation_identity,
    diagonalize,
    hyperbolic_scaling_witness,
    is_isometric,
    orthogonal_complement,
    resolve_block,
    stable_diagonalize,
    steinberg_witness,
)
from .chains import (
    BudgetExceededError,
    Chain,
    ChainUnreachableError,
    FieldTooSmallError,
    IsotropicPartialSumError,
    OrthogonalBasis,
    all_orthogonal_bases,
    bfs_chain_oracle,
    chain_equal_mod_m,
    chain_field,
    chain_local,
    elementary_move,
    extend_vector_chain,
    find_nonvanishing_vector,
    hat_chain,
    lift_basis,
    lift_pair,
    random_diagonal_space,
    random_orthogonal_basis,
    standard_basis,
    verify_chain,
)
from .groups import (
    AbelianGroupStructure,
    GroupRingElement,
    Presentation,
    augmentation_ideal,
    comparison_map,
    gw_class,
    gw_presentation,
    gw_structure,
    kmw_presentation,
    kmw_structure,
    ktilde_presentation,
    ktilde_structure,
    product_table,
    stable_isometry_oracle,
    verify_rank2_equality,
    verify_steinberg_consequences,
    witt_presentation,
    witt_structure,
)

__version__ = "0.1.0"
