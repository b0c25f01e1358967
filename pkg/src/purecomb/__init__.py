"""Numerical toolkit for reversibility-preserving higher-order quantum maps:
labeled tensor algebra, subspace calculus, operator representations of maps,
causal-order verification, and the constructive decompositions of reversible
combs (staircase form) and two-slot maps (direct sum of ordered blocks)."""

from .errors import VerificationError
from .layouts import SlotLayout, TwoSlotLayout
from .spaces import (
    EPS_UNITARY,
    ORTHO_TOL,
    RANK_RTOL,
    LinOp,
    Spaces,
    Vec,
    adjoint,
    apply_op,
    basis_state,
    canonical_phase,
    compose,
    contract_bra,
    identity,
    is_unitary,
    kron,
    kron_vec,
    partial_trace,
    partial_transpose,
    permute_systems,
    phase_distance,
    tensor,
    tensor_vecs,
    trace_matching,
)
from .subspaces import (
    Subspace,
    angle_sine,
    complement,
    equal_subspaces,
    from_spanning,
    image,
    intersect,
    is_orthogonal,
    is_subset,
    orthogonality_residual,
    product_subspace,
    reduced_subspace,
    subset_residual,
    sum_subspaces,
)
from .choi import ChoiOp, apply_channel, choi_of_unitary, choi_vector, link_product, plug_unitaries
from .combs import (
    CombChoiReport,
    CombCircuit,
    CombUnitaryReport,
    compose_staircase,
    staircase_decompose,
    verify_comb_choi,
    verify_pure_comb_unitary,
)
from .twoslot import (
    DirectSumDecomp,
    SubspaceTriple,
    SuperchannelReport,
    TraceFutureReport,
    assemble,
    classify,
    direct_sum_decompose,
    f_point_decomposition,
    global_f_decomposition,
    global_p_decomposition,
    p_point_decomposition,
    spanning_family,
    trace_future_check,
    verify_pure_superchannel,
)
from .builders import (
    ancilla_chain,
    build_d3d_example,
    build_direct_sum,
    build_quantum_switch,
    build_staircase_comb,
    d3d_layout,
    haar_unitary,
    random_pure_comb,
    random_staircase_circuit,
    random_unitary,
    switch_layout,
)

__version__ = "0.1.0"
