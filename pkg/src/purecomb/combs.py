"""Causally ordered slotted maps: verification at the Choi and unitary
levels, and the constructive staircase factorization of reversible combs.

A comb with N slots is a chain H_0 -> slot 1 -> ... -> slot N -> H_{2N+1}.
A reversible comb's representing operator factorizes into N+1 unitaries
U_0 .. U_N threaded by ancilla wires of integer dimensions k_n satisfying
d_{2n} k_n = d_{2n+1} k_{n+1} with k_0 = k_{N+1} = 1.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .choi import ChoiOp
from .errors import VerificationError
from .families import spanning_family, stability_vectors
from .layouts import SlotLayout
from .spaces import (
    ORTHO_TOL,
    LinOp,
    Spaces,
    Vec,
    adjoint,
    apply_op,
    basis_state,
    compose,
    contract_bra,
    identity,
    is_unitary,
    kron,
    partial_trace,
    permute_systems,
    tensor_vecs,
)
from .subspaces import (
    Subspace,
    complement,
    from_spanning,
    image,
    orthogonality_residual,
    product_subspace,
    reduced_subspace,
)


@dataclasses.dataclass(frozen=True)
class CombCircuit:
    """Staircase realization U_N ... U_1 U_0 of a reversible comb.

    Element n maps the slot-n output wire (plus the incoming ancilla when
    k_n > 1) to the next slot-input wire (plus the outgoing ancilla when
    k_{n+1} > 1).  Trivial ancillas are not materialized as factors.
    """

    layout: SlotLayout
    elements: tuple[LinOp, ...]
    ancilla_dims: tuple[int, ...]   # k_0 .. k_{N+1}
    ancilla_labels: tuple[str, ...]  # labels reserved for A_1 .. A_N

    def __post_init__(self):
        n = self.layout.n_slots
        if len(self.elements) != n + 1 or len(self.ancilla_dims) != n + 2:
            raise ValueError("element/ancilla counts do not match the layout")
        if self.ancilla_dims[0] != 1 or self.ancilla_dims[-1] != 1:
            raise ValueError("outer ancilla dimensions must be 1")
        dims = self.layout.dims
        for m in range(n + 1):
            if dims[2 * m] * self.ancilla_dims[m] != dims[2 * m + 1] * self.ancilla_dims[m + 1]:
                raise ValueError(
                    f"dimension chain broken at element {m}: "
                    f"{dims[2 * m]}*{self.ancilla_dims[m]} != {dims[2 * m + 1]}*{self.ancilla_dims[m + 1]}"
                )
        for m, el in enumerate(self.elements):
            ok, res = is_unitary(el)
            if not ok:
                raise ValueError(f"element {m} is not unitary (residual {res:.2e})")


@dataclasses.dataclass(frozen=True)
class CombUnitaryReport:
    ok: bool
    max_residual: float
    per_slot: tuple[float, ...]  # worst cross-overlap per slot, index 1..N


@dataclasses.dataclass(frozen=True)
class CombChoiReport:
    ok: bool
    hermiticity_residual: float
    min_eigenvalue: float
    level_residuals: tuple[float, ...]  # factorization residual per level n = 0..N
    normalization_residual: float

    @property
    def max_residual(self) -> float:
        worst = max(self.level_residuals) if self.level_residuals else 0.0
        return max(self.hermiticity_residual, max(0.0, -self.min_eigenvalue),
                   worst, self.normalization_residual)


def _slot_image(u: LinOp, layout: SlotLayout, n: int, sub: Subspace) -> Subspace:
    """Image of (all input factors with the slot-n output wire restricted to sub)."""
    parts = []
    for idx, factor in enumerate(layout.even_factors()):
        if idx == n:
            parts.append(sub)
        else:
            parts.append(Spaces((factor,)))
    return image(u, product_subspace(parts))


def verify_pure_comb_unitary(
    u: LinOp, layout: SlotLayout, tol: float = ORTHO_TOL
) -> CombUnitaryReport:
    """Causal-order check of a unitary against an ordered slot layout.

    For every slot n and every vector in the polarization family of the
    slot-output wire, the images of the vector and of its orthocomplement
    must stay orthogonal after reducing away the slot-input wires already
    produced.  Vacuously true for zero slots.
    """
    ok_u, res_u = is_unitary(u)
    if not ok_u:
        raise ValueError(f"operator is not unitary (residual {res_u:.2e})")
    layout.check_operator(u)
    n_slots = layout.n_slots
    per_slot = []
    for n in range(1, n_slots + 1):
        lab, d = layout.factor(2 * n)
        wire = Spaces(((lab, d),))
        earlier_outputs = [layout.factor(2 * k + 1)[0] for k in range(n)]
        worst = 0.0
        for alpha in spanning_family(d) + stability_vectors(d):
            sub = from_spanning(alpha.reshape(-1, 1), wire)
            v_a = _slot_image(u, layout, n, sub)
            v_perp = _slot_image(u, layout, n, complement(sub))
            r_a = reduced_subspace(v_a, earlier_outputs)
            r_perp = reduced_subspace(v_perp, earlier_outputs)
            worst = max(worst, orthogonality_residual(r_a, r_perp))
        per_slot.append(worst)
    worst_all = max(per_slot) if per_slot else 0.0
    return CombUnitaryReport(worst_all <= tol, worst_all, tuple(per_slot))


def verify_comb_choi(r, layout: SlotLayout, tol: float = 1e-8) -> CombChoiReport:
    """Positivity plus the tower of trace factorization conditions.

    At level n the trace over the output wires above the level must be an
    identity on the input wires above the level times a reduced operator;
    the level-0 reduced operator must be the scalar 1.
    """
    op = r.op if isinstance(r, ChoiOp) else r
    if op.out_space != op.in_space:
        raise ValueError("a Choi operator must be square on one space")
    want = {lab: d for lab, d in layout.factors}
    have = {lab: op.out_space.dim_of(lab) for lab in op.out_space.labels}
    if want != have:
        raise ValueError(f"Choi factors {have} do not match layout {want}")
    herm = float(np.abs(op.data - op.data.conj().T).max())
    min_eig = float(np.linalg.eigvalsh((op.data + op.data.conj().T) / 2)[0])
    n_slots = layout.n_slots
    residuals = [0.0] * (n_slots + 1)
    norm_res = 0.0
    for n in range(n_slots, -1, -1):
        traced_out = [layout.factor(2 * k + 1)[0] for k in range(n, n_slots + 1)]
        level = partial_trace(op, traced_out)
        id_factors = [layout.factor(2 * k)[0] for k in range(n, n_slots + 1)]
        id_space = level.out_space.select(id_factors)
        reduced = partial_trace(level, id_factors)
        reduced = LinOp(reduced.out_space, reduced.in_space, reduced.data / id_space.dim)
        lifted = kron(reduced, identity(id_space))
        lifted = permute_systems(lifted, list(level.out_space.labels))
        residuals[n] = float(np.abs(level.data - lifted.data).max())
        if n == 0:
            norm_res = float(abs(reduced.data[0, 0] - 1.0))
    ok = (
        herm <= tol
        and min_eig >= -tol
        and max(residuals) <= tol
        and norm_res <= tol
    )
    return CombChoiReport(ok, herm, min_eig, tuple(residuals), norm_res)


def _fresh_label(base: str, taken: set[str]) -> str:
    lab = base
    while lab in taken:
        lab = "_" + lab
    return lab


def staircase_decompose(u: LinOp, layout: SlotLayout, tol: float = ORTHO_TOL) -> CombCircuit:
    """Factor a reversible comb into its staircase of unitaries.

    Peels the last slot at each step: the ancilla dimension k is read off
    as the rank of the reduced image of the slot fed with a fixed basis
    state, cross-checked against the exact integer quotient of the wire
    dimensions.  The new basis on the future side is the (deterministic)
    SVD basis of that reduced image.  Recomposition reproduces the input
    up to a global phase.
    """
    report = verify_pure_comb_unitary(u, layout, tol)
    if not report.ok:
        raise VerificationError(
            f"operator is not a reversible comb for this layout "
            f"(worst cross-overlap {report.max_residual:.2e})"
        )
    n_slots = layout.n_slots
    taken = set(layout.labels)
    anc_labels = []
    for m in range(1, n_slots + 1):
        lab = _fresh_label(f"anc{m}", taken)
        taken.add(lab)
        anc_labels.append(lab)
    if n_slots == 0:
        return CombCircuit(layout, (u,), (1, 1), ())

    cur = permute_systems(
        u, [lab for lab, _ in layout.even_factors()] + [lab for lab, _ in layout.odd_factors()]
    )
    elements: list[LinOp] = []
    ks = [1] * (n_slots + 2)
    future_factors = [layout.factor(2 * n_slots + 1)]
    for m in range(n_slots, 0, -1):
        past_space = Spaces(layout.even_factors()[:m])
        slot_out_factor = layout.factor(2 * m)
        slot_out_space = Spaces((slot_out_factor,))
        inner_out_space = Spaces(layout.odd_factors()[:m])
        future_space = Spaces(tuple(future_factors))
        d_past, d_inner = past_space.dim, inner_out_space.dim
        if d_past % d_inner != 0:
            raise VerificationError(
                f"wire dimensions at slot {m} admit no integer ancilla: {d_past} / {d_inner}"
            )
        k = d_past // d_inner

        # image of (past (x) |0> on the slot wire); its reduced rank gives k
        parts = [Spaces((f,)) for f in past_space.factors]
        anchor = from_spanning(np.eye(slot_out_space.dim)[:, :1], slot_out_space)
        v0 = image(cur, product_subspace(parts + [anchor]))
        rs = reduced_subspace(v0, list(inner_out_space.labels))
        if rs.dim != k:
            raise VerificationError(
                f"reduced rank {rs.dim} at slot {m} contradicts the exact quotient {k}; "
                f"the input is not a reversible comb for this layout"
            )
        f_basis = rs.basis  # columns are the new |x, 0> future basis

        u_dag = adjoint(cur)
        p_mat = np.zeros((past_space.dim, d_inner * k), dtype=np.complex128)
        for i in range(d_inner):
            for x in range(k):
                target = tensor_vecs(
                    basis_state(inner_out_space, i), Vec(future_space, f_basis[:, x])
                )
                w = apply_op(u_dag, target)
                p = contract_bra(basis_state(slot_out_space, 0), w)
                p_mat[:, i * k + x] = p.data

        d_slot = slot_out_space.dim
        f_cols = np.zeros((future_space.dim, d_slot * k), dtype=np.complex128)
        for x in range(k):
            for a in range(d_slot):
                # only the i = 0 column of the new past basis is needed here
                fed_vec = tensor_vecs(Vec(past_space, p_mat[:, x]), basis_state(slot_out_space, a))
                out = apply_op(cur, fed_vec)
                f_xa = contract_bra(basis_state(inner_out_space, 0), out)
                f_cols[:, a * k + x] = f_xa.data

        anc = Spaces(((anc_labels[m - 1], k),)) if k > 1 else Spaces(())
        el_in = Spaces((slot_out_factor,)).concat(anc)
        elements.append(LinOp(future_space, el_in, f_cols))
        ks[m] = k

        new_out = inner_out_space.concat(anc)
        cur = LinOp(new_out, past_space, p_mat.conj().T)
        future_factors = [layout.factor(2 * m - 1)] + list(anc.factors)

    elements.append(cur)  # U_0
    elements.reverse()
    return CombCircuit(layout, tuple(elements), tuple(ks), tuple(anc_labels))


def compose_staircase(c: CombCircuit) -> LinOp:
    """Multiply the staircase elements with identity padding on spectators."""
    acc = c.elements[0]
    for el in c.elements[1:]:
        acc = compose(el, acc, pad=True)
    even_labels = [lab for lab, _ in c.layout.even_factors()]
    odd_labels = [lab for lab, _ in c.layout.odd_factors()]
    if set(acc.in_space.labels) != set(even_labels) or set(acc.out_space.labels) != set(odd_labels):
        raise ValueError(
            f"staircase does not close onto the layout wires: "
            f"{acc.in_space.labels} -> {acc.out_space.labels}"
        )
    return permute_systems(acc, even_labels + odd_labels)
