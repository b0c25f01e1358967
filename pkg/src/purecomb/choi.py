"""Operator representations of maps and higher-order maps: vectorization,
the label-matched link product, channel application, and plugging slot
unitaries into a representing operator.

The vectorization of A : H_in -> H_out is sum_i |i> (x) A|i>, living on
the concatenation in (x) out.  Link-product contractions are matched by
factor label, never by position.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .layouts import SlotLayout
from .spaces import (
    LinOp,
    Spaces,
    Vec,
    canonical_phase,
    compose,
    identity,
    kron,
    partial_trace,
    partial_transpose,
    permute_systems,
    tensor,
    trace_matching,
)


@dataclasses.dataclass(frozen=True)
class ChoiOp:
    """Square operator on map-input (x) map-output factors, with role metadata.

    Structural properties (hermiticity, positivity, trace preservation)
    are checked lazily through the residual methods; intermediate link
    results are legitimately non-TP.
    """

    op: LinOp
    map_in: tuple[str, ...]
    map_out: tuple[str, ...]

    def __post_init__(self):
        if self.op.out_space != self.op.in_space:
            raise ValueError("a Choi operator must be square on one space")
        have = set(self.op.out_space.labels)
        declared = set(self.map_in) | set(self.map_out)
        if declared != have or set(self.map_in) & set(self.map_out):
            raise ValueError(
                f"roles {self.map_in} / {self.map_out} do not partition factors {sorted(have)}"
            )

    @property
    def space(self) -> Spaces:
        return self.op.out_space

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.op.data))

    def hermiticity_residual(self) -> float:
        return float(np.abs(self.op.data - self.op.data.conj().T).max())

    def min_eigenvalue(self) -> float:
        h = (self.op.data + self.op.data.conj().T) / 2
        return float(np.linalg.eigvalsh(h)[0])

    def tp_residual(self) -> float:
        """Max-norm deviation of the output partial trace from the identity."""
        red = partial_trace(self.op, self.map_out)
        return float(np.abs(red.data - np.eye(red.out_space.dim)).max())

    def is_cp(self, tol: float = 1e-8) -> bool:
        return self.hermiticity_residual() <= 1e-10 and self.min_eigenvalue() >= -tol

    def is_channel(self, tol: float = 1e-8) -> bool:
        return self.is_cp(tol) and self.tp_residual() <= tol


def choi_vector(a: LinOp) -> Vec:
    """Vectorization on in_space (x) out_space; norm² equals Tr(A†A)."""
    space = a.in_space.concat(a.out_space)
    return Vec(space, a.data.T.reshape(-1))


def choi_of_unitary(u: LinOp) -> ChoiOp:
    """Rank-1 Choi operator of the map rho -> U rho U†."""
    v = choi_vector(u)
    op = LinOp(v.space, v.space, np.outer(v.data, v.data.conj()))
    return ChoiOp(op, tuple(u.in_space.labels), tuple(u.out_space.labels))


def link_product(e: ChoiOp, f: ChoiOp) -> ChoiOp:
    """Contract two Choi operators over their shared labels.

    Shared factors are traced out after a partial transpose on the second
    argument; disjoint factors pass through.  Commutative up to factor
    reordering.
    """
    shared = [lab for lab in e.space.labels if f.space.has(lab)]
    for lab in shared:
        if e.space.dim_of(lab) != f.space.dim_of(lab):
            raise ValueError(f"shared label {lab!r} has conflicting dims")
    e_only = e.space.without(shared)
    f_only = f.space.without(shared)
    big_e = kron(e.op, identity(f_only)) if len(f_only) else e.op
    big_f = kron(f.op, identity(e_only)) if len(e_only) else f.op
    if shared:
        big_f = partial_transpose(big_f, shared)
    order = list(e_only.labels) + shared + list(f_only.labels)
    prod = compose(permute_systems(big_e, order), permute_systems(big_f, order))
    out = partial_trace(prod, shared) if shared else prod
    roles_in = tuple(lab for lab in out.out_space.labels if lab in set(e.map_in) | set(f.map_in))
    roles_out = tuple(lab for lab in out.out_space.labels if lab in set(e.map_out) | set(f.map_out))
    return ChoiOp(out, roles_in, roles_out)


def apply_channel(e: ChoiOp, rho: LinOp) -> LinOp:
    """Apply a channel given by its Choi operator to a state on the map input."""
    if set(rho.out_space.labels) != set(e.map_in):
        raise ValueError(f"state labels {rho.out_space.labels} do not match map input {e.map_in}")
    state = ChoiOp(rho, (), tuple(rho.out_space.labels))
    return link_product(state, e).op


def plug_unitaries(u: LinOp, layout: SlotLayout, slot_ops: list[LinOp]) -> LinOp:
    """Insert one operator per slot and contract to the induced global map.

    Slot operator n must consume the slot-input factor H_{2n-1} and produce
    the slot-output factor H_{2n}; any further factors it carries are
    treated as its private ancillas and pass through to the result.  The
    output is scaled to the canonical global phase so repeated calls are
    bit-identical.
    """
    n = layout.n_slots
    if len(slot_ops) != n:
        raise ValueError(f"expected {n} slot operators, got {len(slot_ops)}")
    layout.check_operator(u)
    future = Spaces((layout.factor(2 * n + 1),))
    for k, op in enumerate(slot_ops, start=1):
        lab_in, d_in = layout.factor(2 * k - 1)
        lab_out, d_out = layout.factor(2 * k)
        if not op.in_space.has(lab_in) or op.in_space.dim_of(lab_in) != d_in:
            raise ValueError(f"slot {k} operator does not consume {lab_in!r} (dim {d_in})")
        if not op.out_space.has(lab_out) or op.out_space.dim_of(lab_out) != d_out:
            raise ValueError(f"slot {k} operator does not produce {lab_out!r} (dim {d_out})")
    if n == 0:
        return canonical_phase(u)
    lifted = tensor(identity(future), *slot_ops)
    prod = compose(lifted, u, pad=True)
    traced = trace_matching(prod, [layout.factor(2 * k)[0] for k in range(1, n + 1)])
    return canonical_phase(traced)
