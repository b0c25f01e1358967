"""Two-slot reversibility-preserving maps: verification of the defining
orthogonality conditions and the constructive splitting into an orthogonal
direct sum of two causally ordered blocks (A-first and B-first).

The pipeline works pointwise on pairs of slot-output vectors (alpha, beta),
splits the reachable future at each point into a forward part (signals
A -> B), a reverse part (signals B -> A) and a parallel part, pulls the
split back to the global past, aggregates over a polarization family, and
finally restricts the operator to the two recovered blocks.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .choi import choi_of_unitary
from .combs import verify_pure_comb_unitary
from .errors import VerificationError
from .families import spanning_family, stability_vectors
from .layouts import TwoSlotLayout
from .spaces import (
    ORTHO_TOL,
    LinOp,
    Spaces,
    Vec,
    adjoint,
    apply_op,
    contract_bra,
    is_unitary,
    kron_vec,
    partial_trace,
    permute_systems,
)
from .subspaces import (
    Subspace,
    complement,
    from_spanning,
    image,
    intersect,
    is_subset,
    orthogonality_residual,
    product_subspace,
    reduced_subspace,
    sum_subspaces,
)

__all__ = [
    "SubspaceTriple",
    "SuperchannelReport",
    "DirectSumDecomp",
    "TraceFutureReport",
    "spanning_family",
    "verify_pure_superchannel",
    "f_point_decomposition",
    "p_point_decomposition",
    "global_p_decomposition",
    "global_f_decomposition",
    "direct_sum_decompose",
    "assemble",
    "classify",
    "trace_future_check",
]


@dataclasses.dataclass(frozen=True)
class SubspaceTriple:
    """Orthogonal split into forward (A signals B), parallel, and reverse
    (B signals A) parts of a common ambient space."""

    forward: Subspace
    parallel: Subspace
    reverse: Subspace

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.forward.dim, self.parallel.dim, self.reverse.dim)

    def parts(self):
        return (self.forward, self.parallel, self.reverse)


@dataclasses.dataclass(frozen=True)
class SuperchannelReport:
    """Verification outcome; residuals are worst cross-overlaps of reduced
    images for the three condition groups."""

    ok: bool
    residuals: dict

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def _canonical(u: LinOp, layout: TwoSlotLayout) -> LinOp:
    want_in = [layout.past[0], layout.a_out[0], layout.b_out[0]]
    want_out = [layout.a_in[0], layout.b_in[0], layout.future[0]]
    if set(u.in_space.labels) != set(want_in) or set(u.out_space.labels) != set(want_out):
        raise ValueError(
            f"operator factors {u.in_space.labels} -> {u.out_space.labels} do not match "
            f"the two-slot layout {want_in} -> {want_out}"
        )
    for lab, d in layout.all_factors:
        side = u.in_space if lab in want_in else u.out_space
        if side.dim_of(lab) != d:
            raise ValueError(f"factor {lab!r} has dim {side.dim_of(lab)}, layout says {d}")
    return permute_systems(u, want_in + want_out)


class _Pipeline:
    """Cached geometry for one operator: images of product subspaces and
    their reductions, keyed by restriction."""

    def __init__(self, u: LinOp, layout: TwoSlotLayout, tol: float = ORTHO_TOL):
        ok, res = is_unitary(u)
        if not ok:
            raise ValueError(f"operator is not unitary (residual {res:.2e})")
        self.layout = layout
        self.tol = tol
        self.u = _canonical(u, layout)
        self.u_dag = adjoint(self.u)
        self.p_space = Spaces((layout.past,))
        self.ao_space = Spaces((layout.a_out,))
        self.bo_space = Spaces((layout.b_out,))
        self.ai_space = Spaces((layout.a_in,))
        self.bi_space = Spaces((layout.b_in,))
        self.f_space = Spaces((layout.future,))
        self.out_space = self.u.out_space

    def sub_a(self, alpha: np.ndarray) -> Subspace:
        return from_spanning(alpha.reshape(-1, 1), self.ao_space)

    def sub_b(self, beta: np.ndarray) -> Subspace:
        return from_spanning(beta.reshape(-1, 1), self.bo_space)

    def v_of(self, a_sub: Subspace | None, b_sub: Subspace | None) -> Subspace:
        """Image of past (x) a_sub (x) b_sub; None means the full wire."""
        a = a_sub if a_sub is not None else Subspace.full(self.ao_space)
        b = b_sub if b_sub is not None else Subspace.full(self.bo_space)
        return image(self.u, product_subspace([self.p_space, a, b]))

    def reduced_f(self, v: Subspace) -> Subspace:
        return reduced_subspace(v, [self.ai_space.labels[0], self.bi_space.labels[0]])

    def reduced_keep_bf(self, v: Subspace) -> Subspace:
        return reduced_subspace(v, [self.ai_space.labels[0]])

    def reduced_keep_af(self, v: Subspace) -> Subspace:
        return reduced_subspace(v, [self.bi_space.labels[0]])


def verify_pure_superchannel(
    u: LinOp, layout: TwoSlotLayout, tol: float = ORTHO_TOL
) -> SuperchannelReport:
    """Check the three orthogonality conditions characterizing two-slot
    maps that send unitaries to unitaries.

    'joint': orthogonal slot outputs on both wires give future-orthogonal
    images after reducing both slot inputs.  'a-side': orthogonal outputs
    on the A wire alone stay orthogonal keeping the B input and future.
    'b-side': the mirrored statement for the B wire.
    """
    pipe = _Pipeline(u, layout, tol)
    fam_a = spanning_family(layout.a_out[1]) + stability_vectors(layout.a_out[1])
    fam_b = spanning_family(layout.b_out[1]) + stability_vectors(layout.b_out[1])

    worst_a = 0.0
    for alpha in fam_a:
        sub = pipe.sub_a(alpha)
        r1 = pipe.reduced_keep_bf(pipe.v_of(sub, None))
        r2 = pipe.reduced_keep_bf(pipe.v_of(complement(sub), None))
        worst_a = max(worst_a, orthogonality_residual(r1, r2))

    worst_b = 0.0
    for beta in fam_b:
        sub = pipe.sub_b(beta)
        r1 = pipe.reduced_keep_af(pipe.v_of(None, sub))
        r2 = pipe.reduced_keep_af(pipe.v_of(None, complement(sub)))
        worst_b = max(worst_b, orthogonality_residual(r1, r2))

    worst_joint = 0.0
    for alpha in fam_a:
        sub_a = pipe.sub_a(alpha)
        sub_a_bar = complement(sub_a)
        for beta in fam_b:
            sub_b = pipe.sub_b(beta)
            r1 = pipe.reduced_f(pipe.v_of(sub_a, sub_b))
            r2 = pipe.reduced_f(pipe.v_of(sub_a_bar, complement(sub_b)))
            worst_joint = max(worst_joint, orthogonality_residual(r1, r2))

    residuals = {"joint": worst_joint, "a-side": worst_a, "b-side": worst_b}
    return SuperchannelReport(max(residuals.values()) <= tol, residuals)


def _point_triples(pipe: _Pipeline, alpha: np.ndarray, beta: np.ndarray):
    """Forward/parallel/reverse split of the future reachable from one
    slot-output pair, and its pullback to the past."""
    alpha = np.asarray(alpha, dtype=np.complex128).reshape(-1)
    beta = np.asarray(beta, dtype=np.complex128).reshape(-1)
    if np.linalg.norm(alpha) == 0 or np.linalg.norm(beta) == 0:
        raise ValueError("slot-output vectors must be nonzero")
    alpha = alpha / np.linalg.norm(alpha)
    beta = beta / np.linalg.norm(beta)
    sub_a, sub_b = pipe.sub_a(alpha), pipe.sub_b(beta)
    v_ab = pipe.v_of(sub_a, sub_b)
    f_ab = pipe.reduced_f(v_ab)
    f_fwd = intersect(f_ab, pipe.reduced_f(pipe.v_of(complement(sub_a), sub_b)))
    f_rev = intersect(f_ab, pipe.reduced_f(pipe.v_of(sub_a, complement(sub_b))))
    f_par = intersect(f_ab, complement(f_fwd), complement(f_rev))
    f_triple = SubspaceTriple(f_fwd, f_par, f_rev)

    got = sum(f_triple.dims)
    pair_res = max(
        orthogonality_residual(f_fwd, f_par),
        orthogonality_residual(f_fwd, f_rev),
        orthogonality_residual(f_par, f_rev),
    )
    if got != f_ab.dim or pair_res > pipe.tol:
        raise VerificationError(
            f"future split at a slot-output pair failed: dims {f_triple.dims} vs "
            f"{f_ab.dim}, overlap {pair_res:.2e}"
        )

    d_slots = pipe.ai_space.dim * pipe.bi_space.dim
    bra = kron_vec(Vec(pipe.ao_space, alpha), Vec(pipe.bo_space, beta))
    p_parts = []
    for f_part in f_triple.parts():
        if f_part.dim == 0 or v_ab.dim == 0:
            p_parts.append(Subspace.zero(pipe.p_space))
            continue
        lift = np.kron(np.eye(d_slots), f_part.projector())
        projected = from_spanning(lift @ v_ab.basis, pipe.out_space)
        cols = np.zeros((pipe.p_space.dim, projected.dim), dtype=np.complex128)
        for j in range(projected.dim):
            w = apply_op(pipe.u_dag, projected.basis_vec(j))
            cols[:, j] = contract_bra(bra, w).data
        p_parts.append(from_spanning(cols, pipe.p_space))
    p_triple = SubspaceTriple(*p_parts)

    p_res = max(
        orthogonality_residual(p_parts[0], p_parts[1]),
        orthogonality_residual(p_parts[0], p_parts[2]),
        orthogonality_residual(p_parts[1], p_parts[2]),
    )
    if sum(p_triple.dims) != pipe.p_space.dim or p_res > pipe.tol:
        raise VerificationError(
            f"past split at a slot-output pair failed: dims {p_triple.dims} "
            f"sum to {sum(p_triple.dims)} != {pipe.p_space.dim}, overlap {p_res:.2e}"
        )
    return f_triple, p_triple


def f_point_decomposition(
    u: LinOp, layout: TwoSlotLayout, alpha: np.ndarray, beta: np.ndarray, tol: float = ORTHO_TOL
) -> SubspaceTriple:
    """Split of the future reachable from the pair (alpha, beta)."""
    pipe = _Pipeline(u, layout, tol)
    return _point_triples(pipe, alpha, beta)[0]


def p_point_decomposition(
    u: LinOp, layout: TwoSlotLayout, alpha: np.ndarray, beta: np.ndarray, tol: float = ORTHO_TOL
) -> SubspaceTriple:
    """Split of the whole past induced by the pair (alpha, beta)."""
    pipe = _Pipeline(u, layout, tol)
    return _point_triples(pipe, alpha, beta)[1]


def global_p_decomposition(u: LinOp, layout: TwoSlotLayout, tol: float = ORTHO_TOL) -> SubspaceTriple:
    """Aggregate the pointwise past splits over the polarization family.

    The forward part is summed over the A-wire family at a fixed B-wire
    anchor (the pointwise forward part does not depend on the B vector),
    the reverse part symmetrically, and the parallel part is intersected
    over the full grid.  A batch of random vectors must leave every
    dimension unchanged; any change is a hard error.
    """
    pipe = _Pipeline(u, layout, tol)
    d_a, d_b = layout.a_out[1], layout.b_out[1]
    fam_a, fam_b = spanning_family(d_a), spanning_family(d_b)
    rand_a, rand_b = stability_vectors(d_a), stability_vectors(d_b)
    alpha0, beta0 = fam_a[0], fam_b[0]

    grid = {}
    for i, alpha in enumerate(fam_a):
        for j, beta in enumerate(fam_b):
            grid[(i, j)] = _point_triples(pipe, alpha, beta)[1]

    p_fwd = sum_subspaces(*[grid[(i, 0)].forward for i in range(len(fam_a))])
    p_rev = sum_subspaces(*[grid[(0, j)].reverse for j in range(len(fam_b))])
    p_par = intersect(*[grid[key].parallel for key in sorted(grid)])

    for alpha in rand_a:
        extra = _point_triples(pipe, alpha, beta0)[1]
        if not is_subset(extra.forward, p_fwd, tol):
            raise VerificationError(
                "vector family insufficiency: a random A-wire vector enlarged the forward past"
            )
    for beta in rand_b:
        extra = _point_triples(pipe, alpha0, beta)[1]
        if not is_subset(extra.reverse, p_rev, tol):
            raise VerificationError(
                "vector family insufficiency: a random B-wire vector enlarged the reverse past"
            )
    for alpha, beta in zip(rand_a, rand_b):
        extra = _point_triples(pipe, alpha, beta)[1]
        if not is_subset(p_par, extra.parallel, tol):
            raise VerificationError(
                "vector family insufficiency: a random pair shrank the parallel past"
            )

    triple = SubspaceTriple(p_fwd, p_par, p_rev)
    res = max(
        orthogonality_residual(p_fwd, p_par),
        orthogonality_residual(p_fwd, p_rev),
        orthogonality_residual(p_par, p_rev),
    )
    if sum(triple.dims) != pipe.p_space.dim or res > tol:
        raise VerificationError(
            f"global past split inconsistent: dims {triple.dims}, overlap {res:.2e}"
        )
    return triple


def global_f_decomposition(
    u: LinOp, layout: TwoSlotLayout, p_triple: SubspaceTriple, tol: float = ORTHO_TOL
) -> SubspaceTriple:
    """Push the global past split through the operator onto the future.

    Each part of the future is the reduction of the image of the matching
    past part with both slot wires free; the image must factor as
    (slot inputs) (x) (future part), which is checked dimensionally.
    """
    pipe = _Pipeline(u, layout, tol)
    d_slots = pipe.ai_space.dim * pipe.bi_space.dim
    parts = []
    for p_part in p_triple.parts():
        if p_part.dim == 0:
            parts.append(Subspace.zero(pipe.f_space))
            continue
        v = image(pipe.u, product_subspace([p_part, pipe.ao_space, pipe.bo_space]))
        f_part = pipe.reduced_f(v)
        if v.dim != d_slots * f_part.dim:
            raise VerificationError(
                f"image of a past part does not factor over the slot inputs: "
                f"dim {v.dim} != {d_slots} * {f_part.dim}"
            )
        parts.append(f_part)
    triple = SubspaceTriple(*parts)
    res = max(
        orthogonality_residual(parts[0], parts[1]),
        orthogonality_residual(parts[0], parts[2]),
        orthogonality_residual(parts[1], parts[2]),
    )
    if sum(triple.dims) != pipe.f_space.dim or res > tol:
        raise VerificationError(
            f"global future split inconsistent: dims {triple.dims}, overlap {res:.2e}"
        )
    return triple


@dataclasses.dataclass(frozen=True)
class DirectSumDecomp:
    """Result of the direct-sum splitting.

    Embeddings are orthonormal column isometries from block coordinates
    into the full past/future.  Blocks are the restricted unitaries in
    those coordinates; a block is None when its past part is
    zero-dimensional.  ``triple_p_dims``/``triple_f_dims`` record the
    underlying forward/parallel/reverse dimensions.
    """

    layout: TwoSlotLayout
    p_embed_ab: np.ndarray
    p_embed_ba: np.ndarray
    f_embed_ab: np.ndarray
    f_embed_ba: np.ndarray
    block_ab: LinOp | None
    block_ba: LinOp | None
    triple_p_dims: tuple[int, int, int]
    triple_f_dims: tuple[int, int, int]
    classification: str
    off_block_residual: float

    @property
    def p_dims(self) -> tuple[int, int]:
        return (self.p_embed_ab.shape[1], self.p_embed_ba.shape[1])

    @property
    def f_dims(self) -> tuple[int, int]:
        return (self.f_embed_ab.shape[1], self.f_embed_ba.shape[1])


def _ordered_embed(s: Subspace) -> np.ndarray:
    """Deterministic column order: by descending peak overlap with the
    computational basis, ties by original index."""
    if s.dim <= 1:
        return s.basis
    scores = np.abs(s.basis).max(axis=0)
    order = np.argsort(-scores, kind="stable")
    return s.basis[:, order]


def classify(d: DirectSumDecomp, layout: TwoSlotLayout | None = None) -> str:
    """Coarse class of the split: parallel, ordered one way, switch-like
    (balanced blocks over equal wires at double dimension), or a general
    direct sum."""
    layout = layout or d.layout
    p1, p2 = d.p_dims
    dd = layout.past[1]
    if d.triple_p_dims[1] == dd:
        return "parallel"
    if p2 == 0:
        return "ordered-ab"
    if p1 == 0:
        return "ordered-ba"
    wire_dims = {layout.a_in[1], layout.a_out[1], layout.b_in[1], layout.b_out[1]}
    if len(wire_dims) == 1:
        w = wire_dims.pop()
        if dd == 2 * w == layout.future[1] and p1 == p2 == w:
            return "switch-like"
    return "general-direct-sum"


def direct_sum_decompose(u: LinOp, layout: TwoSlotLayout, tol: float = ORTHO_TOL) -> DirectSumDecomp:
    """Split a verified two-slot reversibility-preserving map into an
    A-first block and a B-first block.

    Verification is run unconditionally; the split is forward+parallel
    versus reverse.  Both blocks are re-verified as causally ordered
    combs of their respective order, and any off-block matrix weight
    beyond the tolerance is an error.
    """
    report = verify_pure_superchannel(u, layout, tol)
    if not report.ok:
        raise VerificationError(
            f"operator fails the reversibility-preservation conditions: {report.residuals}"
        )
    pipe = _Pipeline(u, layout, tol)
    p_triple = global_p_decomposition(u, layout, tol)
    f_triple = global_f_decomposition(u, layout, p_triple, tol)

    p_ab = sum_subspaces(p_triple.forward, p_triple.parallel)
    p_ba = p_triple.reverse
    f_ab = sum_subspaces(f_triple.forward, f_triple.parallel)
    f_ba = f_triple.reverse
    p_embeds = (_ordered_embed(p_ab), _ordered_embed(p_ba))
    f_embeds = (_ordered_embed(f_ab), _ordered_embed(f_ba))

    d_in_slots = pipe.ao_space.dim * pipe.bo_space.dim
    d_out_slots = pipe.ai_space.dim * pipe.bi_space.dim
    u_mat = pipe.u.data
    lifts_in = [np.kron(e, np.eye(d_in_slots)) for e in p_embeds]
    lifts_out = [np.kron(np.eye(d_out_slots), e) for e in f_embeds]

    off = 0.0
    for i in range(2):
        for j in range(2):
            if i == j or lifts_in[i].shape[1] == 0 or lifts_out[j].shape[1] == 0:
                continue
            off = max(off, float(np.abs(lifts_out[j].conj().T @ u_mat @ lifts_in[i]).max()))
    if off > tol:
        raise VerificationError(f"off-block weight {off:.2e} exceeds tolerance; split inconsistent")

    blocks: list[LinOp | None] = []
    orders = ("ab", "ba")
    for i in range(2):
        pdim, fdim = p_embeds[i].shape[1], f_embeds[i].shape[1]
        if pdim == 0:
            if fdim != 0:
                raise VerificationError("empty past block with nonempty future block")
            blocks.append(None)
            continue
        if pdim * d_in_slots != fdim * d_out_slots:
            raise VerificationError(
                f"block {orders[i]} is not square: {pdim}*{d_in_slots} != {fdim}*{d_out_slots}"
            )
        block_layout = layout.with_dims(pdim, fdim)
        blk = LinOp(
            block_layout.out_space(),
            block_layout.in_space(),
            lifts_out[i].conj().T @ u_mat @ lifts_in[i],
        )
        ok, res = is_unitary(blk)
        if not ok:
            raise VerificationError(f"block {orders[i]} is not unitary (residual {res:.2e})")
        comb_report = verify_pure_comb_unitary(blk, block_layout.slot_chain(orders[i]), tol)
        if not comb_report.ok:
            raise VerificationError(
                f"block {orders[i]} fails its causal-order check "
                f"(residual {comb_report.max_residual:.2e})"
            )
        blocks.append(blk)

    decomp = DirectSumDecomp(
        layout,
        p_embeds[0],
        p_embeds[1],
        f_embeds[0],
        f_embeds[1],
        blocks[0],
        blocks[1],
        p_triple.dims,
        f_triple.dims,
        "",
        off,
    )
    return dataclasses.replace(decomp, classification=classify(decomp, layout))


def assemble(d: DirectSumDecomp) -> LinOp:
    """Embed the blocks back into the full spaces and sum them."""
    layout = d.layout
    if d.p_embed_ab.shape[1] + d.p_embed_ba.shape[1] != layout.past[1]:
        raise ValueError("past embeddings do not tile the past space")
    if d.f_embed_ab.shape[1] + d.f_embed_ba.shape[1] != layout.future[1]:
        raise ValueError("future embeddings do not tile the future space")
    d_in_slots = layout.a_out[1] * layout.b_out[1]
    d_out_slots = layout.a_in[1] * layout.b_in[1]
    total = np.zeros((layout.out_space().dim, layout.in_space().dim), dtype=np.complex128)
    for blk, p_e, f_e in (
        (d.block_ab, d.p_embed_ab, d.f_embed_ab),
        (d.block_ba, d.p_embed_ba, d.f_embed_ba),
    ):
        if blk is None:
            continue
        want_in = [layout.past[0], layout.a_out[0], layout.b_out[0]]
        want_out = [layout.a_in[0], layout.b_in[0], layout.future[0]]
        mat = permute_systems(blk, want_in + want_out).data
        total += np.kron(np.eye(d_out_slots), f_e) @ mat @ np.kron(p_e, np.eye(d_in_slots)).conj().T
    out = LinOp(layout.out_space(), layout.in_space(), total)
    ok, res = is_unitary(out)
    if not ok:
        raise VerificationError(f"assembled operator is not unitary (residual {res:.2e})")
    return out


@dataclasses.dataclass(frozen=True)
class TraceFutureReport:
    """Future-traced consistency check: tracing the future out of the full
    Choi operator must equal the weighted sum of the block contributions,
    which is a convex mixture of two causally ordered maps."""

    residual: float
    weights: tuple[float, float]
    traced_total: LinOp
    traced_blocks: tuple[LinOp | None, LinOp | None]

    @property
    def ok(self) -> bool:
        return self.residual <= 1e-8


def trace_future_check(d: DirectSumDecomp) -> TraceFutureReport:
    layout = d.layout
    total_op = assemble(d)
    w_total = choi_of_unitary(total_op)
    f_label = layout.future[0]
    traced_total = partial_trace(w_total.op, [f_label])

    traced_blocks: list[LinOp | None] = []
    acc = None
    weights = []
    d_in_slots = layout.a_out[1] * layout.b_out[1]
    d_out_slots = layout.a_in[1] * layout.b_in[1]
    want_in = [layout.past[0], layout.a_out[0], layout.b_out[0]]
    want_out = [layout.a_in[0], layout.b_in[0], layout.future[0]]
    for blk, p_e, f_e in (
        (d.block_ab, d.p_embed_ab, d.f_embed_ab),
        (d.block_ba, d.p_embed_ba, d.f_embed_ba),
    ):
        if blk is None:
            traced_blocks.append(None)
            weights.append(0.0)
            continue
        mat = permute_systems(blk, want_in + want_out).data
        embedded = np.kron(np.eye(d_out_slots), f_e) @ mat @ np.kron(p_e, np.eye(d_in_slots)).conj().T
        w_blk = choi_of_unitary(LinOp(layout.out_space(), layout.in_space(), embedded))
        traced = partial_trace(w_blk.op, [f_label])
        traced_blocks.append(traced)
        weights.append(float(np.trace(w_blk.op.data).real))
        acc = traced.data if acc is None else acc + traced.data

    total_weight = sum(weights)
    weights = tuple(w / total_weight for w in weights)
    residual = float(np.abs(traced_total.data - acc).max())
    return TraceFutureReport(residual, weights, traced_total, tuple(traced_blocks))
