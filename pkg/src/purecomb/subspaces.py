"""Numerical subspace calculus: spans, sums, intersections, complements,
orthogonality tests, and label-aware reduction of composite-space subspaces.

A subspace is stored as an orthonormal column basis together with the rank
tolerance it was built with.  Bases are never canonical; all comparisons
downstream are projector or angle based.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence, Union

import numpy as np

from .spaces import ORTHO_TOL, RANK_RTOL, LinOp, Spaces, Vec, _freeze, permute_systems


@dataclasses.dataclass(frozen=True)
class Subspace:
    ambient: Spaces
    basis: np.ndarray  # (ambient.dim, k) with orthonormal columns
    built_tol: float = RANK_RTOL

    def __post_init__(self):
        arr = _freeze(self.basis)
        if arr.ndim != 2 or arr.shape[0] != self.ambient.dim:
            raise ValueError(f"basis shape {arr.shape} does not fit ambient dim {self.ambient.dim}")
        if arr.shape[1] > arr.shape[0]:
            raise ValueError("more basis columns than ambient dimension")
        if arr.shape[1]:
            gram_res = np.abs(arr.conj().T @ arr - np.eye(arr.shape[1])).max()
            if gram_res > 1e-10:
                raise ValueError(f"basis columns are not orthonormal (residual {gram_res:.2e})")
        object.__setattr__(self, "basis", arr)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def basis_vec(self, j: int) -> Vec:
        return Vec(self.ambient, self.basis[:, j])

    @staticmethod
    def zero(ambient: Spaces) -> "Subspace":
        return Subspace(ambient, np.zeros((ambient.dim, 0)))

    @staticmethod
    def full(ambient: Spaces) -> "Subspace":
        return Subspace(ambient, np.eye(ambient.dim))


def _orthonormalize(mat: np.ndarray, dim: int, tol: float) -> np.ndarray:
    if mat.shape[1] == 0:
        return np.zeros((dim, 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0:
        return np.zeros((dim, 0), dtype=np.complex128)
    cut = tol * max(float(s[0]), 1.0)
    rank = int(np.sum(s > cut))
    return u[:, :rank]


def from_spanning(vectors, ambient: Spaces | None = None, tol: float = RANK_RTOL) -> Subspace:
    """Orthonormal basis of the span of the given vectors.

    ``vectors`` is either a list of Vec on a common space or a matrix whose
    columns are coordinates in ``ambient``.  Numerical rank counts singular
    values above tol * max(sigma_max, 1).
    """
    if isinstance(vectors, np.ndarray):
        if ambient is None:
            raise ValueError("ambient space required for a raw coordinate matrix")
        mat = np.asarray(vectors, dtype=np.complex128)
        if mat.ndim == 1:
            mat = mat.reshape(-1, 1)
    else:
        vecs = list(vectors)
        if not vecs:
            if ambient is None:
                raise ValueError("cannot infer ambient space from an empty list")
            return Subspace.zero(ambient)
        ambient = ambient or vecs[0].space
        for v in vecs:
            if v.space != ambient:
                raise ValueError(f"mixed ambient spaces: {v.space.labels} vs {ambient.labels}")
        mat = np.column_stack([v.data for v in vecs])
    return Subspace(ambient, _orthonormalize(mat, ambient.dim, tol), tol)


def sum_subspaces(*parts: Subspace, tol: float | None = None) -> Subspace:
    if not parts:
        raise ValueError("need at least one subspace")
    ambient = parts[0].ambient
    for s in parts[1:]:
        if s.ambient != ambient:
            raise ValueError("subspace sum requires a common ambient space")
    tol = tol if tol is not None else max(s.built_tol for s in parts)
    mat = np.column_stack([s.basis for s in parts])
    return Subspace(ambient, _orthonormalize(mat, ambient.dim, tol), tol)


def complement(s: Subspace) -> Subspace:
    """Orthogonal complement within the ambient space."""
    n, k = s.basis.shape
    if k == 0:
        return Subspace.full(s.ambient)
    u, sv, _ = np.linalg.svd(s.basis, full_matrices=True)
    cut = s.built_tol * max(float(sv[0]), 1.0)
    rank = int(np.sum(sv > cut))
    return Subspace(s.ambient, u[:, rank:], s.built_tol)


def intersect(*parts: Subspace) -> Subspace:
    """Intersection computed via the double-complement identity."""
    if not parts:
        raise ValueError("need at least one subspace")
    out = parts[0]
    for t in parts[1:]:
        out = complement(sum_subspaces(complement(out), complement(t)))
    return out


def is_orthogonal(s: Subspace, t: Subspace, tol: float = ORTHO_TOL) -> bool:
    return orthogonality_residual(s, t) <= tol


def orthogonality_residual(s: Subspace, t: Subspace) -> float:
    if s.dim == 0 or t.dim == 0:
        return 0.0
    return float(np.abs(s.basis.conj().T @ t.basis).max())


def is_subset(s: Subspace, t: Subspace, tol: float = ORTHO_TOL) -> bool:
    return subset_residual(s, t) <= tol


def subset_residual(s: Subspace, t: Subspace) -> float:
    if s.dim == 0:
        return 0.0
    rem = s.basis - t.basis @ (t.basis.conj().T @ s.basis)
    return float(np.abs(rem).max())


def equal_subspaces(s: Subspace, t: Subspace, tol: float = ORTHO_TOL) -> bool:
    return is_subset(s, t, tol) and is_subset(t, s, tol)


def angle_sine(s: Subspace, t: Subspace) -> float:
    """Largest principal-angle sine between two equal-dimension subspaces.

    Well conditioned for small angles, unlike arccos of Gram singular
    values; for angles below 1e-8 the sine equals the angle to machine
    precision.
    """
    if s.dim != t.dim:
        return 1.0
    if s.dim == 0:
        return 0.0
    rem = s.basis - t.basis @ (t.basis.conj().T @ s.basis)
    return float(np.linalg.svd(rem, compute_uv=False)[0])


def reduced_subspace(w: Subspace, e_labels: Sequence[str], f_labels: Sequence[str] | None = None) -> Subspace:
    """Span of all partial contractions of w against bras on the E factors.

    Contracting against the computational basis of E suffices: the
    contraction is antilinear in the bra, so these vectors span the same
    space as contractions against every vector of E.  The result lives on
    the remaining factors.
    """
    e = list(e_labels)
    rest = [lab for lab in w.ambient.labels if lab not in set(e)]
    if f_labels is not None and list(f_labels) != rest:
        if sorted(f_labels) != sorted(rest):
            raise ValueError(
                f"E/F labels do not partition the ambient factors: "
                f"{e} + {list(f_labels)} vs {w.ambient.labels}"
            )
        rest = list(f_labels)
    for lab in e:
        w.ambient.index(lab)
    f_space = w.ambient.select(rest)
    if w.dim == 0:
        return Subspace.zero(f_space)
    d_e = w.ambient.select(e).dim
    cols = []
    for j in range(w.dim):
        v = permute_systems(Vec(w.ambient, w.basis[:, j]), e + rest)
        cols.append(v.data.reshape(d_e, f_space.dim).T)
    return from_spanning(np.concatenate(cols, axis=1), f_space, w.built_tol)


def image(u: LinOp, s: Subspace, tol: float | None = None) -> Subspace:
    """Image of a subspace under an operator, re-orthonormalized."""
    if set(s.ambient.labels) != set(u.in_space.labels):
        raise ValueError(
            f"subspace ambient {s.ambient.labels} does not match operator input {u.in_space.labels}"
        )
    for lab, d in s.ambient.factors:
        if u.in_space.dim_of(lab) != d:
            raise ValueError(f"factor {lab!r} has mismatched dims")
    order = list(s.ambient.labels) + [
        lab for lab in u.out_space.labels if lab not in set(s.ambient.labels)
    ]
    op = permute_systems(u, order)
    return from_spanning(op.data @ s.basis, op.out_space, tol if tol is not None else s.built_tol)


def product_subspace(parts: Sequence[Union[Subspace, Spaces]], tol: float = RANK_RTOL) -> Subspace:
    """Tensor product of subspaces; a bare Spaces entry stands for the full factor."""
    subs = [p if isinstance(p, Subspace) else Subspace.full(p) for p in parts]
    ambient = subs[0].ambient
    basis = subs[0].basis
    for s in subs[1:]:
        ambient = ambient.concat(s.ambient)
        basis = np.kron(basis, s.basis)
    return Subspace(ambient, basis, tol)
