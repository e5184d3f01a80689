"""Matrix *-algebras as computable objects.

An algebra is stored as an orthonormal basis (Hilbert-Schmidt inner
product) of a subspace of the n^2-dimensional matrix space, which turns
algebra comparisons and intersections into numerically stable projection
arithmetic.  Commutants are joint kernels of Sylvester maps; the kernels
are extracted from a single normal matrix so one eigendecomposition does
the whole job even for large bases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    CenterSplitFailed,
    ClosureFailed,
    DecompositionFailed,
    DimensionMismatch,
    NotContained,
    NotInvariantAlgebra,
)
from .groups import Subgroup
from .linalg import DEFAULT_TOL, Subspace, Tolerance, dagger, frob
from .reps import UnitaryRep, average_conjugation

_CLOSURE_RESIDUAL = 1e-9
_EIGENVALUE_GAP = 1e-8
_MAX_RESAMPLES = 8


class StarAlgebra:
    """A unital *-subalgebra of the n-by-n matrices.

    ``basis`` is an (k, n, n) array of Hilbert-Schmidt orthonormal
    matrices.  ``verify`` re-checks the closure axioms (products and
    adjoints stay in the span, the identity lies in the span) — cheap
    insurance that every construction path produced an actual algebra.
    """

    def __init__(self, ambient_dim: int, basis, verify: bool = True,
                 tol: Tolerance = DEFAULT_TOL):
        b = np.asarray(basis, dtype=np.complex128)
        if b.ndim != 3 or b.shape[1] != ambient_dim or b.shape[2] != ambient_dim:
            raise DimensionMismatch(
                f"basis shape {b.shape} does not fit ambient dimension {ambient_dim}"
            )
        self.ambient_dim = int(ambient_dim)
        self.basis = b
        self.basis.setflags(write=False)
        self._flat = b.reshape(b.shape[0], -1)
        self._flat_conj_t = self._flat.conj().T
        self._subspace = Subspace(ambient_dim * ambient_dim, self._flat.T)
        if verify:
            self._verify_closure(tol)

    # -- construction ------------------------------------------------------
    @staticmethod
    def from_span(matrices, ambient_dim: int, verify: bool = True,
                  tol: Tolerance = DEFAULT_TOL) -> "StarAlgebra":
        mats = np.asarray(matrices, dtype=np.complex128).reshape(-1, ambient_dim,
                                                                 ambient_dim)
        span = Subspace.from_span(mats.reshape(mats.shape[0], -1), ambient_dim ** 2, tol)
        basis = span.basis.T.reshape(-1, ambient_dim, ambient_dim)
        return StarAlgebra(ambient_dim, basis, verify=verify, tol=tol)

    @staticmethod
    def full(ambient_dim: int) -> "StarAlgebra":
        basis = np.eye(ambient_dim ** 2, dtype=np.complex128).reshape(
            ambient_dim ** 2, ambient_dim, ambient_dim
        )
        return StarAlgebra(ambient_dim, basis, verify=False)

    @staticmethod
    def scalars(ambient_dim: int) -> "StarAlgebra":
        eye = np.eye(ambient_dim, dtype=np.complex128) / np.sqrt(ambient_dim)
        return StarAlgebra(ambient_dim, eye[None], verify=False)

    @staticmethod
    def diagonal(ambient_dim: int) -> "StarAlgebra":
        basis = np.zeros((ambient_dim, ambient_dim, ambient_dim), dtype=np.complex128)
        for i in range(ambient_dim):
            basis[i, i, i] = 1.0
        return StarAlgebra(ambient_dim, basis, verify=False)

    # -- views ---------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim ** 2

    def subspace(self) -> Subspace:
        return self._subspace

    # -- membership ----------------------------------------------------------
    def membership_residual(self, a: np.ndarray) -> float:
        v = np.asarray(a, dtype=np.complex128).reshape(-1)
        return float(np.linalg.norm(v - self._subspace.project(v)))

    def contains_matrix(self, a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
        scale = max(frob(np.asarray(a)), 1.0)
        return self.membership_residual(a) <= tol.rank_threshold(scale)

    def project_matrix(self, a: np.ndarray) -> np.ndarray:
        v = np.asarray(a, dtype=np.complex128).reshape(-1)
        return self._subspace.project(v).reshape(self.ambient_dim, self.ambient_dim)

    def coordinates(self, a: np.ndarray) -> np.ndarray:
        """Hilbert-Schmidt coefficients of ``a`` in the basis."""
        flat = self.basis.reshape(self.dim, -1)
        return flat.conj() @ np.asarray(a, dtype=np.complex128).reshape(-1)

    def from_coordinates(self, c: np.ndarray) -> np.ndarray:
        return np.einsum("k,kij->ij", np.asarray(c, dtype=np.complex128), self.basis)

    def equals(self, other: "StarAlgebra", tol: Tolerance = DEFAULT_TOL) -> bool:
        return self._subspace.equals(other._subspace, tol)

    def contains_algebra(self, other: "StarAlgebra", tol: Tolerance = DEFAULT_TOL) -> bool:
        return self._subspace.contains(other._subspace, tol)

    def subspace_hash(self, decimals: int = 6) -> bytes:
        """Hash of the rounded orthogonal projector; basis independent."""
        p = np.round(self._subspace.projector(), decimals) + 0.0
        return p.tobytes()

    # -- internal ------------------------------------------------------------
    def _batch_membership_residual(self, rows: np.ndarray) -> float:
        """Worst distance of the given row vectors from the span."""
        if rows.shape[0] == 0:
            return 0.0
        coords = rows @ self._flat_conj_t
        rest = rows - coords @ self._flat
        return float(np.sqrt(np.einsum("ij,ij->i", rest, rest.conj()).real.max()))

    def _verify_closure(self, tol: Tolerance) -> None:
        n, b, k = self.ambient_dim, self.basis, self.dim
        eye = np.eye(n, dtype=np.complex128)
        if self.membership_residual(eye) > _CLOSURE_RESIDUAL * np.sqrt(n):
            raise ClosureFailed("identity matrix is not in the span")
        adj = b.conj().transpose(0, 2, 1).reshape(k, n * n)
        res = self._batch_membership_residual(adj)
        if res > _CLOSURE_RESIDUAL:
            raise ClosureFailed(f"not closed under adjoints, residual {res:.3e}")
        # all pairwise products when affordable, a seeded sample otherwise
        if k * k <= 1024:
            prods = np.einsum("aij,bjk->abik", b, b).reshape(k * k, n * n)
        else:
            rng = np.random.default_rng(0)
            left = rng.integers(0, k, size=256)
            right = rng.integers(0, k, size=256)
            prods = np.einsum("aij,ajk->aik", b[left], b[right]).reshape(-1, n * n)
        res = self._batch_membership_residual(prods)
        if res > _CLOSURE_RESIDUAL:
            raise ClosureFailed(f"not closed under products, residual {res:.3e}")

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"StarAlgebra(dim={self.dim}, ambient={self.ambient_dim})"


# ---------------------------------------------------------------------------
# generated closure


def algebra_from_generators(generators, ambient_dim: int,
                            tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """Smallest unital *-algebra containing the generators.

    Grows the span of words in the generators (and their adjoints); the
    dimension is monotone and bounded by n^2, so a non-stabilizing
    iteration is an internal error, not a tolerance knob.
    """
    n = ambient_dim
    gens = [np.asarray(g, dtype=np.complex128) for g in generators]
    for g in gens:
        if g.shape != (n, n):
            raise DimensionMismatch(f"generator shape {g.shape}, expected {(n, n)}")
    gens = gens + [dagger(g) for g in gens]
    seed = [np.eye(n, dtype=np.complex128)] + gens
    span = Subspace.from_span(np.array(seed).reshape(len(seed), -1), n * n, tol)
    if not gens:
        return StarAlgebra.from_span(seed, n, tol=tol)
    gen_stack = np.array(gens)
    for _ in range(n * n + 1):
        basis = span.basis.T.reshape(-1, n, n)
        words = np.einsum("aij,bjk->abik", basis, gen_stack).reshape(-1, n * n)
        grown = Subspace.from_span(np.vstack([span.basis.T, words]), n * n, tol)
        if grown.dim == span.dim:
            return StarAlgebra(n, grown.basis.T.reshape(-1, n, n), tol=tol)
        span = grown
    raise ClosureFailed("span growth did not stabilize within n^2 steps")


def group_image_algebra(rep: UnitaryRep, tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """Algebra generated by the image of a unitary representation."""
    return algebra_from_generators(rep.matrices, rep.dim, tol)


# ---------------------------------------------------------------------------
# commutants


def _sylvester_gram(mats: np.ndarray) -> np.ndarray:
    """Normal matrix sum_i L_i* L_i of the maps L_i: X -> B_i X - X B_i.

    Expanding the Kronecker form of L_i (row-major vec) gives

        L_i* L_i = (B_i* B_i) x I  +  I x conj(B_i B_i*)
                   - B_i* x B_i^T  -  B_i x conj(B_i),

    and the cross terms collapse to one dense matmul over the family.
    """
    k, n, _ = mats.shape
    bd = mats.conj().transpose(0, 2, 1)
    p1 = np.einsum("iab,ibc->ac", bd, mats)   # sum B*B
    p2 = np.einsum("iab,ibc->ac", mats, bd)   # sum BB*
    z = bd.reshape(k, n * n).T @ mats.transpose(0, 2, 1).reshape(k, n * n)
    x = z.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
    eye = np.eye(n, dtype=np.complex128)
    return np.kron(p1, eye) + np.kron(eye, p2.conj()) - x - dagger(x)


def commutant_of_matrices(mats, ambient_dim: int,
                          tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """All matrices commuting with every element of the given family."""
    mats = np.asarray(mats, dtype=np.complex128).reshape(-1, ambient_dim, ambient_dim)
    if mats.shape[0] == 0:
        return StarAlgebra.full(ambient_dim)
    scale = float(np.sqrt(np.sum(np.abs(mats) ** 2)))
    kernel = linalg.kernel_of_gram(_sylvester_gram(mats), tol, scale=scale)
    basis = kernel.T.reshape(-1, ambient_dim, ambient_dim)
    return StarAlgebra(ambient_dim, basis, tol=tol)


def commutant(a: StarAlgebra, tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """The commutant algebra; closure axioms hold automatically and are re-verified."""
    return commutant_of_matrices(a.basis, a.ambient_dim, tol)


def bicommutant_check(a: StarAlgebra, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Finite-dimensional double-commutant self-test: A'' == A as subspaces."""
    return commutant(commutant(a, tol), tol).equals(a, tol)


def relative_commutant(a: StarAlgebra, m: StarAlgebra,
                       tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """A' intersected with M, re-closed as an algebra."""
    if a.ambient_dim != m.ambient_dim:
        raise DimensionMismatch("algebras live on different spaces")
    if not m.contains_algebra(a, tol):
        raise NotContained("first algebra is not contained in the second")
    c = commutant(a, tol)
    if m.is_full:
        return c
    inter = c.subspace().intersect(m.subspace(), tol)
    basis = inter.basis.T.reshape(-1, a.ambient_dim, a.ambient_dim)
    return StarAlgebra(a.ambient_dim, basis, tol=tol)


def center(m: StarAlgebra, tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    return relative_commutant(m, m, tol)


def is_factor(m: StarAlgebra, tol: Tolerance = DEFAULT_TOL) -> bool:
    return center(m, tol).dim == 1


# ---------------------------------------------------------------------------
# block (type-I) structure


@dataclass(frozen=True)
class BlockStructure:
    """Shape [(block_dim, multiplicity), ...] plus the conjugating unitary.

    Conjugation by ``unitary`` maps the algebra to an exact direct sum in
    which central block b carries matrices ``kron(A_b, eye(multiplicity))``.
    """

    blocks: tuple
    unitary: np.ndarray

    @property
    def total_dim(self) -> int:
        return sum(n * m for n, m in self.blocks)


def _central_split(m: StarAlgebra, z: StarAlgebra, rng, tol: Tolerance):
    """Spectral projections of a generic Hermitian central element."""
    n = m.ambient_dim
    for _ in range(_MAX_RESAMPLES):
        coeff = rng.standard_normal(z.dim) + 1j * rng.standard_normal(z.dim)
        c = z.from_coordinates(coeff)
        c = c + dagger(c)
        w, v = linalg.hermitian_eig(c, tol)
        edges = np.nonzero(np.diff(w) > _EIGENVALUE_GAP)[0]
        bounds = [0, *(e + 1 for e in edges), n]
        if len(bounds) - 1 != z.dim:
            continue  # eigenvalue collision between central components
        return [v[:, bounds[i]:bounds[i + 1]] for i in range(len(bounds) - 1)]
    raise CenterSplitFailed(
        f"could not separate {z.dim} central components after {_MAX_RESAMPLES} draws"
    )


def _factor_structure(basis: np.ndarray, rng, tol: Tolerance):
    """Unitary taking a factor on C^r to exact kron(M_n, eye_m) form."""
    r = basis.shape[1]
    block_dim = int(round(np.sqrt(basis.shape[0])))
    if block_dim * block_dim != basis.shape[0]:
        raise DecompositionFailed(
            f"central block of dimension {basis.shape[0]} is not a full matrix algebra"
        )
    mult = r // block_dim
    if block_dim * mult != r:
        raise DecompositionFailed("block carrier size is not divisible by block dim")

    comm = commutant_of_matrices(basis, r, tol)
    if comm.dim != mult * mult:
        raise DecompositionFailed(
            f"commutant dimension {comm.dim} disagrees with multiplicity {mult}"
        )
    if mult == 1:
        isoms = [np.eye(r, dtype=np.complex128)]
    else:
        for _ in range(_MAX_RESAMPLES):
            coeff = rng.standard_normal(comm.dim) + 1j * rng.standard_normal(comm.dim)
            t = comm.from_coordinates(coeff)
            t = t + dagger(t)
            w, v = linalg.hermitian_eig(t, tol)
            edges = np.nonzero(np.diff(w) > _EIGENVALUE_GAP)[0]
            bounds = [0, *(e + 1 for e in edges), r]
            if len(bounds) - 1 == mult and all(
                bounds[i + 1] - bounds[i] == block_dim for i in range(mult)
            ):
                isoms = [v[:, bounds[i]:bounds[i + 1]] for i in range(mult)]
                break
        else:
            raise CenterSplitFailed("could not separate multiplicity copies")

    # restricted actions on each copy; align copies to the first one
    act = [np.einsum("ij,kjl,lm->kim", dagger(q), basis, q) for q in isoms]
    columns = np.zeros((r, block_dim, mult), dtype=np.complex128)
    columns[:, :, 0] = isoms[0]
    for j in range(1, mult):
        s = _module_intertwiner(act[j], act[0], rng)
        columns[:, :, j] = isoms[j] @ s
    # carrier index (a, j) with a slow: conjugation gives kron(A, eye(mult))
    unitary = columns.reshape(r, block_dim * mult)
    return block_dim, mult, unitary


def _module_intertwiner(action_a, action_b, rng) -> np.ndarray:
    """Unitary s with action_a[k] @ s == s @ action_b[k] for all k (Schur case)."""
    k, d, _ = action_a.shape
    stacked = np.zeros((k * d * d, d * d), dtype=np.complex128)
    eye = np.eye(d, dtype=np.complex128)
    for i in range(k):
        stacked[i * d * d:(i + 1) * d * d] = (
            np.kron(action_a[i], eye) - np.kron(eye, action_b[i].T)
        )
    kernel = linalg.nullspace(stacked).basis
    if kernel.shape[1] != 1:
        raise DecompositionFailed(
            f"intertwiner space has dimension {kernel.shape[1]}, expected 1"
        )
    s = kernel[:, 0].reshape(d, d)
    gram = dagger(s) @ s
    scale = float(gram[0, 0].real)
    if scale <= 0 or frob(gram - scale * np.eye(d)) > 1e-8 * max(scale, 1.0):
        raise DecompositionFailed("intertwiner is not a multiple of a unitary")
    return s / np.sqrt(scale)


def block_structure(m: StarAlgebra, seed: int = 0,
                    tol: Tolerance = DEFAULT_TOL) -> BlockStructure:
    """Unique type-I shape of the algebra: direct sum of kron(M_n, 1_m) blocks.

    Minimal central projections come from spectrally splitting a generic
    element of the center; inside each central block the block dimension
    is the irreducible size and the multiplicity comes from the commutant.
    """
    rng = np.random.default_rng(seed)
    n = m.ambient_dim
    z = center(m, tol)
    pieces = _central_split(m, z, rng, tol) if z.dim > 1 else [
        np.eye(n, dtype=np.complex128)
    ]

    found = []
    for q in pieces:
        compressed = np.einsum("ij,kjl,lm->kim", dagger(q), m.basis, q)
        span = Subspace.from_span(
            compressed.reshape(m.dim, -1), q.shape[1] ** 2, tol
        )
        local_basis = span.basis.T.reshape(-1, q.shape[1], q.shape[1])
        block_dim, mult, w = _factor_structure(local_basis, rng, tol)
        found.append((block_dim, mult, q @ w))

    found.sort(key=lambda t: (t[0], t[1]))
    unitary = np.hstack([w for _, _, w in found])
    blocks = tuple((b, mu) for b, mu, _ in found)
    if sum(b * mu for b, mu in blocks) != n:
        raise DecompositionFailed("block sizes do not add up to the ambient dimension")
    return BlockStructure(blocks, unitary)


def block_structure_residual(m: StarAlgebra, structure: BlockStructure) -> float:
    """How far conjugated basis elements are from exact block-kron form."""
    u = structure.unitary
    worst = 0.0
    for b in m.basis:
        c = dagger(u) @ b @ u
        at = 0
        rebuilt = np.zeros_like(c)
        for bd, mu in structure.blocks:
            size = bd * mu
            blk = c[at:at + size, at:at + size].reshape(bd, mu, bd, mu)
            small = np.einsum("ajbj->ab", blk) / mu
            rebuilt[at:at + size, at:at + size] = np.kron(small, np.eye(mu))
            at += size
        worst = max(worst, frob(c - rebuilt))
    return worst


# ---------------------------------------------------------------------------
# fixed-point algebras and averaging


def _action_projector(rep: UnitaryRep, members) -> np.ndarray:
    """Matrix of A -> average of U_h A U_h* over the members, on vec(A)."""
    mats = rep.matrices[list(members)]
    acc = np.zeros((rep.dim ** 2, rep.dim ** 2), dtype=np.complex128)
    for u in mats:
        acc += np.kron(u, u.conj())
    return acc / len(mats)


def fixed_point_algebra(m: StarAlgebra, rep: UnitaryRep, subgroup: Subgroup,
                        tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """Elements of M invariant under conjugation by the subgroup's unitaries.

    Equals the range of the averaging projection intersected with M; the
    action is checked to preserve M first.
    """
    if rep.dim != m.ambient_dim:
        raise DimensionMismatch("representation does not act on the algebra's space")
    _check_invariance(m, rep, subgroup.members, tol)
    proj = _action_projector(rep, subgroup.members)
    w, v = linalg.hermitian_eig(proj, tol)
    fixed = Subspace(rep.dim ** 2, v[:, w > 0.5])
    if not m.is_full:
        fixed = fixed.intersect(m.subspace(), tol)
    basis = fixed.basis.T.reshape(-1, rep.dim, rep.dim)
    return StarAlgebra(rep.dim, basis, tol=tol)


def _check_invariance(m: StarAlgebra, rep: UnitaryRep, members, tol: Tolerance) -> None:
    if m.is_full:
        return
    for h in members:
        u = rep.matrices[h]
        moved = np.einsum("ij,kjl,lm->kim", u, m.basis, dagger(u))
        res = float(
            np.max([m.membership_residual(x) for x in moved])
        )
        if res > 1e-8:
            raise NotInvariantAlgebra(
                f"conjugation by element {h} leaves the algebra (residual {res:.3e})"
            )


@dataclass(frozen=True)
class AveragingReport:
    invariant_part: np.ndarray
    fluctuation: np.ndarray
    state_residuals: tuple


def averaging_projection(a, rep: UnitaryRep, invariant_states=(),
                         tol: Tolerance = DEFAULT_TOL) -> AveragingReport:
    """Split a into its invariant average and the state-annihilated rest.

    Returns ``(a_avg, a - a_avg)`` where ``a_avg`` is the group average of
    the conjugates; every supplied invariant state must kill the
    fluctuation part, and the residuals are reported.
    """
    a = np.asarray(a, dtype=np.complex128)
    avg = average_conjugation(rep, a)
    rest = a - avg
    residuals = tuple(
        float(abs(np.trace(np.asarray(rho) @ rest))) for rho in invariant_states
    )
    return AveragingReport(avg, rest, residuals)
