"""Unitary representations of finite groups and the Peter-Weyl toolkit.

The decomposition strategy is the classic averaging trick: a group-average
of a random Hermitian operator commutes with the representation, so its
eigenspaces are invariant; recursing until the restricted commutant is
scalar yields irreducible pieces.  Tables of irreducibles are computed
once per group from the regular representation and canonicalized so that
identical inputs give identical tables across runs.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DecompositionFailed,
    IncompleteTable,
    NotAHomomorphism,
    NotIrreducible,
    ParentMismatch,
    SingularMatrix,
    ZeroVector,
)
from .groups import FiniteGroup
from .linalg import DEFAULT_TOL, Tolerance, dagger, frob

_EIGENVALUE_GAP = 1e-8
_CHARACTER_MATCH = 1e-8
_MAX_RESAMPLES = 8
_TABLE_SEED = 0x5EED


class UnitaryRep:
    """A homomorphism from a finite group into unitary matrices.

    ``matrices`` has shape ``(order, dim, dim)``.  Construction verifies
    unitarity, the homomorphism property on all pairs, and that the
    identity element maps to the identity matrix.
    """

    def __init__(self, group: FiniteGroup, matrices, check: bool = True,
                 tol: Tolerance = DEFAULT_TOL):
        mats = np.asarray(matrices, dtype=np.complex128)
        if mats.ndim != 3 or mats.shape[0] != group.order or mats.shape[1] != mats.shape[2]:
            raise ParentMismatch(
                f"need {group.order} square matrices, got shape {mats.shape}"
            )
        self.group = group
        self.dim = mats.shape[1]
        self.matrices = mats
        self.matrices.setflags(write=False)
        if check:
            self._validate(tol)

    def _validate(self, tol: Tolerance) -> None:
        g, mats, d = self.group, self.matrices, self.dim
        eye = np.eye(d)
        err = max(frob(dagger(m) @ m - eye) for m in mats)
        if err > 1e-8 * max(1.0, d):
            raise NotAHomomorphism(f"matrices not unitary, residual {err:.3e}")
        if frob(mats[g.identity] - eye) > 1e-8:
            raise NotAHomomorphism("identity element does not map to identity matrix")
        # matrices[a] @ matrices[b] == matrices[a*b] for all pairs
        prod = np.einsum("aij,bjk->abik", mats, mats)
        expected = mats[g.mult]
        err = float(np.max(np.abs(prod - expected)))
        if err > 1e-8:
            raise NotAHomomorphism(f"homomorphism violated, residual {err:.3e}")

    def matrix(self, a: int) -> np.ndarray:
        return self.matrices[a]

    def character(self) -> np.ndarray:
        return np.einsum("gii->g", self.matrices)

    def conjugated(self, u: np.ndarray) -> "UnitaryRep":
        """The equivalent representation u* . rep(g) . u."""
        ud = dagger(u)
        return UnitaryRep(self.group, np.einsum("ij,gjk,kl->gil", ud, self.matrices, u),
                          check=False)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"UnitaryRep(order={self.group.order}, dim={self.dim})"


def trivial_rep(group: FiniteGroup, dim: int = 1) -> UnitaryRep:
    mats = np.broadcast_to(np.eye(dim, dtype=np.complex128),
                           (group.order, dim, dim)).copy()
    return UnitaryRep(group, mats, check=False)


def regular_rep(group: FiniteGroup) -> UnitaryRep:
    """Left regular representation on C^order: U_a e_b = e_{a*b}."""
    n = group.order
    mats = np.zeros((n, n, n), dtype=np.complex128)
    for a in range(n):
        mats[a, group.mult[a], np.arange(n)] = 1.0
    return UnitaryRep(group, mats, check=False)


def permutation_rep(group: FiniteGroup, action) -> UnitaryRep:
    """Representation by permutation matrices for a given action table.

    ``action[g][i]`` is the image of point ``i`` under element ``g``.
    """
    act = np.asarray(action, dtype=np.intp)
    npts = act.shape[1]
    mats = np.zeros((group.order, npts, npts), dtype=np.complex128)
    for g in range(group.order):
        mats[g, act[g], np.arange(npts)] = 1.0
    return UnitaryRep(group, mats)


def direct_sum(*reps: UnitaryRep) -> UnitaryRep:
    group = reps[0].group
    total = sum(r.dim for r in reps)
    mats = np.zeros((group.order, total, total), dtype=np.complex128)
    at = 0
    for r in reps:
        if r.group != group:
            raise ParentMismatch("direct sum of representations of different groups")
        mats[:, at:at + r.dim, at:at + r.dim] = r.matrices
        at += r.dim
    return UnitaryRep(group, mats, check=False)


# ---------------------------------------------------------------------------
# unitarization and the averaging operator


def unitarize(group: FiniteGroup, matrices, tol: Tolerance = DEFAULT_TOL) -> UnitaryRep:
    """Turn an invertible-matrix representation into a unitary one.

    Conjugates with the square root of the averaged Gram matrix
    ``G = (1/order) sum_g M_g* M_g``, which realizes the invariant inner
    product ``<u, v> = (1/order) sum_g <M_g u, M_g v>``.
    """
    mats = np.asarray(matrices, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[0] != group.order:
        raise ParentMismatch(f"need {group.order} matrices, got shape {mats.shape}")
    for i, m in enumerate(mats):
        if abs(np.linalg.det(m)) < 1e-12:
            raise SingularMatrix(f"matrix for element {i} is singular")
    prod = np.einsum("aij,bjk->abik", mats, mats)
    err = float(np.max(np.abs(prod - mats[group.mult])))
    if err > 1e-8:
        raise NotAHomomorphism(f"homomorphism violated, residual {err:.3e}")
    gram = np.einsum("gji,gjk->ik", mats.conj(), mats) / group.order
    root = linalg.matrix_real_power(gram, 0.5, tol)
    root_inv = linalg.matrix_real_power(gram, -0.5, tol)
    return UnitaryRep(group, np.einsum("ij,gjk,kl->gil", root, mats, root_inv))


def weyl_operator(rep: UnitaryRep, u, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Group average of the rank-one projections onto the orbit of ``u``.

    ``K = (1/order) sum_g (U_g u)(U_g u)*`` is Hermitian, positive, and
    commutes with every representation matrix; its eigenspaces are
    invariant subspaces.
    """
    u = np.asarray(u, dtype=np.complex128).reshape(-1)
    if np.linalg.norm(u) <= tol.abs_eps:
        raise ZeroVector("cannot average the orbit of the zero vector")
    orbit = rep.matrices @ u
    return np.einsum("gi,gj->ij", orbit, orbit.conj()) / rep.group.order


def average_conjugation(rep: UnitaryRep, a: np.ndarray) -> np.ndarray:
    """(1/order) sum_g U_g a U_g*; lands in the commutant of the image."""
    return np.einsum("gij,jk,glk->il", rep.matrices, a, rep.matrices.conj()) / rep.group.order


# ---------------------------------------------------------------------------
# commutant dimension (local helper; the algebras module has the full story)


def _commutant_kernel(matrices: np.ndarray, tol: Tolerance) -> np.ndarray:
    """Kernel of X -> (B X - X B)_i over the given matrices, via the normal matrix."""
    mats = np.asarray(matrices, dtype=np.complex128)
    k, n, _ = mats.shape
    bd = mats.conj().transpose(0, 2, 1)
    p1 = np.einsum("iab,ibc->ac", bd, mats)
    p2 = np.einsum("iab,ibc->ac", mats, bd)
    z = bd.reshape(k, n * n).T @ mats.transpose(0, 2, 1).reshape(k, n * n)
    x = z.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
    eye = np.eye(n, dtype=np.complex128)
    gram = np.kron(p1, eye) + np.kron(eye, p2.conj()) - x - dagger(x)
    scale = float(np.sqrt(np.sum(np.abs(mats) ** 2)))
    return linalg.kernel_of_gram(gram, tol, scale=scale)


def commutant_dimension(rep: UnitaryRep, tol: Tolerance = DEFAULT_TOL) -> int:
    return _commutant_kernel(rep.matrices, tol).shape[1]


def is_irreducible(rep: UnitaryRep, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Schur test: scalar commutant."""
    return commutant_dimension(rep, tol) == 1


# ---------------------------------------------------------------------------
# splitting into irreducible invariant subspaces


def _restricted(mats: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.einsum("ij,gjk,kl->gil", dagger(q), mats, q)


def _split_once(mats: np.ndarray, rng: np.random.Generator, tol: Tolerance):
    """Split C^k into invariant eigenspaces of an averaged random Hermitian."""
    k = mats.shape[1]
    group_size = mats.shape[0]
    for _ in range(_MAX_RESAMPLES):
        h = linalg.random_hermitian(k, rng)
        t = np.einsum("gij,jk,glk->il", mats, h, mats.conj()) / group_size
        w, v = linalg.hermitian_eig(t, tol)
        # group eigenvalues separated by more than the collision gap
        edges = np.nonzero(np.diff(w) > _EIGENVALUE_GAP)[0]
        bounds = [0, *(e + 1 for e in edges), k]
        pieces = [v[:, bounds[i]:bounds[i + 1]] for i in range(len(bounds) - 1)]
        if len(pieces) == 1:
            continue  # collision or unlucky sample; try again
        ok = all(
            max(frob(m @ q - q @ (dagger(q) @ m @ q)) for m in mats) < 1e-9 * k
            for q in pieces
        )
        if ok:
            return pieces
    raise DecompositionFailed(
        "averaged operator failed to split an invariant subspace "
        f"after {_MAX_RESAMPLES} resamples (tolerance collision)"
    )


def invariant_isometries(rep: UnitaryRep, seed: int, tol: Tolerance = DEFAULT_TOL):
    """Isometries onto irreducible invariant subspaces, deterministically seeded."""
    rng = np.random.default_rng(seed)
    out = []
    stack = [np.eye(rep.dim, dtype=np.complex128)]
    while stack:
        q = stack.pop()
        sub = _restricted(rep.matrices, q)
        if _commutant_kernel(sub, tol).shape[1] == 1:
            out.append(q)
            continue
        for piece in _split_once(sub, rng, tol):
            stack.append(q @ piece)
    return out


# ---------------------------------------------------------------------------
# irreducible tables, canonicalized per group


@dataclass(frozen=True)
class IrrepTable:
    """Complete list of pairwise-inequivalent irreducibles of one group."""

    group: FiniteGroup
    irreps: tuple  # of UnitaryRep
    characters: np.ndarray  # shape (len(irreps), order)

    @property
    def dims(self) -> tuple:
        return tuple(r.dim for r in self.irreps)

    def index_of_character(self, chi: np.ndarray) -> int:
        diffs = np.max(np.abs(self.characters - np.asarray(chi)[None, :]), axis=1)
        best = int(np.argmin(diffs))
        if diffs[best] > _CHARACTER_MATCH:
            raise DecompositionFailed(
                f"character matches no table entry (distance {diffs[best]:.3e})"
            )
        return best


_TABLE_CACHE: dict = {}
_TABLE_LOCK = threading.Lock()


def irrep_table(group: FiniteGroup, tol: Tolerance = DEFAULT_TOL) -> IrrepTable:
    """All irreducibles of the group, from its regular representation.

    Memoized on the multiplication table; the cached value is shared by
    every group object with the same table.  The result is canonical:
    irreps sorted by (dimension, lexicographic character), one
    representative per character class.
    """
    key = group.key()
    with _TABLE_LOCK:
        cached = _TABLE_CACHE.get(key)
    if cached is not None:
        return cached

    reg = regular_rep(group)
    pieces = invariant_isometries(reg, _TABLE_SEED, tol)
    reps_by_char = []
    for q in pieces:
        mats = _restricted(reg.matrices, q)
        chi = np.einsum("gii->g", mats)
        for chi0, _ in reps_by_char:
            if np.max(np.abs(chi0 - chi)) < _CHARACTER_MATCH:
                break
        else:
            reps_by_char.append((chi, UnitaryRep(group, mats)))

    def sort_key(item):
        chi, rep = item
        return (rep.dim, tuple((round(c.real, 6), round(c.imag, 6)) for c in chi))

    reps_by_char.sort(key=sort_key)
    irreps = tuple(rep for _, rep in reps_by_char)
    characters = np.array([chi for chi, _ in reps_by_char])
    if sum(r.dim ** 2 for r in irreps) != group.order:
        raise DecompositionFailed(
            "irrep dimensions do not account for the group order: "
            f"{[r.dim for r in irreps]} vs {group.order}"
        )
    table = IrrepTable(group, irreps, characters)
    with _TABLE_LOCK:
        _TABLE_CACHE.setdefault(key, table)
    return table


# ---------------------------------------------------------------------------
# full decomposition with canonical blocks


@dataclass(frozen=True)
class Decomposition:
    """Block data for a representation: which irreps, how often, and the basis."""

    source: UnitaryRep
    table: IrrepTable
    blocks: tuple  # of (irrep index, multiplicity)
    intertwiner: np.ndarray  # unitary; conjugation gives exact canonical blocks

    def block_dims(self) -> list:
        return [self.table.irreps[i].dim for i, m in self.blocks for _ in range(m)]


def _align_to_irrep(sub_mats: np.ndarray, target: UnitaryRep, rng,
                    tol: Tolerance) -> np.ndarray:
    """Unitary w with w* sub(g) w == target(g) exactly, via averaged intertwiner."""
    d = target.dim
    group_size = sub_mats.shape[0]
    tgt_inv = target.matrices[target.group.inverse]
    for _ in range(_MAX_RESAMPLES):
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        w = np.einsum("gij,jk,gkl->il", sub_mats, x, tgt_inv) / group_size
        gram = dagger(w) @ w
        scale = gram[0, 0].real
        if scale < 1e-10:
            continue
        if frob(gram - scale * np.eye(d)) > 1e-8 * max(scale, 1.0):
            raise DecompositionFailed("intertwiner space is not one-dimensional")
        return w / np.sqrt(scale)
    raise DecompositionFailed("averaged intertwiner vanished repeatedly")


def decompose(rep: UnitaryRep, seed: int, tol: Tolerance = DEFAULT_TOL) -> Decomposition:
    """Decompose into canonical irreducible blocks.

    The intertwiner is unitary and conjugation by it maps the source to an
    exact direct sum of table irreps, sorted by table index with equal
    blocks adjacent.  Raises DecompositionFailed when the commutant
    dimension of the source disagrees with the multiplicity accounting,
    which signals a tolerance problem rather than bad input.
    """
    table = irrep_table(rep.group, tol)
    rng = np.random.default_rng(seed)
    pieces = invariant_isometries(rep, seed, tol)
    labelled = []
    for q in pieces:
        sub = _restricted(rep.matrices, q)
        chi = np.einsum("gii->g", sub)
        idx = table.index_of_character(chi)
        w = _align_to_irrep(sub, table.irreps[idx], rng, tol)
        labelled.append((idx, q @ w))
    labelled.sort(key=lambda t: t[0])

    blocks = []
    columns = []
    for idx, q in labelled:
        if blocks and blocks[-1][0] == idx:
            blocks[-1][1] += 1
        else:
            blocks.append([idx, 1])
        columns.append(q)
    intertwiner = np.hstack(columns)

    mults = {idx: m for idx, m in blocks}
    expected_commutant = sum(m * m for m in mults.values())
    actual = commutant_dimension(rep, tol)
    if actual != expected_commutant:
        raise DecompositionFailed(
            f"commutant dimension {actual} != sum of squared multiplicities "
            f"{expected_commutant}"
        )
    if sum(table.irreps[i].dim * m for i, m in blocks) != rep.dim:
        raise DecompositionFailed("block dimensions do not sum to the source dimension")
    return Decomposition(rep, table, tuple((i, m) for i, m in blocks), intertwiner)


def multiplicities(rep: UnitaryRep, table: IrrepTable | None = None) -> np.ndarray:
    """Multiplicity of each table irrep in ``rep`` via character pairing."""
    if table is None:
        table = irrep_table(rep.group)
    chi = rep.character()
    pair = table.characters.conj() @ chi / rep.group.order
    counts = np.rint(pair.real).astype(int)
    if np.max(np.abs(pair - counts)) > 1e-8:
        raise DecompositionFailed("character pairing is not integral")
    return counts


# ---------------------------------------------------------------------------
# matrix coefficients, characters, Schur orthogonality


def matrix_coefficients(rep: UnitaryRep) -> np.ndarray:
    """D[i, j] as group functions: D[i, j, g] = rep(g)[i, j]."""
    return rep.matrices.transpose(1, 2, 0).copy()


def character(rep: UnitaryRep) -> np.ndarray:
    return rep.character()


def character_inner(group: FiniteGroup, chi1, chi2) -> complex:
    """(1/order) sum_g chi1(g) conj(chi2(g)); counts common multiplicities."""
    chi1 = np.asarray(chi1, dtype=np.complex128)
    chi2 = np.asarray(chi2, dtype=np.complex128)
    return complex(np.sum(chi1 * chi2.conj()) / group.order)


@dataclass(frozen=True)
class SchurReport:
    """All pairwise coefficient inner products of two irreducibles."""

    values: np.ndarray        # shape (d1, d1, d2, d2); [i,j,k,l] = <D1_ij, D2_kl>
    equivalent: bool          # character match between the two inputs
    matches_delta_pattern: bool
    matches_zero: bool
    max_deviation: float


def schur_check(rep1: UnitaryRep, rep2: UnitaryRep,
                tol: float = 1e-10) -> SchurReport:
    """Check the coefficient orthogonality relations on two irreducibles.

    For identical irreducibles the inner products must equal
    ``(1/d) delta_ik delta_jl``; for inequivalent ones they vanish.
    """
    for r in (rep1, rep2):
        if not is_irreducible(r):
            raise NotIrreducible("schur_check requires irreducible inputs")
    if rep1.group != rep2.group:
        raise ParentMismatch("representations of different groups")
    order = rep1.group.order
    values = np.einsum("gij,gkl->ijkl", rep1.matrices, rep2.matrices.conj()) / order
    equivalent = bool(
        np.max(np.abs(rep1.character() - rep2.character())) < _CHARACTER_MATCH
    )
    d1, d2 = rep1.dim, rep2.dim
    if equivalent and d1 == d2:
        eye = np.eye(d1)
        pattern = np.einsum("ik,jl->ijkl", eye, eye) / d1
        dev = float(np.max(np.abs(values - pattern)))
        return SchurReport(values, True, dev <= tol, False, dev)
    dev = float(np.max(np.abs(values)))
    return SchurReport(values, equivalent, False, dev <= tol, dev)


# ---------------------------------------------------------------------------
# Peter-Weyl basis and the group Fourier transform


def peter_weyl_basis(table: IrrepTable) -> tuple:
    """The scaled coefficient functions sqrt(d) * D_jk as rows.

    Returns ``(basis, labels)`` where basis has shape (order, order) and
    row ``(sigma, j, k)`` is ``sqrt(d_sigma) * D^sigma_jk``; the rows are
    orthonormal under the normalized average, which is exactly the
    completeness statement at finite order.
    """
    group = table.group
    if sum(d * d for d in table.dims) != group.order:
        raise IncompleteTable("irrep dimensions do not sum to the group order")
    rows = []
    labels = []
    for s, rep in enumerate(table.irreps):
        scale = np.sqrt(rep.dim)
        for j in range(rep.dim):
            for k in range(rep.dim):
                rows.append(scale * rep.matrices[:, j, k])
                labels.append((s, j, k))
    return np.array(rows), labels


def fourier(table: IrrepTable, f) -> list:
    """Per-irrep blocks ``fhat(sigma) = sum_g f(g) sigma(g)`` (measure convention)."""
    f = np.asarray(f, dtype=np.complex128).reshape(-1)
    if f.shape[0] != table.group.order:
        raise ParentMismatch("function length does not match group order")
    return [np.einsum("g,gij->ij", f, rep.matrices) for rep in table.irreps]


def inverse_fourier(table: IrrepTable, blocks) -> np.ndarray:
    """Reconstruct f(g) = (1/order) sum_sigma d_sigma tr(sigma(g^-1) fhat(sigma))."""
    group = table.group
    if len(blocks) != len(table.irreps):
        raise IncompleteTable(f"expected {len(table.irreps)} blocks, got {len(blocks)}")
    f = np.zeros(group.order, dtype=np.complex128)
    for rep, block in zip(table.irreps, blocks):
        inv_mats = rep.matrices[group.inverse]
        f += rep.dim * np.einsum("gij,ji->g", inv_mats, np.asarray(block))
    return f / group.order


def plancherel_residual(table: IrrepTable, f) -> float:
    """|  (1/n) sum |f|^2  -  sum_s (d_s/n^2) ||fhat(s)||^2  |."""
    f = np.asarray(f, dtype=np.complex128).reshape(-1)
    n = table.group.order
    lhs = float(np.sum(np.abs(f) ** 2) / n)
    rhs = sum(
        rep.dim * float(np.sum(np.abs(block) ** 2)) / n ** 2
        for rep, block in zip(table.irreps, fourier(table, f))
    )
    return abs(lhs - rhs)


def measure_rep(carrier: UnitaryRep, mu) -> np.ndarray:
    """sum_g mu(g) carrier(g); a homomorphism from the measure algebra."""
    mu = np.asarray(mu, dtype=np.complex128).reshape(-1)
    if mu.shape[0] != carrier.group.order:
        raise ParentMismatch("weight vector length does not match group order")
    return np.einsum("g,gij->ij", mu, carrier.matrices)


@dataclass(frozen=True)
class PropernessReport:
    proper: bool
    rank: int
    present: tuple  # irrep indices with nonzero multiplicity (Sigma')
    missing: tuple  # the rest (Sigma^0)
    multiplicities: tuple


def is_proper(pi: UnitaryRep, table: IrrepTable | None = None,
              tol: Tolerance = DEFAULT_TOL) -> PropernessReport:
    """Whether the measure representation through ``pi`` is injective.

    Equivalent formulations are cross-checked: the flattened matrices
    ``pi(g)`` must be linearly independent, and every irreducible of the
    group must appear in ``pi``.
    """
    if table is None:
        table = irrep_table(pi.group, tol)
    flat = pi.matrices.reshape(pi.group.order, -1)
    s = np.linalg.svd(flat, compute_uv=False)
    cut = tol.rank_threshold(float(s[0])) if s.size else 0.0
    rank = int(np.sum(s > cut))
    mults = multiplicities(pi, table)
    present = tuple(int(i) for i in np.nonzero(mults)[0])
    missing = tuple(int(i) for i in np.nonzero(mults == 0)[0])
    proper_by_rank = rank == pi.group.order
    proper_by_mults = len(missing) == 0
    if proper_by_rank != proper_by_mults:
        raise DecompositionFailed(
            "properness checks disagree: rank test vs multiplicity test"
        )
    return PropernessReport(proper_by_rank, rank, present, missing,
                            tuple(int(m) for m in mults))
