"""Dense complex linear algebra with one global rank rule.

Every rank decision in the package (nullspaces, subspace comparisons,
algebra dimensions) goes through a single threshold,

    abs_eps + rel_eps * (largest singular value),

so subspace dimensions are consistent across modules.  Eigen-routines
return ascending eigenvalues and phase-fixed eigenvectors, which makes
reports reproducible for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    NotPositiveDefinite,
)


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative pair feeding the global rank rule."""

    abs_eps: float = 1e-12
    rel_eps: float = 1e-9

    def rank_threshold(self, largest_singular_value: float) -> float:
        return self.abs_eps + self.rel_eps * largest_singular_value

    @property
    def subspace_eps(self) -> float:
        # projection residual of a unit vector; sigma_max == 1 for orthonormal bases
        return self.rank_threshold(1.0)


DEFAULT_TOL = Tolerance()


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex128 array and reject non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix has non-finite entries")
    return m


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def opnorm(a: np.ndarray) -> float:
    """Operator norm (largest singular value)."""
    return float(np.linalg.norm(a, 2))


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def is_hermitian(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return frob(a - dagger(a)) <= tol.rank_threshold(max(frob(a), 1.0))


def _fix_phases(v: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real positive."""
    v = v.copy()
    idx = np.argmax(np.abs(v), axis=0)
    for j, i in enumerate(idx):
        pivot = v[i, j]
        if abs(pivot) > 0:
            v[:, j] *= pivot.conjugate() / abs(pivot)
    return v


def hermitian_eig(a, tol: Tolerance = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with ``w`` ascending and ``v`` unitary such that
    ``a = v @ diag(w) @ v*``.  Eigenvector phases are fixed so the output
    is reproducible for identical inputs.

    Raises
    ------
    NotHermitian
        if ``norm(a - a*)`` exceeds the tolerance.
    NoConvergence
        if the underlying iteration fails.
    """
    a = as_complex_matrix(a)
    if not is_hermitian(a, tol):
        raise NotHermitian(
            f"matrix is not Hermitian: ||A - A*|| = {frob(a - dagger(a)):.3e}"
        )
    try:
        w, v = np.linalg.eigh((a + dagger(a)) / 2.0)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return w, _fix_phases(v)


def nullspace(a, tol: Tolerance = DEFAULT_TOL) -> "Subspace":
    """Orthonormal basis of ``{x : a @ x = 0}`` under the global rank rule."""
    a = as_complex_matrix(a)
    if a.size == 0 or frob(a) == 0.0:
        return Subspace(a.shape[1], np.eye(a.shape[1], dtype=np.complex128))
    _, s, vh = np.linalg.svd(a)
    cut = tol.rank_threshold(s[0] if s.size else 0.0)
    rank = int(np.sum(s > cut))
    basis = vh[rank:].conj().T
    return Subspace(a.shape[1], basis)


def kernel_of_gram(gram: np.ndarray, tol: Tolerance = DEFAULT_TOL,
                   scale: float = 0.0) -> np.ndarray:
    """Kernel basis of a stacked map given its normal matrix ``S* S``.

    ``gram`` must be Hermitian PSD; singular values of the stacked map are
    the square roots of its eigenvalues.  Squaring costs half the digits,
    so ranks are resolvable only down to sqrt(machine eps): the rank rule
    is floored at ``1e-5 * sigma_scale``, which keeps kernel eigenvalues
    (at eps * lambda_max) far below the structural spectral gaps seen in
    practice.  ``scale`` supplies the natural magnitude of the stacked map
    for the degenerate case where the map itself (not just its kernel
    directions) vanishes and the gram is all rounding noise.  Returns
    kernel vectors as columns.
    """
    w, v = np.linalg.eigh((gram + dagger(gram)) / 2.0)
    s = np.sqrt(np.clip(w, 0.0, None))
    smax = s[-1] if s.size else 0.0
    s_ref = max(smax, scale)
    cut = max(tol.rank_threshold(s_ref), 1e-5 * s_ref)
    keep = s <= cut
    return _fix_phases(v[:, keep])


def matrix_real_power(p, exponent: float, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``p ** exponent`` for positive-definite ``p`` via spectral calculus."""
    p = as_complex_matrix(p)
    w, v = hermitian_eig(p, tol)
    if w[0] <= tol.rank_threshold(float(w[-1])):
        raise NotPositiveDefinite(f"min eigenvalue {w[0]:.3e} is not positive")
    return (v * (w ** exponent)) @ dagger(v)


def matrix_imaginary_power(p, t: float, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``p ** (i t)`` for positive-definite ``p``; the result is unitary."""
    p = as_complex_matrix(p)
    w, v = hermitian_eig(p, tol)
    if w[0] <= tol.rank_threshold(float(w[-1])):
        raise NotPositiveDefinite(f"min eigenvalue {w[0]:.3e} is not positive")
    phases = np.exp(1j * t * np.log(w))
    return (v * phases) @ dagger(v)


class Subspace:
    """A subspace of C^n stored as an orthonormal column basis."""

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis: np.ndarray):
        basis = np.asarray(basis, dtype=np.complex128)
        if basis.ndim != 2 or basis.shape[0] != ambient_dim:
            raise DimensionMismatch(
                f"basis shape {basis.shape} does not match ambient dim {ambient_dim}"
            )
        self.ambient_dim = int(ambient_dim)
        self.basis = basis

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @staticmethod
    def from_span(vectors, ambient_dim: int, tol: Tolerance = DEFAULT_TOL) -> "Subspace":
        """Orthonormalize a spanning set (rows or list of vectors).

        The row space basis is the leading rows of V* laid out as columns
        plainly transposed; conjugating here would silently swap the span
        for its complex conjugate.
        """
        m = np.asarray(vectors, dtype=np.complex128).reshape(-1, ambient_dim)
        if m.shape[0] == 0 or frob(m) == 0.0:
            return Subspace(ambient_dim, np.zeros((ambient_dim, 0), dtype=np.complex128))
        _, s, vh = np.linalg.svd(m, full_matrices=False)
        cut = tol.rank_threshold(s[0])
        rank = int(np.sum(s > cut))
        return Subspace(ambient_dim, _fix_phases(vh[:rank].T))

    def projector(self) -> np.ndarray:
        return self.basis @ dagger(self.basis)

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (dagger(self.basis) @ x)

    def residual(self, x: np.ndarray) -> float:
        """Distance of (each column of) x from the subspace, worst case."""
        x = np.asarray(x, dtype=np.complex128)
        if x.ndim == 1:
            x = x[:, None]
        r = x - self.project(x)
        return float(np.max(np.linalg.norm(r, axis=0))) if x.shape[1] else 0.0

    def contains(self, other: "Subspace", tol: Tolerance = DEFAULT_TOL) -> bool:
        self._check_ambient(other)
        return self.containment_residual(other) <= tol.subspace_eps

    def containment_residual(self, other: "Subspace") -> float:
        """Worst projection residual of other's basis vectors onto self."""
        self._check_ambient(other)
        if other.dim == 0:
            return 0.0
        return self.residual(other.basis)

    def equals(self, other: "Subspace", tol: Tolerance = DEFAULT_TOL) -> bool:
        self._check_ambient(other)
        if self.dim != other.dim:
            return False
        return (
            max(self.containment_residual(other), other.containment_residual(self))
            <= tol.subspace_eps
        )

    def intersect(self, other: "Subspace", tol: Tolerance = DEFAULT_TOL) -> "Subspace":
        """Intersection via the nullspace of stacked orthogonal complements."""
        self._check_ambient(other)
        n = self.ambient_dim
        eye = np.eye(n, dtype=np.complex128)
        gram = (2.0 * eye) - self.projector() - other.projector()
        kernel = kernel_of_gram(gram, tol, scale=np.sqrt(2.0))
        return Subspace(n, kernel)

    def _check_ambient(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch(
                f"ambient dims differ: {self.ambient_dim} vs {other.ambient_dim}"
            )

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def subspace_equal(s1: Subspace, s2: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the mutual projection residuals are below tolerance."""
    return s1.equals(s2, tol)


def subspace_contains(s1: Subspace, s2: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff s2 is contained in s1."""
    return s1.contains(s2, tol)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + dagger(a)) / 2.0


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))
