"""States, averaged conditional expectations, and martingales.

A state is a unit-trace positive density; the expectation of an
observable is ``trace(rho A)``.  Conditional expectations onto fixed
algebras are uniform averages of unitary conjugates over a subgroup, and
a decreasing chain of subgroups produces an increasing chain of fixed
algebras: the filtration carrying the martingales.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import algebras as alg
from .algebras import StarAlgebra
from .errors import NotAState, NotFaithful, ParentMismatch
from .groups import Subgroup
from .linalg import DEFAULT_TOL, Tolerance, dagger, frob, opnorm
from .reps import UnitaryRep

_FAITHFUL_EPS = 1e-10


@dataclass(frozen=True)
class State:
    """Density matrix with unit trace; faithful iff strictly positive."""

    density: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.density, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise NotAState(f"density must be square, got {rho.shape}")
        if frob(rho - dagger(rho)) > 1e-10 * max(1.0, frob(rho)):
            raise NotAState("density is not Hermitian")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > 1e-10:
            raise NotAState(f"trace is {tr}, expected 1")
        w = np.linalg.eigvalsh((rho + dagger(rho)) / 2.0)
        if w[0] < -1e-12:
            raise NotAState(f"density has negative eigenvalue {w[0]:.3e}")
        object.__setattr__(self, "density", rho)
        object.__setattr__(self, "_min_eig", float(w[0]))

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    @property
    def faithful(self) -> bool:
        return self._min_eig > _FAITHFUL_EPS

    def expect(self, a) -> complex:
        return complex(np.trace(self.density @ np.asarray(a)))

    def require_faithful(self) -> "State":
        if not self.faithful:
            raise NotFaithful(f"min eigenvalue {self._min_eig:.3e}")
        return self

    @staticmethod
    def maximally_mixed(dim: int) -> "State":
        return State(np.eye(dim, dtype=np.complex128) / dim)

    @staticmethod
    def random_faithful(dim: int, rng: np.random.Generator,
                        floor: float = 0.05) -> "State":
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        rho = a @ dagger(a) + floor * np.eye(dim)
        return State(rho / np.trace(rho).real)

    def is_invariant(self, rep: UnitaryRep, members=None, tol: float = 1e-10) -> bool:
        """Invariance under the (sub)group action: the density commutes."""
        mats = rep.matrices if members is None else rep.matrices[list(members)]
        return all(frob(u @ self.density - self.density @ u) <= tol for u in mats)


@dataclass(frozen=True)
class NCProbSpace:
    """A matrix algebra together with a faithful state on its space."""

    algebra: StarAlgebra
    state: State

    def __post_init__(self):
        if self.algebra.ambient_dim != self.state.dim:
            raise ParentMismatch("state and algebra act on different spaces")
        self.state.require_faithful()


def average_state(psi: State, rep: UnitaryRep) -> State:
    """Group average of a state; the result is invariant under the action.

    The density transforms contragradiently: averaging ``U* rho U`` makes
    ``trace(rho' U A U*)`` independent of the group element.  Positivity
    survives convex combination, so strictly positive input stays
    faithful.
    """
    if psi.dim != rep.dim:
        raise ParentMismatch("state dimension does not match the representation")
    mats = rep.matrices
    rho = np.einsum("gji,jk,gkl->il", mats.conj(), psi.density, mats) / rep.group.order
    return State(rho)


def conditional_expectation(a, rep: UnitaryRep, subgroup: Subgroup) -> np.ndarray:
    """Uniform average of ``U_h a U_h*`` over the subgroup members.

    A unital idempotent map onto the fixed-point algebra of the subgroup
    action.
    """
    a = np.asarray(a, dtype=np.complex128)
    mats = rep.matrices[list(subgroup.members)]
    return np.einsum("gij,jk,glk->il", mats, a, mats.conj()) / subgroup.order


@dataclass
class CondExpReport:
    residuals: dict
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_cond_exp_axioms(rep: UnitaryRep, subgroup: Subgroup, phi: State,
                           seed: int = 0, samples: int = 20,
                           bound: float = 1e-9) -> CondExpReport:
    """Audit the defining and derived conditional-expectation properties.

    Checks, on matrix units and a seeded random panel: operator-norm
    contraction, identity on the fixed algebra, state preservation,
    the bimodule property, idempotence, unitality, and positivity of the
    Schwarz gap ``E(X*X) - E(X)* E(X)``.  A non-invariant state shows up
    as a recorded violation of state preservation; nothing passes
    silently.
    """
    n = rep.dim
    rng = np.random.default_rng(seed)
    e = lambda x: conditional_expectation(x, rep, subgroup)

    panel = [random_matrix(n, rng) for _ in range(samples)]
    panel += [unit_matrix(n, i, j) for i in range(n) for j in range(n)]

    residuals = {}
    violations = []

    contraction = max(
        (opnorm(e(x)) - opnorm(x)) for x in panel
    )
    residuals["contraction_gap"] = float(max(contraction, 0.0))
    if contraction > bound:
        violations.append(("contraction", float(contraction)))

    fixed = alg.fixed_point_algebra(StarAlgebra.full(n), rep, subgroup)
    identity_res = max(frob(e(b) - b) for b in fixed.basis)
    residuals["identity_on_subalgebra"] = float(identity_res)
    if identity_res > bound:
        violations.append(("identity_on_subalgebra", float(identity_res)))

    state_res = max(abs(phi.expect(e(x)) - phi.expect(x)) for x in panel)
    residuals["state_preservation"] = float(state_res)
    if state_res > bound:
        violations.append(("state_preservation", float(state_res)))

    idem = max(frob(e(e(x)) - e(x)) for x in panel)
    residuals["idempotence"] = float(idem)
    if idem > bound:
        violations.append(("idempotence", float(idem)))

    unital = frob(e(np.eye(n)) - np.eye(n))
    residuals["unitality"] = float(unital)
    if unital > bound:
        violations.append(("unitality", float(unital)))

    bimodule = 0.0
    for _ in range(samples):
        a = fixed.from_coordinates(rng.standard_normal(fixed.dim)
                                   + 1j * rng.standard_normal(fixed.dim))
        b = fixed.from_coordinates(rng.standard_normal(fixed.dim)
                                   + 1j * rng.standard_normal(fixed.dim))
        x = random_matrix(n, rng)
        bimodule = max(bimodule, frob(e(a @ x @ b) - a @ e(x) @ b))
    residuals["bimodule"] = float(bimodule)
    if bimodule > bound:
        violations.append(("bimodule", float(bimodule)))

    schwarz = 0.0
    for x in panel:
        gap = e(dagger(x) @ x) - dagger(e(x)) @ e(x)
        w = np.linalg.eigvalsh((gap + dagger(gap)) / 2.0)
        schwarz = min(schwarz, float(w[0]))
    residuals["schwarz_min_eig"] = float(schwarz)
    if schwarz < -1e-10:
        violations.append(("schwarz", float(schwarz)))

    return CondExpReport(residuals, violations)


def random_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def unit_matrix(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=np.complex128)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    e_independent: bool
    commutation_residual: float
    factorization_residual: float
    e_factorization_residual: float
    implication_ok: bool


def independence_check(alg1: StarAlgebra, alg2: StarAlgebra, phi: State,
                       expectation=None, bound: float = 1e-9) -> IndependenceReport:
    """Test commutation plus state factorization between two subalgebras.

    ``independent`` needs ``[a, b] = 0`` and ``phi(ab) = phi(a) phi(b)``
    on all basis pairs; ``e_independent`` replaces the state by the
    supplied conditional expectation (default: the state itself, viewed
    as the expectation onto the scalars).  Independence must imply
    E-independence; ``implication_ok`` records whether it did.
    """
    if alg1.ambient_dim != alg2.ambient_dim or alg1.ambient_dim != phi.dim:
        raise ParentMismatch("algebras and state act on different spaces")
    n = alg1.ambient_dim
    if expectation is None:
        expectation = lambda x: phi.expect(x) * np.eye(n, dtype=np.complex128)

    comm = max(
        frob(a @ b - b @ a) for a in alg1.basis for b in alg2.basis
    )
    fact = max(
        abs(phi.expect(a @ b) - phi.expect(a) * phi.expect(b))
        for a in alg1.basis for b in alg2.basis
    )
    e_fact = max(
        frob(expectation(a @ b) - expectation(a) @ expectation(b))
        for a in alg1.basis for b in alg2.basis
    )
    independent = comm <= bound and fact <= bound
    e_independent = e_fact <= bound
    implication_ok = (not independent) or e_independent
    return IndependenceReport(independent, e_independent, float(comm),
                              float(fact), float(e_fact), implication_ok)


@dataclass(frozen=True)
class Filtration:
    """Decreasing subgroups paired with their increasing fixed algebras."""

    rep: UnitaryRep
    chain: tuple          # of Subgroup, H_0 >= H_1 >= ... >= H_T
    algebras: tuple       # of StarAlgebra, increasing
    dense_in_ambient: bool

    @property
    def length(self) -> int:
        return len(self.chain)


def filtration_from_chain(m: StarAlgebra, rep: UnitaryRep, chain,
                          tol: Tolerance = DEFAULT_TOL) -> Filtration:
    """Build the fixed-algebra filtration of a decreasing subgroup chain.

    Rejects chains that do not decrease.  Whether the top algebra exhausts
    the ambient one is recorded instead of enforced; chains whose last
    subgroup acts non-trivially simply stop short of it.
    """
    chain = tuple(chain)
    for s, t in zip(chain, chain[1:]):
        if not s.contains(t):
            raise ParentMismatch(
                f"chain is not decreasing at {s.members} !> {t.members}"
            )
    algebras_list = tuple(
        alg.fixed_point_algebra(m, rep, h, tol) for h in chain
    )
    for a, b in zip(algebras_list, algebras_list[1:]):
        if not b.contains_algebra(a, tol):
            raise ParentMismatch("fixed algebras failed to increase along the chain")
    dense = algebras_list[-1].dim == m.dim
    return Filtration(rep, chain, algebras_list, dense)


@dataclass(frozen=True)
class Martingale:
    """An adapted sequence X_t = E_{H_t}(X) with the tower property."""

    source: np.ndarray
    filtration: Filtration
    elements: tuple

    @property
    def length(self) -> int:
        return len(self.elements)


def martingale_from(x, filtration: Filtration, bound: float = 1e-9) -> Martingale:
    """Project one observable through the whole filtration.

    Verifies adaptedness and the martingale property
    ``E_{H_s}(X_t) = X_s`` for every s < t before returning.
    """
    x = np.asarray(x, dtype=np.complex128)
    rep = filtration.rep
    elements = tuple(
        conditional_expectation(x, rep, h) for h in filtration.chain
    )
    for a, xt in zip(filtration.algebras, elements):
        res = a.membership_residual(xt)
        if res > bound * max(1.0, frob(xt)):
            raise ParentMismatch(f"element is not adapted, residual {res:.3e}")
    for s in range(len(elements)):
        for t in range(s + 1, len(elements)):
            res = frob(
                conditional_expectation(elements[t], rep, filtration.chain[s])
                - elements[s]
            )
            if res > bound * max(1.0, frob(x)):
                raise ParentMismatch(
                    f"martingale property failed at ({s},{t}): {res:.3e}"
                )
    return Martingale(x, filtration, elements)


@dataclass(frozen=True)
class ConvergenceReport:
    moments: tuple
    nondecreasing: bool
    terminal_residual: float | None
    chain_ends_trivially: bool
    state_invariant: bool


def convergence_check(mart: Martingale, phi: State,
                      slack: float = 1e-10) -> ConvergenceReport:
    """Monotone second moments and exact terminal recovery.

    ``phi(X_t* X_t)`` must be nondecreasing in t; when the last subgroup
    is trivial the final element must reproduce the source observable.
    Monotonicity is guaranteed only for a state invariant under the top
    subgroup; non-invariant states are reported, not rejected, so they
    can serve as negative controls.
    """
    top = mart.filtration.chain[0]
    invariant = phi.is_invariant(mart.filtration.rep, top.members)
    moments = tuple(
        float(phi.expect(dagger(xt) @ xt).real) for xt in mart.elements
    )
    nondecreasing = all(
        moments[i] <= moments[i + 1] + slack for i in range(len(moments) - 1)
    )
    trivial_end = mart.filtration.chain[-1].order == 1
    terminal = (
        float(frob(mart.elements[-1] - mart.source)) if trivial_end else None
    )
    return ConvergenceReport(moments, nondecreasing, terminal, trivial_end,
                             invariant)
