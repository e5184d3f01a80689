"""Crossed products of a matrix algebra by a finite group action.

The carrier stacks one copy of the base space per group element
(group-slot-major).  The base acts block-diagonally through the inverse
action, the group acts by left-translation permutation blocks, and the
two fit together covariantly:

    U_g pi(A) U_g* = pi(alpha_g(A)).

Actions may be given spatially (conjugation by unitaries) or abstractly
(linear maps on the base's basis coordinates); the abstract form is the
reason crossed products are here at all, since it becomes spatial on the
carrier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebras as alg
from . import galois as gal
from .algebras import StarAlgebra
from .errors import NotInvariantAlgebra, ParentMismatch
from .groups import FiniteGroup
from .linalg import DEFAULT_TOL, Tolerance, dagger, frob
from .reps import UnitaryRep


class GroupAction:
    """A *-automorphism of the base algebra for every group element.

    ``kind="ad"``: ``matrices[g]`` are unitaries on the base's space and
    the action is conjugation.  ``kind="table"``: ``tables[g]`` act on
    Hilbert-Schmidt coordinates of the base algebra.  Both forms are
    validated as automorphism families: multiplicative, adjoint-
    preserving, compatible with the group law, and base-preserving.
    """

    def __init__(self, group: FiniteGroup, base: StarAlgebra, kind: str,
                 data, tol: Tolerance = DEFAULT_TOL):
        if kind not in ("ad", "table"):
            raise ValueError(f"unknown action kind {kind!r}")
        self.group = group
        self.base = base
        self.kind = kind
        data = np.asarray(data, dtype=np.complex128)
        if kind == "ad":
            if data.shape != (group.order, base.ambient_dim, base.ambient_dim):
                raise ParentMismatch(f"need one unitary per element, got {data.shape}")
        else:
            if data.shape != (group.order, base.dim, base.dim):
                raise ParentMismatch(
                    f"need one coordinate map per element, got {data.shape}"
                )
        self.data = data
        self._validate(tol)

    def apply(self, g: int, a: np.ndarray) -> np.ndarray:
        if self.kind == "ad":
            u = self.data[g]
            return u @ np.asarray(a, dtype=np.complex128) @ dagger(u)
        coords = self.base.coordinates(a)
        return self.base.from_coordinates(self.data[g] @ coords)

    def _validate(self, tol: Tolerance) -> None:
        g, base = self.group, self.base
        probe = base.basis
        for h in range(g.order):
            moved = np.array([self.apply(h, b) for b in probe])
            res = max(base.membership_residual(x) for x in moved)
            if res > 1e-8:
                raise NotInvariantAlgebra(
                    f"element {h} does not preserve the base algebra "
                    f"(residual {res:.3e})"
                )
            # *-automorphism on the base
            for i in range(min(len(probe), 4)):
                for j in range(min(len(probe), 4)):
                    lhs = self.apply(h, probe[i] @ probe[j])
                    rhs = self.apply(h, probe[i]) @ self.apply(h, probe[j])
                    if frob(lhs - rhs) > 1e-8:
                        raise NotInvariantAlgebra(
                            f"action of {h} is not multiplicative"
                        )
                star = frob(self.apply(h, dagger(probe[i]))
                            - dagger(self.apply(h, probe[i])))
                if star > 1e-8:
                    raise NotInvariantAlgebra(f"action of {h} is not *-preserving")
        # group law on a spanning probe
        for h1 in range(g.order):
            for h2 in range(g.order):
                h12 = g.op(h1, h2)
                for b in probe[: min(len(probe), 3)]:
                    lhs = self.apply(h1, self.apply(h2, b))
                    rhs = self.apply(h12, b)
                    if frob(lhs - rhs) > 1e-8:
                        raise NotInvariantAlgebra(
                            f"action violates the group law at ({h1},{h2})"
                        )
        ident = max(
            frob(self.apply(g.identity, b) - b) for b in probe
        )
        if ident > 1e-8:
            raise NotInvariantAlgebra("identity element does not act trivially")


def ad_action(group: FiniteGroup, base: StarAlgebra, unitaries,
              tol: Tolerance = DEFAULT_TOL) -> GroupAction:
    return GroupAction(group, base, "ad", unitaries, tol)


def table_action(group: FiniteGroup, base: StarAlgebra, tables,
                 tol: Tolerance = DEFAULT_TOL) -> GroupAction:
    return GroupAction(group, base, "table", tables, tol)


def _embed_base(action: GroupAction, a: np.ndarray) -> np.ndarray:
    """pi(A): block-diagonal with blocks alpha_{g^-1}(A), slot-major."""
    group = action.group
    n = action.base.ambient_dim
    out = np.zeros((n * group.order, n * group.order), dtype=np.complex128)
    for slot in range(group.order):
        block = action.apply(group.inv(slot), a)
        out[slot * n:(slot + 1) * n, slot * n:(slot + 1) * n] = block
    return out


@dataclass(frozen=True)
class CrossedProduct:
    base: StarAlgebra
    group: FiniteGroup
    action: GroupAction
    carrier_dim: int
    base_images: np.ndarray       # pi(B_k) on the carrier, one per base basis element
    translation: UnitaryRep       # U_g, left-translation permutation blocks
    algebra: StarAlgebra          # generated by both families

    def embed_base(self, a: np.ndarray) -> np.ndarray:
        return _embed_base(self.action, a)


def crossed_product(base: StarAlgebra, action: GroupAction,
                    tol: Tolerance = DEFAULT_TOL) -> CrossedProduct:
    """Assemble the carrier, both generating families, and their algebra.

    Covariance and the double-commutant self-test run as part of the
    construction; a violation is a hard error because nothing downstream
    makes sense without it.
    """
    group = action.group
    n = base.ambient_dim
    carrier = n * group.order

    u_mats = np.zeros((group.order, carrier, carrier), dtype=np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    for g in range(group.order):
        for slot in range(group.order):
            src = group.op(group.inv(g), slot)
            u_mats[g, slot * n:(slot + 1) * n, src * n:(src + 1) * n] = eye
    translation = UnitaryRep(group, u_mats)

    images = np.array([_embed_base(action, b) for b in base.basis])
    generated = alg.algebra_from_generators(
        np.concatenate([images, u_mats]), carrier, tol
    )
    cp = CrossedProduct(
        base=base, group=group, action=action, carrier_dim=carrier,
        base_images=images, translation=translation, algebra=generated,
    )
    residual = covariance_check(cp)
    if residual > 1e-10:
        raise NotInvariantAlgebra(f"covariance violated, residual {residual:.3e}")
    if not alg.bicommutant_check(generated, tol):
        raise NotInvariantAlgebra("crossed-product algebra failed its bicommutant test")
    return cp


def covariance_check(cp: CrossedProduct) -> float:
    """max over g and base basis A of |U_g pi(A) U_g* - pi(alpha_g(A))|."""
    worst = 0.0
    for g in range(cp.group.order):
        u = cp.translation.matrices[g]
        for b, image in zip(cp.base.basis, cp.base_images):
            lhs = u @ image @ dagger(u)
            rhs = cp.embed_base(cp.action.apply(g, b))
            worst = max(worst, frob(lhs - rhs))
    return float(worst)


def crossed_galois(cp: CrossedProduct, tol: Tolerance = DEFAULT_TOL):
    """Spatial-case correspondence on the crossed product, with pull-backs.

    Runs the subgroup-to-fixed-algebra analysis for the translation
    action on the generated algebra, then intersects each fixed algebra
    with the embedded base to report the pulled-back invariant
    subalgebras.
    """
    report = gal.galois_map(cp.algebra, cp.translation, cp.group,
                            mode="spatial", tol=tol)
    base_span = StarAlgebra.from_span(cp.base_images, cp.carrier_dim, tol=tol)
    pullbacks = {}
    for sub_members, fixed in report.fixed_algebras.items():
        inter = fixed.subspace().intersect(base_span.subspace(), tol)
        pullbacks[sub_members] = inter.dim
    return report, pullbacks
