"""Subgroups versus fixed-point algebras: the correspondence engine.

For an action of a finite group on a matrix algebra, every subgroup H is
mapped to the subalgebra of H-invariant elements.  The report collects,
per subgroup, the fixed algebra, its double-(relative-)commutant test,
anti-monotonicity along the subgroup lattice, and the partition of
subgroups into span-equivalence classes; when the action is proper the
map must be injective across classes and any failure is recorded as a
violation rather than silently accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import algebras as alg
from . import reps as rp
from .algebras import StarAlgebra
from .groups import FiniteGroup, Subgroup, enumerate_subgroups
from .linalg import DEFAULT_TOL, Subspace, Tolerance

_RESIDUAL_BOUND = 1e-9


@dataclass(frozen=True)
class GaloisRow:
    subgroup: Subgroup
    fixed_dim: int
    fixed_id: int                 # intern id; equal ids <=> equal subspace hash
    bicommutant_ok: bool
    bicommutant_residual: float


@dataclass
class GaloisReport:
    group: FiniteGroup
    mode: str                     # "inner" or "spatial"
    proper: bool
    present: tuple                # Sigma' as irrep indices
    missing: tuple                # Sigma^0
    rows: list = field(default_factory=list)
    equivalence_classes: list = field(default_factory=list)
    collision_candidates: list = field(default_factory=list)
    anti_monotone_pairs: int = 0
    violations: list = field(default_factory=list)
    fixed_algebras: dict = field(default_factory=dict)

    @property
    def injective(self) -> bool:
        ids = [r.fixed_id for r in self.rows]
        return len(set(ids)) == len(ids)


def subgroup_span(sigma: rp.UnitaryRep, subgroup: Subgroup,
                  tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Span of the flattened irrep matrices over the subgroup's members."""
    mats = sigma.matrices[list(subgroup.members)]
    return Subspace.from_span(mats.reshape(len(subgroup.members), -1),
                              sigma.dim ** 2, tol)


@dataclass(frozen=True)
class SubgroupEquivalence:
    classes: tuple  # tuple of tuples of subgroup indices


def subgroup_equivalence(group: FiniteGroup, subgroups, irrep_indices=None,
                         tol: Tolerance = DEFAULT_TOL) -> SubgroupEquivalence:
    """Partition subgroups by the span of their images in the retained irreps.

    Two subgroups are equivalent when the elements span the same subspace
    through the direct sum of the retained irreps (defaults to all of
    them).  The comparison is joint across irreps: componentwise spans
    would never separate subgroups seen through one-dimensional irreps,
    where every span is the scalar line, and the correspondence between
    classes and fixed algebras would fail on abelian groups.  The joint
    span is exactly the group-algebra image whose commutant is the fixed
    algebra, so equal spans and equal fixed algebras are the same thing.
    """
    table = rp.irrep_table(group, tol)
    if irrep_indices is None:
        irrep_indices = range(len(table.irreps))
    irrep_indices = list(irrep_indices)
    if not irrep_indices:
        return SubgroupEquivalence((tuple(range(len(subgroups))),))

    def joint_span(h: Subgroup) -> Subspace:
        rows = np.hstack([
            table.irreps[i].matrices[list(h.members)].reshape(h.order, -1)
            for i in irrep_indices
        ])
        return Subspace.from_span(rows, rows.shape[1], tol)

    spans = [joint_span(h) for h in subgroups]
    assigned = [-1] * len(subgroups)
    classes = []
    for i in range(len(subgroups)):
        if assigned[i] >= 0:
            continue
        cls = [i]
        assigned[i] = len(classes)
        for j in range(i + 1, len(subgroups)):
            if assigned[j] >= 0:
                continue
            if spans[i].equals(spans[j], tol):
                cls.append(j)
                assigned[j] = len(classes)
        classes.append(tuple(cls))
    return SubgroupEquivalence(tuple(classes))


def _detect_mode(m: StarAlgebra, pi: rp.UnitaryRep, tol: Tolerance) -> str:
    inside = all(m.contains_matrix(u, tol) for u in pi.matrices)
    return "inner" if inside else "spatial"


def galois_map(m: StarAlgebra, pi: rp.UnitaryRep, group: FiniteGroup,
               mode: str = "auto", subgroups=None,
               tol: Tolerance = DEFAULT_TOL) -> GaloisReport:
    """Compute H -> M^H over the whole subgroup lattice and audit it.

    ``mode="inner"`` tests the double relative commutant identity
    ``(M^H)'' cap M twice == M^H``; ``mode="spatial"`` tests the plain
    double commutant.  ``"auto"`` picks "inner" exactly when every action
    unitary lies in M.  Fixed algebras are interned by a rounded projector
    hash, so distinctness checks are exact set operations on ids.
    """
    if pi.group != group:
        raise ValueError("representation and group disagree")
    if mode == "auto":
        mode = _detect_mode(m, pi, tol)
    if mode not in ("inner", "spatial"):
        raise ValueError(f"unknown mode {mode!r}")
    if subgroups is None:
        subgroups = enumerate_subgroups(group)

    table = rp.irrep_table(group, tol)
    properness = rp.is_proper(pi, table, tol)
    report = GaloisReport(
        group=group,
        mode=mode,
        proper=properness.proper,
        present=properness.present,
        missing=properness.missing,
    )

    interned: dict = {}
    for sub in subgroups:
        fixed = alg.fixed_point_algebra(m, pi, sub, tol)
        key = fixed.subspace_hash()
        fixed_id = interned.setdefault(key, len(interned))
        if mode == "inner":
            once = alg.relative_commutant(fixed, m, tol)
            twice = alg.relative_commutant(once, m, tol)
        else:
            once = alg.commutant(fixed, tol)
            twice = alg.commutant(once, tol)
        residual = max(
            twice.subspace().containment_residual(fixed.subspace()),
            fixed.subspace().containment_residual(twice.subspace()),
        )
        ok = residual <= _RESIDUAL_BOUND and twice.dim == fixed.dim
        if not ok:
            report.violations.append(
                ("bicommutant", sub.members, float(residual))
            )
        report.rows.append(
            GaloisRow(sub, fixed.dim, fixed_id, ok, float(residual))
        )
        report.fixed_algebras[sub.members] = fixed

    # anti-monotonicity across every comparable pair in the lattice
    for i, s1 in enumerate(subgroups):
        small = report.fixed_algebras[s1.members]
        for s2 in subgroups:
            if s1.members == s2.members or not s2.contains(s1):
                continue
            bigger_group = report.fixed_algebras[s2.members]
            res = small.subspace().containment_residual(bigger_group.subspace())
            report.anti_monotone_pairs += 1
            if res > _RESIDUAL_BOUND:
                report.violations.append(
                    ("anti-monotone", (s1.members, s2.members), float(res))
                )

    # equivalence classes over Sigma' and collision candidates versus full Sigma
    eq_present = subgroup_equivalence(group, subgroups, properness.present, tol)
    eq_full = subgroup_equivalence(group, subgroups, None, tol)
    report.equivalence_classes = [list(c) for c in eq_present.classes]
    full_class_of = {}
    for ci, cls in enumerate(eq_full.classes):
        for j in cls:
            full_class_of[j] = ci
    for cls in eq_present.classes:
        for a in range(len(cls)):
            for b in range(a + 1, len(cls)):
                if full_class_of[cls[a]] != full_class_of[cls[b]]:
                    report.collision_candidates.append(
                        (subgroups[cls[a]].members, subgroups[cls[b]].members)
                    )

    # within a class the fixed algebras must agree ...
    for cls in eq_present.classes:
        ids = {report.rows[j].fixed_id for j in cls}
        if len(ids) > 1:
            report.violations.append(
                ("class-not-constant", tuple(subgroups[j].members for j in cls), None)
            )
    # ... and across classes they must differ whenever the action is proper
    if properness.proper:
        by_class = [report.rows[cls[0]].fixed_id for cls in eq_present.classes]
        if len(set(by_class)) != len(by_class):
            seen: dict = {}
            for cls, fid in zip(eq_present.classes, by_class):
                if fid in seen:
                    report.violations.append(
                        ("injectivity", (subgroups[seen[fid][0]].members,
                                         subgroups[cls[0]].members), None)
                    )
                else:
                    seen[fid] = cls
    return report


def is_minimal_action(m: StarAlgebra, pi: rp.UnitaryRep, group: FiniteGroup,
                      tol: Tolerance = DEFAULT_TOL):
    """Whether the relative commutant of the full fixed algebra is scalar.

    Returns ``(flag, witness_dim)``: the dimension of ``(M^G)' cap M`` is
    the witness; the action is minimal exactly when it equals 1.
    """
    top = Subgroup(group, tuple(range(group.order)))
    fixed = alg.fixed_point_algebra(m, pi, top, tol)
    rc = alg.relative_commutant(fixed, m, tol)
    return rc.dim == 1, rc.dim
