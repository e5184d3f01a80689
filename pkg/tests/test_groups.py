import itertools

import numpy as np
import pytest

from ncgalois import groups
from ncgalois.errors import (
    NoIdentity,
    NotLatinSquare,
    OrderBoundExceeded,
    ParentMismatch,
)
from ncgalois.groups import (
    FiniteGroup,
    Subgroup,
    convolve,
    delta,
    enumerate_subgroups,
    group_from_table,
    involute,
    is_normal,
)


def brute_force_s3_table():
    """Independent oracle: compose all 36 permutation pairs directly."""
    perms = sorted(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    table = [
        [index[tuple(p[q[k]] for k in range(3))] for q in perms] for p in perms
    ]
    return table


def test_z2_from_table():
    g = group_from_table([[0, 1], [1, 0]])
    assert g.order == 2 and g.identity == 0
    assert g.inv(1) == 1


def test_s3_matches_brute_force():
    g = groups.symmetric_group(3)
    assert g.mult.tolist() == brute_force_s3_table()
    assert g.identity == 0


def test_invalid_tables():
    with pytest.raises(NotLatinSquare):
        group_from_table([[0, 1], [1, 1]])
    with pytest.raises(NotLatinSquare):
        group_from_table([[0, 1, 2], [1, 2, 0]])
    # order-5 loop with two-sided inverses, still not associative
    loop = [[0, 1, 2, 3, 4],
            [1, 0, 3, 4, 2],
            [2, 4, 0, 1, 3],
            [3, 2, 4, 0, 1],
            [4, 3, 1, 2, 0]]
    with pytest.raises(groups.NotAssociative):
        group_from_table(loop)
    # loop in which 3 has only a one-sided inverse
    with pytest.raises(groups.NoInverse):
        group_from_table([[0, 1, 2, 3, 4],
                          [1, 0, 3, 4, 2],
                          [2, 3, 4, 0, 1],
                          [3, 4, 1, 2, 0],
                          [4, 2, 0, 1, 3]])
    # latin square whose rows/columns are fine but no two-sided identity
    with pytest.raises(NoIdentity):
        group_from_table([[1, 0, 2], [0, 2, 1], [2, 1, 0]])


def test_subgroups_of_s3_by_brute_force(s3):
    # oracle: close every subset of S3 and dedupe
    found = set()
    elements = range(6)
    for r in range(1, 7):
        for seed in itertools.combinations(elements, r):
            found.add(groups.closure(s3, seed))
    enumerated = {s.members for s in enumerate_subgroups(s3)}
    assert enumerated == found
    assert len(enumerated) == 6
    orders = sorted(len(m) for m in enumerated)
    assert orders == [1, 2, 2, 2, 3, 6]


def test_subgroups_of_z6_divisor_count():
    z6 = groups.cyclic_group(6)
    subs = enumerate_subgroups(z6)
    assert sorted(s.order for s in subs) == [1, 2, 3, 6]  # one per divisor


def test_subgroup_counts_on_fixtures(fixture_groups):
    # full-lattice sizes; S4's 30 is the classic count
    expected = {"Z2": 2, "Z4": 3, "Z6": 4, "S3": 6, "D4": 10, "Q8": 6,
                "A4": 10, "S4": 30}
    for name, g in fixture_groups.items():
        subs = enumerate_subgroups(g)
        assert len(subs) == expected[name], name
        for s in subs:
            assert g.order % s.order == 0  # Lagrange


def test_order_bound():
    with pytest.raises(OrderBoundExceeded):
        enumerate_subgroups(groups.cyclic_group(5), order_bound=4)


def test_conjugacy_classes_abelian():
    z4 = groups.cyclic_group(4)
    assert groups.conjugacy_classes(z4) == [(0,), (1,), (2,), (3,)]


def test_conjugacy_classes_s3(s3):
    # brute-force conjugation oracle
    classes = set()
    for a in range(6):
        classes.add(tuple(sorted({s3.conjugate(g, a) for g in range(6)})))
    assert set(groups.conjugacy_classes(s3)) == classes
    sizes = sorted(len(c) for c in groups.conjugacy_classes(s3))
    assert sizes == [1, 2, 3]


def test_normality_in_s3(s3):
    subs = enumerate_subgroups(s3)
    by_order = {}
    for s in subs:
        by_order.setdefault(s.order, []).append(s)
    assert all(not is_normal(s) for s in by_order[2])
    assert is_normal(by_order[3][0])      # the alternating subgroup
    assert is_normal(by_order[1][0]) and is_normal(by_order[6][0])


def test_subgroup_validation(s3):
    with pytest.raises(Exception):
        Subgroup(s3, (0, 1, 3))  # not closed


def test_convolution_function_convention_z2():
    z2 = groups.cyclic_group(2)
    out = convolve(z2, [1, 2], [3, 4], kind="function")
    np.testing.assert_allclose(out, [5.5, 5.0])


def test_convolution_measure_unit(s3, rng):
    y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    np.testing.assert_allclose(convolve(s3, delta(s3, s3.identity), y, kind="measure"), y)


def test_point_measures_convolve_like_the_group(s3):
    for a in range(6):
        for b in range(6):
            out = convolve(s3, delta(s3, a), delta(s3, b), kind="measure")
            np.testing.assert_allclose(out, delta(s3, s3.op(a, b)), atol=1e-14)


@pytest.mark.parametrize("name", ["Z6", "S3", "D4", "Q8"])
def test_convolution_associative(fixture_groups, name, rng):
    g = fixture_groups[name]
    for kind in ("measure", "function"):
        x, y, z = (rng.standard_normal(g.order) + 1j * rng.standard_normal(g.order)
                   for _ in range(3))
        lhs = convolve(g, convolve(g, x, y, kind=kind), z, kind=kind)
        rhs = convolve(g, x, convolve(g, y, z, kind=kind), kind=kind)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_involution_antihomomorphism(s3, rng):
    x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    lhs = involute(s3, convolve(s3, x, y, kind="measure"))
    rhs = convolve(s3, involute(s3, y), involute(s3, x), kind="measure")
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    np.testing.assert_allclose(involute(s3, involute(s3, x)), x)


def test_haar_inversion_invariance(fixture_groups, rng):
    for g in fixture_groups.values():
        x = rng.standard_normal(g.order) + 1j * rng.standard_normal(g.order)
        lhs = np.sum(x[g.inverse]) / g.order
        rhs = np.sum(x) / g.order
        assert abs(lhs - rhs) < 1e-12


def test_parent_mismatch(s3):
    with pytest.raises(ParentMismatch):
        convolve(s3, [1, 2], [1, 2, 3, 4, 5, 6], kind="measure")


def test_fixture_tables_are_groups(fixture_groups):
    for name, g in fixture_groups.items():
        # construction re-validates all axioms
        FiniteGroup(g.mult, labels=g.labels)
        assert g.op(g.identity, 1 % g.order) == 1 % g.order
