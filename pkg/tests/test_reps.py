import numpy as np
import pytest

from ncgalois import groups, reps
from ncgalois.errors import (
    IncompleteTable,
    NotAHomomorphism,
    NotIrreducible,
    ZeroVector,
)
from ncgalois.linalg import dagger, frob


@pytest.fixture(scope="module")
def s3_table(s3):
    return reps.irrep_table(s3)


@pytest.fixture(scope="module")
def s3_perm(s3):
    return reps.permutation_rep(s3, groups.symmetric_action(3))


def test_rep_validation_rejects_non_homomorphism():
    z2 = groups.cyclic_group(2)
    bad = np.array([np.eye(2), np.diag([1.0, 1.0j])])  # order 4 element
    with pytest.raises(NotAHomomorphism):
        reps.UnitaryRep(z2, bad)


def test_regular_rep_is_permutation(s3):
    reg = reps.regular_rep(s3)
    assert reg.dim == 6
    chi = reg.character()
    np.testing.assert_allclose(chi[s3.identity], 6.0)
    assert np.max(np.abs(chi[1:])) < 1e-14  # regular character is |G| delta_e


# -- unitarization ----------------------------------------------------------


def test_unitarize_fixes_nonunitary_rep():
    z2 = groups.cyclic_group(2)
    m = np.array([[1.0, 1.0], [0.0, -1.0]])
    unit = reps.unitarize(z2, np.array([np.eye(2), m]))
    u = unit.matrices[1]
    assert frob(dagger(u) @ u - np.eye(2)) < 1e-12
    # similar to the input: eigenvalues stay (+1, -1)
    np.testing.assert_allclose(sorted(np.linalg.eigvals(u).real), [-1.0, 1.0],
                               atol=1e-12)
    # hand oracle for the averaged Gram: (I + M* M) / 2
    gram = (np.eye(2) + m.T @ m) / 2.0
    np.testing.assert_allclose(gram, [[1.0, 0.5], [0.5, 1.5]])


def test_unitarize_keeps_unitary_rep(s3_perm, s3):
    out = reps.unitarize(s3, s3_perm.matrices)
    assert max(frob(a - b) for a, b in zip(out.matrices, s3_perm.matrices)) < 1e-12


def test_unitarize_rejects_non_homomorphism():
    z2 = groups.cyclic_group(2)
    with pytest.raises(NotAHomomorphism):
        reps.unitarize(z2, np.array([np.eye(2), np.diag([1.0, 0.5])]))


# -- Weyl averaging ---------------------------------------------------------


def test_weyl_trivial_rep():
    z2 = groups.cyclic_group(2)
    triv = reps.trivial_rep(z2, dim=2)
    u = np.array([1.0, 0.0])
    k = reps.weyl_operator(triv, u)
    np.testing.assert_allclose(k, np.outer(u, u))


def test_weyl_regular_z2_delta():
    z2 = groups.cyclic_group(2)
    reg = reps.regular_rep(z2)
    k = reps.weyl_operator(reg, np.array([1.0, 0.0]))
    np.testing.assert_allclose(k, np.eye(2) / 2.0)


def test_weyl_commutes_and_is_bounded(s3_perm, rng):
    for _ in range(5):
        u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        k = reps.weyl_operator(s3_perm, u)
        assert frob(k - dagger(k)) < 1e-12
        for m in s3_perm.matrices:
            assert frob(k @ m - m @ k) < 1e-10
        norm_bound = float(np.vdot(u, u).real)
        assert np.linalg.norm(k, 2) <= norm_bound + 1e-10


def test_weyl_rejects_zero_vector(s3_perm):
    with pytest.raises(ZeroVector):
        reps.weyl_operator(s3_perm, np.zeros(3))


# -- irreducible tables and decomposition -----------------------------------


def test_irrep_tables_complete(fixture_groups):
    expected_dims = {
        "Z2": (1, 1), "Z4": (1, 1, 1, 1), "Z6": (1,) * 6, "S3": (1, 1, 2),
        "D4": (1, 1, 1, 1, 2), "Q8": (1, 1, 1, 1, 2), "A4": (1, 1, 1, 3),
        "S4": (1, 1, 2, 3, 3),
    }
    for name, g in fixture_groups.items():
        table = reps.irrep_table(g)
        assert table.dims == expected_dims[name]
        assert sum(d * d for d in table.dims) == g.order
        # characters pairwise orthonormal under the normalized average
        gram = table.characters @ table.characters.conj().T / g.order
        np.testing.assert_allclose(gram, np.eye(len(table.irreps)), atol=1e-10)


def test_irrep_table_memoized(s3):
    t1 = reps.irrep_table(s3)
    t2 = reps.irrep_table(groups.symmetric_group(3))
    assert t1 is t2


def test_decompose_irreducible_block(s3, s3_table):
    two_dim = s3_table.irreps[-1]
    assert reps.is_irreducible(two_dim)
    dec = reps.decompose(two_dim, seed=4)
    assert dec.blocks == ((2, 1),)


def test_decompose_regular_s3(s3):
    reg = reps.regular_rep(s3)
    dec = reps.decompose(reg, seed=9)
    table = dec.table
    mults = {table.irreps[i].dim: m for i, m in dec.blocks}
    assert mults == {1: 1, 2: 2} or [m for _, m in dec.blocks] == [1, 1, 2]
    # every irrep appears with multiplicity equal to its dimension
    assert all(table.irreps[i].dim == m for i, m in dec.blocks)
    assert sum(table.irreps[i].dim * m for i, m in dec.blocks) == 6


def test_decompose_trivial_multiplicity(s3):
    triv3 = reps.trivial_rep(s3, dim=3)
    dec = reps.decompose(triv3, seed=1)
    assert len(dec.blocks) == 1
    idx, mult = dec.blocks[0]
    assert mult == 3 and dec.table.irreps[idx].dim == 1


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_decompose_block_diagonalizes_exactly(s3_perm, seed):
    dec = reps.decompose(s3_perm, seed=seed)
    u = dec.intertwiner
    assert frob(dagger(u) @ u - np.eye(3)) < 1e-12
    worst = 0.0
    for g in range(6):
        c = dagger(u) @ s3_perm.matrices[g] @ u
        at = 0
        expected = np.zeros_like(c)
        for idx, m in dec.blocks:
            d = dec.table.irreps[idx].dim
            for _ in range(m):
                expected[at:at + d, at:at + d] = dec.table.irreps[idx].matrices[g]
                at += d
        worst = max(worst, frob(c - expected))
    assert worst < 1e-9


def test_decompose_commutant_accounting(d4, rng):
    # direct sum with repeated blocks: commutant dim = sum of mult^2
    table = reps.irrep_table(d4)
    rep = reps.direct_sum(table.irreps[4], table.irreps[4], table.irreps[0])
    dec = reps.decompose(rep, seed=3)
    mults = sorted(m for _, m in dec.blocks)
    assert mults == [1, 2]
    assert reps.commutant_dimension(rep) == 5


# -- coefficients, characters, orthogonality --------------------------------


def test_matrix_coefficients_shape_and_values(s3_perm):
    d = reps.matrix_coefficients(s3_perm)
    assert d.shape == (3, 3, 6)
    for g in range(6):
        np.testing.assert_allclose(d[:, :, g], s3_perm.matrices[g])


def test_coefficient_norm_two_dim_irrep(s3_table, s3):
    # same-irrep Schur value: (1/|G|) sum |D_11|^2 = 1/d = 1/2
    two_dim = s3_table.irreps[-1]
    d11 = two_dim.matrices[:, 0, 0]
    val = np.sum(np.abs(d11) ** 2) / s3.order
    assert abs(val - 0.5) < 1e-12


def test_schur_same_irrep_z2():
    z2 = groups.cyclic_group(2)
    table = reps.irrep_table(z2)
    sign = table.irreps[0]       # characters sorted: sign first
    report = reps.schur_check(sign, sign)
    assert report.equivalent and report.matches_delta_pattern
    np.testing.assert_allclose(report.values.reshape(1, 1), [[1.0]])


def test_schur_inequivalent_z2():
    z2 = groups.cyclic_group(2)
    table = reps.irrep_table(z2)
    report = reps.schur_check(table.irreps[0], table.irreps[1])
    assert not report.equivalent and report.matches_zero
    assert report.max_deviation < 1e-14


def test_schur_two_dim_with_itself(s3_table):
    two_dim = s3_table.irreps[-1]
    report = reps.schur_check(two_dim, two_dim)
    assert report.matches_delta_pattern
    # diagonal values are 1/2, cross terms vanish
    vals = report.values
    for i in range(2):
        for j in range(2):
            assert abs(vals[i, j, i, j] - 0.5) < 1e-10


def test_schur_rejects_reducible(s3_perm, s3_table):
    with pytest.raises(NotIrreducible):
        reps.schur_check(s3_perm, s3_table.irreps[0])


def test_schur_exhaustive_pattern(fixture_groups):
    for name in ("Z2", "Z6", "S3", "D4", "Q8"):
        table = reps.irrep_table(fixture_groups[name])
        for i, r1 in enumerate(table.irreps):
            for j, r2 in enumerate(table.irreps):
                report = reps.schur_check(r1, r2)
                if i == j:
                    assert report.matches_delta_pattern, (name, i, j)
                else:
                    assert report.matches_zero, (name, i, j)
                assert report.max_deviation < 1e-10


def test_characters(s3, s3_table, s3_perm):
    for r in s3_table.irreps:
        assert abs(r.character()[s3.identity] - r.dim) < 1e-12
        assert abs(reps.character_inner(s3, r.character(), r.character()) - 1) < 1e-10
    reg = reps.regular_rep(s3)
    for r in s3_table.irreps:
        pair = reps.character_inner(s3, reg.character(), r.character())
        assert abs(pair - r.dim) < 1e-10
    # permutation rep contains trivial + standard, misses the sign
    mults = reps.multiplicities(s3_perm)
    assert mults.tolist() == [0, 1, 1]


# -- Peter-Weyl and Fourier --------------------------------------------------


def test_peter_weyl_orthonormal(fixture_groups):
    for name, g in fixture_groups.items():
        table = reps.irrep_table(g)
        basis, labels = reps.peter_weyl_basis(table)
        assert len(labels) == g.order
        gram = basis @ basis.conj().T / g.order
        assert np.max(np.abs(gram - np.eye(g.order))) < 1e-10, name


def test_peter_weyl_z2_is_two_point_fourier():
    z2 = groups.cyclic_group(2)
    basis, _ = reps.peter_weyl_basis(reps.irrep_table(z2))
    u = basis / np.sqrt(2)
    np.testing.assert_allclose(np.abs(u), np.full((2, 2), 1 / np.sqrt(2)))
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-14)


def test_peter_weyl_rejects_incomplete(s3, s3_table):
    incomplete = reps.IrrepTable(s3, s3_table.irreps[:2], s3_table.characters[:2])
    with pytest.raises(IncompleteTable):
        reps.peter_weyl_basis(incomplete)


def test_fourier_of_delta_is_identity(s3, s3_table):
    blocks = reps.fourier(s3_table, groups.delta(s3, s3.identity))
    for rep, block in zip(s3_table.irreps, blocks):
        np.testing.assert_allclose(block, np.eye(rep.dim), atol=1e-14)


def test_fourier_roundtrip_and_plancherel(s3_table, rng):
    f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    back = reps.inverse_fourier(s3_table, reps.fourier(s3_table, f))
    assert np.max(np.abs(back - f)) < 1e-10
    assert reps.plancherel_residual(s3_table, f) < 1e-10


def test_fourier_is_algebra_map(s3, s3_table, rng):
    x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    conv = groups.convolve(s3, x, y, kind="measure")
    lhs = reps.fourier(s3_table, conv)
    fx = reps.fourier(s3_table, x)
    fy = reps.fourier(s3_table, y)
    for a, b, c in zip(lhs, fx, fy):
        assert frob(a - b @ c) < 1e-10


# -- measure representation and properness -----------------------------------


def test_measure_rep_of_delta(s3):
    reg = reps.regular_rep(s3)
    np.testing.assert_allclose(
        reps.measure_rep(reg, groups.delta(s3, s3.identity)), np.eye(6)
    )
    for a in range(6):
        for b in range(6):
            lhs = (reps.measure_rep(reg, groups.delta(s3, a))
                   @ reps.measure_rep(reg, groups.delta(s3, b)))
            rhs = reps.measure_rep(reg, groups.delta(s3, s3.op(a, b)))
            assert frob(lhs - rhs) < 1e-12


def test_measure_rep_uniform_on_regular(s3):
    reg = reps.regular_rep(s3)
    out = reps.measure_rep(reg, np.ones(6))
    np.testing.assert_allclose(out, np.ones((6, 6)))  # 6x the rank-1 averager


def test_measure_rep_homomorphism_random(s3, rng):
    reg = reps.regular_rep(s3)
    x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    conv = groups.convolve(s3, x, y, kind="measure")
    lhs = reps.measure_rep(reg, x) @ reps.measure_rep(reg, y)
    assert frob(lhs - reps.measure_rep(reg, conv)) < 1e-10


def test_properness(s3, s3_perm, fixture_groups):
    reg = reps.regular_rep(s3)
    rep_report = reps.is_proper(reg)
    assert rep_report.proper and rep_report.missing == ()

    z2 = fixture_groups["Z2"]
    triv = reps.trivial_rep(z2)
    out = reps.is_proper(triv)
    assert not out.proper and len(out.missing) == 1

    perm_report = reps.is_proper(s3_perm)
    assert not perm_report.proper
    # the missing irrep is the sign: 1-dimensional, not the trivial one
    table = reps.irrep_table(s3)
    (missing_idx,) = perm_report.missing
    missing_chi = table.characters[missing_idx]
    assert table.irreps[missing_idx].dim == 1
    assert np.min(missing_chi.real) < 0  # distinguishes sign from trivial
