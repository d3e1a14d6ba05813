import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from netrecon.errors import ParameterError
from netrecon.gram import summarize
from netrecon.group import (ALL_INDISTINGUISHABLE, CONTAINED, FULL_DIM, ORBITS_ONLY, STRUCTURALLY_UNSTABLE,
                            GroupElement, OrbitLabel, generic_verdict, kernel_orbit_containment, kernel_support,
                            orbit_label, same_orbit, sign_flip_witness)
from netrecon.properties import row_label


def gram_with_kernel(*kernel_vectors, n=None):
    Z = np.array(kernel_vectors, dtype=float).T
    n = Z.shape[0] if n is None else n
    Q, _ = np.linalg.qr(Z)
    P = np.eye(n) - Q @ Q.T
    return summarize(0, P)


vectors = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.one_of(st.just(0.0), st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3)),
                       min_size=n, max_size=n))


class TestOrbitLabel:
    def test_zero(self):
        assert orbit_label([0.0, 0.0], 0) == OrbitLabel(frozenset(), False, 0)

    def test_pure_self(self):
        assert orbit_label([3.0, 0.0], 0) == OrbitLabel(frozenset(), True, 1)

    def test_sign_patterns_share_orbit(self):
        a, b = orbit_label([1.0, -2.0], 0), orbit_label([5.0, 7.0], 0)
        assert a == b == OrbitLabel(frozenset({1}), True, 2)

    def test_zero_tol_is_relative(self):
        assert orbit_label([1.0, 1e-12, 0.5], 0).support == frozenset({2})
        assert orbit_label([1e-20, 1e-32], 0).self_flag

    def test_negative_tol(self):
        with pytest.raises(ParameterError):
            orbit_label([1.0], 0, zero_tol=-1)


class TestSameOrbit:
    def test_identical(self):
        ok, G = same_orbit([1.0, 2.0], [1.0, 2.0], 0)
        assert ok and np.allclose(G.matrix, np.eye(2))

    def test_scaled_coordinate(self):
        ok, G = same_orbit([0.0, 1.0], [0.0, -3.0], 0)
        assert ok
        assert G.diag[1] == pytest.approx(-1 / 3)
        assert G.row[1] == 0.0
        assert np.allclose(G.apply([0.0, -3.0]), [0.0, 1.0])

    def test_different_support(self):
        assert same_orbit([1.0, 0.0], [1.0, 1.0], 0) == (False, None)

    @given(vectors, st.integers(0, 2**32 - 1))
    def test_witness_maps_exactly(self, v, seed):
        v = np.array(v)
        i = seed % v.size
        G = GroupElement.random(v.size, i, np.random.default_rng(seed))
        ok, W = same_orbit(G.apply(v), v, i)
        assert ok
        assert np.allclose(W.apply(v), G.apply(v), atol=1e-9 * (1 + np.abs(G.apply(v)).max()))


class TestGroupElement:
    def test_matrix_shape(self):
        G = GroupElement(1, [2.0, 3.0, 4.0], [5.0, 6.0, 7.0])
        assert np.array_equal(G.matrix, [[2, 0, 0], [5, 3, 7], [0, 0, 4]])

    def test_inverse_and_compose(self):
        rng = np.random.default_rng(0)
        G, H = GroupElement.random(4, 2, rng), GroupElement.random(4, 2, rng)
        assert np.allclose((G @ G.inverse()).matrix, np.eye(4))
        assert np.allclose((G @ H).matrix, G.matrix @ H.matrix)
        v = rng.normal(size=4)
        assert np.allclose(G @ v, G.matrix @ v)

    def test_rejects_singular(self):
        with pytest.raises(ParameterError):
            GroupElement(0, [1.0, 0.0], [0.0, 1.0])

    def test_from_matrix_checks_structure(self):
        with pytest.raises(ParameterError):
            GroupElement.from_matrix(np.ones((3, 3)), 0)
        G = GroupElement.from_matrix([[1.0, 2.0], [0.0, 3.0]], 0)
        assert np.array_equal(G.row, [0.0, 2.0])

    def test_mixed_nodes(self):
        with pytest.raises(ParameterError):
            GroupElement.identity(2, 0) @ GroupElement.identity(2, 1)


@given(vectors, st.integers(0, 2**32 - 1))
def test_adjacency_is_invariant(v, seed):
    v = np.array(v)
    i = seed % v.size
    G = GroupElement.random(v.size, i, np.random.default_rng(seed))
    assert row_label(G.apply(v), "adjacency", i) == row_label(v, "adjacency", i)


@given(vectors, st.integers(0, 100))
def test_sign_flip_witness(v, i):
    v = np.array(v)
    i = i % v.size
    assume(any(v[j] != 0 for j in range(v.size) if j != i))
    W = sign_flip_witness(v, i)
    u = W.apply(v)
    assert row_label(u, "sign", i) != row_label(v, "sign", i)
    assert orbit_label(u, i) == orbit_label(v, i)


def test_sign_flip_needs_support():
    assert sign_flip_witness([2.0, 0.0, 0.0], 0) is None


class TestContainment:
    def test_pe(self):
        c = kernel_orbit_containment(summarize(0, np.eye(3)))
        assert c.status == CONTAINED and c.identifiable == (1, 2)

    def test_horizontal_kernel(self):
        g = gram_with_kernel([1.0, 0.0])
        c = kernel_orbit_containment(g)
        assert c.status == CONTAINED and c.identifiable == (1,)

    def test_diagonal_kernel(self):
        c = kernel_orbit_containment(gram_with_kernel([1.0, -1.0]))
        assert c.status == FULL_DIM and c.identifiable == ()

    def test_union_of_supports(self):
        g = gram_with_kernel([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0])
        assert kernel_support(g) == frozenset({1, 2})
        c = kernel_orbit_containment(g)
        assert c.status == CONTAINED and c.identifiable == (3,)
        g = gram_with_kernel([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0])
        assert kernel_orbit_containment(g).status == FULL_DIM


class TestGenericVerdict:
    def test_full_rank(self):
        assert generic_verdict(summarize(0, np.eye(2))) == ORBITS_ONLY

    def test_steady_state(self):
        x = np.array([1.3, 0.7])
        assert generic_verdict(summarize(0, np.outer(x, x))) == ALL_INDISTINGUISHABLE

    def test_axis_kernel_is_unstable(self):
        # n = 3: kernel along e_1 leaves coordinate 2 identifiable
        assert generic_verdict(gram_with_kernel([0.0, 1.0, 0.0])) == STRUCTURALLY_UNSTABLE

    def test_axis_kernel_two_nodes_is_full(self):
        # n = 2: e_1 is the only off-diagonal coordinate, so its orbit is full
        assert generic_verdict(gram_with_kernel([0.0, 1.0])) == ALL_INDISTINGUISHABLE
