import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardylab.errors import (
    ConditioningError,
    DegenerateInputError,
    DomainError,
    NotLeftInvertibleError,
    TrustViolationError,
)
from hardylab.hardy import CoefSeries, cauchy_kernel, eval_disk
from hardylab.inner_outer import InnerFunction
from hardylab.model_ops import (
    OperatorMatrix,
    QuotientPair,
    circulant_shift,
    compress,
    eigenvector_field,
    fredholm_probe,
    functional_calculus,
    left_inverse,
    model_basis,
    numeric_kernel,
    operator_poly,
    ord0,
    quotient_solver,
    shift_matrix,
    toeplitz_analytic,
)


def test_shift_matrix_shape_and_trust():
    S = shift_matrix(3)
    assert np.array_equal(S.entries.real, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    assert S.trust == 2
    St = S.trusted()
    assert np.allclose(St.conj().T @ St, np.eye(2))
    assert np.allclose(S.entries @ S.entries.T, np.diag([0, 1, 1]))


def test_apply_refuses_untrusted_mass():
    S = shift_matrix(4)
    with pytest.raises(TrustViolationError):
        S.apply([0, 0, 0, 1])


def test_toeplitz_examples():
    Tz = toeplitz_analytic([0, 1], 5)
    assert Tz.shape == (6, 5) and np.allclose(Tz.entries[:5], shift_matrix(5).entries)
    assert np.allclose(toeplitz_analytic([3], 4).entries, 3 * np.eye(4))
    u, v = [1, 1], [1, -1]
    N = 6
    prod = toeplitz_analytic(u, N + 1).entries @ toeplitz_analytic(v, N).entries
    assert np.allclose(prod, toeplitz_analytic(np.polymul(u[::-1], v[::-1])[::-1], N).entries)


def test_model_basis_monomials():
    B = model_basis(InnerFunction.from_zeros([0, 0, 0]), 16)
    assert np.allclose(B.vectors, np.eye(16, 3))


def test_model_basis_single_kernel():
    B = model_basis(InnerFunction.from_zeros([0.5]), 128)
    assert np.allclose(B.vectors[:, 0], np.sqrt(3) / 2 * cauchy_kernel(0.5, 128).coeffs)


def test_model_basis_properties():
    m = InnerFunction.from_zeros([0, 0.5, -0.5j])
    N = 128
    B = model_basis(m, N)
    assert B.dimension == 3
    assert np.abs(B.vectors.conj().T @ B.vectors - np.eye(3)).max() <= 1e-10
    Tm = toeplitz_analytic(m.coefficients(N), N - 3).entries[:N]
    assert np.abs(B.vectors.conj().T @ Tm).max() <= 1e-10


def test_model_basis_errors():
    with pytest.raises(DomainError):
        model_basis(InnerFunction.from_zeros([0.5]), 8)
    with pytest.raises(DomainError):
        model_basis(InnerFunction.from_zeros([]), 32)
    with pytest.raises(ConditioningError):
        model_basis(InnerFunction.from_zeros([0.5, 0.5 + 1e-10]), 64)


def test_repeated_zero_uses_derivative_kernels():
    m = InnerFunction.from_zeros([0.4, 0.4, 0.4])
    B = model_basis(m, 256)
    assert np.abs(functional_calculus(m.coefficients(256), B).entries).max() <= 1e-11


def test_compressed_shift_on_z_squared():
    B = model_basis(InnerFunction.from_zeros([0, 0]), 32)
    assert np.allclose(compress(shift_matrix(32), B).entries, [[0, 0], [1, 0]])


def test_compress_rejects_untrusted_basis():
    B = model_basis(InnerFunction.from_zeros([0.9]), 16)
    with pytest.raises(TrustViolationError):
        compress(shift_matrix(16), B)


def test_adjoint_is_restriction_of_backward_shift():
    m = InnerFunction.from_zeros([0, 0.5])
    N = 128
    B = model_basis(m, N)
    Sm = compress(shift_matrix(N + 1), B)
    V = B.vectors
    W = np.vstack([V[1:], np.zeros((1, 2))])
    assert np.abs(V.conj().T @ W - Sm.entries.conj().T).max() <= 1e-12
    assert np.linalg.norm(W - V @ (V.conj().T @ W)) <= 1e-12


def test_calculus_examples():
    B = model_basis(InnerFunction.from_zeros([0, 0]), 32)
    assert np.allclose(functional_calculus([1], B).entries, np.eye(2))
    a, b = 2 - 1j, 0.5
    assert np.allclose(functional_calculus([a, b], B).entries, [[a, 0], [b, a]])
    m = InnerFunction.from_zeros([0, 0.5])
    Bm = model_basis(m, 128)
    assert np.abs(functional_calculus(m.coefficients(128), Bm).entries).max() <= 1e-12


poly = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=7)
zeros = st.lists(
    st.tuples(st.floats(0, 0.8), st.floats(0, 2 * np.pi)).map(lambda rt: rt[0] * np.exp(1j * rt[1])),
    min_size=1,
    max_size=4,
)


def _separated(zs, gap=1e-2):
    zs = np.array(zs)
    d = np.abs(zs[:, None] - zs[None, :]) + np.eye(zs.size)
    return d.min() >= gap


@settings(max_examples=30, deadline=None)
@given(poly, poly, zeros)
def test_calculus_is_multiplicative(u, v, zs):
    if not _separated(zs):
        return
    N = 256
    B = model_basis(InnerFunction.from_zeros(zs), N)
    uv = np.convolve(u, v)
    lhs = functional_calculus(uv, B).entries
    rhs = functional_calculus(u, B).entries @ functional_calculus(v, B).entries
    assert np.abs(lhs - rhs).max() <= 1e-10 * max(1, np.abs(lhs).max())


def test_calculus_rejects_long_symbol():
    B = model_basis(InnerFunction.from_zeros([0.5]), 16)
    with pytest.raises(TrustViolationError):
        functional_calculus(np.ones(40), B)


def test_numeric_kernel_examples():
    assert numeric_kernel(np.eye(4)).dimension == 0
    S = shift_matrix(8).entries
    rep = numeric_kernel(S @ S.conj().T)
    assert rep.dimension == 1 and rep.determinate
    assert abs(abs(rep.vectors[0, 0]) - 1) <= 1e-12


def test_numeric_kernel_divisor_oracle():
    N = 128
    m = InnerFunction.from_zeros([0.5, 0.3])
    B = model_basis(m, N)
    d = InnerFunction.from_zeros([0.5])
    rep = numeric_kernel(functional_calculus(d.coefficients(N), B))
    assert rep.dimension == 1 and rep.determinate
    # oracle: P_{H(m)} of the cofactor m / b_0.5 spans the kernel
    oracle = B.coordinates(InnerFunction.from_zeros([0.3]).coefficients(N))
    oracle /= np.linalg.norm(oracle)
    assert abs(abs(np.vdot(oracle, rep.vectors[:, 0])) - 1) <= 1e-12


def test_numeric_kernel_flags_missing_gap():
    A = np.diag([1.0, 1e-6, 1e-12])
    rep = numeric_kernel(A, tol=1e-8)
    assert rep.dimension == 1 and not rep.determinate
    rep = numeric_kernel(np.diag([1.0, 1e-3, 1e-12]), tol=1e-8)
    assert rep.dimension == 1 and rep.determinate


def test_fredholm_examples():
    rep = fredholm_probe(shift_matrix, [16, 32, 64])
    assert rep.stable and rep.index == -1
    assert all((r["kernel"], r["cokernel"]) == (0, 1) for r in rep.rungs)
    assert fredholm_probe(circulant_shift, [16, 32]).index == 0


def test_fredholm_instability_is_reported():
    fam = lambda N: OperatorMatrix(np.eye(N)[:, : N - (N == 32)], "monomial")
    rep = fredholm_probe(fam, [16, 32])
    assert not rep.stable and rep.index is None


def test_quotient_shift_examples():
    N = 64
    S = shift_matrix(N)
    one = np.eye(N)[0]
    q = quotient_solver(S, np.eye(N)[1], one, 1)
    assert q.residual <= 1e-12 and q.found
    assert np.allclose(q.u.coeffs / q.v.coeffs[0], [0, 1]) and np.allclose(q.v.coeffs / q.v.coeffs[0], [1, 0])
    q = quotient_solver(S, cauchy_kernel(0.5, N).coeffs, one, 2)
    assert q.residual <= 1e-10
    # cross identity with the exact pair (1, 1 - z/2)
    lhs = np.convolve(q.u.coeffs, [1, -0.5])
    rhs = np.convolve(q.v.coeffs, [1])
    n = max(lhs.size, rhs.size)
    assert np.allclose(np.pad(lhs, (0, n - lhs.size)), np.pad(rhs, (0, n - rhs.size)), atol=1e-10)
    assert q.v.coeffs[np.flatnonzero(np.abs(q.v.coeffs) > 1e-10)[0]].real > 0
    assert abs(np.linalg.norm(np.r_[q.u.coeffs, q.v.coeffs]) - 1) <= 1e-12


def test_quotient_degenerate():
    with pytest.raises(DegenerateInputError):
        quotient_solver(shift_matrix(8), np.eye(8)[0], np.zeros(8), 1)


def test_quotient_reports_absence():
    N = 64
    S = shift_matrix(N)
    from scipy.special import factorial

    h = 1.0 / factorial(np.arange(N))  # e^z is not rational
    q = quotient_solver(S, h, np.eye(N)[0], 2)
    assert not q.found and q.residual > 1e-8


def test_ord0_examples():
    assert ord0(QuotientPair(CoefSeries([0, 0, 1]), CoefSeries([1]), 0.0)) == 2
    assert ord0(QuotientPair(CoefSeries([1]), CoefSeries([0, 1]), 0.0)) == -1
    assert ord0(QuotientPair(CoefSeries([0]), CoefSeries([1]), 0.0)) == math.inf


pole_sets = st.lists(
    st.tuples(st.floats(2.5, 5), st.floats(0, 2 * np.pi)).map(lambda rt: rt[0] * np.exp(1j * rt[1])),
    min_size=1,
    max_size=3,
)


@settings(max_examples=20, deadline=None)
@given(pole_sets, st.integers(0, 2))
def test_quotient_cross_identity_between_degrees(poles, shift):
    N = 64
    S = shift_matrix(N)
    v = np.polynomial.polynomial.polyfromroots(poles)
    v = v / v[0]
    # h = z^shift / v(z), so (u, v) = (z^shift, v) is exact
    from hardylab.theta import RationalFunction

    num = np.zeros(shift + 1)
    num[-1] = 1
    h = RationalFunction(num, v).series(N)
    one = np.eye(N)[0]
    d = len(v) - 1 + shift
    q1 = quotient_solver(S, h, one, d)
    q2 = quotient_solver(S, h, one, d + 2, minimal=False)
    assert q1.found and q2.found
    a = np.convolve(q2.v.coeffs, np.pad(q1.u.coeffs, (0, 2)))
    b = np.convolve(np.pad(q1.v.coeffs, (0, 2)), q2.u.coeffs)
    assert np.abs(a - b).max() <= 1e-8


def test_left_inverse_of_shift_is_backward_shift():
    S = shift_matrix(16)
    L = left_inverse(S)
    assert np.allclose(L.entries, S.trusted().conj().T)
    assert np.abs(L.entries @ S.trusted() - np.eye(15)).max() <= 1e-12


def test_left_inverse_failure():
    with pytest.raises(NotLeftInvertibleError):
        left_inverse(OperatorMatrix(np.zeros((3, 3))))


def test_eigenvector_field_shift():
    N = 64
    S = shift_matrix(N)
    e0 = np.eye(N)[0]
    assert np.allclose(eigenvector_field(S, e0, 0.0), e0)
    f = eigenvector_field(S, e0, 0.3 - 0.2j)
    assert np.abs(f - cauchy_kernel(0.3 - 0.2j, N).coeffs).max() <= 1e-14


def test_eigenvector_field_continuation_keeps_relation():
    N = 64
    S = shift_matrix(N)
    f = eigenvector_field(S, np.eye(N)[0], 0.97)
    assert np.linalg.norm(S.trusted().conj().T @ f - 0.97 * f[: S.trust]) <= 1e-8 * np.linalg.norm(f)


def test_eigenvector_field_rejects_bad_f0():
    S = shift_matrix(8)
    with pytest.raises(DomainError):
        eigenvector_field(S, np.eye(8)[1], 0.1)
    with pytest.raises(DomainError):
        eigenvector_field(S, 2 * np.eye(8)[0], 0.1)


def test_operator_poly_trust_shrinks_with_degree():
    S = shift_matrix(10)
    P = operator_poly(S, [1, 0, 1])
    assert P.trust == 8
    assert np.allclose(P.trusted(), (np.eye(10) + S.entries @ S.entries)[:, :8])


def test_operator_matrix_json_roundtrip():
    A = OperatorMatrix(np.array([[1, 2j], [0, 3]]), "model", 1)
    B = OperatorMatrix.from_json(A.to_json())
    assert np.array_equal(A.entries, B.entries) and B.trust == 1 and B.basis_tag == "model"
