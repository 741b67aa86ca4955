"""Truncated matrix models of shifts, Toeplitz operators and their compressions.

Operators are stored with an explicit trust count: the leading ``trust``
input columns represent the true operator exactly, the remaining columns are
artifacts of truncation and must not be used for spectral conclusions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .errors import (
    ConditioningError,
    DegenerateInputError,
    DomainError,
    MultiplicityError,
    NotLeftInvertibleError,
    NumericalFailureError,
    TrustViolationError,
)
from .hardy import CoefSeries, complex_to_pairs, pairs_to_complex
from .inner_outer import BlaschkeProduct, InnerFunction

GAP_FACTOR = 1e3
TRUST_LEAK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    basis_tag: str = "monomial"
    trust: int | None = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2:
            raise ValueError("operator entries must form a 2-d array")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        t = a.shape[1] if self.trust is None else int(self.trust)
        if not 0 <= t <= a.shape[1]:
            raise ValueError(f"trust {t} outside 0..{a.shape[1]}")
        object.__setattr__(self, "trust", t)

    @property
    def in_order(self) -> int:
        return self.entries.shape[1]

    @property
    def out_order(self) -> int:
        return self.entries.shape[0]

    @property
    def shape(self) -> tuple:
        return self.entries.shape

    def trusted(self) -> np.ndarray:
        return self.entries[:, : self.trust]

    def is_square(self) -> bool:
        return self.in_order == self.out_order

    def apply(self, x, tol: float = TRUST_LEAK_TOL) -> np.ndarray:
        """Apply to ``x``, refusing vectors with mass on untrusted columns."""
        x = np.asarray(x, dtype=complex)
        leak = np.linalg.norm(x[self.trust :])
        if leak > tol * max(1.0, np.linalg.norm(x)):
            raise TrustViolationError(f"vector has mass {leak:.3e} beyond the trusted columns")
        return self.entries @ x

    def to_json(self) -> dict:
        return {
            "rows": self.out_order,
            "cols": self.in_order,
            "basis": self.basis_tag,
            "trust": self.trust,
            "entries": complex_to_pairs(self.entries.ravel()),
        }

    @classmethod
    def from_json(cls, data) -> "OperatorMatrix":
        vals = pairs_to_complex(data["entries"]).reshape(int(data["rows"]), int(data["cols"]))
        return cls(vals, data.get("basis", "monomial"), int(data["trust"]))


def shift_matrix(N: int) -> OperatorMatrix:
    if N < 1:
        raise DomainError("shift order must be at least 1")
    return OperatorMatrix(np.eye(N, k=-1, dtype=complex), "monomial", N - 1)


def circulant_shift(N: int) -> OperatorMatrix:
    """Truncation of the bilateral shift to N frequencies, closed up periodically."""
    return OperatorMatrix(np.roll(np.eye(N, dtype=complex), 1, axis=0), "circulant", N)


def _coeffs(u) -> np.ndarray:
    return u.coeffs if isinstance(u, CoefSeries) else np.asarray(u, dtype=complex).ravel()


def _trim(c: np.ndarray, tol: float = 0.0) -> np.ndarray:
    nz = np.flatnonzero(np.abs(c) > tol)
    return c[: nz[-1] + 1] if nz.size else c[:1] * 0


def toeplitz_analytic(u, N: int) -> OperatorMatrix:
    """Multiplication by u on polynomials of degree < N, exact (rectangular)."""
    c = _trim(_coeffs(u))
    if c.size == 0:
        c = np.zeros(1, dtype=complex)
    rows = N + c.size - 1
    col = np.zeros(rows, dtype=complex)
    col[: c.size] = c
    return OperatorMatrix(toeplitz(col, np.zeros(N)), "monomial", N)


def operator_poly(T: OperatorMatrix, coeffs, tol: float = TRUST_LEAK_TOL) -> OperatorMatrix:
    """v(T) for a square T, trusted on the leading columns whose orbit stays trusted."""
    if not T.is_square():
        raise DomainError("polynomial calculus needs a square operator")
    c = np.atleast_1d(_coeffs(coeffs))
    n = T.in_order
    A = T.entries
    out = np.zeros((n, n), dtype=complex)
    X = np.eye(n, dtype=complex)
    ok = np.ones(n, dtype=bool)
    for k, ck in enumerate(c):
        out += ck * X
        if k == c.size - 1:
            break
        ok &= np.linalg.norm(X[T.trust :], axis=0) <= tol * np.maximum(1.0, np.linalg.norm(X, axis=0))
        X = A @ X
    bad = np.flatnonzero(~ok)
    trust = int(bad[0]) if bad.size else n
    return OperatorMatrix(out, T.basis_tag, min(trust, T.trust if c.size > 1 else n))


def krylov(T: OperatorMatrix, x, d: int) -> np.ndarray:
    """Columns x, Tx, ..., T^d x, refusing to leave the trusted columns."""
    cols = [np.asarray(x, dtype=complex)]
    for _ in range(d):
        cols.append(T.apply(cols[-1]))
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class ModelBasis:
    """Orthonormal basis of H(m) stored as columns of coefficient vectors."""

    m: InnerFunction
    N: int
    vectors: np.ndarray
    tail: float = 0.0

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def series(self) -> list[CoefSeries]:
        return [CoefSeries(v) for v in self.vectors.T]

    def coordinates(self, f) -> np.ndarray:
        c = np.zeros(self.N, dtype=complex)
        src = _coeffs(f)[: self.N]
        c[: src.size] = src
        return self.vectors.conj().T @ c

    def embed(self, coords) -> CoefSeries:
        return CoefSeries(self.vectors @ np.asarray(coords, dtype=complex))


def _group_zeros(zeros, same_tol: float = 1e-13, min_gap: float = 1e-8):
    groups: list[list] = []
    for z in zeros:
        for g in groups:
            dist = abs(g[0] - z)
            if dist <= same_tol:
                g[1] += 1
                break
            if dist < min_gap:
                raise ConditioningError(f"zeros {g[0]} and {z} are closer than {min_gap}")
        else:
            groups.append([z, 1])
    return groups


def _phase_normalize(V: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.flatnonzero(np.abs(col) > tol * max(np.abs(col).max(), 1e-300))
        if idx.size:
            V[:, j] = col * (abs(col[idx[0]]) / col[idx[0]])
    return V


def model_basis(m, N: int) -> ModelBasis:
    """Orthonormal basis of H(m) = H^2 minus m H^2 for a finite Blaschke product."""
    if isinstance(m, BlaschkeProduct):
        m = InnerFunction(m)
    if m.atoms:
        raise DomainError("model bases are built only for finite Blaschke products")
    deg = len(m.zeros)
    if deg < 1:
        raise DomainError("the model space of a constant inner function is trivial")
    if N < deg + 8:
        raise DomainError(f"order {N} too small for degree {deg}; need at least {deg + 8}")
    k = np.arange(N)
    cols = []
    tail = 0.0
    for a, mult in _group_zeros(m.zeros):
        ca = np.conj(a)
        for j in range(mult):
            # j-th derivative in conj(a) of sum conj(a)^k z^k
            falling = np.ones(N)
            for i in range(j):
                falling = falling * (k - i)
            powers = np.zeros(N, dtype=complex)
            mask = k >= j
            powers[mask] = ca ** (k[mask] - j)
            cols.append(falling * powers)
        tail = max(tail, float(abs(a) ** max(N - mult, 0) * N ** (mult - 1)))
    K = np.column_stack(cols)
    Q, R = np.linalg.qr(K)
    return ModelBasis(m, N, _phase_normalize(Q), tail)


def compress(A: OperatorMatrix, B: ModelBasis, tol: float = 1e-13) -> OperatorMatrix:
    """Matrix of P_{H(m)} A restricted to H(m), in the basis B."""
    V = B.vectors
    if A.in_order < B.N:
        Vin = V[: A.in_order]
        if np.linalg.norm(V[A.in_order :]) > tol:
            raise TrustViolationError("model basis does not fit inside the operator's input order")
    else:
        Vin = np.zeros((A.in_order, V.shape[1]), dtype=complex)
        Vin[: B.N] = V
    leak = np.linalg.norm(Vin[A.trust :])
    if leak > tol:
        raise TrustViolationError(f"model basis has mass {leak:.3e} beyond trusted columns")
    Vout = np.zeros((A.out_order, V.shape[1]), dtype=complex)
    r = min(A.out_order, B.N)
    Vout[:r] = V[:r]
    return OperatorMatrix(Vout.conj().T @ (A.entries @ Vin), "model", V.shape[1])


def functional_calculus(u, B: ModelBasis, tol: float = 1e-14) -> OperatorMatrix:
    """u(S(m)) = P_{H(m)} T_u restricted to H(m)."""
    c = _coeffs(u)
    if c.size > B.N:
        tail = np.linalg.norm(c[B.N :])
        if tail > tol * max(1.0, np.linalg.norm(c)):
            raise TrustViolationError(f"symbol tail {tail:.3e} beyond the ambient order")
        c = c[: B.N]
    # coefficients of u*f beyond N never meet the model basis
    T = toeplitz(np.pad(c, (0, B.N - c.size)), np.zeros(B.N))
    V = B.vectors
    return OperatorMatrix(V.conj().T @ T @ V, "model", V.shape[1])


@dataclass(frozen=True, eq=False)
class KernelReport:
    vectors: np.ndarray
    singular_values: np.ndarray
    threshold: float
    determinate: bool
    gap: float

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def to_json(self) -> dict:
        return {
            "op": "numeric_kernel",
            "inputs": {"shape": list(self.vectors.shape[:1]) + [int(self.singular_values.size)]},
            "verdict": {"dimension": self.dimension, "determinate": self.determinate},
            "residuals": {"singular_values": [float(s) for s in self.singular_values]},
            "tolerances": {"threshold": self.threshold, "gap_factor": GAP_FACTOR},
        }


def numeric_kernel(A, tol: float = 1e-8) -> KernelReport:
    """Null space of A with an explicit singular-value gap.

    A dimension is only claimed when the smallest retained singular value
    exceeds the threshold tol * sigma_max by the factor 1e3; otherwise the
    report is flagged indeterminate.
    """
    a = A.trusted() if isinstance(A, OperatorMatrix) else np.asarray(A, dtype=complex)
    n = a.shape[1]
    if n == 0:
        return KernelReport(np.zeros((0, 0), complex), np.zeros(0), 0.0, True, math.inf)
    if a.shape[0] == 0:
        return KernelReport(np.eye(n, dtype=complex), np.zeros(n), 0.0, True, math.inf)
    _, s, Vh = np.linalg.svd(a, full_matrices=True)
    sv = np.zeros(n)
    sv[: s.size] = s
    smax = sv[0]
    thr = tol * smax
    rank = int(np.sum(sv >= thr)) if smax > 0 else 0
    vectors = Vh[rank:].conj().T
    if rank == 0 or rank == n:
        determinate, gap = True, math.inf
    else:
        determinate = sv[rank - 1] >= GAP_FACTOR * thr
        gap = float(sv[rank - 1] / sv[rank]) if sv[rank] > 0 else math.inf
    return KernelReport(vectors, sv, float(thr), bool(determinate), gap)


@dataclass
class FredholmReport:
    rungs: list = field(default_factory=list)
    stable: bool = False
    index: int | None = None

    def to_json(self) -> dict:
        return {
            "op": "fredholm_probe",
            "inputs": {"ladder": [r["N"] for r in self.rungs]},
            "verdict": {"stable": self.stable, "index": self.index},
            "residuals": {"rungs": self.rungs},
            "tolerances": {},
        }


def fredholm_probe(family, ladder, tol: float = 1e-8) -> FredholmReport:
    rungs = []
    for N in ladder:
        A = family(N)
        At = A.trusted() if isinstance(A, OperatorMatrix) else np.asarray(A)
        ker = numeric_kernel(At, tol)
        coker = numeric_kernel(At.conj().T, tol)
        rungs.append(
            {
                "N": int(N),
                "kernel": ker.dimension,
                "cokernel": coker.dimension,
                "index": ker.dimension - coker.dimension,
                "determinate": bool(ker.determinate and coker.determinate),
                "sigma_min": float(ker.singular_values[-1]) if ker.singular_values.size else 0.0,
            }
        )
    indices = {r["index"] for r in rungs}
    stable = bool(rungs) and len(indices) == 1 and all(r["determinate"] for r in rungs)
    return FredholmReport(rungs, stable, indices.pop() if stable else None)


@dataclass(frozen=True, eq=False)
class QuotientPair:
    u: CoefSeries
    v: CoefSeries
    residual: float
    found: bool = True
    degree: int = 0


def quotient_solver(
    T: OperatorMatrix, h, h0, d: int, tol: float = 1e-8, minimal: bool = True
) -> QuotientPair:
    """Polynomials (u, v) of degree <= d with v(T)h = u(T)h0.

    The pair is the smallest right singular vector of [K(h0) | -K(h)], where
    K stacks Krylov columns. With ``minimal`` the lowest degree admitting a
    solution is used, which makes the pair unique up to scale.
    """
    h = np.asarray(h, dtype=complex)
    h0 = np.asarray(h0, dtype=complex)
    if not np.any(np.abs(h0) > 0):
        raise DegenerateInputError("h0 must be nonzero")
    Kh0_full = krylov(T, h0, d)
    Kh_full = krylov(T, h, d)
    result = None
    for k in range(0 if minimal else d, d + 1):
        result = _quotient_at(Kh0_full[:, : k + 1], Kh_full[:, : k + 1], k, h, h0, tol)
        if result.found:
            return result
    return result


def _quotient_at(Kh0, Kh, d, h, h0, tol) -> QuotientPair:
    system = np.hstack([Kh0, -Kh])
    _, s, Vh = np.linalg.svd(system, full_matrices=True)
    x = Vh[-1].conj()
    u, v = x[: d + 1], x[d + 1 :]
    vmask = np.flatnonzero(np.abs(v) > 1e-10 * max(np.linalg.norm(v), 1e-300))
    if vmask.size and np.linalg.norm(v) > 1e-10:
        ph = abs(v[vmask[0]]) / v[vmask[0]]
        u, v = u * ph, v * ph
        has_v = True
    else:
        has_v = False
    residual = float(np.linalg.norm(system @ np.concatenate([u, v])))
    scale = max(1.0, np.linalg.norm(h), np.linalg.norm(h0))
    return QuotientPair(CoefSeries(u), CoefSeries(v), residual, bool(has_v and residual <= tol * scale), d)


def _order(c: np.ndarray) -> float:
    nrm = np.linalg.norm(c)
    if nrm <= 1e-10:
        return math.inf
    return int(np.flatnonzero(np.abs(c) > 1e-10 * nrm)[0])


def ord0(q: QuotientPair):
    """Vanishing order of u at 0 minus that of v; ``math.inf`` when u vanishes."""
    ou = _order(q.u.coeffs)
    if ou == math.inf:
        return math.inf
    ov = _order(q.v.coeffs)
    if ov == math.inf:
        raise DegenerateInputError("quotient pair has v = 0")
    return ou - ov


def left_inverse(T: OperatorMatrix) -> OperatorMatrix:
    """L = (T*T)^{-1} T* computed on the trusted columns."""
    At = T.trusted()
    G = At.conj().T @ At
    nrm2 = np.linalg.norm(At, 2) ** 2
    lam_min = float(np.linalg.eigvalsh(G)[0]) if G.size else 0.0
    if G.size == 0 or lam_min <= 1e-8 * nrm2:
        raise NotLeftInvertibleError(f"T*T has smallest eigenvalue {lam_min:.3e}")
    L = np.linalg.solve(G, At.conj().T)
    return OperatorMatrix(L, T.basis_tag, L.shape[1])


def _square_adjoint(L: OperatorMatrix, n: int) -> np.ndarray:
    """L* as an n x n matrix; untrusted coordinates are never reached by L."""
    Lsq = np.zeros((n, n), dtype=complex)
    Lsq[: L.out_order] = L.entries
    return Lsq.conj().T


def eigen_residual(T: OperatorMatrix, f, lam) -> float:
    f = np.asarray(f, dtype=complex)
    At = T.trusted()
    return float(np.linalg.norm(At.conj().T @ f - lam * f[: T.trust]))


def eigenvector_field(
    T: OperatorMatrix,
    f0,
    lam,
    L: OperatorMatrix | None = None,
    step: float = 0.05,
    tol: float = 1e-8,
) -> np.ndarray:
    """Vector f(lam) with T* f = lam f, anchored at f(0) = f0.

    Inside |lam| ||L|| < 0.95 this is the resolvent (I - lam L*)^{-1} f0.
    Further out the field is continued from the edge of that disk through
    one-dimensional kernels, matching phase and norm at each step.
    """
    f0 = np.asarray(f0, dtype=complex)
    lam = complex(lam)
    n = T.out_order
    if abs(np.linalg.norm(f0) - 1) > 1e-10:
        raise DomainError("f0 must be a unit vector")
    if eigen_residual(T, f0, 0.0) > tol:
        raise DomainError("f0 is not in the kernel of T*")
    L = left_inverse(T) if L is None else L
    Ls = _square_adjoint(L, n)
    r_valid = 0.95 / np.linalg.norm(L.entries, 2)

    def resolvent(mu):
        return np.linalg.solve(np.eye(n) - mu * Ls, f0)

    if abs(lam) < r_valid:
        f = resolvent(lam)
    else:
        direction = lam / abs(lam)
        start = 0.9 * r_valid
        f = resolvent(start * direction)
        steps = max(2, int(math.ceil((abs(lam) - start) / step)))
        E = np.eye(T.trust, n, dtype=complex)
        At_h = T.trusted().conj().T
        for r in np.linspace(start, abs(lam), steps + 1)[1:]:
            mu = r * direction
            rep = numeric_kernel(mu * E - At_h, tol)
            if rep.dimension != 1 or not rep.determinate:
                raise MultiplicityError(
                    f"eigenspace at {mu} has dimension {rep.dimension} "
                    f"(determinate={rep.determinate})"
                )
            w = rep.vectors[:, 0]
            ip = np.vdot(w, f)
            phase = ip / abs(ip) if abs(ip) > 0 else 1.0
            f = w * phase * np.linalg.norm(f)
    res = eigen_residual(T, f, lam)
    if res > tol * np.linalg.norm(f):
        raise NumericalFailureError(
            "eigen-relation violated", {"lambda": [lam.real, lam.imag], "residual": res}
        )
    return f
