"""Two-component inner columns, their model spaces and the associated criteria."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import toeplitz
from scipy.signal import fftconvolve

from .errors import DegenerateThetaError, DomainError, NumericalFailureError
from .hardy import CoefSeries, complex_to_pairs, pairs_to_complex, unit_grid
from .inner_outer import (
    BOUNDARY_BAND,
    BlaschkeProduct,
    InnerFunction,
    inner_gcd,
    poly_inner_outer,
)
from .model_ops import OperatorMatrix, eigenvector_field, left_inverse

SERIES_TAIL_TOL = 1e-17
BAND = 8


def _poly(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.flatnonzero(c != 0)
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


def _is_zero(c) -> bool:
    return not np.any(np.asarray(c) != 0)


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """num/den with ascending coefficients; den has no zeros on the closed disk."""

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))

    def __post_init__(self):
        num, den = _poly(self.num), _poly(self.den)
        if _is_zero(den):
            raise DomainError("denominator is identically zero")
        if den.size > 1:
            roots = np.roots(den[::-1])
            if np.any(np.abs(roots) <= 1 + 1e-9):
                raise DomainError(f"denominator has a root in the closed disk: {roots}")
        for a in (num, den):
            a.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def poly(cls, coeffs) -> "RationalFunction":
        return cls(np.asarray(coeffs, dtype=complex))

    def is_zero(self) -> bool:
        return _is_zero(self.num)

    def pole_radius(self) -> float:
        if self.den.size == 1:
            return math.inf
        return float(np.min(np.abs(np.roots(self.den[::-1]))))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        val = npoly.polyval(z, self.num) / npoly.polyval(z, self.den)
        return complex(val) if np.ndim(val) == 0 else val

    def series(self, n: int) -> np.ndarray:
        """Taylor coefficients by long division."""
        out = np.zeros(n, dtype=complex)
        num = np.zeros(n, dtype=complex)
        k = min(n, self.num.size)
        num[:k] = self.num[:k]
        den = self.den
        for i in range(n):
            j = min(den.size - 1, i)
            acc = num[i] - np.dot(den[1 : j + 1], out[i - 1 :: -1][:j]) if j else num[i]
            out[i] = acc / den[0]
        return out

    def to_json(self) -> dict:
        return {"num": complex_to_pairs(self.num), "den": complex_to_pairs(self.den)}

    @classmethod
    def from_json(cls, data) -> "RationalFunction":
        if isinstance(data, dict):
            return cls(pairs_to_complex(data["num"]), pairs_to_complex(data.get("den", [1.0])))
        return cls(pairs_to_complex(data))


@dataclass(frozen=True, eq=False)
class Theta:
    theta1: RationalFunction
    theta2: RationalFunction
    inner1: InnerFunction | None = None
    inner2: InnerFunction | None = None
    name: str = ""

    def __call__(self, z):
        return self.theta1(z), self.theta2(z)

    @property
    def entries(self) -> tuple:
        return (self.theta1, self.theta2)

    def tail_length(self, tol: float = SERIES_TAIL_TOL) -> int:
        """Extra series length after which the Taylor coefficients are below ``tol``."""
        rho = min(self.theta1.pole_radius(), self.theta2.pole_radius())
        deg = max(self.theta1.num.size, self.theta2.num.size)
        if math.isinf(rho):
            return deg + BAND
        return int(math.ceil(math.log(1 / tol) / math.log(rho))) + deg + BAND

    def common_denominator(self) -> np.ndarray:
        q1, q2 = self.theta1.den, self.theta2.den
        if q1.size == q2.size and np.allclose(q1 / q1[-1], q2 / q2[-1], rtol=0, atol=1e-14):
            return q1
        return npoly.polymul(q1, q2)

    def cleared(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Numerators (n1, n2) and denominator q with theta_j = n_j / q."""
        q = self.common_denominator()
        n1 = _poly(npoly.polydiv(npoly.polymul(self.theta1.num, q), self.theta1.den)[0])
        n2 = _poly(npoly.polydiv(npoly.polymul(self.theta2.num, q), self.theta2.den)[0])
        return n1, n2, q

    def expected_defect(self) -> int:
        """Degree of the column after clearing denominators."""
        n1, n2, q = self.cleared()
        degs = [_poly(p).size - 1 for p in (n1, n2, q) if not _is_zero(p)]
        return max(degs)

    def inner_parts(self) -> tuple:
        """Inner factors of theta1, theta2 (``None`` marks the zero function)."""
        out = []
        for declared, rf in ((self.inner1, self.theta1), (self.inner2, self.theta2)):
            if declared is not None:
                out.append(declared)
            elif rf.is_zero():
                out.append(None)
            else:
                out.append(poly_inner_outer(rf.num)[0])
        return tuple(out)

    def to_json(self) -> dict:
        return {"theta1": self.theta1.to_json(), "theta2": self.theta2.to_json()}

    @classmethod
    def from_json(cls, data, name: str = "") -> "Theta":
        return cls(
            RationalFunction.from_json(data["theta1"]),
            RationalFunction.from_json(data["theta2"]),
            name=name,
        )


def paper_example_theta() -> Theta:
    return Theta(
        RationalFunction([0, 0.6]),
        RationalFunction([-0.8, 1.6], [2, -1]),
        name="paper-example",
    )


def shift_theta() -> Theta:
    return Theta(RationalFunction([1]), RationalFunction([0]), name="shift")


def common_factor_z_theta() -> Theta:
    return Theta(
        RationalFunction([0, 0, 0.6]),
        RationalFunction([0, -0.8, 1.6], [2, -1]),
        name="common-factor-z",
    )


@dataclass(frozen=True)
class InnerColumnReport:
    deviation: float
    tol: float
    M: int

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol


def check_inner_column(theta: Theta, M: int = 512, tol: float = 1e-10) -> InnerColumnReport:
    zeta = unit_grid(M)
    t1, t2 = theta(zeta)
    dev = float(np.max(np.abs(np.abs(t1) ** 2 + np.abs(t2) ** 2 - 1)))
    return InnerColumnReport(dev, tol, M)


class Ambient:
    """Pairs f1 + f2 stored as one vector of length 2L, with P = I - G G*."""

    def __init__(self, theta: Theta, L: int):
        self.theta = theta
        self.L = L
        self.s1 = theta.theta1.series(L)
        self.s2 = theta.theta2.series(L)
        z = np.zeros(L)
        self.G = np.vstack([toeplitz(self.s1, z), toeplitz(self.s2, z)])

    def pair(self, f1, f2) -> np.ndarray:
        out = np.zeros(2 * self.L, dtype=complex)
        for off, f in ((0, f1), (self.L, f2)):
            c = f.coeffs if isinstance(f, CoefSeries) else np.asarray(f, dtype=complex)
            if c.size > self.L:
                raise DomainError(f"series length {c.size} exceeds ambient length {self.L}")
            out[off : off + c.size] = c
        return out

    def split(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x)
        return x[: self.L], x[self.L :]

    def project(self, X) -> np.ndarray:
        return X - self.G @ (self.G.conj().T @ X)

    def shift(self, X) -> np.ndarray:
        Y = np.zeros_like(X)
        Y[1 : self.L] = X[: self.L - 1]
        Y[self.L + 1 :] = X[self.L : -1]
        return Y

    def backward_shift(self, X) -> np.ndarray:
        Y = np.zeros_like(X)
        Y[: self.L - 1] = X[1 : self.L]
        Y[self.L : -1] = X[self.L + 1 :]
        return Y

    def multiply(self, u, X) -> np.ndarray:
        """Multiply both components by the scalar series ``u`` (truncated at L)."""
        u = np.asarray(u, dtype=complex)[: self.L]
        X2 = X.reshape(2 * self.L, -1)
        out = np.empty_like(X2)
        for off in (0, self.L):
            block = X2[off : off + self.L]
            out[off : off + self.L] = fftconvolve(block, u[:, None], axes=0)[: self.L]
        return out.reshape(X.shape)

    def q_map(self, X) -> np.ndarray:
        """theta1 f2 - theta2 f1, truncated at L."""
        X2 = X.reshape(2 * self.L, -1)
        f1, f2 = X2[: self.L], X2[self.L :]
        T1, T2 = self.G[: self.L], self.G[self.L :]
        out = T1 @ f2 - T2 @ f1
        return out.reshape((self.L,) + X.shape[1:])

    def membership_defect(self, x) -> float:
        """Relative distance of ``x`` from the model space."""
        nrm = np.linalg.norm(x)
        return float(np.linalg.norm(self.G.conj().T @ x) / nrm) if nrm else 0.0


@dataclass(frozen=True, eq=False)
class ThetaBasis:
    """Orthonormal basis of P(poly_N + poly_N), ordered by nested levels.

    ``levels`` maps a polynomial degree bound n to the number of leading
    basis vectors spanning P(poly_n + poly_n).
    """

    theta: Theta
    N: int
    ambient: Ambient
    vectors: np.ndarray
    levels: dict
    gaps: dict

    @property
    def L(self) -> int:
        return self.ambient.L

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    @property
    def trusted_dim(self) -> int:
        return self.levels[self.N - 1]

    @property
    def band_dim(self) -> int:
        """Dimension of the lowest level, where products with short symbols stay exact."""
        return self.levels[min(self.levels)]

    def coordinates(self, x) -> np.ndarray:
        return self.vectors.conj().T @ x

    def embed(self, coords) -> np.ndarray:
        return self.vectors @ coords

    def pair_coordinates(self, f1, f2) -> np.ndarray:
        return self.coordinates(self.ambient.project(self.ambient.pair(f1, f2)))


def default_levels(N: int) -> tuple:
    return (N - 2 * BAND, N - BAND, N - 1, N)


def theta_basis(theta: Theta, N: int, levels=None, rank_tol: float = 1e-10) -> ThetaBasis:
    """Nested orthonormal basis of the model space truncated at degree N."""
    if N < 32:
        raise DomainError("theta bases need N >= 32")
    rep = check_inner_column(theta, 1024)
    if rep.deviation > 1e-8:
        raise DomainError(f"Theta is not an inner column (deviation {rep.deviation:.2e})")
    levels = tuple(sorted(default_levels(N) if levels is None else levels))
    if levels[-1] != N or (N - 1) not in levels:
        raise DomainError("levels must include N - 1 and N")
    L = N + max(theta.tail_length(), 64)
    amb = Ambient(theta, L)
    B = np.zeros((2 * L, 0), dtype=complex)
    dims, gaps = {}, {}
    for n in levels:
        cols = np.r_[0:n, L : L + n]
        E = np.zeros((2 * L, cols.size), dtype=complex)
        E[cols, np.arange(cols.size)] = 1
        R = amb.project(E)
        R = R - B @ (B.conj().T @ R)
        U, s, _ = np.linalg.svd(R, full_matrices=False)
        smax = max(1.0, s[0]) if s.size else 1.0
        r = int(np.sum(s > rank_tol * smax))
        below = s[r] if r < s.size else 0.0
        if r and below > 1e-3 * s[r - 1]:
            raise DegenerateThetaError(
                f"no rank gap at level {n}: {s[r - 1]:.3e} vs {below:.3e}"
            )
        gaps[n] = (float(s[r - 1]) if r else 0.0, float(below))
        Bn = U[:, :r]
        Bn = Bn - B @ (B.conj().T @ Bn)
        Bn, _ = np.linalg.qr(Bn)
        B = np.hstack([B, Bn])
        dims[n] = B.shape[1]
    return ThetaBasis(theta, N, amb, B, dims, gaps)


def s_theta(B: ThetaBasis) -> OperatorMatrix:
    """S(Theta) in the basis B; columns beyond level N-1 leave the span and are untrusted."""
    A = B.vectors.conj().T @ B.ambient.shift(B.vectors)
    return OperatorMatrix(A, f"theta({B.theta.name})", B.trusted_dim)


def adjoint_invariance_defect(B: ThetaBasis) -> float:
    """How far the backward shift moves the span of B outside itself."""
    Y = B.ambient.backward_shift(B.vectors)
    return float(np.linalg.norm(Y - B.vectors @ (B.vectors.conj().T @ Y), 2))


def basis_membership_defect(B: ThetaBasis) -> float:
    return float(np.linalg.norm(B.ambient.G.conj().T @ B.vectors, 2))


@dataclass(frozen=True, eq=False)
class QResult:
    image: CoefSeries
    projected: bool
    distance: float


def quasiaffinity_Q(theta: Theta, f1, f2, tol: float = 1e-8) -> QResult:
    """theta1 f2 - theta2 f1, after projecting the pair into the model space if needed."""
    n = max(len(np.atleast_1d(getattr(f, "coeffs", f))) for f in (f1, f2))
    amb = Ambient(theta, n + max(theta.tail_length(), 64))
    x = amb.pair(f1, f2)
    dist = amb.membership_defect(x)
    projected = dist > tol
    if projected:
        x = amb.project(x)
    return QResult(CoefSeries(amb.q_map(x)), projected, dist)


def q_matrix(B: ThetaBasis, cols: int | None = None) -> np.ndarray:
    cols = B.dimension if cols is None else cols
    return B.ambient.q_map(B.vectors[:, :cols])


def intertwining_residual(B: ThetaBasis, A: OperatorMatrix | None = None) -> float:
    """Operator norm of Q S(Theta) - S Q on the trusted basis vectors."""
    A = s_theta(B) if A is None else A
    t = A.trust
    lhs = B.ambient.q_map(B.vectors @ A.entries[:, :t])
    Qx = q_matrix(B, t)
    rhs = np.zeros_like(Qx)
    rhs[1:] = Qx[:-1]
    return float(np.linalg.norm(lhs - rhs, 2))


def q_injectivity(B: ThetaBasis) -> float:
    s = np.linalg.svd(q_matrix(B, B.trusted_dim), compute_uv=False)
    return float(s[-1])


def residual_projection(theta: Theta, M: int = 512) -> np.ndarray:
    """Pointwise I - Theta Theta* on the boundary grid, shape (M, 2, 2)."""
    zeta = unit_grid(M)
    t = np.stack(theta(zeta), axis=-1)
    outer = t[:, :, None] * t[:, None, :].conj()
    return np.eye(2)[None] - outer


def _blaschke_numerator(m: InnerFunction) -> tuple[np.ndarray, np.ndarray, complex]:
    """Polynomials p, r and constant c with m = c p / r."""
    p = np.ones(1, dtype=complex)
    r = np.ones(1, dtype=complex)
    c = complex(m.constant)
    for a in m.zeros:
        if a == 0:
            p = npoly.polymul(p, [0, 1])
        else:
            p = npoly.polymul(p, [a, -1])
            r = npoly.polymul(r, [1, -np.conj(a)])
            c *= abs(a) / a
    return p, r, c


def divide_inner(rf: RationalFunction, m: InnerFunction, tol: float = 1e-10) -> RationalFunction:
    """rf / m for a finite Blaschke product m dividing rf."""
    if m.atoms:
        raise DomainError("only Blaschke common factors can be divided out of rational data")
    p, r, c = _blaschke_numerator(m)
    quot, rem = npoly.polydiv(rf.num, p)
    if np.linalg.norm(rem) > tol * max(1.0, np.linalg.norm(rf.num)):
        raise NumericalFailureError("inner factor does not divide the numerator", {"remainder": float(np.linalg.norm(rem))})
    return RationalFunction(npoly.polymul(quot, r) / c, rf.den)


def blaschke_series(zeros, n: int) -> np.ndarray:
    return BlaschkeProduct(tuple(zeros)).coefficients(n)


CERTIFICATE_SYMBOLS = {
    "z": lambda n: np.eye(1, n, 1, dtype=complex).ravel(),
    "b_0.5": lambda n: blaschke_series([0.5], n),
    "z*b_0.3": lambda n: blaschke_series([0.0, 0.3], n),
}


def calculus_sigma_min(B: ThetaBasis, u, cols: int | None = None) -> float:
    """Smallest singular value of u(S(Theta)) on the leading ``cols`` basis vectors."""
    cols = B.band_dim if cols is None else cols
    X = B.vectors[:, :cols]
    Y = B.ambient.project(B.ambient.multiply(u, X))
    return float(np.linalg.svd(Y, compute_uv=False)[-1])


@dataclass
class ConfluenceReport:
    confluent: bool
    common_factor: InnerFunction
    certificates: dict = field(default_factory=dict)
    witness_residual: float | None = None
    witness: np.ndarray | None = None
    passed: bool = False


def confluence_test(
    theta: Theta,
    N: int = 64,
    basis: ThetaBasis | None = None,
    witness_tol: float = 1e-7,
    certificate_tol: float = 1e-4,
) -> ConfluenceReport:
    i1, i2 = theta.inner_parts()
    if i1 is None and i2 is None:
        raise DegenerateThetaError("both entries vanish")
    if i1 is None or i2 is None:
        common = i2 if i1 is None else i1
    else:
        common = inner_gcd(i1, i2)
    if common.is_constant():
        B = theta_basis(theta, N) if basis is None else basis
        certs = {name: calculus_sigma_min(B, f(B.L)) for name, f in CERTIFICATE_SYMBOLS.items()}
        passed = all(v > certificate_tol for v in certs.values())
        return ConfluenceReport(True, common, certs, passed=passed)
    phi1 = divide_inner(theta.theta1, common)
    phi2 = divide_inner(theta.theta2, common)
    L = (basis.L if basis is not None else N + max(theta.tail_length(), 64))
    amb = Ambient(theta, L)
    h = amb.project(amb.pair(phi1.series(L), phi2.series(L)))
    nh = np.linalg.norm(h)
    if nh < 1e-12:
        raise NumericalFailureError("kernel witness vanished", {"norm": float(nh)})
    mh = amb.project(amb.multiply(common.coefficients(L), h))
    res = float(np.linalg.norm(mh) / nh)
    return ConfluenceReport(False, common, {}, res, h, res <= witness_tol)


@dataclass
class CyclicityReport:
    verdict: str
    numerator: np.ndarray
    roots: np.ndarray
    min_root_modulus: float


def _cleared_q(theta: Theta, f1, f2) -> tuple[np.ndarray, np.ndarray]:
    """Numerator and denominator of theta1 f2 - theta2 f1."""
    t1, t2 = theta.theta1, theta.theta2
    a = npoly.polymul(npoly.polymul(t1.num, t2.den), f2)
    b = npoly.polymul(npoly.polymul(t2.num, t1.den), f1)
    num = npoly.polysub(a, b)
    return _poly(num), npoly.polymul(t1.den, t2.den)


def cyclicity_test(theta: Theta, f1, f2, band: float = BOUNDARY_BAND) -> CyclicityReport:
    """Cyclic iff theta1 f2 - theta2 f1 is outer, read off its zeros."""
    f1 = np.atleast_1d(np.asarray(getattr(f1, "coeffs", f1), dtype=complex))
    f2 = np.atleast_1d(np.asarray(getattr(f2, "coeffs", f2), dtype=complex))
    num, _ = _cleared_q(theta, f1, f2)
    scale = np.max(np.abs(num))
    if scale == 0:
        return CyclicityReport("not-cyclic", num, np.zeros(0, complex), 0.0)
    num = _poly(np.where(np.abs(num) > 1e-14 * scale, num, 0))
    roots = np.roots(num[::-1]) if num.size > 1 else np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(roots)):
        raise NumericalFailureError("root finder failed", {"degree": num.size - 1})
    mods = np.abs(roots)
    rmin = float(mods.min()) if mods.size else math.inf
    if np.any(mods < 1 - band):
        verdict = "not-cyclic"
    elif np.any(mods < 1 + band):
        verdict = "indeterminate"
    else:
        verdict = "cyclic"
    return CyclicityReport(verdict, num, roots, rmin)


@dataclass
class CoronaReport:
    feasible: bool
    degree: int | None
    f1: RationalFunction | None
    f2: RationalFunction | None
    residual: float
    boundary_residual: float
    history: list = field(default_factory=list)


def _conv_matrix(p: np.ndarray, k: int, rows: int) -> np.ndarray:
    C = np.zeros((rows, k + 1), dtype=complex)
    for j in range(k + 1):
        C[j : j + p.size, j] = p
    return C


def corona_similarity(
    theta: Theta, d_max: int = 8, tol: float = 1e-10, M: int = 1024
) -> CoronaReport:
    """Polynomials f1, f2 of minimal degree with theta1 f2 - theta2 f1 = 1."""
    t1, t2 = theta.theta1, theta.theta2
    a = _poly(npoly.polymul(t1.num, t2.den))
    b = _poly(npoly.polymul(t2.num, t1.den))
    c = _poly(npoly.polymul(t1.den, t2.den))
    zeta = unit_grid(M)
    v1, v2 = theta(zeta)
    history = []
    best = None
    for k in range(d_max + 1):
        rows = max(a.size, b.size, c.size) + k
        A = np.hstack([-_conv_matrix(b, k, rows), _conv_matrix(a, k, rows)])
        rhs = np.zeros(rows, dtype=complex)
        rhs[: c.size] = c
        x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        res = float(np.linalg.norm(A @ x - rhs) / np.linalg.norm(rhs))
        history.append({"degree": k, "residual": res})
        if res <= tol:
            f1, f2 = x[: k + 1], x[k + 1 :]
            f1 = np.where(np.abs(f1) > 1e-15, f1, 0)
            f2 = np.where(np.abs(f2) > 1e-15, f2, 0)
            bres = float(np.max(np.abs(v1 * npoly.polyval(zeta, f2) - v2 * npoly.polyval(zeta, f1) - 1)))
            best = CoronaReport(
                bres <= tol, k, RationalFunction(f1), RationalFunction(f2), res, bres, history
            )
            if best.feasible:
                return best
    if best is not None:
        return best
    return CoronaReport(False, None, None, None, history[-1]["residual"], math.inf, history)


@dataclass
class RatioTable:
    rows: list
    per_radius: dict
    certifying: bool = False


def lattice(radii, n_angles: int = 16) -> np.ndarray:
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    return np.array([r * np.exp(1j * t) for r in radii for t in angles])


def ratio_field_probe(
    T: OperatorMatrix,
    f0,
    h,
    radii=(0.25, 0.5, 0.75),
    n_angles: int = 16,
    pole_tol: float = 1e-12,
) -> RatioTable:
    """Samples of <h, f(conj lam)> / <f(0), f(conj lam)> with pole flags.

    The per-radius mean squares are a growth diagnostic only; finitely many
    samples never certify membership in H^2.
    """
    f0 = np.asarray(f0, dtype=complex)
    h = np.asarray(h, dtype=complex)
    L = left_inverse(T)
    rows = []
    for lam in lattice(radii, n_angles):
        f = eigenvector_field(T, f0, np.conj(lam), L)
        den = np.vdot(f, f0)
        num = np.vdot(f, h)
        pole = abs(den) < pole_tol * np.linalg.norm(f0) * np.linalg.norm(f)
        rows.append(
            {
                "lambda": complex(lam),
                "value": None if pole else complex(num / den),
                "denominator": complex(den),
                "pole": bool(pole),
            }
        )
    per_radius = {}
    for r in radii:
        vals = [
            abs(row["value"]) ** 2
            for row in rows
            if not row["pole"] and abs(abs(row["lambda"]) - r) < 1e-12
        ]
        per_radius[float(r)] = float(np.mean(vals)) if vals else math.nan
    return RatioTable(rows, per_radius)
