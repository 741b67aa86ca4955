"""Inner functions, outer functions and the factorization of polynomials."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DomainError, NumericalFailureError, SingularityError
from .hardy import (
    BoundarySamples,
    CoefSeries,
    complex_to_pairs,
    next_power_of_two,
    pairs_to_complex,
    series_mul,
    to_boundary,
    to_coef,
)

PAIR_TOL = 1e-9
BOUNDARY_BAND = 1e-3
MODULUS_FLOOR = 1e-14
ROOT_DEGREE_CAP = 64


def exp_series(h, n: int) -> np.ndarray:
    """First ``n`` coefficients of exp(h), from k e_k = sum_j j h_j e_{k-j}."""
    hh = np.zeros(n, dtype=complex)
    src = np.asarray(h, dtype=complex)[:n]
    hh[: src.size] = src
    e = np.zeros(n, dtype=complex)
    if n == 0:
        return e
    e[0] = np.exp(hh[0])
    jh = np.arange(n) * hh
    for k in range(1, n):
        e[k] = np.dot(jh[1 : k + 1], e[k - 1 :: -1]) / k
    return e


def blaschke_factor_series(a: complex, n: int) -> np.ndarray:
    if a == 0:
        out = np.zeros(n, dtype=complex)
        if n > 1:
            out[1] = 1
        return out
    geo = np.conj(a) ** np.arange(n)
    num = np.zeros(n, dtype=complex)
    num[0] = a
    if n > 1:
        num[1] = -1
    return (abs(a) / a) * series_mul(num, geo, n)


@dataclass(frozen=True)
class BlaschkeProduct:
    zeros: tuple = ()
    constant: complex = 1.0

    def __post_init__(self):
        zs = tuple(complex(z) for z in self.zeros)
        for z in zs:
            if not abs(z) < 1:
                raise DomainError(f"Blaschke zero {z} is not inside the open disk")
        c = complex(self.constant)
        if abs(abs(c) - 1) > 1e-12:
            raise DomainError(f"constant {c} is not unimodular")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "constant", c)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        val = np.full(z.shape, self.constant, dtype=complex)
        for a in self.zeros:
            if a == 0:
                val = val * z
            else:
                val = val * (abs(a) / a) * (a - z) / (1 - np.conj(a) * z)
        return complex(val) if val.ndim == 0 else val

    def coefficients(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        if n:
            out[0] = self.constant
        for a in self.zeros:
            out = series_mul(out, blaschke_factor_series(a, n), n)
        return out


@dataclass(frozen=True)
class SingularInner:
    """Discrete singular inner function; ``atoms`` holds (zeta, mass) pairs."""

    atoms: tuple = ()

    def __post_init__(self):
        atoms = []
        for zeta, mass in self.atoms:
            zeta, mass = complex(zeta), float(mass)
            if abs(abs(zeta) - 1) > 1e-14:
                raise DomainError(f"atom {zeta} does not lie on the unit circle")
            if not mass > 0:
                raise DomainError(f"atom mass must be positive, got {mass}")
            atoms.append((zeta, mass))
        object.__setattr__(self, "atoms", tuple(atoms))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        expo = np.zeros(z.shape, dtype=complex)
        for zeta, mass in self.atoms:
            if np.any(np.abs(zeta - z) < 1e-15):
                raise SingularityError(f"evaluation at the singular atom {zeta}")
            expo = expo - mass * (zeta + z) / (zeta - z)
        val = np.exp(expo)
        return complex(val) if val.ndim == 0 else val

    def log_series(self, n: int) -> np.ndarray:
        h = np.zeros(n, dtype=complex)
        for zeta, mass in self.atoms:
            g = 2 * np.conj(zeta) ** np.arange(n)
            g[0] = 1
            h -= mass * g
        return h

    def coefficients(self, n: int) -> np.ndarray:
        return exp_series(self.log_series(n), n)


@dataclass(frozen=True)
class InnerFunction:
    blaschke: BlaschkeProduct = field(default_factory=BlaschkeProduct)
    singular: SingularInner = field(default_factory=SingularInner)

    @classmethod
    def from_zeros(cls, zeros=(), constant=1.0, atoms=()) -> "InnerFunction":
        return cls(BlaschkeProduct(tuple(zeros), constant), SingularInner(tuple(atoms)))

    @property
    def zeros(self) -> tuple:
        return self.blaschke.zeros

    @property
    def atoms(self) -> tuple:
        return self.singular.atoms

    @property
    def constant(self) -> complex:
        return self.blaschke.constant

    def is_constant(self) -> bool:
        return not self.zeros and not self.atoms

    def is_finite_blaschke(self) -> bool:
        return not self.atoms

    def __call__(self, z):
        return inner_eval(self, z)

    def __mul__(self, other: "InnerFunction") -> "InnerFunction":
        return InnerFunction.from_zeros(
            self.zeros + other.zeros,
            self.constant * other.constant,
            _merge_atoms(self.atoms + other.atoms),
        )

    def coefficients(self, n: int) -> np.ndarray:
        b = self.blaschke.coefficients(n)
        if self.atoms:
            b = series_mul(b, self.singular.coefficients(n), n)
        return b

    def series(self, n: int) -> CoefSeries:
        return CoefSeries(self.coefficients(n))

    def to_json(self) -> dict:
        return {
            "constant": [self.constant.real, self.constant.imag],
            "zeros": complex_to_pairs(self.zeros),
            "atoms": [{"zeta": [z.real, z.imag], "mass": m} for z, m in self.atoms],
        }

    @classmethod
    def from_json(cls, data) -> "InnerFunction":
        const = pairs_to_complex([data.get("constant", [1.0, 0.0])])[0]
        zeros = tuple(pairs_to_complex(data.get("zeros", [])))
        atoms = tuple(
            (pairs_to_complex([a["zeta"]])[0], float(a["mass"])) for a in data.get("atoms", [])
        )
        return cls.from_zeros(zeros, const, atoms)


def _merge_atoms(atoms) -> tuple:
    merged: list[list] = []
    for zeta, mass in atoms:
        for item in merged:
            if abs(item[0] - zeta) <= PAIR_TOL:
                item[1] += mass
                break
        else:
            merged.append([zeta, mass])
    return tuple((z, m) for z, m in merged)


def inner_eval(m: InnerFunction, lam):
    lam_arr = np.asarray(lam, dtype=complex)
    if np.any(np.abs(lam_arr) > 1 + 1e-12):
        raise DomainError("inner functions are evaluated on the closed disk only")
    val = m.blaschke(lam_arr)
    if m.atoms:
        val = val * m.singular(lam_arr)
    return val


@dataclass(frozen=True, eq=False)
class OuterFunction:
    """Outer function with prescribed boundary modulus; O(0) is real and positive."""

    log_modulus: BoundarySamples
    coef: CoefSeries
    log_coef: CoefSeries

    @property
    def M(self) -> int:
        return self.log_modulus.M

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=complex)
        val = np.exp(np.polyval(self.log_coef.coeffs[::-1], lam_arr))
        return complex(val) if val.ndim == 0 else val

    def boundary_values(self) -> np.ndarray:
        """Values on the grid the modulus was sampled on."""
        return np.exp(self.M * np.fft.ifft(self.log_coef.coeffs, n=self.M))

    def to_json(self) -> dict:
        return {"M": self.M, "coef": self.coef.to_json()}


def outer_from_modulus(w, N: int | None = None) -> OuterFunction:
    """Outer function whose boundary modulus matches the samples ``w``.

    The analytic logarithm is the Herglotz completion of log w on the grid.
    Coefficients are read off the exact grid values of exp(h), which keeps
    the boundary modulus exact even for moduli with kinks, where a truncated
    series exponential converges only slowly.
    """
    s = w if isinstance(w, BoundarySamples) else BoundarySamples(np.asarray(w))
    vals = s.values
    if np.any(np.abs(vals.imag) > 1e-12 * np.maximum(1.0, np.abs(vals.real))):
        raise DomainError("modulus samples must be real")
    w_real = vals.real
    if not np.all(np.isfinite(w_real)) or np.any(w_real <= 0):
        raise DomainError("modulus samples must be finite and strictly positive")
    M = s.M
    N = M if N is None else N
    logw = np.log(np.maximum(w_real, MODULUS_FLOOR))
    c = np.fft.fft(logw) / M
    if M == 1:
        h = np.array([c[0].real], dtype=complex)
    else:
        half = M // 2
        h = np.zeros(half + 1, dtype=complex)
        h[0] = c[0].real
        h[1:half] = 2 * c[1:half]
        h[half] = c[half]
    grid_vals = np.exp(M * np.fft.ifft(h, n=M))
    coef = to_coef(BoundarySamples(grid_vals), min(N, M))
    return OuterFunction(BoundarySamples(logw.astype(complex)), coef, CoefSeries(h))


def default_grid(n: int) -> int:
    return max(1024, next_power_of_two(4 * n))


def uv_pair(f, M: int | None = None) -> tuple[CoefSeries, OuterFunction]:
    """The pair (u_f, v_f) with v_f outer of modulus min(1, 1/|f|) and u_f = f v_f."""
    fs = f if isinstance(f, CoefSeries) else CoefSeries(f)
    if not np.any(fs.coeffs != 0):
        raise DegenerateInputError("u/v pair of the zero function is undefined")
    M = default_grid(len(fs)) if M is None else M
    fb = to_boundary(fs, M).values
    absf = np.abs(fb)
    with np.errstate(divide="ignore"):
        w = np.where(absf > 1, 1.0 / np.where(absf > 0, absf, 1.0), 1.0)
    v = outer_from_modulus(BoundarySamples(w))
    u = to_coef(BoundarySamples(fb * v.boundary_values()), M)
    return u, v


def _trim(p: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(p != 0)
    return p[: nz[-1] + 1] if nz.size else p[:0]


def poly_inner_outer(p, cap: int = ROOT_DEGREE_CAP, rtol: float = 1e-8):
    """Split a polynomial into its Blaschke part and a zero-free-in-the-disk part.

    Returns ``(inner, outer_coeffs)`` where ``outer_coeffs`` is a CoefSeries
    with real positive value at 0, and inner * outer reproduces ``p``.
    """
    coeffs = _trim(np.asarray(p.coeffs if isinstance(p, CoefSeries) else p, dtype=complex))
    if coeffs.size == 0:
        raise DegenerateInputError("cannot factor the zero polynomial")
    deg = coeffs.size - 1
    if deg > cap:
        raise NumericalFailureError(
            f"degree {deg} exceeds the root-finding cap {cap}", {"degree": deg, "cap": cap}
        )
    lead = coeffs[-1]
    roots = np.roots(coeffs[::-1]) if deg else np.array([], dtype=complex)
    if not np.all(np.isfinite(roots)):
        raise NumericalFailureError("root finder returned non-finite roots", {"degree": deg})
    rebuilt = lead * np.poly(roots)[::-1] if deg else np.array([lead])
    err = np.linalg.norm(rebuilt - coeffs) / np.linalg.norm(coeffs)
    if err > rtol:
        raise NumericalFailureError(
            "roots do not reproduce the polynomial",
            {"degree": deg, "relative_error": float(err), "tolerance": rtol},
        )
    inside = [complex(r) for r in roots if abs(r) < 1 - BOUNDARY_BAND]
    outside = [complex(r) for r in roots if abs(r) >= 1 - BOUNDARY_BAND]
    # z - r = b_r(z) * (-(r/|r|)) (1 - conj(r) z), and z - 0 = b_0(z)
    out = np.array([lead], dtype=complex)
    for r in outside:
        out = np.convolve(out, [-r, 1])
    for r in inside:
        if r != 0:
            out = np.convolve(out, [-(r / abs(r)), (r / abs(r)) * np.conj(r)])
    phase = out[0] / abs(out[0])
    inner = InnerFunction.from_zeros(tuple(inside), constant=phase)
    return inner, CoefSeries(out / phase)


def _match_multiset(a, b, tol: float = PAIR_TOL):
    """Greedy nearest pairing; returns the matched elements of ``a``."""
    pool = list(b)
    common = []
    for z in a:
        if not pool:
            break
        dists = [abs(z - w) for w in pool]
        j = int(np.argmin(dists))
        if dists[j] <= tol:
            common.append(z)
            pool.pop(j)
    return common


def inner_gcd(m1: InnerFunction, m2: InnerFunction) -> InnerFunction:
    zeros = _match_multiset(m1.zeros, m2.zeros)
    atoms = []
    for zeta, mass in m1.atoms:
        for zeta2, mass2 in m2.atoms:
            if abs(zeta - zeta2) <= PAIR_TOL:
                atoms.append((zeta, min(mass, mass2)))
                break
    return InnerFunction.from_zeros(tuple(zeros), 1.0, tuple(atoms))


def inner_divides(m1: InnerFunction, m2: InnerFunction, tol: float = PAIR_TOL) -> bool:
    g = inner_gcd(m1, m2)
    if len(g.zeros) != len(m1.zeros) or len(g.atoms) != len(m1.atoms):
        return False
    return all(abs(mg - m) <= tol for (_, mg), (_, m) in zip(g.atoms, m1.atoms))
