"""Coefficient and boundary-sample representations of functions in H^2."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidGridError, InvalidOrderError


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def unit_grid(M: int) -> np.ndarray:
    """The points exp(2 pi i j / M), j = 0..M-1."""
    if not is_power_of_two(M):
        raise InvalidGridError(f"grid size must be a power of two, got {M}")
    return np.exp(2j * np.pi * np.arange(M) / M)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).ravel()
    arr.setflags(write=False)
    return arr


def pairs_to_complex(data) -> np.ndarray:
    """Decode a JSON list whose entries are numbers or [re, im] pairs."""
    out = []
    for item in data:
        if isinstance(item, (list, tuple)):
            if len(item) != 2:
                raise ValueError(f"expected [re, im] pair, got {item!r}")
            out.append(complex(float(item[0]), float(item[1])))
        else:
            out.append(complex(item))
    return np.array(out, dtype=complex)


def complex_to_pairs(values) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


@dataclass(frozen=True, eq=False)
class CoefSeries:
    """Taylor coefficients c_0..c_{N-1} of a function analytic in the disk."""

    coeffs: np.ndarray
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))

    def __len__(self) -> int:
        return self.coeffs.size

    def __call__(self, lam):
        return eval_disk(self, lam)

    @property
    def order(self) -> int:
        return self.coeffs.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        k = min(n, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return out

    def truncate(self, n: int) -> "CoefSeries":
        return CoefSeries(self.padded(n), self.label)

    def degree(self, tol: float = 0.0) -> int:
        """Index of the last coefficient with modulus above ``tol`` (-1 for zero)."""
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        return int(nz[-1]) if nz.size else -1

    def __add__(self, other: "CoefSeries") -> "CoefSeries":
        n = max(len(self), len(other))
        return CoefSeries(self.padded(n) + other.padded(n))

    def __sub__(self, other: "CoefSeries") -> "CoefSeries":
        n = max(len(self), len(other))
        return CoefSeries(self.padded(n) - other.padded(n))

    def __neg__(self) -> "CoefSeries":
        return CoefSeries(-self.coeffs, self.label)

    def scale(self, a: complex) -> "CoefSeries":
        return CoefSeries(a * self.coeffs, self.label)

    def multiply(self, other: "CoefSeries", n: int | None = None) -> "CoefSeries":
        """Cauchy product, truncated to ``n`` terms (default: the longer length)."""
        n = max(len(self), len(other)) if n is None else n
        return CoefSeries(series_mul(self.coeffs, other.coeffs, n))

    def to_json(self) -> list:
        return complex_to_pairs(self.coeffs)

    @classmethod
    def from_json(cls, data, label: str | None = None) -> "CoefSeries":
        return cls(pairs_to_complex(data), label)


@dataclass(frozen=True, eq=False)
class BoundarySamples:
    """Values of a function on the grid exp(2 pi i j / M)."""

    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if not is_power_of_two(vals.size):
            raise InvalidGridError(f"grid size must be a power of two, got {vals.size}")
        object.__setattr__(self, "values", vals)

    @property
    def M(self) -> int:
        return self.values.size

    def mean_square(self) -> float:
        return float(np.mean(np.abs(self.values) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(self.mean_square()))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_json(self) -> dict:
        return {"M": self.M, "values": complex_to_pairs(self.values)}

    @classmethod
    def from_json(cls, data) -> "BoundarySamples":
        s = cls(pairs_to_complex(data["values"]))
        if int(data["M"]) != s.M:
            raise InvalidGridError(f"declared M={data['M']} but {s.M} values given")
        return s


def series_mul(a, b, n: int) -> np.ndarray:
    """First ``n`` coefficients of the product of two power series."""
    a = np.asarray(a, dtype=complex)[:n]
    b = np.asarray(b, dtype=complex)[:n]
    out = np.zeros(n, dtype=complex)
    if a.size == 0 or b.size == 0:
        return out
    if min(a.size, b.size) <= 64:
        full = np.convolve(a, b)
    else:
        from scipy.signal import fftconvolve

        full = fftconvolve(a, b)
    k = min(n, full.size)
    out[:k] = full[:k]
    return out


def _as_series(c) -> np.ndarray:
    return c.coeffs if isinstance(c, CoefSeries) else np.asarray(c, dtype=complex).ravel()


def to_boundary(c, M: int) -> BoundarySamples:
    coeffs = _as_series(c)
    if not is_power_of_two(M):
        raise InvalidGridError(f"grid size must be a power of two, got {M}")
    if M < coeffs.size:
        raise InvalidGridError(f"grid size {M} is smaller than the series length {coeffs.size}")
    return BoundarySamples(M * np.fft.ifft(coeffs, n=M))


def to_coef(s: BoundarySamples, N: int) -> CoefSeries:
    """Riesz projection: keep the frequencies 0..N-1 of the samples."""
    if N > s.M or N < 0:
        raise InvalidOrderError(f"order {N} exceeds grid size {s.M}")
    return CoefSeries(np.fft.fft(s.values)[:N] / s.M)


def h2_inner(f, g) -> complex:
    a, b = _as_series(f), _as_series(g)
    n = min(a.size, b.size)
    return complex(np.vdot(b[:n], a[:n]))


def cauchy_kernel(a: complex, N: int) -> CoefSeries:
    """Coefficients of 1/(1 - a z); note there is no conjugate on ``a``."""
    a = complex(a)
    if abs(a) >= 1:
        raise DomainError(f"kernel parameter must lie in the open disk, got {a}")
    return CoefSeries(a ** np.arange(N), label=f"k[{a}]")


def backward_shift(c) -> CoefSeries:
    coeffs = _as_series(c)
    out = np.zeros_like(coeffs)
    out[:-1] = coeffs[1:]
    return CoefSeries(out)


def forward_shift(c) -> CoefSeries:
    """Multiplication by z; the series grows by one term."""
    coeffs = _as_series(c)
    return CoefSeries(np.concatenate([[0], coeffs]))


def eval_disk(c, lam):
    """Horner evaluation of the series at ``lam`` (scalar or array)."""
    coeffs = _as_series(c)
    lam_arr = np.asarray(lam, dtype=complex)
    if coeffs.size == 0:
        val = np.zeros_like(lam_arr)
    else:
        val = np.polyval(coeffs[::-1], lam_arr)
    return complex(val) if val.ndim == 0 else val
