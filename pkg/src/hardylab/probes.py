"""Experiment drivers: non-closability witnesses, cyclicity witnesses and verification suites."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles
from scipy.special import factorial

from .errors import DomainError
from .hardy import CoefSeries, cauchy_kernel, unit_grid
from .model_ops import (
    ModelBasis,
    OperatorMatrix,
    eigenvector_field,
    fredholm_probe,
    krylov,
    left_inverse,
    numeric_kernel,
    operator_poly,
    quotient_solver,
)
from .reports import Check, parallel_map
from .theta import (
    Theta,
    ThetaBasis,
    adjoint_invariance_defect,
    basis_membership_defect,
    check_inner_column,
    confluence_test,
    corona_similarity,
    intertwining_residual,
    paper_example_theta,
    s_theta,
    theta_basis,
)

POLY_VS_OUTER = "POLY_VS_OUTER"
POLY_VS_KERNELS = "POLY_VS_KERNELS"
BILATERAL_ARCS = "BILATERAL_ARCS"
ROUNDOFF_FLOOR = 1e-13


@dataclass(frozen=True)
class ClosabilityScenario:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (POLY_VS_OUTER, POLY_VS_KERNELS, BILATERAL_ARCS):
            raise DomainError(f"unknown scenario kind {self.kind!r}")
        if self.kind == POLY_VS_KERNELS:
            pts = np.asarray(self.params.get("points", default_kernel_points()), dtype=complex)
            if np.any(np.abs(pts) >= 1) or np.any(pts == 0):
                raise DomainError("kernel points must satisfy 0 < |lambda| < 1")


def default_kernel_points(count: int = 30) -> np.ndarray:
    return np.linspace(0.5, 0.8, count)


def exp_coefficients(n: int) -> np.ndarray:
    return 1.0 / factorial(np.arange(n))


@dataclass
class Witness:
    """h = n - m with X h = n, where m and n come from the two manifolds."""

    h: np.ndarray
    Xh: np.ndarray
    eps: float
    degrees: dict
    norm_h: float
    misfit: float


@dataclass
class SearchReport:
    found: bool
    witness: Witness | None
    best_eps: float
    history: list

    def achieved(self) -> list:
        return [row["best_eps"] for row in self.history]


def _truncate_to(n_vec: np.ndarray, budget: float) -> tuple[np.ndarray, int]:
    """Shortest polynomial head of ``n_vec`` whose tail norm is within ``budget``."""
    tails = np.sqrt(np.cumsum(np.abs(n_vec[::-1]) ** 2))[::-1]
    ok = np.flatnonzero(np.append(tails, 0.0) <= budget)
    D = int(ok[0])
    m = np.zeros_like(n_vec)
    m[:D] = n_vec[:D]
    return m, D


def _h2_search(columns_for, g, eps, cap, start):
    history = []
    best = None
    for k in range(start, cap + 1):
        C = columns_for(k)
        coef, *_ = np.linalg.lstsq(C, g, rcond=None)
        n_vec = C @ coef
        r = float(np.linalg.norm(n_vec - g))
        if best is None or r < best[0]:
            best = (r, k, n_vec)
        history.append({"degree": k, "eps": r, "best_eps": best[0]})
        if best[0] <= eps:
            break
    return best, history


def nonclosability_search(
    scenario: ClosabilityScenario,
    g=None,
    eps: float = 1e-2,
    cap: int = 40,
    N: int = 256,
) -> SearchReport:
    """Search for h with ||h|| <= eps and ||Xh - g|| <= eps.

    The transformation X sends m + n to n for m in the first manifold and n in
    the second. A hit is evidence against closability; a miss at the cap is
    only a report, never a proof of closability.
    """
    if scenario.kind == BILATERAL_ARCS:
        return _arcs_search(scenario, g, eps, cap)
    L = N + cap + 1
    gv = np.zeros(L, dtype=complex)
    if g is None:
        gv[0] = 1.0
    else:
        src = np.asarray(getattr(g, "coeffs", g), dtype=complex)
        gv[: src.size] = src
    if not np.any(gv):
        w = Witness(np.zeros(L, complex), np.zeros(L, complex), 0.0, {"q": 0, "m": 0}, 0.0, 0.0)
        return SearchReport(True, w, 0.0, [{"degree": 0, "eps": 0.0, "best_eps": 0.0}])

    if scenario.kind == POLY_VS_OUTER:
        f = np.asarray(scenario.params.get("f", exp_coefficients(N)), dtype=complex)[:N]
        fl = np.zeros(L, dtype=complex)
        fl[: f.size] = f

        def columns_for(k):
            return np.column_stack([np.roll(fl, j) for j in range(k + 1)])

        start = 0
    else:
        pts = np.asarray(scenario.params.get("points", default_kernel_points()), dtype=complex)
        cap = min(cap, pts.size)
        K = np.column_stack([cauchy_kernel(p, L).coeffs for p in pts[:cap]])

        def columns_for(k):
            return K[:, :k]

        start = 1
    best, history = _h2_search(columns_for, gv, eps, cap, start)
    r, k, n_vec = best
    m_vec, D = _truncate_to(n_vec, r)
    h = n_vec - m_vec
    w = Witness(h, n_vec, r, {"n": k, "m": D}, float(np.linalg.norm(h)), r)
    found = _verify(w, gv, eps)
    return SearchReport(found, w if found else None, r, history)


def _verify(w: Witness, g, eps: float) -> bool:
    norm_h = float(np.linalg.norm(w.h))
    misfit = float(np.linalg.norm(w.Xh - g))
    return norm_h <= eps and misfit <= eps


def arc_indicators(M: int, bound: float = 1.5 * np.pi) -> tuple[np.ndarray, np.ndarray]:
    """Indicators of {e^{it}: 0<t<bound} and of its mirror image {e^{-it}: 0<t<bound}."""
    t = 2 * np.pi * np.arange(M) / M
    plus = (t > 0) & (t < bound)
    minus = (t > 2 * np.pi - bound) & (t < 2 * np.pi)
    return plus.astype(float), minus.astype(float)


def _arcs_search(scenario, g, eps, cap):
    M = int(scenario.params.get("M", 1024))
    bound = float(scenario.params.get("bound", 1.5 * np.pi))
    chi_p, chi_m = arc_indicators(M, bound)
    both = chi_p * chi_m
    gv = both.astype(complex) if g is None else np.asarray(getattr(g, "values", g), dtype=complex)
    if not np.any(gv):
        zero = np.zeros(M, complex)
        w = Witness(zero, zero, 0.0, {"p": 0, "q": 0}, 0.0, 0.0)
        return SearchReport(True, w, 0.0, [{"degree": 0, "eps": 0.0, "best_eps": 0.0}])
    if gv.shape != (M,):
        raise DomainError(f"target must be sampled on the {M}-point grid")
    if np.linalg.norm(gv * (1 - both)) > 1e-12 * max(np.linalg.norm(gv), 1e-300):
        raise DomainError("target must vanish off the intersection of the arcs")
    w_norm = 1 / np.sqrt(M)
    zeta = unit_grid(M)
    history, best = [], None
    for k in range(cap + 1):
        V = zeta[:, None] ** np.arange(k + 1)[None, :]
        Q, P = chi_m[:, None] * V, chi_p[:, None] * V
        zero = np.zeros_like(V)
        # rows: X h - g = chi_- q - g and h = chi_- q - chi_+ p
        A = np.vstack([np.hstack([Q, zero]), np.hstack([Q, -P])]) * w_norm
        rhs = np.concatenate([gv, np.zeros(M)]) * w_norm
        x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        n_vec = Q @ x[: k + 1]
        h = n_vec - P @ x[k + 1 :]
        e = max(np.linalg.norm(h), np.linalg.norm(n_vec - gv)) * w_norm
        if best is None or e < best[0]:
            best = (float(e), k, h, n_vec)
        history.append({"degree": k, "eps": float(e), "best_eps": best[0]})
        if best[0] <= eps:
            break
    e, k, h, n_vec = best
    w = Witness(h * w_norm, n_vec * w_norm, e, {"p": k, "q": k},
                float(np.linalg.norm(h) * w_norm), float(np.linalg.norm(n_vec - gv) * w_norm))
    found = _verify(w, gv * w_norm, eps)
    return SearchReport(found, w if found else None, e, history)


@dataclass
class RSCWitness:
    u: CoefSeries
    v: CoefSeries
    residual: float
    found: bool
    injective: bool
    sigma_min: float


def _certify(T: OperatorMatrix, u, v, residual, found) -> RSCWitness:
    rep = numeric_kernel(operator_poly(T, v), 1e-9)
    smin = float(rep.singular_values[-1]) if rep.singular_values.size else 0.0
    injective = rep.dimension == 0 and rep.determinate and smin > 1e-6
    return RSCWitness(CoefSeries(u), CoefSeries(v), residual, found, injective, smin)


def rsc_witness(T: OperatorMatrix, h0, h, d: int, tol: float = 1e-8) -> RSCWitness:
    """Symbols with v(T)h = u(T)h0 and v(T) injective.

    The canonical quotient pair is tried first. If its v is not injective and
    the solution space is larger than a line (for S(z^2) and h = z both
    (0, z) and (z, 1) qualify), the null-space members and one generic
    combination are scanned for the best-conditioned v.
    """
    q = quotient_solver(T, h, h0, d, tol)
    best = _certify(T, q.u.coeffs, q.v.coeffs, q.residual, q.found)
    if best.injective or not q.found:
        return best
    h0 = np.asarray(h0, dtype=complex)
    h = np.asarray(h, dtype=complex)
    scale = max(1.0, np.linalg.norm(h), np.linalg.norm(h0))
    Kh0, Kh = krylov(T, h0, d), krylov(T, h, d)
    for k in range(d + 1):
        system = np.hstack([Kh0[:, : k + 1], -Kh[:, : k + 1]])
        _, s, Vh = np.linalg.svd(system, full_matrices=True)
        s_full = np.zeros(Vh.shape[0])
        s_full[: s.size] = s
        null = Vh[s_full <= tol * scale].conj()
        if null.shape[0] < 2:
            continue
        weights = 1.0 / (1.0 + np.arange(null.shape[0]))
        for x in list(null) + [weights @ null]:
            x = x / np.linalg.norm(x)
            u, v = x[: k + 1], x[k + 1 :]
            if np.linalg.norm(v) <= 1e-10:
                continue
            lead = v[np.flatnonzero(np.abs(v) > 1e-10)[0]]
            u, v = u * abs(lead) / lead, v * abs(lead) / lead
            res = float(np.linalg.norm(system @ np.concatenate([u, v])))
            cand = _certify(T, u, v, res, True)
            if cand.injective and (not best.injective or cand.sigma_min > best.sigma_min):
                best = cand
        if best.injective:
            return best
    return best


def designated_vector_defect(B: ModelBasis) -> float:
    """Distance between 1 - conj(m(0)) m and the projection of 1 onto H(m)."""
    m = B.m
    series = -np.conj(m(0)) * m.coefficients(B.N)
    series[0] += 1
    proj = B.embed(B.coordinates([1.0])).coeffs
    return float(np.linalg.norm(series - proj))


@dataclass
class BiorthoReport:
    matrix: np.ndarray
    deviation: float


def biorthogonality_suite(T: OperatorMatrix, f0, K: int = 10, L: OperatorMatrix | None = None) -> BiorthoReport:
    """Pairings <T^n f0, L*^m f0> for n, m < K."""
    f0 = np.asarray(f0, dtype=complex)
    L = left_inverse(T) if L is None else L
    n = T.out_order
    Ls = np.zeros((n, n), dtype=complex)
    Ls[: L.out_order] = L.entries
    Ls = Ls.conj().T
    fw, bw = [f0], [f0]
    for _ in range(K - 1):
        fw.append(T.apply(fw[-1]))
        bw.append(Ls @ bw[-1])
    G = np.array([[np.vdot(b, a) for b in bw] for a in fw])
    return BiorthoReport(G, float(np.max(np.abs(G - np.eye(K)))))


def kernel_vector(A: OperatorMatrix, lam: complex = 0.0, tol: float = 1e-8) -> tuple[np.ndarray, object]:
    """Unit vector spanning ker(conj(lam) - T*), i.e. T* f = lam f, plus the kernel report."""
    E = np.eye(A.trust, A.out_order, dtype=complex)
    rep = numeric_kernel(lam * E - A.trusted().conj().T, tol)
    vec = rep.vectors[:, 0] if rep.dimension else np.zeros(A.out_order, complex)
    return vec, rep


def angle(x, y) -> float:
    return float(np.max(subspace_angles(np.atleast_2d(np.asarray(x)).reshape(len(x), -1),
                                        np.atleast_2d(np.asarray(y)).reshape(len(y), -1))))


def krylov_complement(B: ThetaBasis, A: OperatorMatrix, f0, level: int | None = None):
    """Orthogonal complement of span{A^k f0 : k <= level} inside the level subspace."""
    level = B.N - 8 if level is None else level
    vecs = [np.asarray(f0, dtype=complex)]
    for _ in range(level):
        vecs.append(A.apply(vecs[-1]))
    Kry = np.column_stack(vecs)
    Q, _ = np.linalg.qr(Kry)
    dim = B.levels[level]
    return numeric_kernel(Q[:dim].conj().T, 1e-8)


def _ladder_bases(theta: Theta, ladder) -> dict:
    bases = parallel_map(lambda N: theta_basis(theta, N), ladder)
    return dict(zip(ladder, bases))


def decreasing_with_floor(values, floor: float = ROUNDOFF_FLOOR) -> bool:
    """Non-increasing, except that anything already at round-off level counts as converged."""
    return all(b <= a or b <= floor for a, b in zip(values, values[1:]))


def fredholm_checks(bases: dict, lambdas, tol: float = 1e-8) -> list:
    ladder = sorted(bases)
    ops = {N: s_theta(bases[N]) for N in ladder}
    checks = []
    for lam in lambdas:

        def family(N, lam=lam):
            A = ops[N]
            return OperatorMatrix(lam * np.eye(A.out_order) - A.entries, A.basis_tag, A.trust)

        rep = fredholm_probe(family, ladder, tol)
        tag = f"fredholm[{_fmt(lam)}]"
        checks.append(Check(f"{tag}.index", rep.index if rep.stable else "unstable", -1, "eq"))
        for r in rep.rungs:
            checks.append(Check(f"{tag}.kernel", r["kernel"], 0, "eq", r["N"]))
            checks.append(Check(f"{tag}.cokernel", r["cokernel"], 1, "eq", r["N"]))
            checks.append(Check(f"{tag}.sigma_min", r["sigma_min"], 0.0, "gt", r["N"]))
    return checks


def _fmt(lam) -> str:
    lam = complex(lam)
    if lam.imag == 0:
        return f"{lam.real:g}"
    if lam.real == 0:
        return f"{lam.imag:g}i"
    return f"{lam.real:g}{lam.imag:+g}i"


def density_errors(B: ThetaBasis, counts, radius: float = 0.5, n_check: int = 4) -> list:
    """Max projection error of low-degree canonical vectors onto eigenvector spans."""
    A = s_theta(B)
    f0, _ = kernel_vector(A)
    L = left_inverse(A)
    targets = []
    for k in range(n_check):
        for comp in (0, 1):
            e = np.zeros(2 * B.L, dtype=complex)
            e[k + comp * B.L] = 1
            t = B.coordinates(B.ambient.project(e))
            if np.linalg.norm(t) > 1e-12:
                targets.append(t / np.linalg.norm(t))
    Tg = np.column_stack(targets)
    out = []
    for c in counts:
        lams = radius * np.exp(2j * np.pi * (np.arange(c) + 0.5) / c)
        F = np.column_stack([eigenvector_field(A, f0, lam, L) for lam in lams])
        U, s, _ = np.linalg.svd(F, full_matrices=False)
        U = U[:, s > 1e-12 * s[0]]
        err = np.linalg.norm(Tg - U @ (U.conj().T @ Tg), axis=0)
        out.append(float(err.max()))
    return out


def spectral_picture_suite(
    theta: Theta,
    lambdas=(0, 0.3, 0.5j, -0.7),
    ladder=(64, 128, 256),
    density_counts=(10, 20, 40, 80),
    density_N: int = 64,
    bases: dict | None = None,
) -> list:
    bases = _ladder_bases(theta, ladder) if bases is None else bases
    checks = fredholm_checks(bases, lambdas)
    Bd = bases.get(density_N) or theta_basis(theta, density_N)
    errs = density_errors(Bd, density_counts)
    for c, e in zip(density_counts, errs):
        checks.append(Check(f"density[{c}].max_projection_error", e, 1.0, "le", density_N))
    checks.append(Check("density.decreasing", decreasing_with_floor(errs, 1e-10), True, "eq", density_N))
    return checks


def paper_example_suite(ladder=(64, 128, 256), N: int | None = None, M: int = 1024, tols: dict | None = None) -> list:
    """Every numeric claim about the worked example, as a flat list of checks."""
    t = {
        "inner": 1e-10,
        "angle": 1e-6,
        "orthogonality": 1e-8,
        "krylov_angle": 1e-4,
        "intertwining": 1e-8,
        "corona": 1e-12,
        "certificate": 1e-4,
        "biorthogonality": 1e-6,
        "left_inverse": 1e-10,
        "invariance": 1e-9,
    }
    t.update(tols or {})
    ladder = tuple(sorted(ladder))
    N = ladder[-1] if N is None else N
    theta = paper_example_theta()
    bases = _ladder_bases(theta, sorted(set(ladder) | {N}))
    B = bases[N]
    A = s_theta(B)
    amb = B.ambient
    checks = [Check("inner_column.deviation", check_inner_column(theta, M).deviation, t["inner"], "le", N)]
    checks.append(Check("basis.membership", basis_membership_defect(B), t["invariance"], "le", N))
    checks.append(Check("basis.dimension", B.dimension, N + theta.expected_defect(), "eq", N))
    checks.append(Check("s_theta.adjoint_restriction", adjoint_invariance_defect(B), t["invariance"], "le", N))

    f0, rep0 = kernel_vector(A, 0.0)
    checks.append(Check("ker_adjoint.dimension", rep0.dimension if rep0.determinate else -1, 1, "eq", N))
    checks.append(Check("ker_adjoint.angle_to_1+0", angle(B.embed(f0), amb.pair([1.0], [])), t["angle"], "le", N))
    x = 0.5 ** (np.arange(amb.L) + 1)
    fh, reph = kernel_vector(A, 0.5)
    checks.append(Check("ker_half.dimension", reph.dimension if reph.determinate else -1, 1, "eq", N))
    checks.append(Check("ker_half.angle_to_0+x", angle(B.embed(fh), amb.pair([], x)), t["angle"], "le", N))

    L = left_inverse(A)
    Lt = L.entries @ A.trusted()
    checks.append(Check("left_inverse.LT-I", float(np.abs(Lt - np.eye(A.trust)).max()), t["left_inverse"], "le", N))
    f_zero = eigenvector_field(A, f0, 0.0, L)
    f_half = eigenvector_field(A, f0, 0.5, L)
    ip = abs(np.vdot(f_half, f_zero)) / (np.linalg.norm(f_zero) * np.linalg.norm(f_half))
    checks.append(Check("eigenfield.<f(0),f(1/2)>", float(ip), t["orthogonality"], "le", N))

    comp = krylov_complement(B, A, f0)
    checks.append(Check("krylov_complement.dimension", comp.dimension if comp.determinate else -1, 1, "eq", N))
    if comp.dimension == 1:
        level_dim = comp.vectors.shape[0]
        y = np.zeros(A.out_order, dtype=complex)
        y[:level_dim] = comp.vectors[:, 0]
        kang = angle(y, f_half)
    else:
        kang = math.nan
    checks.append(Check("krylov_complement.angle_to_f(1/2)", kang, t["krylov_angle"], "le", N))

    bio = biorthogonality_suite(A, f0, 10, L)
    checks.append(Check("biorthogonality.K10", bio.deviation, t["biorthogonality"], "le", N))

    inter = [intertwining_residual(bases[n]) for n in ladder]
    for n, r in zip(ladder, inter):
        checks.append(Check("q_intertwining.residual", r, t["intertwining"], "le", n))
    checks.append(Check("q_intertwining.decreasing", decreasing_with_floor(inter), True, "eq"))

    cor = corona_similarity(theta)
    checks.append(Check("corona.boundary_residual", cor.boundary_residual, t["corona"], "le"))
    checks.append(Check("corona.degree", cor.degree, 1, "eq"))

    conf = confluence_test(theta, N, basis=B)
    checks.append(Check("confluence.verdict", "confluent" if conf.confluent else "not-confluent", "confluent", "eq"))
    for name, val in conf.certificates.items():
        checks.append(Check(f"confluence.sigma_min[{name}]", val, t["certificate"], "gt", N))

    checks.extend(fredholm_checks({n: bases[n] for n in ladder}, (0, 0.3, 0.5j, -0.7)))
    return checks


def proper_divisors(zeros) -> list[tuple]:
    """Distinct nonempty strict sub-multisets of a zero list."""
    from itertools import combinations

    zeros = list(zeros)
    seen, out = set(), []
    for r in range(1, len(zeros)):
        for idx in combinations(range(len(zeros)), r):
            sub = tuple(zeros[i] for i in idx)
            key = tuple(sorted((round(z.real, 12), round(z.imag, 12)) for z in map(complex, sub)))
            if key not in seen:
                seen.add(key)
                out.append(sub)
    return out


def model_suite(zeros, N: int = 256, tol: float = 1e-11) -> list:
    """Structural checks of S(m) for a finite Blaschke product with the given zeros."""
    from .hardy import backward_shift
    from .inner_outer import InnerFunction
    from .model_ops import compress, functional_calculus, model_basis, shift_matrix, toeplitz_analytic

    m = InnerFunction.from_zeros(tuple(complex(z) for z in zeros))
    B = model_basis(m, N)
    V = B.vectors
    deg = len(m.zeros)
    checks = [Check("model.gram", float(np.abs(V.conj().T @ V - np.eye(deg)).max()), 1e-10, "le", N)]
    Tm = toeplitz_analytic(m.coefficients(N), N - deg).entries[:N]
    checks.append(Check("model.orthogonal_to_mH2", float(np.abs(V.conj().T @ Tm).max()), 1e-10, "le", N))
    checks.append(
        Check("model.annihilation", float(np.abs(functional_calculus(m.coefficients(N), B).entries).max()), tol, "le", N)
    )
    Sm = compress(shift_matrix(N + 1), B)
    W = np.column_stack([backward_shift(v).coeffs for v in V.T])
    adj = float(np.abs(V.conj().T @ W - Sm.entries.conj().T).max())
    inv = float(np.linalg.norm(W - V @ (V.conj().T @ W)))
    checks.append(Check("model.adjoint_restriction", max(adj, inv), 1e-12, "le", N))
    checks.append(Check("model.designated_vector", designated_vector_defect(B), 1e-10, "le", N))
    for d in proper_divisors(m.zeros):
        D = functional_calculus(InnerFunction.from_zeros(d).coefficients(N), B)
        s = np.linalg.svd(D.entries, compute_uv=False)
        rep = numeric_kernel(D, 1e-8)
        tag = "divisor[" + ",".join(_fmt(z) for z in d) + "]"
        checks.append(Check(f"{tag}.sigma_max", float(s[0]), 1e-4, "gt", N))
        checks.append(Check(f"{tag}.kernel_dim", rep.dimension if rep.determinate else -1, len(d), "eq", N))
    return checks


def singular_split(m, radius: float = 0.9, n_points: int = 64, n_coef: int = 128):
    """Factor a purely singular inner m as m1 * m2 with each atom mass halved.

    Only the construction is reported: the two factors, the factorization
    residual inside the disk and in coefficients, and the contractivity of the
    factors. No closability verdict is drawn from it.
    """
    from .hardy import series_mul
    from .inner_outer import InnerFunction

    if m.zeros or not m.atoms:
        raise DomainError("singular_split needs a purely singular inner function")
    half = InnerFunction.from_zeros(atoms=[(z, mass / 2) for z, mass in m.atoms])
    pts = radius * unit_grid(n_points)
    prod = half(pts) * half(pts)
    ref = m(pts)
    coef_err = np.abs(series_mul(half.coefficients(n_coef), half.coefficients(n_coef), n_coef) - m.coefficients(n_coef))
    checks = [
        Check("singular_split.interior_residual", float(np.abs(prod - ref).max()), 1e-12, "le"),
        Check("singular_split.coefficient_residual", float(coef_err.max()), 1e-12, "le"),
        Check("singular_split.factor_sup_inside", float(np.abs(half(pts)).max()), 1.0, "le"),
        Check("singular_split.factor_not_finite_blaschke", not half.is_finite_blaschke(), True, "eq"),
    ]
    return half, half, checks


def factor_checks(p, M: int = 1024, tol: float = 1e-8) -> tuple[list, dict]:
    from .inner_outer import BOUNDARY_BAND, poly_inner_outer

    p = np.asarray(p, dtype=complex)
    inner, outer = poly_inner_outer(p, rtol=tol)
    zeta = unit_grid(M)
    pv = np.polyval(p[::-1], zeta)
    rebuilt = inner(zeta) * np.polyval(outer.coeffs[::-1], zeta)
    scale = max(np.abs(pv).max(), 1e-300)
    out_roots = np.roots(outer.coeffs[::-1]) if len(outer) > 1 else np.zeros(0)
    checks = [
        Check("factor.reconstruction", float(np.abs(rebuilt - pv).max() / scale), tol, "le"),
        Check("factor.inner_modulus", float(np.abs(np.abs(inner(zeta)) - 1).max()), 1e-12, "le"),
        Check(
            "factor.outer_min_root_modulus",
            float(np.abs(out_roots).min()) if out_roots.size else math.inf,
            1 - BOUNDARY_BAND,
            "ge",
        ),
    ]
    details = {"inner": inner.to_json(), "outer": outer.to_json()}
    return checks, details


def closability_checks(report: SearchReport, eps: float, name: str) -> list:
    best = report.achieved()
    checks = [
        Check(f"{name}.found", report.found, True, "eq"),
        Check(f"{name}.achieved_eps", report.best_eps, eps, "le"),
        Check(f"{name}.monotone", all(b <= a for a, b in zip(best, best[1:])), True, "eq"),
    ]
    if report.witness is not None:
        checks.append(Check(f"{name}.witness_norm_h", report.witness.norm_h, eps, "le"))
    return checks


def theta_suite(theta: Theta, N: int = 128, ladder=(64, 128), M: int = 1024) -> list:
    """Generic checks for any rational inner column."""
    ladder = tuple(sorted(set(ladder) | {N}))
    bases = _ladder_bases(theta, ladder)
    B = bases[N]
    checks = [
        Check("inner_column.deviation", check_inner_column(theta, M).deviation, 1e-10, "le", N),
        Check("basis.dimension", B.dimension, N + theta.expected_defect(), "eq", N),
        Check("basis.membership", basis_membership_defect(B), 1e-9, "le", N),
        Check("s_theta.adjoint_restriction", adjoint_invariance_defect(B), 1e-9, "le", N),
    ]
    inter = [intertwining_residual(bases[n]) for n in ladder]
    for n, r in zip(ladder, inter):
        checks.append(Check("q_intertwining.residual", r, 1e-8, "le", n))
    checks.append(Check("q_intertwining.decreasing", decreasing_with_floor(inter), True, "eq"))
    conf = confluence_test(theta, N, basis=B)
    checks.append(Check("confluence.certified", conf.passed, True, "eq", N))
    cor = corona_similarity(theta)
    if not conf.confluent:
        # a common inner factor forces theta1 f2 - theta2 f1 to share it
        checks.append(Check("corona.infeasible", not cor.feasible, True, "eq"))
    elif cor.feasible:
        checks.append(Check("corona.boundary_residual", cor.boundary_residual, 1e-10, "le"))
    if conf.confluent:
        checks.extend(fredholm_checks(bases, (0, 0.3)))
    return checks
