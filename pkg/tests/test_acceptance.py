"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""
import time
from collections import Counter

import numpy as np
import pytest

from conftest import record
from hardylab.hardy import BoundarySamples, CoefSeries, to_boundary, to_coef, unit_grid
from hardylab.inner_outer import InnerFunction, inner_gcd, outer_from_modulus, uv_pair
from hardylab.model_ops import functional_calculus, model_basis, numeric_kernel, quotient_solver, shift_matrix
from hardylab.probes import (
    POLY_VS_KERNELS,
    POLY_VS_OUTER,
    ClosabilityScenario,
    biorthogonality_suite,
    decreasing_with_floor,
    fredholm_checks,
    kernel_vector,
    left_inverse,
    nonclosability_search,
    paper_example_suite,
    proper_divisors,
)
from hardylab.theta import (
    RationalFunction,
    common_factor_z_theta,
    confluence_test,
    corona_similarity,
    intertwining_residual,
    paper_example_theta,
    s_theta,
    theta_basis,
)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def _verdict(name, conditions: dict, seconds, budget):
    conditions = dict(conditions)
    conditions[f"runtime {seconds:.1f}s < {budget}s"] = seconds < budget
    ok = all(conditions.values())
    bad = [k for k, v in conditions.items() if not v]
    detail = "; ".join(conditions) if ok else "failed: " + "; ".join(bad)
    record(name, ok, detail)
    assert ok, bad


@pytest.fixture(scope="module")
def example_bases():
    return {N: theta_basis(paper_example_theta(), N) for N in (64, 128, 256)}


def test_criterion_01_worked_example():
    with Timer() as t:
        checks = {c.name: c for c in paper_example_suite(ladder=(256,), N=256, M=1024)}
    wanted = [
        "inner_column.deviation",
        "ker_adjoint.dimension",
        "ker_adjoint.angle_to_1+0",
        "ker_half.dimension",
        "ker_half.angle_to_0+x",
        "eigenfield.<f(0),f(1/2)>",
        "krylov_complement.dimension",
        "krylov_complement.angle_to_f(1/2)",
    ]
    _verdict("1 worked example", {f"{n}={checks[n].value:.3g}": checks[n].passed for n in wanted}, t.seconds, 30)


def test_criterion_02_intertwining(example_bases):
    with Timer() as t:
        res = [intertwining_residual(example_bases[N]) for N in (64, 128, 256)]
    strict = all(b < a for a, b in zip(res, res[1:]))
    _verdict(
        "2 intertwining",
        {
            f"residual@128={res[1]:.2e} <= 1e-8": res[1] <= 1e-8,
            f"decreasing up to round-off {['%.2e' % r for r in res]} (strict={strict})": decreasing_with_floor(res),
        },
        t.seconds,
        20,
    )


def _random_blaschke(rng, count=20):
    out = []
    while len(out) < count:
        deg = int(rng.integers(1, 7))
        r = 0.8 * np.sqrt(rng.uniform(0, 1, deg))
        z = r * np.exp(2j * np.pi * rng.uniform(0, 1, deg))
        gaps = np.abs(z[:, None] - z[None, :]) + np.eye(deg)
        if gaps.min() >= 1e-2:
            out.append(tuple(z))
    return out


def _divisor_spectra(zeros, N=256):
    m = InnerFunction.from_zeros(zeros)
    B = model_basis(m, N)
    ann = float(np.abs(functional_calculus(m.coefficients(N), B).entries).max())
    rows = []
    for d in proper_divisors(zeros):
        D = functional_calculus(InnerFunction.from_zeros(d).coefficients(N), B)
        s = np.linalg.svd(D.entries, compute_uv=False)
        rep = numeric_kernel(D, 1e-8)
        rows.append((len(d), s[0], s[-1], rep.dimension if rep.determinate else -1))
    return ann, rows


@pytest.fixture(scope="module")
def blaschke_spectra():
    rng = np.random.default_rng(3)
    with Timer() as t:
        data = [_divisor_spectra(z) for z in _random_blaschke(rng)]
    return data, t.seconds


def test_criterion_03a_minimal_function_annihilates(blaschke_spectra):
    data, seconds = blaschke_spectra
    worst = max(a for a, _ in data)
    _verdict("3a m(S(m)) = 0", {f"max entry {worst:.2e} <= 1e-11": worst <= 1e-11}, seconds, 10)


@pytest.mark.xfail(strict=True, reason="for a proper divisor d of m, d(S(m)) vanishes on (m/d)H(d), so sigma_min is 0")
def test_criterion_03b_divisor_sigma_min_as_stated(blaschke_spectra):
    data, seconds = blaschke_spectra
    smin = min(r[2] for _, rows in data for r in rows)
    _verdict("3b sigma_min(d(S(m))) > 1e-4 (as stated)", {f"min sigma_min {smin:.2e} > 1e-4": smin > 1e-4}, seconds, 10)


def test_criterion_03b_divisor_nonvanishing_corrected(blaschke_spectra):
    # d(S(m)) is nonzero for every proper divisor d; its kernel is (m/d)H(d), of dimension deg d
    data, seconds = blaschke_spectra
    rows = [r for _, rs in data for r in rs]
    smax = min(r[1] for r in rows)
    dims_ok = all(r[3] == r[0] for r in rows)
    _verdict(
        "3b' d(S(m)) nonzero with kernel (m/d)H(d)",
        {f"min sigma_max {smax:.2e} > 1e-4": smax > 1e-4, f"kernel dims over {len(rows)} divisors": dims_ok},
        seconds,
        10,
    )


def test_criterion_04_biorthogonality(example_bases):
    with Timer() as t:
        A = s_theta(example_bases[256])
        f0, _ = kernel_vector(A)
        dev = biorthogonality_suite(A, f0, 10, left_inverse(A)).deviation
        S = shift_matrix(256)
        dev_s = biorthogonality_suite(S, np.eye(256)[0], 10).deviation
    _verdict(
        "4 bi-orthogonality",
        {f"example {dev:.2e} <= 1e-6": dev <= 1e-6, f"shift {dev_s:.2e} <= 1e-12": dev_s <= 1e-12},
        t.seconds,
        10,
    )


def test_criterion_05_fredholm_index(example_bases):
    with Timer() as t:
        checks = fredholm_checks(example_bases, (0, 0.3, 0.5j, -0.7))
    bad = [c.name for c in checks if not c.passed]
    idx = [c.value for c in checks if c.name.endswith(".index")]
    _verdict("5 Fredholm index -1", {f"indices {idx}": not bad and len(idx) == 4}, t.seconds, 60)


def test_criterion_06_outer_construction():
    M = 1024
    z = unit_grid(M)
    with Timer() as t:
        errs = {}
        for label, w in (
            ("2", 2 * np.ones(M)),
            ("|1-z/2|", np.abs(1 - 0.5 * z)),
            ("min(1,1/|e^z|)", np.minimum(1, 1 / np.abs(np.exp(z)))),
        ):
            o = outer_from_modulus(BoundarySamples(w))
            errs[label] = float(np.abs(np.abs(o.boundary_values()) - w).max())
        exp = 1.0 / np.cumprod(np.r_[1.0, np.arange(1, 64)])
        u, _ = uv_pair(CoefSeries(exp))
        errs["|u_f|=min(1,|f|)"] = float(
            np.abs(np.abs(to_boundary(u, M).values) - np.minimum(1, np.abs(np.exp(z)))).max()
        )
    _verdict("6 outer construction", {f"{k} {v:.1e} <= 1e-6": v <= 1e-6 for k, v in errs.items()}, t.seconds, 5)


def test_criterion_07_confluence():
    with Timer() as t:
        bad = confluence_test(common_factor_z_theta(), 128)
        good = confluence_test(paper_example_theta(), 128)
    cert = min(good.certificates.values())
    _verdict(
        "7 confluence dichotomy",
        {
            f"common-factor-z not confluent, witness {bad.witness_residual:.1e}": (not bad.confluent)
            and bad.witness_residual <= 1e-7,
            f"paper-example confluent, min certificate {cert:.3f}": good.confluent and cert > 1e-4,
        },
        t.seconds,
        30,
    )


def test_criterion_08_corona():
    with Timer() as t:
        ok = corona_similarity(paper_example_theta())
        no = corona_similarity(common_factor_z_theta(), d_max=8)
    degrees = sorted(row["degree"] for row in no.history)
    _verdict(
        "8 corona/similarity",
        {
            f"example residual {ok.boundary_residual:.1e} <= 1e-10": ok.feasible and ok.boundary_residual <= 1e-10,
            "common-factor-z infeasible for degrees 0..8": (not no.feasible) and degrees == list(range(9)),
        },
        t.seconds,
        5,
    )


def test_criterion_09_nonclosability():
    with Timer() as t:
        outer = nonclosability_search(ClosabilityScenario(POLY_VS_OUTER), [1.0], 1e-2, 40, 256)
        kern = nonclosability_search(ClosabilityScenario(POLY_VS_KERNELS), [1.0], 1e-1, 30, 256)
        by_cap = [nonclosability_search(ClosabilityScenario(POLY_VS_OUTER), [1.0], 1e-2, c, 256).best_eps
                  for c in (0, 1, 2, 4, 8, 40)]
    _verdict(
        "9 non-closability witnesses",
        {
            f"outer eps {outer.best_eps:.1e} at degree {outer.witness and outer.witness.degrees['n']}": outer.found,
            f"kernels eps {kern.best_eps:.3f} with {kern.witness and kern.witness.degrees['n']} points": kern.found,
            "eps non-increasing in cap": all(b <= a for a, b in zip(by_cap, by_cap[1:])),
        },
        t.seconds,
        60,
    )


def _pad(a, n):
    return np.pad(a, (0, n - a.size))


def test_criterion_10_oracles():
    rng = np.random.default_rng(10)
    pool = np.array([0, 0.5, -0.3j, 0.2 + 0.4j, -0.6, 0.7j])
    with Timer() as t:
        gcd_ok = 0
        for _ in range(100):
            a = rng.choice(pool, int(rng.integers(0, 5)))
            b = rng.choice(pool, int(rng.integers(0, 5)))
            got = sorted(inner_gcd(InnerFunction.from_zeros(a), InnerFunction.from_zeros(b)).zeros,
                         key=lambda w: (w.real, w.imag))
            want = sorted((Counter(a.tolist()) & Counter(b.tolist())).elements(), key=lambda w: (w.real, w.imag))
            gcd_ok += len(got) == len(want) and np.allclose(got, want)

        cross = []
        N = 64
        S, one = shift_matrix(N), np.eye(N)[0]
        while len(cross) < 20:
            k = int(rng.integers(1, 3))
            poles = 2.5 + 2.5 * rng.uniform(0, 1, k)
            poles = poles * np.exp(2j * np.pi * rng.uniform(0, 1, k))
            den = np.polynomial.polynomial.polyfromroots(poles)
            num = rng.normal(size=k) + 1j * rng.normal(size=k)
            h = RationalFunction(num, den / den[0]).series(N)
            q1 = quotient_solver(S, h, one, k)
            q2 = quotient_solver(S, h, one, k + 2, minimal=False)
            n = q1.u.coeffs.size + q2.u.coeffs.size
            lhs = np.convolve(_pad(q2.v.coeffs, n), _pad(q1.u.coeffs, n))
            rhs = np.convolve(_pad(q1.v.coeffs, n), _pad(q2.u.coeffs, n))
            cross.append(float(np.abs(lhs - rhs).max()) if q1.found and q2.found else np.inf)

        rt = []
        for _ in range(100):
            n = int(rng.integers(1, 129))
            c = rng.normal(size=n) + 1j * rng.normal(size=n)
            back = to_coef(to_boundary(c, 256), n).coeffs
            rt.append(float(np.abs(back - c).max()))
    _verdict(
        "10 oracle equivalences",
        {
            f"gcd {gcd_ok}/100": gcd_ok == 100,
            f"quotient cross-identity max {max(cross):.1e} <= 1e-8": max(cross) <= 1e-8,
            f"roundtrip max {max(rt):.1e} <= 1e-12": max(rt) <= 1e-12,
        },
        t.seconds,
        10,
    )
