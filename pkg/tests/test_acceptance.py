"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one ``[criterion k] PASS|FAIL ...`` line (also under output
capture) before asserting.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from dunkl_lab import spectral as sp
from dunkl_lab.coordinates import (
    CHARTS,
    calogero_sum_cartesian,
    calogero_sum_jacobi,
    flatten,
    jacobi_matrix,
    to_jacobi,
    transform,
)
from dunkl_lab.verify import GRID_G, GRID_N, GRID_PARAMS, SUITES, default_specs, run_suite


def report(capsys, label, ok, detail):
    with capsys.disabled():
        print(f"\n[{label}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


# ----------------------------------------------------------------------------------
# 1. exact integrability suites

GRID = default_specs(GRID_N, GRID_G, **GRID_PARAMS)
_SUITE_SECONDS: dict = {}


@pytest.mark.parametrize("suite", SUITES)
def test_criterion1_exact_suites(suite, capsys):
    t0 = time.perf_counter()
    reports = run_suite(suite, GRID)
    _SUITE_SECONDS[suite] = time.perf_counter() - t0
    bad = [(r.label, str(r.spec.N), str(r.spec.g), r.verdict) for r in reports if r.verdict != "pass"]
    ok = bool(reports) and not bad
    report(
        capsys,
        f"criterion 1 / {suite}",
        ok,
        f"{len(reports) - len(bad)}/{len(reports)} cases exact over N in {GRID_N}, g in "
        f"{[str(g) for g in GRID_G]} ({_SUITE_SECONDS[suite]:.1f}s)" + (f"; not passing: {bad[:5]}" if bad else ""),
    )


def test_criterion1_controls_and_runtime(capsys):
    t0 = time.perf_counter()
    controls = []
    for suite in SUITES:
        controls += run_suite(suite, GRID, inject_fault=True, controls_only=True)
    elapsed = time.perf_counter() - t0
    survivors = [(r.suite, r.label, r.spec.N, str(r.spec.g)) for r in controls if r.verdict != "fail"]
    total = sum(_SUITE_SECONDS.values())
    ok = bool(controls) and not survivors and (len(_SUITE_SECONDS) < len(SUITES) or total < 300)
    report(
        capsys,
        "criterion 1 / controls",
        ok,
        f"{len(controls) - len(survivors)}/{len(controls)} fault-injected controls fail ({elapsed:.1f}s); "
        f"suite runtime {total:.1f}s (< 300s)" + (f"; surviving: {survivors[:5]}" if survivors else ""),
    )


# ----------------------------------------------------------------------------------
# 2. radial spectrum


def test_criterion2_radial_spectrum(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    covered = set()
    for n in range(1, 7):
        for l in range(n):
            res = sp.solve_radial(3, 1, l, n - 1 - l)
            worst = max(worst, abs(res.eigenvalue - sp.coulomb_energy(3, 1, n)))
            covered.add(n)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 10 and covered == set(range(1, 7))
    report(capsys, "criterion 2", ok, f"max |dE| = {worst:.2e} over n=1..6 (< 1e-8) in {elapsed:.2f}s (< 10s)")


# ----------------------------------------------------------------------------------
# 3. angular Jacobi levels


def test_criterion3_angular_levels(capsys):
    t0 = time.perf_counter()
    worst_q, worst_x = 0.0, 0.0
    for g in (0, 1, 2):
        q_vals = [float(q) for q, _ in sp.angular_q_levels(3, g, 3)]
        fd = sp.solve_angular_jacobi(g, 3)
        sh = sp.solve_angular_jacobi(g, 3, method="shooting")
        for m in range(3):
            worst_q = max(worst_q, abs(fd[m].eigenvalue - q_vals[m] ** 2))
            worst_x = max(worst_x, abs(fd[m].eigenvalue - sh[m].eigenvalue))
    elapsed = time.perf_counter() - t0
    ok = worst_q < 1e-6 and worst_x < 1e-7 and elapsed < 30
    report(
        capsys,
        "criterion 3",
        ok,
        f"max |2I - q^2| = {worst_q:.2e} (< 1e-6), FD vs shooting {worst_x:.2e} (< 1e-7), {elapsed:.2f}s (< 30s)",
    )


# ----------------------------------------------------------------------------------
# 4. parabolic separation constants at zero field


def test_criterion4_parabolic_constants(capsys):
    worst_l, worst_sum, count = 0.0, 0.0, 0
    for g in (0, 1):
        for s in sp.parabolic_states(3, g, 4):
            r = sp.solve_parabolic_pair(3, g, s["q"], 1.0, 0.0, s["n1"], s["n2"])
            n = s["n"]
            for key, ni in (("lambda1", s["n1"]), ("lambda2", s["n2"])):
                # N = 3: gamma (n_i + (q + 1)/2) / n
                closed = (ni + (float(s["q"]) + 1) / 2) / float(n)
                worst_l = max(worst_l, abs(r.extras[key] - closed))
            worst_sum = max(worst_sum, abs(r.extras["lambda1"] + r.extras["lambda2"] - 1.0))
            count += 1
    ok = worst_l < 1e-8 and worst_sum < 1e-10
    report(
        capsys,
        "criterion 4",
        ok,
        f"{count} channels; max |lambda_i - closed| = {worst_l:.2e} (< 1e-8), "
        f"max |lambda1 + lambda2 - gamma| = {worst_sum:.2e} (< 1e-10)",
    )


# ----------------------------------------------------------------------------------
# 5. Stark slopes

# At g = 1 the lowest relative angular number is q = 3, so n >= 4: the n = 2 states
# do not exist there and are replaced by the split pair at n = 5.
STARK_STATES = {
    0: [(2, 1, 0), (2, 0, 1), (4, 0, 0)],
    1: [(4, 0, 0), (5, 1, 0), (5, 0, 1)],
}


def test_criterion5_stark_slopes(capsys):
    lines, ok = [], True
    for g, states in STARK_STATES.items():
        q_min = sp.angular_q_levels(3, g, 1)[0][0]
        for n, n1, n2 in states:
            q = Fraction(n - 1 - n1 - n2)
            assert q == q_min or g == 0
            d = sp.stark_slope_numeric(3, g, q, 1.0, n1, n2, F=1e-5)
            if n1 == n2:
                good = abs(d["slope"]) < 1e-3 * d["scale"]
                lines.append(f"g={g} {(n, n1, n2)} |slope|/scale={abs(d['slope']) / d['scale']:.1e}")
            else:
                rel = abs(d["slope"] - d["slope_closed"]) / abs(d["slope_closed"])
                good = rel < 5e-3
                lines.append(f"g={g} {(n, n1, n2)} rel={rel:.1e}")
            ok &= good
    report(capsys, "criterion 5", ok, "; ".join(lines))


# ----------------------------------------------------------------------------------
# 6. two-centre properties


def test_criterion6a_single_charge_reduction(capsys):
    worst = 0.0
    for g, q in ((0, 0), (1, 3)):
        single = sp.solve_radial(3, 0.5, q, 0).eigenvalue
        two = sp.solve_two_center(3, g, q, 0.5, 0.0, 0.5).eigenvalue
        worst = max(worst, abs(two - single))
    report(capsys, "criterion 6a", worst < 1e-6, f"max |E(gamma2=0) - E_single| = {worst:.2e} (< 1e-6)")


def test_criterion6b_united_atom_rate(capsys):
    a_vals = (0.02, 0.01, 0.005)
    E_u = sp.coulomb_energy(3, 1.0, 1)
    errs = [abs(sp.solve_two_center(3, 0, 0, 0.5, 0.5, a).eigenvalue - E_u) for a in a_vals]
    rates = [math.log2(errs[k] / errs[k + 1]) for k in range(len(errs) - 1)]
    ok = all(abs(r - 2) <= 0.2 for r in rates)
    report(capsys, "criterion 6b", ok, f"a = {a_vals}: rates {[round(r, 3) for r in rates]} (2 +- 0.2)")


def test_criterion6c_separated_residuals(capsys):
    worst = 0.0
    for g1, g2, a, sel in ((0.5, 0.5, 0.5, (0, 0)), (1.0, 0.5, 0.7, (1, 0)), (0.7, 0.3, 1.0, (0, 1))):
        r = sp.solve_two_center(3, 0, 0, g1, g2, a, sel)
        worst = max(worst, r.residual)
    report(capsys, "criterion 6c", worst < 1e-8, f"max separated-equation residual {worst:.2e} (< 1e-8)")


def test_criterion6d_eta_parity(capsys):
    parities = []
    for k in range(4):
        E = sp.solve_two_center(3, 0, 0, 0.5, 0.5, 0.5, (0, k)).eigenvalue
        parities.append(sp.eta_parity(3, 0, E, 0.5, 0.5, 0.5, k))
    ok = all(abs(p - (-1) ** k) < 1e-8 for k, p in enumerate(parities))
    report(capsys, "criterion 6d", ok, f"eta parities {[round(p, 10) for p in parities]} alternate +1/-1")


# ----------------------------------------------------------------------------------
# 7. degeneracy bookkeeping


def test_criterion7_degeneracy(capsys):
    sph = {g: {r.n: r for r in sp.assemble_spectrum(3, g, 1.0, 6)} for g in (0, 1)}
    counts_ok = all(r.degeneracy == r.parabolic_degeneracy for g in sph for r in sph[g].values())
    numeric = {}
    for g in (0, 1):
        for res in sp.spectrum_from_solver(3, g, 1.0, 6):
            numeric.setdefault(g, {}).setdefault(round(res.labels["n"]), []).append(res.eigenvalue)
    shared = sorted(set(numeric[0]) & set(numeric[1]))
    spread = max(abs(e - f) for n in shared for e in numeric[0][n] for f in numeric[1][n])
    changed = [n for n in sph[1] if sph[1][n].degeneracy != sph[0][n].degeneracy]
    ok = counts_ok and spread < 1e-8 and bool(changed)
    report(
        capsys,
        "criterion 7",
        ok,
        f"spherical == parabolic counts: {counts_ok}; max |E_n(g=0) - E_n(g=1)| over n={shared} = {spread:.2e}; "
        f"degeneracies g=0 {[sph[0][n].degeneracy for n in sorted(sph[0])]}, "
        f"g=1 {[sph[1][n].degeneracy for n in sorted(sph[1])]}",
    )


# ----------------------------------------------------------------------------------
# 8. coordinates


def test_criterion8_coordinates(capsys):
    orth = max(np.max(np.abs(jacobi_matrix(N).O @ jacobi_matrix(N).O.T - np.eye(N))) for N in range(2, 13))
    rng = np.random.default_rng(2024)
    cox, trip = 0.0, 0.0
    for _ in range(200):
        N = int(rng.integers(2, 9))
        x = rng.normal(size=N)
        c = calogero_sum_cartesian(x)
        cox = max(cox, abs(c - calogero_sum_jacobi(to_jacobi(x).coords)) / c)
        for chart in CHARTS:
            p = transform(x, "cartesian", chart, N, 0.6)
            back = transform(flatten(p), chart, "cartesian", N, 0.6).coords
            trip = max(trip, float(np.max(np.abs(back - x))))
    ok = orth < 1e-13 and cox < 1e-10 and trip < 1e-11
    report(
        capsys,
        "criterion 8",
        ok,
        f"orthogonality {orth:.1e} (< 1e-13), Coxeter invariance {cox:.1e} (< 1e-10), round-trips {trip:.1e} (< 1e-11)",
    )
