"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every check reports through the ``criterion`` fixture so the terminal
summary lists one PASS/FAIL line per criterion.  All seeds are fixed at 0
unless the criterion names one.
"""

import json
import time

import numpy as np
import pytest

from conftest import random_orthogonal_np
from equivcov.cli import main
from equivcov.errors import DomainError
from equivcov.models import SeedSpec, SpectrumSpec, realize_spectrum, sample_gaussian
from equivcov.risk import dominance_gaps, eigen_ratio_check, gap_stein_dispersed, stein_loss
from equivcov.shrinkers import (
    EstimatorKind,
    shrink,
    shrink_stein_dispersed,
    shrink_stein_raw,
    shrink_tsai,
)
from equivcov.spectral import assemble, eigh, sample_covariance
from equivcov.validation import oracle_suite, quantile_suite, stieltjes_suite

pytestmark = pytest.mark.acceptance

GRID = [(n, p) for n in range(5, 201) for p in range(1, n)]


def test_c01_closed_form_identity(criterion):
    start = time.perf_counter()
    worst = max(abs(g.direct - g.via_v) for g in (gap_stein_dispersed(n, p) for n, p in GRID))
    elapsed = time.perf_counter() - start
    criterion(
        "C01 direct == via_v on n in 5..200, p < n",
        worst <= 1e-10 and elapsed < 1.0,
        f"max |direct - via_v| = {worst:.2e} (tol 1e-10), runtime {elapsed:.2f}s (limit 1s)",
    )


def test_c02_dispersed_gap_inequality(criterion):
    bad = [(n, p) for n, p in GRID if not (lambda g: g.direct >= g.lower_bound >= 0)(gap_stein_dispersed(n, p))]
    g = gap_stein_dispersed(10, 3)
    spot = abs(g.direct - 0.0425114) <= 1e-6 and abs(g.lower_bound - 0.0016894) <= 1e-6
    criterion(
        "C02 direct >= lower_bound >= 0 and spot (10,3)",
        not bad and spot,
        f"{len(bad)} grid violations; spot direct={g.direct:.7f} lower={g.lower_bound:.7f}",
    )


def test_c03_dominance_inequalities(criterion):
    bad = [(n, p) for n, p in GRID if min(dominance_gaps(n, p)) < 0]
    d = dominance_gaps(10, 2)
    spot = abs(d[0] - 0.0022006) <= 1e-6 and abs(d[1] - 0.0026803) <= 1e-6
    criterion(
        "C03 dominance gaps >= 0 and spot (10,2)",
        not bad and spot,
        f"{len(bad)} grid violations; spot = ({d[0]:.7f}, {d[1]:.7f})",
    )


def test_c04_equivariance(criterion):
    rng = np.random.default_rng(0)
    kinds = (EstimatorKind.SAMPLE, EstimatorKind.STEIN_DISPERSED, EstimatorKind.STEIN_ISO, EstimatorKind.TSAI)
    worst, pairs, skipped = 0.0, 0, 0
    while pairs < 100:
        p = int(rng.integers(2, 9))
        n = int(rng.integers(p + 1, 5 * p + 20))
        x = rng.standard_normal((n, p)) * rng.uniform(0.5, 3.0, p)
        s = sample_covariance(x).entries
        w = np.linalg.eigvalsh(s)
        if np.min(np.diff(w)) <= 1e-3:
            continue
        g = random_orthogonal_np(rng, p)
        d_s, d_g = eigh(s), eigh(g @ s @ g.T)
        pairs += 1
        for kind in kinds:
            try:
                a = assemble(d_s, shrink(kind, d_s, n).values).entries
            except DomainError:
                # an estimator outside its domain must fail on the whole orbit
                with pytest.raises(DomainError):
                    assemble(d_g, shrink(kind, d_g, n).values)
                skipped += 1
                continue
            b = assemble(d_g, shrink(kind, d_g, n).values).entries
            worst = max(worst, float(np.max(np.abs(b - g @ a @ g.T))))
    criterion(
        "C04 equivariance Sigma(GSG') = G Sigma(S) G'",
        worst < 1e-8,
        f"max abs error {worst:.2e} over 100 pairs x 4 kinds (tol 1e-8; {skipped} out-of-domain tsai cases failed consistently)",
    )


def test_c05_loss_invariance(criterion):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 9))
        a, b = rng.standard_normal((2, p, p))
        phi = a @ a.T + 0.5 * np.eye(p)
        sigma = b @ b.T + 0.5 * np.eye(p)
        g = rng.standard_normal((p, p))
        while abs(np.linalg.det(g)) < 0.1:
            g = rng.standard_normal((p, p))
        worst = max(worst, abs(stein_loss(g @ phi @ g.T, g @ sigma @ g.T) - stein_loss(phi, sigma)))
    criterion("C05 Stein loss congruence invariance", worst <= 1e-9, f"max deviation {worst:.2e} (tol 1e-9)")


def test_c06_worked_values(criterion):
    raw = shrink_stein_raw([3.0, 1.0], 10).values
    tsai = shrink_tsai([3.0, 1.0], 10).values
    disp = shrink_stein_dispersed([9.0, 3.0, 1.0], 10).values
    err = max(
        np.max(np.abs(raw - [2.5, 1.25])),
        np.max(np.abs(tsai - [2.857142857, 1.176470588])),
        np.max(np.abs(disp - [7.5, 3.0, 1.25])),
    )
    criterion("C06 worked estimator values", err <= 1e-9, f"max abs error {err:.2e} (tol 1e-9)")


def test_c07_stieltjes_plug_in(criterion):
    start = time.perf_counter()
    _, summary = stieltjes_suite(c=0.5, ps=(100, 200, 400, 800), seeds=5, master_seed=0)
    elapsed = time.perf_counter() - start
    med = {row["p"]: row["median_abs_deviation"] for row in summary}
    monotone = med[100] > med[200] > med[400] > med[800]
    ok = med[200] < 0.05 and med[400] < 0.02 and monotone and elapsed < 30
    criterion(
        "C07 Stieltjes plug-in consistency",
        ok,
        "median |m_Fn - m_MP| " + ", ".join(f"p={p}: {v:.2e}" for p, v in med.items())
        + f"; monotone={monotone}; runtime {elapsed:.1f}s",
    )


def _bulk(rows):
    return [r for r in rows if 0.1 <= r["alpha"] <= 0.9 and r["in_bulk"]]


def test_c08a_oracle_identities_closed_form(criterion):
    rows = _bulk(oracle_suite(c=0.5, p=400, seed=0))
    prod = max(abs(r["product_closed"] - 1) for r in rows)
    phi = max(abs(r["phi_closed"] - 1) for r in rows)
    criterion(
        "C08a oracle identities, closed-form boundary values",
        prod <= 1e-10 and phi <= 1e-10,
        f"{len(rows)} bulk quantiles: max |delta*delta_inv - 1| = {prod:.1e}, max |phi - 1| = {phi:.1e} (tol 1e-10)",
    )


def test_c08b_oracle_identities_empirical(criterion):
    rows = _bulk(oracle_suite(c=0.5, p=400, seed=0))
    prod = max(abs(r["product_hat"] - 1) for r in rows)
    phi = max(abs(r["phi_hat"] - 1) for r in rows)
    criterion(
        "C08b oracle identities, empirical principal values",
        prod <= 2e-2 and phi <= 2e-2,
        f"{len(rows)} bulk quantiles: max |delta*delta_inv - 1| = {prod:.3g}, max |phi - 1| = {phi:.3g} (tol 2e-2)",
    )


def test_c09_fixed_p_consistency(criterion):
    spec = SpectrumSpec.explicit([10.0, 5.0, 2.0, 1.0, 0.5])
    gamma = realize_spectrum(spec)
    n, trials = 50_000, 20
    rel, dev = [], 0.0
    for t in range(trials):
        l = eigh(sample_covariance(sample_gaussian(gamma, n, SeedSpec(0, t)))).values
        rel.append(np.abs(l - gamma) / gamma)
        for rule in (shrink_tsai, shrink_stein_raw):
            dev = max(dev, float(np.max(np.abs(rule(l, n).values / l - 1))))
    mean_rel = np.mean(rel, axis=0)
    criterion(
        "C09 fixed-p consistency",
        np.all(mean_rel < 0.05) and dev < 0.005,
        f"max mean |l-gamma|/gamma = {mean_rel.max():.2e} (tol 0.05); max tsai/stein_raw deviation from sample {dev:.2e} (tol 5e-3)",
    )


def test_c10_dispersed_approximation(criterion):
    gamma = realize_spectrum(SpectrumSpec.geometric(5, 100.0))
    n, trials = 100, 50
    gaps = []
    for t in range(trials):
        l = eigh(sample_covariance(sample_gaussian(gamma, n, SeedSpec(0, t)))).values
        raw, disp = shrink_stein_raw(l, n).values, shrink_stein_dispersed(l, n).values
        gaps.append(np.abs(raw - disp) / disp)
    med = np.median(gaps, axis=0)
    criterion(
        "C10 stein_raw ~ stein_dispersed on dispersed spectra",
        np.all(med < 0.02),
        "per-index median relative gap " + ", ".join(f"{v:.2e}" for v in med) + " (tol 2e-2)",
    )


def test_c11_eigen_ratio_prediction(criterion):
    r = eigen_ratio_check(100, 5, SpectrumSpec.geometric(5, 100.0), trials=500, seed=0)
    z = np.abs(r.z_scores)
    criterion(
        "C11 E[l_i/gamma_i] = (n-i+1)/n within 3 SE",
        r.dispersed and np.all(z <= 3),
        "|z| = " + ", ".join(f"{v:.2f}" for v in z),
    )


def test_c12_simulate_determinism(criterion, tmp_path):
    config = {
        "n": 100, "p": 50, "spectrum": {"kind": "geometric", "ratio": 100},
        "estimators": ["sample", "stein_dispersed", "tsai"], "trials": 200, "master_seed": 42,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    a, b = tmp_path / "a", tmp_path / "b"
    codes = (
        main(["simulate", "--config", str(path), "--threads", "1", "--out", str(a)]),
        main(["simulate", "--config", str(path), "--threads", "4", "--out", str(b)]),
    )
    same = all((a / f).read_bytes() == (b / f).read_bytes() for f in ("risk_table.csv", "risk_table.json"))
    criterion(
        "C12 simulate byte-identical across thread counts",
        codes == (0, 0) and same,
        f"exit codes {codes}; files identical: {same}",
    )


def test_c13_quantile_report(criterion, tmp_path):
    out = tmp_path / "q"
    code = main(["validate", "--suite", "quantile", "--c", "0.5", "--seed", "0", "--out", str(out)])
    report = quantile_suite(SpectrumSpec.identity(400), c=0.5, seed=0)
    rows = [r for r in report.rows if r["in_bulk"]]
    phi = np.array([r["phi_hat"] for r in rows])
    gam = np.array([r["gamma_hat"] - r["reference_gamma"] for r in rows])
    # a quantile whose map leaves the positive cone is reported as NaN and counts as a miss
    undefined = int(np.sum(~np.isfinite(gam)) + np.sum(~np.isfinite(phi)))
    phi_dev = float(np.nanmax(np.abs(phi - 1)))
    gam_dev = float(np.nanmax(np.abs(gam)))
    criterion(
        "C13 quantile-map report columns",
        code == 0 and undefined == 0 and phi_dev <= 0.05 and gam_dev <= 0.05,
        f"{len(rows)} bulk quantiles: max |phi - 1| = {phi_dev:.3g}, "
        f"max |gamma_hat - 2l/(1-c+l)| = {gam_dev:.3g} (tol 0.05), {undefined} undefined; exit {code}",
    )
