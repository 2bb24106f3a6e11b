"""Acceptance battery: one printed PASS/FAIL line per criterion.

Monte Carlo criteria run on master seeds 1..5 and need 4 passing seeds.
Run alone with ``pytest -v -s tests/test_acceptance.py``.
"""

import json
import time

import pytest

from spectral_clt import acceptance
from spectral_clt.cli import main
from spectral_clt.experiments import ExperimentConfig, run_experiment
from spectral_clt.simulate import iid_gauss, ma1


def report_line(capsys, result, extra=""):
    d = result.details
    summary = (f"{d['seed_passes']}/{len(d['seeds'])} seeds" if "seed_passes" in d
               else ", ".join(f"{k}={v}" for k, v in d.items() if not isinstance(v, (list, dict))))
    with capsys.disabled():
        print(f"\n{'PASS' if result.passed else 'FAIL'} {result.name}: {summary}{extra}")


def timed(cfg):
    start = time.perf_counter()
    report = run_experiment(cfg, workers=1)
    return report, time.perf_counter() - start


def test_criterion_01_fixed_frequency_clt(capsys):
    _, seconds = timed(ExperimentConfig("fixed_freq_clt", ma1(), 4096, 2000, (2.0,), 1))
    res = acceptance.fixed_frequency_clt()
    ok = res.passed and seconds <= 60
    res.passed = ok
    report_line(capsys, res, f"; single run {seconds:.2f}s (limit 60s)")
    assert ok


def test_criterion_02_cross_frequency(capsys):
    res = acceptance.cross_frequency()
    report_line(capsys, res)
    assert res.passed


def test_criterion_03_periodogram_chi2(capsys):
    res = acceptance.periodogram_chi2()
    report_line(capsys, res)
    assert res.passed


def test_criterion_04_annealed_clt(capsys):
    res = acceptance.annealed_clt()
    report_line(capsys, res)
    assert res.passed


def test_criterion_05_invariance_identity(capsys):
    report, seconds = timed(ExperimentConfig("invariance_identity", iid_gauss(), 2048, 500, (), 1))
    res = acceptance.invariance_identity()
    res.passed = res.passed and seconds <= 120
    report_line(capsys, res, f"; ratio(seed 1)={report.statistics['ratio']:.4f}; "
                             f"single run {seconds:.2f}s (limit 120s)")
    assert res.passed


def test_criterion_06_variance_convergence(capsys):
    res = acceptance.variance_convergence()
    gaps = [r.statistics["n4096.cesaro_gap"] for r in res.reports]
    report_line(capsys, res, f"; cesaro gap at n=4096: {gaps[0]:.2e} (limit 1e-3)")
    assert res.passed


def test_criterion_07_regularity_diagnostics(capsys):
    res = acceptance.regularity_diagnostics()
    report_line(capsys, res)
    assert res.passed


def test_criterion_08_tauberian_pole(capsys):
    res = acceptance.tauberian_pole()
    ratios = ", ".join(f"{t}:{res.details[f'theta={t}.ratio']:.3f}" for t in acceptance.TAUBERIAN_THETAS)
    report_line(capsys, res, f"; ratios {ratios}; band {acceptance.TAUBERIAN_BAND}")
    assert res.passed


def test_criterion_09_analytic_identities(capsys):
    res = acceptance.analytic_identities()
    report_line(capsys, res)
    assert res.passed


@pytest.mark.slow
def test_criterion_10_engineering_determinism(capsys, tmp_path):
    outputs = []
    for i, workers in enumerate((1, 1, 4)):
        out = tmp_path / f"suite{i}.json"
        main(["suite", "--workers", str(workers), "--out", str(out)])
        outputs.append(out.read_bytes())
    identical = outputs[0] == outputs[1] == outputs[2]
    res = acceptance.goertzel_consistency()
    res.passed = res.passed and identical
    suite_ok = json.loads(outputs[0])["passed"]
    report_line(capsys, res, f"; suite bytes identical over runs and workers 1/4: {identical}"
                             f" (suite verdict {'PASS' if suite_ok else 'FAIL'})")
    assert res.passed
