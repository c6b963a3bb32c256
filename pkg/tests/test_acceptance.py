"""The fourteen acceptance criteria, one test each.

Every test prints a single PASS/FAIL line, also under output capture.
"""

import subprocess
import sys
import time
from pathlib import Path

import pytest

from bcghost import checks

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


_capture = {}


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    _capture["capsys"] = capsys
    yield
    _capture.clear()


def report_line(number: int, title: str, ok: bool, started: float):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  ({time.time() - started:.1f}s)"
    with _capture["capsys"].disabled():
        print("\n" + line, flush=True)


def failures(report: dict) -> list:
    return [(c["name"], c["failures"], c["max_residual"]) for c in report["checks"] if c["failures"]]


def suite_criterion(number, title, fn, **kw):
    started = time.time()
    report = fn(**kw)
    report_line(number, title, report["pass"], started)
    assert report["pass"], failures(report)


def test_criterion_01_anticommutators():
    suite_criterion(1, "anticommutators on d<=6, |p|<=3, |modes|<=9/2", checks.anticommutators,
                    max_degree=6, max_charge=3, max_mode=9)


def test_criterion_02_virasoro():
    suite_criterion(2, "Virasoro, Heisenberg and mixed brackets on d<=8, |p|<=2", checks.virasoro,
                    max_degree=8, max_charge=2, max_n=3)


def test_criterion_03_energy():
    suite_criterion(3, "L0 eigenvalue d + p(p+1)/2 on d<=8, |p|<=3", checks.energy, max_degree=8, max_charge=3)


def test_criterion_04_pairings():
    suite_criterion(4, "pairing adjointness and dual-basis Gram on d<=5, |p|<=3", checks.pairings,
                    max_degree=5, max_charge=3)


def test_criterion_05_one_point_example():
    suite_criterion(5, "one-point vacuum at D=8 is <-1|", checks.example_one_point, cutoff=8)


def test_criterion_06_dimension_one():
    suite_criterion(6, "kernel dimension 1 at D<=6, stable under escalation", checks.dimensions, max_cutoff=6)


def test_criterion_07_propagation():
    suite_criterion(7, "propagation equals direct solve and restricts back", checks.propagation, cutoff=5)


def test_criterion_08_nodal_round_trip():
    suite_criterion(8, "node restriction/extension round trip", checks.nodal, cutoff=4)


def test_criterion_09_sewing():
    suite_criterion(9, "sewn series through q^4: both gauge conditions, 20 matrices, q^0 sign", checks.sewing,
                    q_order=5, matrices=20, seed=0)


def test_criterion_10_fuchsian():
    suite_criterion(10, "Fuchsian residual zero through q^3, q-divisible", checks.fuchsian, q_order=4)


def test_criterion_11_covariance():
    suite_criterion(11, "conjugation identities for 10 random h up to xi^6 on d<=4", checks.covariance,
                    samples=10, seed=0, max_energy=4)


def test_criterion_12_preferred_genus_zero():
    suite_criterion(12, "G[h]-covariance of <-1| with scalings 2, 3, 1/2 on d<=5", checks.preferred,
                    samples=6, seed=0, cutoff=5)


def test_criterion_13_preferred_nodal():
    suite_criterion(13, "two-glued value and (-1)^g on the nodal P^1", checks.preferred_nodal, cutoff=4)


DETERMINISM_RUNS = [
    ["verify", "--suite", "covariance", "--max-degree", "3", "--seed", "11"],
    ["verify", "--suite", "sewing", "--seed", "4"],
    ["vacuum", "--curve", str(SAMPLES / "nodal_p1.json"), "--cutoff", "3"],
    ["sew", "--curve", str(SAMPLES / "sew_three_points.json"), "--q-order", "3", "--seed", "2"],
    ["preferred", "--data", str(SAMPLES / "nodal_genus1_data.json"), "--cutoff", "4"],
]


def test_criterion_14_determinism():
    started = time.time()
    ok = True
    for args in DETERMINISM_RUNS:
        outs = [subprocess.run([sys.executable, "-m", "bcghost", *args], capture_output=True).stdout for _ in range(2)]
        ok = ok and outs[0] == outs[1] and len(outs[0]) > 0
    report_line(14, "repeated seeded CLI runs are byte-identical", ok, started)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
