"""Acceptance criteria, one test per criterion.

Each test runs the corresponding named suite at the demo configuration
(D = 5; p = 7 inert and p = 11 split; N = 12; B = 40), prints one
pass/fail line with its runtime, and asserts both the outcome and the
runtime target.
"""

import math
import random
import time

from padicgz import suites
from padicgz.formgen import delta_form, demo_basis
from padicgz.heckeslope import hecke_roots
from padicgz.padic import PadicRing


def _run(result, limit):
    status = "PASS" if result["passed"] else "FAIL"
    print(f"{status} criterion [{result['name']}] in {result['seconds']} s "
          f"(target < {limit} s)")
    for d in result["details"]:
        print(f"    {d}")
    assert result["passed"], result["details"]
    assert result["seconds"] < limit, f"runtime {result['seconds']} over target"


def test_criterion_1_operator_algebra():
    # >= 100 seeded random forms per configuration, exact mod p^12
    _run(suites.suite_operators(count=100), 60)


def test_criterion_2_nabla_iteration():
    _run(suites.suite_nabla_iteration(rmax=5), 60)


def test_criterion_3_padic_continuity():
    _run(suites.suite_continuity(), 120)


def test_criterion_4_gz_inert():
    _run(suites.suite_gz_inert(s_values=(0, 1, 2), deltas=(0, 2, 4)), 120)


def test_criterion_5_gz_split():
    _run(suites.suite_gz_split(ell=(8, 8), s_values=(0, 1)), 300)


def test_criterion_6_decomposition_and_vanishing():
    t0 = time.time()
    dec = suites.suite_decomposition(tuples=50)
    van = suites.suite_vanishing(count=20)
    merged = {
        "name": "decomposition+vanishing",
        "passed": dec["passed"] and van["passed"],
        "seconds": round(time.time() - t0, 2),
        "details": dec["details"] + van["details"],
    }
    _run(merged, 300)


def test_criterion_7_slope_machinery():
    _run(suites.suite_slope(p=7, N=12, B=98), 60)


def test_criterion_8_end_to_end():
    _run(suites.suite_end_to_end(), 300)


def test_criterion_9_euler_table():
    _run(suites.suite_euler_table(), 5)
