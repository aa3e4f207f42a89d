"""End-to-end acceptance suite.

Each criterion runs its checks, prints one PASS/FAIL line with the measured
value, the pinned tolerance and the wall time, then asserts both the checks
and the runtime budget.  Run with ``pytest -s`` to see the lines.
"""
import time

import pytest

from star_kg import StarNetwork, checks

NET = StarNetwork([1.0, 2.0, 0.5], [0.0, 1.0, 3.0])

# (label, runtime budget in seconds, producer)
CRITERIA = [
    ("C1 eigenfunctions", 5, lambda: checks.check_eigenfunctions(NET)),
    ("C2 wronskian bound", 5, lambda: checks.check_wronskian_bound(NET)),
    ("C3 kernel symmetry", 10, lambda: checks.check_kernel_symmetry(NET)),
    ("C4 limiting absorption", 30, lambda: checks.check_limiting_absorption_suite(NET)),
    ("C5 resolvent", 120, lambda: checks.check_resolvent(NET, h=1e-3, L=30.0)),
    ("C6 case formulas", 10, lambda: checks.check_case_formulas(NET)),
    ("C7 weights", 60, lambda: checks.check_weights(NET)),
    ("C8 plancherel", 180, lambda: checks.check_plancherel(NET)),
    ("C9 diagonalization", 60, checks.check_diagonalization),
    ("C10 dynamics", 180, checks.check_dynamics),
    ("C11 tunnel effect", 120, checks.check_tunnel),
]


@pytest.mark.parametrize("label,budget,produce", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(label, budget, produce):
    t0 = time.perf_counter()
    results = produce()
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in results) and elapsed < budget
    print(f"\n{'PASS' if ok else 'FAIL'} {label} ({elapsed:.1f} s, budget {budget} s)")
    for r in results:
        print("    " + r.line())
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]
    assert elapsed < budget, f"{label} took {elapsed:.1f} s"
