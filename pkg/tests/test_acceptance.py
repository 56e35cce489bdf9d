"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its measured numbers.  Tolerances are pinned here and
nowhere else."""

import time
from fractions import Fraction

from adhoc1d.exact import (
    AUTO_ESCALATION_THRESHOLD,
    ModelKind,
    Ratio,
    distribution,
    q_m,
)
from adhoc1d.oracle import quadrature_distribution
from adhoc1d.sweep import (
    FIGURE_M_VALUES,
    SweepSpec,
    simulator_agreement,
    sweep_rows,
    write_csv,
)

FREE = ModelKind.FREE
ANCHORED = ModelKind.ANCHORED

NORMALIZATION_RHOS = (0.3, 0.9, 1.0, 1.5, 2.5, 5.0, 10.0, 17.3, 30.0)
ORACLE_RHOS = (0.5, 1.5, 2.0, 3.0, 5.0, 7.5)


def _report(criterion, ok, detail):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, detail


def test_criterion_1_normalization():
    t0 = time.time()
    worst_float = 0.0
    for model in ModelKind:
        for n in range(1, 51):
            for rho in NORMALIZATION_RHOS:
                ratio = Ratio.from_float(rho)
                exact = distribution(model, n, ratio, "rational")
                total = sum(ev.rational_value for ev in exact.details.values())
                assert total == 1, (model, n, rho)
                fl = distribution(model, n, ratio, "float")
                worst_float = max(worst_float, abs(fl.total() - 1.0))
    elapsed = time.time() - t0
    ok = worst_float <= 1e-9 and elapsed < 30
    _report(
        1,
        ok,
        f"rational sums exact for n=1..50; worst float deviation "
        f"{worst_float:.2e} (limit 1e-9); {elapsed:.1f}s (limit 30s)",
    )


def test_criterion_2_trivial_closed_cases():
    worst = 0.0
    for rho in (0.4, 1.0, 1.5, 2.0, 7.3, 30.0):
        ratio = Ratio.from_float(rho)
        want = min(1, 1 / Fraction(rho))
        got = q_m(ANCHORED, 1, 1, ratio, "rational").rational_value
        worst = max(worst, abs(got - want))
        if rho >= 1:
            want2 = 1 - (1 - 1 / Fraction(rho)) ** 2
            got2 = q_m(FREE, 2, 1, ratio, "rational").rational_value
            worst = max(worst, abs(got2 - want2))
    ok = worst <= 1e-12
    _report(2, ok, f"worst deviation from closed cases {float(worst):.2e} (limit 1e-12)")


def test_criterion_3_oracle_equivalence():
    t0 = time.time()
    worst = None
    checked = 0
    for model in ModelKind:
        for n in (1, 2, 3):
            for rho in ORACLE_RHOS:
                ratio = Ratio.from_float(rho)
                quad = quadrature_distribution(model, n, ratio, 1024)
                for m, res in quad.items():
                    exact = q_m(model, n, m, ratio, "rational").float_value
                    gap = abs(res.value - exact)
                    tol = max(5 * res.richardson_error, 1e-4)
                    checked += 1
                    assert gap <= tol, (model.value, n, m, rho, gap, tol)
                    margin = gap / tol
                    if worst is None or margin > worst[0]:
                        worst = (margin, model.value, n, m, rho)
    elapsed = time.time() - t0
    ok = elapsed < 600
    _report(
        3,
        ok,
        f"{checked} cells within max(5*richardson, 1e-4); tightest margin "
        f"{worst[0]:.2f} of tolerance at {worst[1:]}; {elapsed:.0f}s (limit 600s)",
    )


def test_criterion_4_simulator_agreement():
    t0 = time.time()
    stats = simulator_agreement(
        n_values=(5, 10, 20),
        rho_values=tuple(float(r) for r in range(2, 31, 2)),
        m_values=FIGURE_M_VALUES,
        trials=100_000,
        seed=42,
        workers=8,
    )
    elapsed = time.time() - t0
    ok = (
        stats.frac_within_2 >= 0.95
        and stats.max_abs_z <= 5.0
        and stats.frac_chi_ok >= 0.99
        and elapsed < 900
    )
    _report(
        4,
        ok,
        f"{stats.frac_within_2:.1%} of {stats.cells} cells within |z|<=2 "
        f"(need 95%), max |z| {stats.max_abs_z:.2f} (limit 5), chi-square ok "
        f"for {stats.frac_chi_ok:.1%} of points (need 99%); {elapsed:.0f}s",
    )


def test_criterion_5_stability_escalation():
    t0 = time.time()
    ratio = Ratio.from_float(150.0)
    raw = q_m(FREE, 200, 1, ratio, "float")
    auto = q_m(FREE, 200, 1, ratio, "auto")
    elapsed = time.time() - t0
    ok = (
        raw.cancellation_ratio > AUTO_ESCALATION_THRESHOLD
        and auto.mode == "rational"
        and 0 <= auto.rational_value <= 1
        and elapsed < 5
    )
    _report(
        5,
        ok,
        f"float raw {raw.float_value:.3e} with cancellation {raw.cancellation_ratio:.1e} "
        f"(threshold 1e8); auto escalated to {auto.mode}, value "
        f"{auto.float_value:.3e} in [0,1]; {elapsed:.1f}s (limit 5s)",
    )


def test_criterion_6_determinism(tmp_path):
    outputs = []
    for workers in (1, 4):
        spec = SweepSpec(
            model=ANCHORED,
            n_values=(5, 10, 20),
            m_values=FIGURE_M_VALUES,
            trials=2000,
            seed=9,
            workers=workers,
        )
        rows = sweep_rows(spec)
        paths = []
        for m in FIGURE_M_VALUES:
            path = tmp_path / f"w{workers}_fig{m}.csv"
            write_csv([r for r in rows if r.m == m], str(path))
            paths.append(path.read_bytes())
        outputs.append(paths)
    ok = outputs[0] == outputs[1]
    _report(6, ok, "figure CSVs byte-identical across worker counts 1 and 4")


def test_criterion_7_figure_shape():
    spec = SweepSpec(
        model=ANCHORED,
        n_values=(5, 10, 20),
        m_values=FIGURE_M_VALUES,
    )
    rows = sweep_rows(spec)
    by = {}
    for r in rows:
        by.setdefault((r.n, r.m), []).append((r.rho, r.q_exact))
    problems = []
    peaks = {}
    for (n, m), pts in by.items():
        pts.sort()
        values = [q for _, q in pts]
        if m == 1:
            for rho, q in pts:
                if rho <= 1 and q != 1.0:
                    problems.append(f"Q1(n={n}, rho={rho}) = {q} != 1")
            for a, b in zip(values, values[1:]):
                if b > a + 1e-12:
                    problems.append(f"Q1 not monotone at n={n}")
                    break
        else:
            peak = max(range(len(values)), key=values.__getitem__)
            rising = all(b >= a - 1e-9 for a, b in zip(values[: peak + 1], values[1 : peak + 1]))
            falling = all(b <= a + 1e-9 for a, b in zip(values[peak:], values[peak + 1 :]))
            if not (rising and falling):
                problems.append(f"Q{m}(n={n}) not unimodal in rho")
            peaks[(n, m)] = pts[peak][0]
    for n in (5, 10, 20):
        seq = [peaks[(n, m)] for m in range(2, 7)]
        if seq != sorted(seq) or len(set(seq)) != len(seq):
            problems.append(f"peak locations not increasing with m at n={n}: {seq}")
    ok = not problems
    _report(7, ok, "; ".join(problems) if problems else
            "Q1 monotone with Q1(rho<=1)=1; Q2..Q6 unimodal with peaks shifting right in m")
