"""Sweep evaluation, CSV emission, figure data, and the validation suite.

The canonical artifact is CSV: one file per component count m, rows over
(n, rho) in deterministic order, floats serialized as shortest
round-trip decimals so a parsed file reproduces the stored values
bit-exactly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import montecarlo
from .exact import ModelKind, Ratio, distribution, q_1, q_m
from .model import NetworkConfig
from .montecarlo import compare, estimate_distribution

__all__ = [
    "SweepSpec",
    "SweepRow",
    "CSV_HEADER",
    "sweep_rows",
    "write_csv",
    "read_csv",
    "figure_files",
    "run_validation",
    "ValidationResult",
]

CSV_HEADER = "model,n,m,rho,q_exact,eval_mode,cancellation_ratio,p_hat,stderr,trials,z"

FIGURE_N_VALUES = (5, 10, 20)
FIGURE_M_VALUES = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class SweepSpec:
    """Grid of evaluation points plus the simulation budget per point."""

    model: ModelKind
    n_values: tuple[int, ...]
    m_values: tuple[int, ...]
    rho_start: float = 0.25
    rho_stop: float = 30.0
    rho_step: float = 0.25
    trials: int = 0
    seed: int = 42
    mode: str = "auto"
    workers: int = 1

    def __post_init__(self):
        if not (self.rho_start > 0 and self.rho_step > 0 and self.rho_stop >= self.rho_start):
            raise ValueError("rho grid must satisfy start > 0, step > 0, stop >= start")
        if not self.n_values or not self.m_values:
            raise ValueError("n_values and m_values must be non-empty")

    def rho_values(self) -> list[float]:
        count = int(math.floor((self.rho_stop - self.rho_start) / self.rho_step + 0.5)) + 1
        return [self.rho_start + i * self.rho_step for i in range(count)]


@dataclass(frozen=True)
class SweepRow:
    model: str
    n: int
    m: int
    rho: float
    q_exact: float
    eval_mode: str
    cancellation_ratio: float
    p_hat: float | None = None
    stderr: float | None = None
    trials: int | None = None
    z: float | None = None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def sweep_rows(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate the full grid, rows ordered by (n, m, rho)."""
    rows = []
    by_point = {}
    for n in spec.n_values:
        for rho in spec.rho_values():
            by_point[(n, rho)] = _point_rows(spec, n, rho)
    for n in spec.n_values:
        for m in spec.m_values:
            for rho in spec.rho_values():
                rows.append(by_point[(n, rho)][m])
    return rows


def _point_rows(spec: SweepSpec, n: int, rho: float) -> dict[int, SweepRow]:
    ratio = Ratio.from_float(rho)
    dist = distribution(spec.model, n, ratio, spec.mode)
    counts = None
    if spec.trials > 0:
        config = NetworkConfig(
            n=n,
            length=rho,
            radius=1.0,
            access_point=0.0 if spec.model is ModelKind.ANCHORED else None,
        )
        estimates = estimate_distribution(config, spec.trials, spec.seed, spec.workers)
        counts = {e.m: e.count for e in estimates}
    out = {}
    for m in spec.m_values:
        ev = dist.details.get(m) if dist.details else None
        q = dist.probs.get(m, 0.0)
        eval_mode = ev.mode if ev else ("rational" if spec.mode == "rational" else "float")
        cancel = ev.cancellation_ratio if ev else 0.0
        if counts is None:
            out[m] = SweepRow(spec.model.value, n, m, rho, q, eval_mode, cancel)
        else:
            p_hat, stderr, z = montecarlo._z_score(q, counts.get(m, 0), spec.trials)
            out[m] = SweepRow(
                spec.model.value, n, m, rho, q, eval_mode, cancel,
                p_hat, stderr, spec.trials, z,
            )
    return out


def write_csv(rows: Iterable[SweepRow], path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        r.model,
                        str(r.n),
                        str(r.m),
                        _fmt(r.rho),
                        _fmt(r.q_exact),
                        r.eval_mode,
                        _fmt(r.cancellation_ratio),
                        _fmt(r.p_hat),
                        _fmt(r.stderr),
                        _fmt(r.trials),
                        _fmt(r.z),
                    ]
                )
                + "\n"
            )


def read_csv(path: str) -> list[SweepRow]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        for line in fh:
            f = line.rstrip("\n").split(",")
            rows.append(
                SweepRow(
                    model=f[0],
                    n=int(f[1]),
                    m=int(f[2]),
                    rho=float(f[3]),
                    q_exact=float(f[4]),
                    eval_mode=f[5],
                    cancellation_ratio=float(f[6]),
                    p_hat=float(f[7]) if f[7] else None,
                    stderr=float(f[8]) if f[8] else None,
                    trials=int(f[9]) if f[9] else None,
                    z=float(f[10]) if f[10] else None,
                )
            )
    return rows


def figure_files(
    out_dir: str,
    trials: int = 0,
    seed: int = 42,
    workers: int = 1,
    svg: bool = False,
    rho_start: float = 0.25,
    rho_stop: float = 30.0,
    rho_step: float = 0.25,
) -> list[str]:
    """Write fig1.csv .. fig6.csv for the anchored model, n in {5, 10, 20}.

    Each file holds one m; exact values always, simulation columns when
    trials > 0.  Optionally renders an SVG line chart next to each CSV.
    """
    spec = SweepSpec(
        model=ModelKind.ANCHORED,
        n_values=FIGURE_N_VALUES,
        m_values=FIGURE_M_VALUES,
        rho_start=rho_start,
        rho_stop=rho_stop,
        rho_step=rho_step,
        trials=trials,
        seed=seed,
        workers=workers,
    )
    rows = sweep_rows(spec)
    paths = []
    for m in spec.m_values:
        path = os.path.join(out_dir, f"fig{m}.csv")
        m_rows = [r for r in rows if r.m == m]
        write_csv(m_rows, path)
        paths.append(path)
        if svg:
            _render_svg(m_rows, os.path.join(out_dir, f"fig{m}.svg"))
    return paths


def _render_svg(rows: Sequence[SweepRow], path: str) -> None:
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    m = rows[0].m
    for n in sorted({r.n for r in rows}):
        pts = [r for r in rows if r.n == n]
        ax.plot([r.rho for r in pts], [r.q_exact for r in pts], label=f"n={n} exact")
        if any(r.p_hat is not None for r in pts):
            ax.plot(
                [r.rho for r in pts],
                [r.p_hat for r in pts],
                linestyle="none",
                marker=".",
                markersize=3,
                label=f"n={n} simulated",
            )
    ax.set_xlabel("L/r")
    ax.set_ylabel(f"probability of exactly {m} component{'s' if m > 1 else ''}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --- validation suite -------------------------------------------------------

NORMALIZATION_RHO_GRID = (0.3, 0.9, 1.0, 1.5, 2.5, 5.0, 10.0, 17.3, 30.0)
ORACLE_RHO_GRID = (0.5, 1.5, 2.0, 3.0, 5.0, 7.5)


@dataclass
class ValidationResult:
    passed: bool
    checks: int
    failures: list[str] = field(default_factory=list)

    def record(self, ok: bool, label: str) -> None:
        self.checks += 1
        if not ok:
            self.failures.append(label)
            self.passed = False


def run_validation(
    level: str = "quick",
    trials: int = 100_000,
    seed: int = 42,
    workers: int = 1,
    max_n: int = 20,
    oracle_grid: int = 256,
) -> ValidationResult:
    """Invariant and oracle suite behind the `validate` subcommand.

    quick: normalization plus closed-form identities, seconds.
    full: adds the n <= 3 quadrature cross-check and a Monte Carlo
    z-score sweep against the exact distribution.
    """
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    result = ValidationResult(passed=True, checks=0)
    _check_normalization(result, max_n)
    _check_identities(result)
    if level == "full":
        _check_oracle(result, oracle_grid)
        _check_simulation(result, trials, seed, workers)
    return result


def _check_normalization(result: ValidationResult, max_n: int) -> None:
    for model in ModelKind:
        for n in range(1, max_n + 1):
            for rho in NORMALIZATION_RHO_GRID:
                ratio = Ratio.from_float(rho)
                exact = distribution(model, n, ratio, "rational")
                total = sum(ev.rational_value for ev in exact.details.values())
                result.record(
                    total == 1,
                    f"rational normalization != 1 at ({model.value}, n={n}, rho={rho})",
                )
                fl = distribution(model, n, ratio, "float")
                result.record(
                    abs(fl.total() - 1.0) <= 1e-9,
                    f"float normalization off at ({model.value}, n={n}, rho={rho})",
                )


def _check_identities(result: ValidationResult) -> None:
    for rho in (1.5, 2.0, 3.0, 10.0):
        ratio = Ratio.from_float(rho)
        got = q_m(ModelKind.ANCHORED, 1, 1, ratio, "rational").rational_value
        result.record(
            got == 1 / Fraction(rho),
            f"anchored n=1 Q1 != 1/rho at rho={rho}",
        )
        got2 = q_m(ModelKind.FREE, 2, 1, ratio, "rational").rational_value
        want2 = 1 - (1 - 1 / Fraction(rho)) ** 2
        result.record(got2 == want2, f"free n=2 Q1 identity fails at rho={rho}")
    for model in ModelKind:
        for rho in (0.5, 1.0):
            ratio = Ratio.from_float(rho)
            d = distribution(model, 5, ratio, "rational")
            ok = d.details[1].rational_value == 1 and all(
                d.details[m].rational_value == 0 for m in d.probs if m > 1
            )
            result.record(ok, f"saturated regime fails at ({model.value}, rho={rho})")
        for n in (3, 7, 20):
            for rho in (2.5, 7.5):
                ratio = Ratio.from_float(rho)
                a = q_1(model, n, ratio, "float").float_value
                b = q_m(model, n, 1, ratio, "float").float_value
                result.record(
                    a == b, f"q1 fast path mismatch at ({model.value}, n={n}, rho={rho})"
                )


def _check_oracle(result: ValidationResult, grid: int) -> None:
    from .oracle import quadrature_distribution

    for model in ModelKind:
        for n in (1, 2, 3):
            for rho in ORACLE_RHO_GRID:
                ratio = Ratio.from_float(rho)
                quad = quadrature_distribution(model, n, ratio, grid)
                for m, qr in quad.items():
                    exact = q_m(model, n, m, ratio, "rational").float_value
                    tol = max(5 * qr.richardson_error, 1e-4)
                    result.record(
                        abs(qr.value - exact) <= tol,
                        f"oracle mismatch at ({model.value}, n={n}, m={m}, rho={rho}): "
                        f"|{qr.value} - {exact}| > {tol}",
                    )


def _check_simulation(result: ValidationResult, trials: int, seed: int, workers: int) -> None:
    stats = simulator_agreement(
        n_values=(5, 10, 20),
        rho_values=tuple(float(r) for r in range(2, 31, 2)),
        m_values=FIGURE_M_VALUES,
        trials=trials,
        seed=seed,
        workers=workers,
    )
    result.record(
        stats.frac_within_2 >= 0.95,
        f"only {stats.frac_within_2:.3f} of cells within |z| <= 2 (worst: {stats.worst_cell})",
    )
    result.record(
        stats.max_abs_z <= 5.0,
        f"max |z| = {stats.max_abs_z:.2f} at {stats.worst_cell}",
    )
    result.record(
        stats.frac_chi_ok >= 0.99,
        f"chi-square p-value <= 0.001 in {1 - stats.frac_chi_ok:.3f} of points",
    )


@dataclass(frozen=True)
class AgreementStats:
    cells: int
    frac_within_2: float
    max_abs_z: float
    frac_chi_ok: float
    worst_cell: tuple


def simulator_agreement(
    n_values: Sequence[int],
    rho_values: Sequence[float],
    m_values: Sequence[int],
    trials: int,
    seed: int,
    workers: int = 1,
    min_q: float = 1e-3,
) -> AgreementStats:
    """Z-score sweep of the simulator against the exact anchored distribution.

    Cells with exact probability below *min_q* are skipped for the z
    fractions (their counts are tiny and the normal approximation is
    meaningless there); the chi-square check pools them anyway.
    """
    zs = []
    worst = (None, 0.0)
    chi_ok = 0
    points = 0
    for n in n_values:
        for rho in rho_values:
            ratio = Ratio.from_float(rho)
            exact = distribution(ModelKind.ANCHORED, n, ratio, "auto")
            config = NetworkConfig(n=n, length=rho, radius=1.0, access_point=0.0)
            # Derive a per-point stream: reusing the root seed directly
            # would feed every rho the same uniforms for a given n and
            # correlate the whole sweep.
            point_seed = seed + 1_000_003 * points
            estimates = estimate_distribution(config, trials, point_seed, workers)
            report = compare(config, estimates, exact)
            points += 1
            if report.p_value > 0.001:
                chi_ok += 1
            for row in report.rows:
                if row.m in m_values and row.q_exact >= min_q:
                    zs.append(abs(row.z))
                    if abs(row.z) > worst[1]:
                        worst = ((n, row.m, rho), abs(row.z))
    within2 = sum(1 for z in zs if z <= 2.0)
    return AgreementStats(
        cells=len(zs),
        frac_within_2=within2 / len(zs) if zs else 1.0,
        max_abs_z=max(zs) if zs else 0.0,
        frac_chi_ok=chi_ok / points if points else 1.0,
        worst_cell=worst[0],
    )
