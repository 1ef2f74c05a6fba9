"""Conformance harness: analytic laws against independent oracles.

Three families of checks:

* normalization -- atoms plus the quadrature of the density must carry unit
  mass, unconditionally and given each starting sign;
* enumeration -- the closed-form trial-count laws must equal exhaustive
  path enumeration over all 2^k trial sequences;
* empirical -- Monte Carlo atom frequencies and histogram bins must sit
  inside z-score bands around the analytic law, with a chi-square summary.

Statistical thresholds (3 sigma per cell, a 5% budget of bins beyond 3
sigma, chi-square p >= 0.001) keep the false-failure probability of a suite
run below about 1e-3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaincc

from .errors import ParameterError
from .law import ProcessLaw
from .simulate import EmpiricalLaw
from .trials import (
    Direction,
    TrialScheme,
    TrialState,
    count_dist,
    joint_count_velocity,
    next_success_prob,
)

_QUAD_OPTS = dict(limit=300, epsabs=1e-10, epsrel=1e-10)


@dataclass
class Check:
    name: str
    provenance: str  # closed-form | series | quadrature | enumeration | simulation
    target: float
    estimate: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "provenance": self.provenance,
            "target": self.target,
            "estimate": self.estimate,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    def extend(self, more) -> None:
        self.checks.extend(more)

    @property
    def n_passed(self) -> int:
        return sum(1 for c in self.checks if c.passed)

    @property
    def n_failed(self) -> int:
        return len(self.checks) - self.n_passed

    @property
    def passed(self) -> bool:
        return self.n_failed == 0

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_passed": self.n_passed,
            "n_failed": self.n_failed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"[{status}] {c.name}: estimate={c.estimate:.6g} "
                f"target={c.target:.6g} tol={c.tolerance:.2g} ({c.provenance})"
            )
        lines.append(f"{self.n_passed} passed, {self.n_failed} failed")
        return lines


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def _integrate_density(fn, lo, hi) -> float:
    mid = 0.5 * (lo + hi)
    left, _ = quad(fn, lo, mid, **_QUAD_OPTS)
    right, _ = quad(fn, mid, hi, **_QUAD_OPTS)
    return left + right


def check_normalization(law: ProcessLaw, tol: float = 1e-6) -> list[Check]:
    """Atoms + integral of the density must equal 1 (blended and conditional)."""
    lo, hi = law.support
    checks = []

    mass = _integrate_density(law.density, lo, hi)
    total = mass + law.atom_forward + law.atom_backward
    checks.append(
        Check(
            name=f"normalization[{law.kind}, t={law.t}]",
            provenance="quadrature",
            target=1.0,
            estimate=total,
            tolerance=tol,
            passed=abs(total - 1.0) <= tol,
            details={"density_mass": mass},
        )
    )
    for initial, label in ((Direction.FORWARD, "forward"), (Direction.BACKWARD, "backward")):
        weight = law.forward_start_prob if initial is Direction.FORWARD else 1.0 - law.forward_start_prob
        if weight == 0.0:
            continue
        mass = _integrate_density(lambda x: law.density_given(x, initial), lo, hi)
        total = mass + law.atom_given(initial)
        checks.append(
            Check(
                name=f"normalization[{law.kind}, t={law.t} | {label} start]",
                provenance="quadrature",
                target=1.0,
                estimate=total,
                tolerance=tol,
                passed=abs(total - 1.0) <= tol,
                details={"density_mass": mass},
            )
        )
    return checks


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def enumerate_joint(scheme: TrialScheme, k: int, initial: Direction) -> np.ndarray:
    """Exhaustive joint law of (forward count among trials 2..k, k-th sign).

    Walks all 2^k outcome sequences of trials 2..k+1 with the sequential
    conditional probabilities; returns P[j, zk] with zk indexing
    (backward, forward).  Independent of the closed-form count laws.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    x1 = 1 if initial is Direction.FORWARD else 0
    out = np.zeros((k, 2))
    for bits in range(1 << k):
        state = TrialState(scheme, n_trials=1, n_successes=x1)
        prob = 1.0
        n_fwd = 0
        zk = 0
        for i in range(k):
            outcome = (bits >> i) & 1
            p1 = next_success_prob(state)
            prob *= p1 if outcome else 1.0 - p1
            state = TrialState(
                state.scheme, state.n_trials + 1, state.n_successes + outcome
            )
            if i < k - 1:
                n_fwd += outcome
            else:
                zk = outcome
        out[n_fwd, zk] += prob
    return out


def check_enumeration(
    scheme: TrialScheme, k_max: int = 10, tol: float = 1e-12
) -> list[Check]:
    """Closed-form count/joint laws vs exhaustive enumeration for k <= k_max."""
    checks = []
    for initial, label in ((Direction.FORWARD, "forward"), (Direction.BACKWARD, "backward")):
        worst = 0.0
        worst_sum = 0.0
        for k in range(1, k_max + 1):
            table = enumerate_joint(scheme, k, initial)
            for j in range(k):
                for zi, zk in ((0, Direction.BACKWARD), (1, Direction.FORWARD)):
                    got = joint_count_velocity(scheme, k, j, initial, zk)
                    worst = max(worst, abs(got - table[j, zi]))
            marg = count_dist(scheme, k, initial).pmf
            worst = max(worst, float(np.max(np.abs(marg - table.sum(axis=1)))))
            worst_sum = max(worst_sum, abs(float(table.sum()) - 1.0), abs(float(marg.sum()) - 1.0))
        checks.append(
            Check(
                name=f"enumeration[{type(scheme).__name__}, {label} start, k<={k_max}]",
                provenance="enumeration",
                target=0.0,
                estimate=worst,
                tolerance=tol,
                passed=worst <= tol and worst_sum <= tol,
                details={"worst_total_mass_error": worst_sum},
            )
        )
    return checks


# ---------------------------------------------------------------------------
# empirical vs analytic
# ---------------------------------------------------------------------------


def _bin_probabilities(law: ProcessLaw, edges: np.ndarray) -> np.ndarray:
    probs = np.empty(len(edges) - 1)
    for i in range(len(edges) - 1):
        probs[i], _ = quad(law.density, edges[i], edges[i + 1], limit=100, epsabs=1e-11)
    return probs


def check_empirical_vs_analytic(
    emp: EmpiricalLaw,
    law: ProcessLaw,
    z_threshold: float = 3.0,
    bin_budget: float = 0.05,
    p_floor: float = 1e-3,
) -> list[Check]:
    """Monte Carlo estimate against an analytic law.

    Atom frequencies get binomial z-tests; bins get z-scores with at most a
    bin_budget share allowed beyond z_threshold; a chi-square over all cells
    (bins + atoms) must keep p >= p_floor.  All bands scale with the Monte
    Carlo standard error, so small n widens them automatically.
    """
    n = emp.n_paths
    checks = []

    for freq, target, label in (
        (emp.atom_forward_freq, law.atom_forward, "forward"),
        (emp.atom_backward_freq, law.atom_backward, "backward"),
    ):
        se = math.sqrt(max(target * (1.0 - target), 1e-300) / n)
        z = abs(freq - target) / se
        checks.append(
            Check(
                name=f"atom-{label}[{law.kind}]",
                provenance="simulation",
                target=target,
                estimate=freq,
                tolerance=z_threshold,
                passed=z <= z_threshold,
                details={"z": z, "std_err": se},
            )
        )

    probs = _bin_probabilities(law, emp.bin_edges)
    obs = emp.bin_counts / n
    se = np.sqrt(np.maximum(probs * (1.0 - probs), 1e-300) / n)
    zscores = np.abs(obs - probs) / se
    n_out = int(np.sum(zscores > z_threshold))
    share = n_out / len(probs)
    checks.append(
        Check(
            name=f"bins-within-{z_threshold}sigma[{law.kind}]",
            provenance="simulation",
            target=0.0,
            estimate=share,
            tolerance=bin_budget,
            passed=share <= bin_budget,
            details={"n_bins": len(probs), "n_outliers": n_out, "max_z": float(zscores.max())},
        )
    )

    expected = np.concatenate([probs, [law.atom_forward, law.atom_backward]]) * n
    observed = np.concatenate(
        [emp.bin_counts, [emp.atom_forward_count, emp.atom_backward_count]]
    ).astype(float)
    keep = expected > 1e-9
    stat = float(np.sum((observed[keep] - expected[keep]) ** 2 / expected[keep]))
    dof = int(keep.sum()) - 1
    p_value = float(gammaincc(dof / 2.0, stat / 2.0))
    checks.append(
        Check(
            name=f"chi-square[{law.kind}]",
            provenance="simulation",
            target=1.0,
            estimate=p_value,
            tolerance=p_floor,
            passed=p_value >= p_floor,
            details={"stat": stat, "dof": dof},
        )
    )
    return checks
