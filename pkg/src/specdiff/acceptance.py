"""The acceptance suite: ten named criteria, each returning a structured
result.  The pytest acceptance module and the ``verify`` CLI subcommand both
run these, so there is exactly one definition of what passing means.

Criteria 1-4, 7-9 delegate to the corresponding experiment campaigns at
their benchmark configurations; 5 and 6 are self-contained checks (seeded
random projection algebra, scattering-route cross-validation); 10 re-runs
the deterministic campaigns twice and compares serialized reports byte for
byte (timing excluded).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import experiments, scattering, schrodinger1d
from .experiments import default_config, report_json, run_experiment

__all__ = ["CriterionResult", "run_all", "CRITERIA"]


@dataclass
class CriterionResult:
    index: int
    title: str
    passed: bool
    detail: str
    elapsed: float
    verdicts: list = field(default_factory=list)


def _from_report(index: int, title: str, report, elapsed: float,
                 only: tuple = ()) -> CriterionResult:
    verdicts = [v for v in report.verdicts if not only or v["name"] in only]
    passed = all(v["passed"] for v in verdicts)
    bits = [f"{v['name']}={v['observed']:.3g} (tol {v['tolerance']:.3g}, "
            f"{'ok' if v['passed'] else 'FAIL'})" for v in verdicts]
    return CriterionResult(index, title, passed, "; ".join(bits), elapsed, verdicts)


def criterion_1(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    report = run_experiment(default_config("SpecfunAudit"))
    return _from_report(1, "conical seam consistency", report,
                        time.perf_counter() - t0,
                        only=("seam_consistency", "branch_realness"))


def criterion_2(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    report = run_experiment(default_config("SpecfunAudit"))
    return _from_report(2, "conical bound audit", report,
                        time.perf_counter() - t0,
                        only=("bound_stability_uniform", "bound_stability_holder"))


def criterion_3(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    report = run_experiment(default_config("CarlemanMehler"))
    return _from_report(3, "half-Carleman spectrum", report,
                        time.perf_counter() - t0,
                        only=("spectrum_lower", "spectrum_upper",
                              "top_eigenvalue", "scaling_invariance"))


def criterion_4(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    report = run_experiment(default_config("CarlemanMehler"))
    return _from_report(4, "Mehler eigenfunction residual", report,
                        time.perf_counter() - t0,
                        only=("mehler_residual", "mehler_refinement_monotone"))


def criterion_5(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    dim, trials = 50, 20
    worst_algebra = 0.0
    worst_pairing = 0.0
    for _ in range(trials):
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        ranks = rng.integers(5, 25, size=2)
        p = q[:, :ranks[0]] @ q[:, :ranks[0]].T
        q2, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        p0 = q2[:, :ranks[1]] @ q2[:, :ranks[1]].T
        diff = schrodinger1d.projection_difference(p, p0, 0.0)
        mp, mm = schrodinger1d.m_plus_minus(p, p0)
        worst_algebra = max(worst_algebra, float(np.linalg.norm(
            diff.matrix @ diff.matrix - (mp + mm))))
        pairing = schrodinger1d.symmetry_pairing_report(diff, 1e-6)
        worst_pairing = max(worst_pairing, pairing.max_pair_error)
        if pairing.unpaired.size:
            worst_pairing = 1.0
    passed = worst_algebra <= 1e-12 and worst_pairing <= 1e-8
    detail = (f"max ||D^2-(M+ + M-)||={worst_algebra:.3g} (tol 1e-12); "
              f"max pairing error={worst_pairing:.3g} (tol 1e-8)")
    return CriterionResult(5, "projection algebra", passed, detail,
                           time.perf_counter() - t0)


def criterion_6(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    well = schrodinger1d.SquareWell(depth=-2.0, half_width=1.0)
    pt = schrodinger1d.PoschlTeller(strength=1)
    worst_unit_ode = worst_unit_stat = worst_cross = worst_reflect = 0.0
    for pot in (well, pt):
        for lam in (0.5, 1.0, 2.0):
            s_ode = scattering.s_matrix_ode(pot, lam)
            s_stat = scattering.s_matrix_stationary(pot, lam)
            worst_unit_ode = max(worst_unit_ode, s_ode.unitarity_defect)
            worst_unit_stat = max(worst_unit_stat, s_stat.unitarity_defect)
            worst_cross = max(worst_cross, float(
                np.linalg.norm(s_ode.matrix - s_stat.matrix)))
            if isinstance(pot, schrodinger1d.PoschlTeller):
                worst_reflect = max(worst_reflect,
                                    abs(s_ode.matrix[0, 1]), abs(s_ode.matrix[1, 0]))
    passed = (worst_unit_ode <= 1e-8 and worst_unit_stat <= 1e-6
              and worst_cross <= 1e-3 and worst_reflect <= 1e-8)
    detail = (f"unitarity ode={worst_unit_ode:.3g} (tol 1e-8), "
              f"stationary={worst_unit_stat:.3g} (tol 1e-6); "
              f"cross-method={worst_cross:.3g} (tol 1e-3); "
              f"PT reflection={worst_reflect:.3g} (tol 1e-8)")
    return CriterionResult(6, "scattering matrix two routes", passed, detail,
                           time.perf_counter() - t0)


def criterion_7(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    report = run_experiment(default_config("BirmanKrein"))
    return _from_report(7, "Birman-Krein identity", report,
                        time.perf_counter() - t0)


def criterion_8(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    report = run_experiment(default_config("BandFilling"))
    return _from_report(8, "band filling of the projection difference",
                        report, time.perf_counter() - t0)


def criterion_9(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    report = run_experiment(default_config("ModelSpectrum"))
    return _from_report(9, "model operator product spectrum", report,
                        time.perf_counter() - t0)


_DETERMINISM_CAMPAIGNS = ("SpecfunAudit", "CarlemanMehler", "ModelSpectrum",
                          "BandFilling", "BirmanKrein")


def criterion_10(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    def bundle() -> str:
        parts = []
        for name in _DETERMINISM_CAMPAIGNS:
            cfg = default_config(name)
            cfg = experiments.config_from_dict({**cfg.as_dict(), "seed": seed})
            parts.append(report_json(run_experiment(cfg), include_timing=False))
        return "\n".join(parts)
    first = bundle()
    second = bundle()
    passed = first == second
    detail = (f"two full campaign bundles, {len(first)} bytes each, "
              f"{'identical' if passed else 'DIFFER'} with timing excluded")
    return CriterionResult(10, "report determinism", passed, detail,
                           time.perf_counter() - t0)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(seed: int = 0, indices=None) -> list[CriterionResult]:
    picked = CRITERIA if indices is None else [CRITERIA[i - 1] for i in indices]
    return [fn(seed=seed) for fn in picked]
