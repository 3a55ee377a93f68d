"""The acceptance suite: one check per criterion, shared by the CLI and pytest.

Expensive objects (bases on the default and lab grids, NLS runs) are built
lazily and reused by every check through a :class:`Lab`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .cli import RunConfig, linear_data, run_nls
from .core import ComplexField, FrequencyGrid, SpatialGrid, l2_norm
from .dft import build_basis, plancherel_defect
from .galilei import nullform_relative
from .jost import TOL_ODE, connection_coeffs, scattering_coeffs, scattering_sweep
from .prop import dispersive_decay_fit, evolve_linear, fit_decay, local_decay_fit
from .scatter import extract_asymptotics, ode_residual, profile_series, remainder

log = logging.getLogger(__name__)

T0_REFERENCE = -4j / (9 * np.pi)


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    measured: dict
    threshold: str

    @property
    def detail(self) -> str:
        vals = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"{self.name}: {vals} (need {self.threshold})"

    def as_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "passed": bool(self.passed),
                "measured": self.measured, "threshold": self.threshold, "detail": self.detail}


def _short(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.4g}"
    if isinstance(v, complex):
        return f"{v.real:.4g}{v.imag:+.4g}j"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


@dataclass
class Lab:
    """Lazily built shared state for the checks."""

    config: RunConfig = field(default_factory=RunConfig)
    _bases: dict = field(default_factory=dict)
    _runs: dict = field(default_factory=dict)

    def default_basis(self, free: bool = False, level: int = 0):
        """Basis on the default grids.

        ``level=-1`` is one refinement level coarser: both resolutions are
        halved and the ODE tolerance is 100 times looser.
        """
        key = ("default", free, level)
        if key not in self._bases:
            c = self.config
            if level == 0:
                sg, fg = c.default_grids()
            else:
                sg = SpatialGrid.symmetric(c.grid_x_max, (c.grid_n - 1) // 2 + 1)
                fg = FrequencyGrid.contiguous(c.freq_xi_max, c.freq_m // 2)
            tol = TOL_ODE if level == 0 else 100 * TOL_ODE
            self._bases[key] = build_basis(sg, fg, free=free, tol=tol)
        return self._bases[key]

    def drop(self, *keys):
        for k in keys:
            self._bases.pop(k, None)

    def nls(self, epsilon: float, t_end: float):
        """``(result, basis, cubic ratios)`` of the lab NLS run."""
        key = (epsilon, t_end)
        if key not in self._runs:
            cfg = replace(self.config, epsilon=epsilon, t_end=t_end, mode="potential")
            basis = self._bases.get("lab")
            res, basis, cubic = run_nls(cfg, basis)
            self._bases["lab"] = basis
            self._runs[key] = (res, basis, cubic)
        return self._runs[key]

    def main_run(self):
        return self.nls(self.config.epsilon, self.config.t_end)


# --------------------------------------------------------------------------
# scattering coefficients


def c01_unitarity(lab: Lab) -> CriterionResult:
    xis = np.geomspace(0.05, 8.0, 200)
    d = max(s.unitarity_defect for s in scattering_sweep(xis))
    return CriterionResult(1, "S-matrix unitarity", d <= 1e-6, {"max_defect": d}, "<= 1e-6")


def c02_small_xi_transmission(lab: Lab) -> CriterionResult:
    s = scattering_coeffs(0.05)
    rel = abs(s.t0_estimate - T0_REFERENCE) / abs(T0_REFERENCE)
    return CriterionResult(2, "T(xi)/xi^3 at xi=0.05 vs -4i/(9 pi)", rel <= 0.1,
                           {"T_over_xi3": s.t0_estimate, "rel_error": rel}, "rel_error <= 0.1")


def c03_reflection_limit(lab: Lab) -> CriterionResult:
    R = scattering_coeffs(0.05).R
    return CriterionResult(3, "R(0.05) near 1", abs(R - 1) <= 0.15, {"R": R, "abs_R_minus_1": abs(R - 1)}, "<= 0.15")


def c04_connection(lab: Lab) -> CriterionResult:
    cd = connection_coeffs(0.02)
    val = abs(0.02 * cd.c2 + 3j)
    return CriterionResult(4, "xi c2(xi) near -3i at xi=0.02", val <= 0.15, {"xi_c2": 0.02 * cd.c2, "distance": val}, "<= 0.15")


# --------------------------------------------------------------------------
# transforms and linear flow


def gaussian_family(grid: SpatialGrid) -> dict:
    x = grid.x
    return {
        "exp(-x^2)": np.exp(-(x**2)),
        "exp(-(x-5)^2)": np.exp(-((x - 5) ** 2)),
        "exp(-x^2/4)": np.exp(-(x**2) / 4),
    }


def c05_plancherel(lab: Lab) -> CriterionResult:
    coarse = lab.default_basis(level=-1)
    dc = {k: plancherel_defect(ComplexField(coarse.sgrid, v.astype(complex)), coarse)
          for k, v in gaussian_family(coarse.sgrid).items()}
    lab.drop(("default", False, -1))
    fine = lab.default_basis()
    df = {k: plancherel_defect(ComplexField(fine.sgrid, v.astype(complex)), fine)
          for k, v in gaussian_family(fine.sgrid).items()}
    ok = all(v <= 1e-3 for v in df.values()) and all(df[k] < dc[k] for k in df)
    measured = {f"default {k}": v for k, v in df.items()}
    measured.update({f"coarse {k}": v for k, v in dc.items()})
    return CriterionResult(5, "distorted Plancherel", ok, measured, "<= 1e-3 and decreasing under refinement")


def free_gaussian(x, t):
    """``e^{itL} e^{-x^2}`` for ``V = 0``."""
    z = 1 - 4j * t
    return np.exp(-(x**2) / z) / np.sqrt(z)


def c06_free_oracle(lab: Lab) -> CriterionResult:
    b = lab.default_basis(free=True)
    g = b.sgrid
    f = ComplexField(g, np.exp(-(g.x**2)).astype(complex))
    errs = {}
    for t in (1.0, 10.0, 100.0):
        exact = free_gaussian(g.x, t)
        u = evolve_linear(f, t, b).values
        errs[f"t={t:g}"] = l2_norm(u - exact, g.weights) / l2_norm(exact, g.weights)
    lab.drop(("default", True, 0))
    return CriterionResult(6, "free-oracle evolution", max(errs.values()) <= 1e-6, errs, "<= 1e-6")


def _decay_times(lab: Lab):
    c = lab.config
    return np.geomspace(c.linear_t_min, c.linear_t_max, c.linear_samples)


def _decay_fits(lab: Lab):
    if "decay" not in lab._runs:
        b = lab.default_basis()
        g = b.sgrid
        f = linear_data(g, lab.config.linear_width)
        times = _decay_times(lab)
        glob = dispersive_decay_fit(f, b, times)
        loc = local_decay_fit(f, b, times, lab.config.linear_gamma)
        lab._runs["decay"] = (glob, loc)
    return lab._runs["decay"]


def c07_dispersive_decay(lab: Lab) -> CriterionResult:
    glob, _ = _decay_fits(lab)
    return CriterionResult(7, "global sup-norm decay", abs(glob.slope + 0.5) <= 0.1, {"slope": glob.slope}, "-0.5 +- 0.1")


def c08_local_decay(lab: Lab) -> CriterionResult:
    glob, loc = _decay_fits(lab)
    ok = loc.slope <= -0.45 and loc.slope <= glob.slope - 0.05
    return CriterionResult(8, "improved local decay (gamma=0.6)", ok,
                           {"local_slope": loc.slope, "global_slope": glob.slope},
                           "local <= -0.45 and <= global - 0.05")


# --------------------------------------------------------------------------
# NLS


def _snapshots(res):
    return sorted(res.snapshots.items())


def c09_nullform(lab: Lab) -> CriterionResult:
    worst = {}
    for eps, t_end in ((lab.config.epsilon, lab.config.t_end), (0.02, 200.0)):
        res, basis, _ = lab.nls(eps, t_end)
        worst[f"eps={eps:g}"] = max(nullform_relative(ComplexField(basis.sgrid, u), t) for t, u in _snapshots(res))
    return CriterionResult(9, "null-form product rule", max(worst.values()) <= 1e-6, worst, "<= 1e-6 on every snapshot")


def _jv_slope(series, t_max=200.0):
    t = np.asarray(series.times)
    j = np.asarray(series.jv_norms)
    sel = t <= t_max + 1e-9
    return fit_decay(t[sel], j[sel]).slope


def c10_global_bounds(lab: Lab) -> CriterionResult:
    eps_hi = lab.config.epsilon
    res_hi, _, _ = lab.nls(eps_hi, lab.config.t_end)
    res_lo, _, _ = lab.nls(0.02, 200.0)
    s = res_hi.series
    t = np.asarray(s.times)
    sel = t <= 200.0 + 1e-9
    m = np.asarray(s.masses)[sel]
    drift = float(np.abs(m / m[0] - 1).max())
    A = np.asarray(s.A_vals)[sel]
    a_ratio = float(A.max() / A[0])
    slope_hi = _jv_slope(s)
    slope_lo = _jv_slope(res_lo.series)
    ok = drift <= 1e-8 and a_ratio <= 2 and slope_hi <= 0.05 and slope_lo < slope_hi
    return CriterionResult(
        10, "NLS global bounds", ok,
        {"mass_drift": drift, "A_sup_over_A1": a_ratio, "jv_slope_eps0.05": slope_hi, "jv_slope_eps0.02": slope_lo},
        "drift <= 1e-8, ratio <= 2, slope <= 0.05, slope(0.02) < slope(0.05)",
    )


def _asymptotics(lab: Lab):
    if "asym" not in lab._runs:
        res, basis, _ = lab.main_run()
        snaps = dict(_snapshots(res))
        series = profile_series(snaps, basis.sgrid, lab.config.v_grid())
        asym = extract_asymptotics(series, lab.config.mu, t_b=lab.config.t_end)
        lab._runs["asym"] = (series, asym, snaps, basis)
    return lab._runs["asym"]


def c11_modified_scattering(lab: Lab) -> CriterionResult:
    series, asym, snaps, basis = _asymptotics(lab)
    tb = asym.t_b
    d1 = asym.defects[(tb, tb / 2)]
    d2 = asym.defects[(tb / 2, tb / 4)]
    ratio = d2 / d1
    ts = [t for t in series.times if t >= lab.config.fit_t_min - 1e-9]
    rem = [remainder(ComplexField(basis.sgrid, snaps[t]), t, asym, lab.config.mu) for t in ts]
    s_inf = fit_decay(ts, [r["linf"] for r in rem]).slope
    s_2 = fit_decay(ts, [r["l2"] for r in rem]).slope
    ok = 1.5 <= ratio <= 4 and s_inf <= -0.5 and s_2 <= -0.15
    return CriterionResult(
        11, "modified scattering", ok,
        {"defect_late": d1, "defect_early": d2, "ratio": ratio, "linf_slope": s_inf, "l2_slope": s_2},
        "ratio in [1.5, 4], linf slope <= -0.5, l2 slope <= -0.15",
    )


def c12_asymptotic_ode(lab: Lab) -> CriterionResult:
    series, _, _, _ = _asymptotics(lab)
    r = ode_residual(series, lab.config.mu)
    return CriterionResult(12, "asymptotic ODE residual decay", r.fit.slope <= -1.05,
                           {"slope": r.fit.slope, "t_range": (r.fit.times[0], r.fit.times[-1])}, "<= -1.05")


CRITERIA = {
    1: c01_unitarity,
    2: c02_small_xi_transmission,
    3: c03_reflection_limit,
    4: c04_connection,
    5: c05_plancherel,
    6: c06_free_oracle,
    7: c07_dispersive_decay,
    8: c08_local_decay,
    9: c09_nullform,
    10: c10_global_bounds,
    11: c11_modified_scattering,
    12: c12_asymptotic_ode,
}


def run_suite(config: RunConfig | None = None, only=None) -> list[dict]:
    """Run the selected criteria (all by default) and return their reports."""
    lab = Lab(config or RunConfig())
    out = []
    for k in sorted(only or CRITERIA):
        r = CRITERIA[k](lab)
        log.info("%s", r.detail)
        out.append(r.as_dict())
    return out
