"""Command-line driver: configuration, orchestration and CSV/JSON output.

Configuration files are flat ``key = value`` lines.  Every key has a fixed
type; unknown keys and malformed values are errors.  Each emitted file
carries the hash of the canonical configuration text.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .core import ComplexField, FrequencyGrid, SpatialGrid
from .jost import DegenerateWronskianError, IntegrationError, MatchingPointError, scattering_coeffs

log = logging.getLogger("modscat")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


@dataclass(frozen=True)
class RunConfig:
    """All run parameters, with the defaults used by the acceptance suite.

    ``grid_*``/``freq_*`` describe the default transform grids.  ``lab_*``
    describe the larger box and the contiguous low-frequency grid used for
    the NLS runs.
    """

    mode: str = "potential"
    out_dir: str = "out"
    seed: int = 0
    # default transform grids
    grid_x_max: float = 400.0
    grid_n: int = 16001
    freq_xi_max: float = 8.0
    freq_m: int = 4000
    # scattering sweep
    scatter_xi_min: float = 0.05
    scatter_xi_max: float = 8.0
    scatter_n: int = 200
    # basis export
    basis_xis: str = "0.2"
    basis_x_max: float = 40.0
    basis_n: int = 1601
    # linear decay
    linear_t_min: float = 10.0
    linear_t_max: float = 200.0
    linear_samples: int = 20
    linear_gamma: float = 0.6
    linear_width: float = 4.0
    # NLS
    lab_x_max: float = 1700.0
    lab_dx: float = 0.2
    lab_xi_max: float = 2.2
    mu: int = 1
    epsilon: float = 0.05
    t_end: float = 400.0
    dt0: float = 0.01
    dt_max: float = 0.1
    boundary_tol: float = 1e-6
    mass_tol: float = 1e-6
    record_per_octave: int = 4
    record: str = ""  # explicit comma list; overrides the dyadic schedule
    data_profile: str = "spectral"
    data_k0: float = 0.7
    data_width: float = 0.35
    data_left: float = 1.0
    data_phase: float = 3.141592653589793
    data_focus_t: float = 1.0
    # profile extraction
    v_min: float = -4.0
    v_max: float = 4.0
    v_n: int = 161
    fit_t_min: float = 50.0

    def __post_init__(self):
        if self.mode not in ("potential", "free"):
            raise ConfigError(f"mode must be 'potential' or 'free', got {self.mode!r}")
        if self.data_profile not in ("gaussian", "spectral"):
            raise ConfigError(f"unknown data_profile {self.data_profile!r}")
        if self.mu not in (-1, 0, 1):
            raise ConfigError("mu must be -1, 0 or 1")

    # -- serialization -----------------------------------------------------

    @classmethod
    def types(cls) -> dict:
        return {f.name: type(f.default) for f in fields(cls)}

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        """Parse ``key = value`` lines; ``#`` starts a comment."""
        types = cls.types()
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            values[key] = _convert(key, val, types[key])
        return cls(**values)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.parse(Path(path).read_text())

    def canonical(self) -> str:
        """One ``key = value`` line per field, in declaration order."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name} = {repr(v) if isinstance(v, float) else v}")
        return "\n".join(out) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    @property
    def free(self) -> bool:
        return self.mode == "free"

    # -- derived objects ---------------------------------------------------

    def default_grids(self):
        return (
            SpatialGrid.symmetric(self.grid_x_max, self.grid_n),
            FrequencyGrid.contiguous(self.freq_xi_max, self.freq_m),
        )

    def lab_grids(self):
        sg = SpatialGrid.from_spacing(self.lab_x_max, self.lab_dx)
        m = int(np.ceil(self.lab_xi_max * self.lab_x_max / np.pi + 0.5))
        return sg, FrequencyGrid.contiguous(self.lab_xi_max, m)

    def record_times(self) -> tuple:
        """``t_end * 2^{-j/k}`` down to 1, plus ``t = 1``, unless ``record`` is set."""
        if self.record:
            try:
                return tuple(sorted(float(s) for s in self.record.split(",")))
            except ValueError as exc:
                raise ConfigError(f"record: cannot read {self.record!r}") from exc
        k = self.record_per_octave
        j = np.arange(int(np.floor(k * np.log2(self.t_end))) + 1)
        t = self.t_end * 2.0 ** (-j / k)
        return tuple(np.unique(np.round(np.concatenate([[1.0], t[t >= 1]]), 9)))

    def solver(self):
        from .nls import SolverConfig

        return SolverConfig(
            mu=self.mu,
            epsilon=self.epsilon,
            t_end=self.t_end,
            dt0=self.dt0,
            dt_max=self.dt_max,
            record_times=self.record_times(),
            boundary_tol=self.boundary_tol,
            mass_tol=self.mass_tol,
        )

    def data_params(self) -> dict:
        if self.data_profile == "spectral":
            return {
                "profile": "spectral",
                "k0": self.data_k0,
                "width": self.data_width,
                "left": self.data_left,
                "phase": self.data_phase,
                "focus_t": self.data_focus_t,
            }
        return {"profile": "gaussian"}

    def v_grid(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.v_n)


def _convert(key, val, typ):
    try:
        if typ is bool:
            if val.lower() not in ("true", "false"):
                raise ValueError(val)
            return val.lower() == "true"
        if typ is int:
            return int(val)
        if typ is float:
            return float(val)
        return val.strip("\"'")
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {val!r} as {typ.__name__}") from exc


# --------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    return f"{float(x):.16e}"


def write_csv(path: Path, header, rows, config: RunConfig):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config.digest()}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating, int, np.integer)) else v for v in r])


def write_json(path: Path, payload: dict, config: RunConfig):
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"config_hash": config.digest(), **payload}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


def read_snapshot(path) -> tuple[float, np.ndarray, np.ndarray]:
    """``(t, x, u)`` from a snapshot CSV written by ``evolve-nls``."""
    t = None
    with open(path) as fh:
        line = fh.readline()
        while line.startswith("#"):
            if line.startswith("# t="):
                t = float(line[4:])
            line = fh.readline()
        # ``line`` now holds the column names
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if t is None:
        raise ConfigError(f"{path}: missing '# t=' header")
    return t, data[:, 0], data[:, 1] + 1j * data[:, 2]


# --------------------------------------------------------------------------
# commands


def cmd_scatter(cfg: RunConfig, out: Path) -> int:
    xis = np.geomspace(cfg.scatter_xi_min, cfg.scatter_xi_max, cfg.scatter_n)
    rows, failed = [], 0
    for xi in xis:
        try:
            s = scattering_coeffs(float(xi), free=cfg.free)
            rows.append([xi, s.T.real, s.T.imag, s.R.real, s.R.imag, s.unitarity_defect,
                         s.t0_estimate.real, s.t0_estimate.imag])
        except (IntegrationError, MatchingPointError, DegenerateWronskianError) as exc:
            failed += 1
            log.warning("xi=%g failed: %s", xi, exc)
            rows.append([xi] + ["nan"] * 7)
    write_csv(out / "scatter.csv",
              ["xi", "ReT", "ImT", "ReR", "ImR", "unitarity_defect", "Re_t0_estimate", "Im_t0_estimate"],
              rows, cfg)
    return EXIT_NUMERICAL if failed > 0.01 * len(xis) else EXIT_OK


def cmd_basis(cfg: RunConfig, out: Path, xis=None) -> int:
    from .dft import jost_column
    from .jost import ode_defect

    sg = SpatialGrid.symmetric(cfg.basis_x_max, cfg.basis_n)
    xis = xis or [float(s) for s in cfg.basis_xis.split(",")]
    for xi in xis:
        col, T, R, sol = jost_column(abs(xi), sg, cfg.free)
        if xi < 0:
            col = col[::-1]
        res = ode_defect(sol)
        rows = [[x, c.real, c.imag, res] for x, c in zip(sg.x, col)]
        write_csv(out / f"basis_xi{xi:g}.csv", ["x", "Re_e", "Im_e", "eigen_residual"], rows, cfg)
    return EXIT_OK


def linear_data(sg: SpatialGrid, width: float) -> ComplexField:
    """Gaussian ``exp(-(x/width)^2)`` used by the linear-flow commands."""
    return ComplexField(sg, np.exp(-((sg.x / width) ** 2)).astype(complex))


def cmd_evolve_linear(cfg: RunConfig, out: Path) -> int:
    from .dft import build_basis
    from .prop import dispersive_decay_fit, local_decay_fit, linf_series, local_series

    sg, fg = cfg.default_grids()
    basis = build_basis(sg, fg, free=cfg.free)
    f = linear_data(sg, cfg.linear_width)
    times = np.geomspace(cfg.linear_t_min, cfg.linear_t_max, cfg.linear_samples)
    glob = linf_series(f, basis, times)
    loc = local_series(f, basis, times, cfg.linear_gamma)
    write_csv(out / "linear.csv", ["t", "global_sup", "local_sup"],
              [[t, g, l] for t, g, l in zip(times, glob, loc)], cfg)
    gf = dispersive_decay_fit(f, basis, times)
    lf = local_decay_fit(f, basis, times, cfg.linear_gamma)
    write_json(out / "linear_fit.json",
               {"global_slope": gf.slope, "local_slope": lf.slope, "gamma": cfg.linear_gamma}, cfg)
    return EXIT_OK


def cmd_galilei_report(cfg: RunConfig, out: Path) -> int:
    from .dft import build_basis
    from .galilei import compare_fields
    from .prop import evolve_linear

    sg, fg = cfg.default_grids()
    basis = build_basis(sg, fg, free=cfg.free)
    f = linear_data(sg, cfg.linear_width)
    reports = []
    for t in np.geomspace(1, cfg.linear_t_max, 8):
        u = evolve_linear(f, float(t), basis)
        r = compare_fields(u, float(t), basis)
        reports.append(r.__dict__)
    write_json(out / "galilei.json", {"reports": reports}, cfg)
    return EXIT_OK


def _lab_basis(cfg: RunConfig):
    from .dft import build_basis, orthonormalize

    sg, fg = cfg.lab_grids()
    b = build_basis(sg, fg, free=cfg.free)
    return b if cfg.free else orthonormalize(b)


def run_nls(cfg: RunConfig, basis=None):
    """Evolve the configured NLS run and return ``(result, basis, cubic reports)``."""
    from .galilei import cubic_ratio
    from .nls import evolve, initial_data

    basis = basis or _lab_basis(cfg)
    state = initial_data(cfg.epsilon, basis, **cfg.data_params())
    cubic = {}

    def monitor(st):
        cubic[st.t] = cubic_ratio(st.u, st.t, basis).ratio

    res = evolve(cfg.solver(), basis, state, callbacks=[monitor])
    return res, basis, cubic


def cmd_evolve_nls(cfg: RunConfig, out: Path) -> int:
    from .nls import AccuracyError, BlowUpError

    try:
        res, basis, cubic = run_nls(cfg)
    except (AccuracyError, BlowUpError) as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL
    x = basis.sgrid.x
    snapdir = out / "snapshots"
    for k, (t, u) in enumerate(sorted(res.snapshots.items())):
        path = snapdir / f"snap_{k:03d}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(f"# config_hash={cfg.digest()}\n# t={t!r}\n")
            w = csv.writer(fh)
            w.writerow(["x", "Re_u", "Im_u"])
            for xi, ui in zip(x, u):
                w.writerow([fmt(xi), fmt(ui.real), fmt(ui.imag)])
    s = res.series
    diag = [
        {"t": t, "mass": m, "A": a, "B": b, "cubic_ratio": cubic.get(t)}
        for t, m, a, b in zip(s.times, s.masses, s.A_vals, s.B_vals)
    ]
    write_json(out / "diagnostics.json", {"records": diag, "aborted": res.aborted, "steps": res.steps}, cfg)
    return EXIT_OK


def cmd_extract_profile(cfg: RunConfig, out: Path, snap_dir: Path) -> int:
    from .prop import fit_decay
    from .scatter import extract_asymptotics, profile_series, remainder

    snaps, x = {}, None
    for p in sorted(Path(snap_dir).glob("snap_*.csv")):
        t, x, u = read_snapshot(p)
        snaps[t] = u
    if not snaps:
        raise ConfigError(f"no snapshots in {snap_dir}")
    dx = x[1] - x[0]
    sg = SpatialGrid(float(x[0]), float(x[-1]), x.size)
    if abs(sg.dx - dx) > 1e-9 * dx:
        raise ConfigError("snapshot grid is not uniform")
    series = profile_series(snaps, sg, cfg.v_grid())
    asym = extract_asymptotics(series, cfg.mu)
    write_csv(out / "profile.csv", ["v", "Re_u_inf", "Im_u_inf", "phi_inf"],
              [[v, u.real, u.imag, p] for v, u, p in zip(asym.v_grid, asym.u_inf, asym.phi_inf)], cfg)
    ts = [t for t in series.times if t >= cfg.fit_t_min]
    rem = [remainder(ComplexField(sg, snaps[t]), t, asym, cfg.mu) for t in ts]
    payload = {"cauchy_defects": {f"{a:g}/{b:g}": d for (a, b), d in asym.defects.items()}}
    if len(ts) >= 2:
        payload["linf_slope"] = fit_decay(ts, [r["linf"] for r in rem]).slope
        payload["l2_slope"] = fit_decay(ts, [r["l2"] for r in rem]).slope
    write_json(out / "profile_fit.json", payload, cfg)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path, only=None) -> int:
    from .verify import run_suite

    report = run_suite(cfg, only=only)
    write_json(out / "verify.json", {"criteria": report}, cfg)
    for r in report:
        log.info("criterion %2d %-4s %s", r["id"], "PASS" if r["passed"] else "FAIL", r["detail"])
    return EXIT_OK if all(r["passed"] for r in report) else EXIT_ACCEPTANCE


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modscat", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--out", type=Path, help="output directory (overrides out_dir)")
    p.add_argument("--mode", choices=["potential", "free"], help="overrides the configured mode")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("scatter", help="T and R over a log-spaced sweep")
    b = sub.add_parser("basis", help="export e(x, xi) columns")
    b.add_argument("--xi", type=float, action="append", help="wave number (repeatable)")
    sub.add_parser("evolve-linear", help="dispersive and local decay fits")
    sub.add_parser("galilei-report", help="J_0 versus J_V norms along the linear flow")
    n = sub.add_parser("evolve-nls", help="run the cubic NLS and write snapshots")
    n.add_argument("--epsilon", type=float)
    n.add_argument("--mu", type=int, choices=[-1, 0, 1])
    n.add_argument("--t-end", type=float)
    n.add_argument("--dt0", type=float)
    n.add_argument("--record", type=str, help="comma list of record times")
    e = sub.add_parser("extract-profile", help="u_inf and Phi_inf from NLS snapshots")
    e.add_argument("--snapshots", type=Path, help="snapshot directory (default OUT/snapshots)")
    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--only", type=str, help="comma list of criterion numbers")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        over = {}
        if args.mode:
            over["mode"] = args.mode
        if args.out:
            over["out_dir"] = str(args.out)
        if args.command == "evolve-nls":
            for k in ("epsilon", "mu", "t_end", "dt0", "record"):
                if getattr(args, k) is not None:
                    over[k] = getattr(args, k)
        cfg = replace(cfg, **over)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.canonical())
    try:
        if args.command == "scatter":
            return cmd_scatter(cfg, out)
        if args.command == "basis":
            return cmd_basis(cfg, out, args.xi)
        if args.command == "evolve-linear":
            return cmd_evolve_linear(cfg, out)
        if args.command == "galilei-report":
            return cmd_galilei_report(cfg, out)
        if args.command == "evolve-nls":
            return cmd_evolve_nls(cfg, out)
        if args.command == "extract-profile":
            return cmd_extract_profile(cfg, out, args.snapshots or out / "snapshots")
        only = [int(s) for s in args.only.split(",")] if args.only else None
        return cmd_verify(cfg, out, only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
