"""Batch front end: config parsing, experiment orchestration, CSV emission.

Config files are flat ``key = value`` text with ``#`` comments.  Every run
writes a manifest (config echo, versions, kernel backend, timings); all
other outputs are deterministic for a fixed config and seed.

Exit codes: 0 success, 2 config error, 3 numerical failure (diagnostic
file written), 4 prerequisite-condition abort.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
import traceback

import numpy as np

from . import __version__, kernels
from .cauchy import CauchyData, cauchy_data_of
from .entire import boundary_preset
from .errors import (ConditionCheckError, ConfigError, SeparationViolation,
                     SpecreconError)
from .glrecon import reconstruct_q, weyl_data
from .grids import Grid, Potential
from .halfinv import (HalfInverseInstance, estimate_Omega,
                      full_dirichlet_spectrum, solve_half_inverse)
from .moments import build_vsystem, condition_report, recovered_cauchy, \
    solve_moment
from .propagate import omega_of
from .spectra import EigenvalueList, default_region, find_eigenvalues
from .stability import NoiseSpec, loglog_slope, perturb_and_measure, \
    write_reports

PI = math.pi
COMMANDS = ("forward-spectrum", "cauchy", "reconstruct", "half-inverse",
            "stability")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

class RunConfig(dict):
    """Flat key/value configuration with typed accessors."""

    def get_str(self, key, default=None):
        if key not in self and default is None:
            raise ConfigError(f"missing config key '{key}'")
        return self.get(key, default)

    def get_int(self, key, default=None):
        val = self.get_str(key, None if default is None else str(default))
        try:
            return int(val)
        except ValueError as exc:
            raise ConfigError(f"{key} = {val!r} is not an integer") from exc

    def get_complex(self, key, default=None):
        val = self.get_str(key, None if default is None else str(default))
        try:
            return complex(val.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"{key} = {val!r} is not a number") from exc

    def get_floats(self, key, default=None):
        val = self.get_str(key, default)
        try:
            return [float(tok) for tok in val.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"{key} = {val!r} is not a float list") from exc


def parse_config(path) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} does not exist")
    cfg = RunConfig()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            cfg[key.strip()] = val.strip()
    return cfg


def _power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _load_potential(cfg: RunConfig, endpoint: float, default_cells: int):
    cells = cfg.get_int("grid_cells", default_cells)
    if not _power_of_two(cells):
        raise ConfigError(f"grid_cells = {cells} must be a power of two")
    spec = cfg.get_str("potential", "zero")
    if spec.startswith("file:"):
        path = spec[5:].strip()
        if not os.path.exists(path):
            raise ConfigError(f"potential file {path} does not exist")
        q = Potential.read(path)
        if abs(q.grid.endpoint - endpoint) > 1e-9:
            raise ConfigError(
                f"potential endpoint {q.grid.endpoint} != {endpoint}")
        return q
    grid = Grid(endpoint, cells)
    try:
        return Potential.preset(spec, grid)
    except Exception as exc:
        raise ConfigError(f"unknown potential {spec!r}") from exc


def _load_boundary(cfg: RunConfig):
    spec = cfg.get_str("boundary", "dirichlet")
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    try:
        if name == "robin":
            return boundary_preset("robin", h=complex(arg))
        if name == "poly":
            c1_str, _, c2_str = arg.partition(";")
            c1 = [complex(t) for t in c1_str.split(",") if t.strip()]
            c2 = [complex(t) for t in c2_str.split(",") if t.strip()]
            return boundary_preset("poly", c1=c1, c2=c2)
        return boundary_preset(name)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad boundary spec {spec!r}") from exc


def _load_spectrum(cfg: RunConfig, key="spectrum"):
    spec = cfg.get_str(key, "forward")
    if spec == "forward":
        return None
    if spec.startswith("file:"):
        path = spec[5:].strip()
        if not os.path.exists(path):
            raise ConfigError(f"spectrum file {path} does not exist")
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if rows.shape[1] < 3:
            raise ConfigError(f"{path}: expected columns n,re,im[,mult]")
        values = rows[:, 1] + 1j * rows[:, 2]
        mult = rows[:, 3].astype(int) if rows.shape[1] > 3 \
            else np.ones(len(values), dtype=int)
        pairs = [(complex(v), int(m)) for v, m in zip(values, mult)]
        return EigenvalueList.from_roots(pairs)
    raise ConfigError(f"spectrum must be 'forward' or 'file:...', got {spec!r}")


def write_spectrum(evs: EigenvalueList, path):
    """One row per distinct eigenvalue, excluding the prepended zero slot
    (the loader adds it back, so the file carries only genuine data)."""
    with open(path, "w") as fh:
        fh.write("n,re,im,mult\n")
        row = 1
        for n, lam, m in evs.distinct():
            if n == 0:
                if m <= 1:
                    continue
                m = m - 1  # the slot itself is not data
            fh.write("%d,%.17g,%.17g,%d\n" % (row, lam.real, lam.imag, m))
            row += m


def emit_plotdata(names, columns, path):
    """Gnuplot-compatible whitespace table with a '#' header line."""
    columns = [np.asarray(c) for c in columns]
    if not columns or any(len(c) == 0 for c in columns) \
            or len(names) != len(columns):
        raise ValueError("plot data must be non-empty and consistent")
    with open(path, "w") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in zip(*columns):
            fh.write(" ".join("%.17g" % float(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_forward_spectrum(cfg, out, seed, log):
    interval = cfg.get_str("interval", "pi")
    count = cfg.get_int("count", 30)
    if interval == "2pi":
        q = _load_potential(cfg, 2 * PI, 4096)
        evs = full_dirichlet_spectrum(q, count)
        omega_full = estimate_Omega(evs) if len(evs) > 20 else 0.0
        n = np.arange(1, len(evs))
        asymptote = n / 2 + complex(omega_full).real / (PI * n)
    else:
        q = _load_potential(cfg, PI, 2048)
        bp = _load_boundary(cfg)
        evs = find_eigenvalues(bp, q, default_region(count, interval=PI))
        n = np.arange(1, len(evs))
        asymptote = n.astype(float)
    write_spectrum(evs, os.path.join(out, "eigenvalues.csv"))
    rhos = np.sqrt(np.abs(evs.values[1:]))
    emit_plotdata(["n", "sqrt_lambda", "asymptote"],
                  [n, rhos, asymptote],
                  os.path.join(out, "asymptotics.dat"))
    log(f"wrote {len(evs) - 1} eigenvalues")
    return {"eigenvalues": len(evs) - 1}


def _cmd_cauchy(cfg, out, seed, log):
    q = _load_potential(cfg, PI, 2048)
    n_modes = cfg.get_int("n_modes", 64)
    cd = cauchy_data_of(q, n_modes=n_modes)
    cd.write(os.path.join(out, "cauchy.csv"))
    log(f"wrote Cauchy data with {n_modes} modes")
    return {"n_modes": n_modes}


def _cmd_reconstruct(cfg, out, seed, log):
    n_rows = cfg.get_int("N", 40)
    if n_rows < 5:
        raise ConfigError(f"N = {n_rows} violates N >= 5")
    q = _load_potential(cfg, PI, 2048)
    bp = _load_boundary(cfg)
    evs = _load_spectrum(cfg)
    if evs is None:
        evs = find_eigenvalues(bp, q, default_region(n_rows + 4, interval=PI))
    omega_spec = cfg.get_str("omega", "auto")
    omega = omega_of(q) if omega_spec == "auto" \
        else cfg.get_complex("omega")
    evs_used = evs.truncated(n_rows) if len(evs) > n_rows + 1 else evs
    report = condition_report(bp, evs_used, interval=PI)
    report.write(os.path.join(out, "conditions.csv"))
    if cfg.get_str("check_conditions", "on") == "on" and not report.passed:
        raise ConditionCheckError("prerequisite conditions failed", report)

    vs = build_vsystem(bp, evs, omega, n_rows, grid=q.grid)
    sol = solve_moment(vs)
    with open(os.path.join(out, "gram_cond.txt"), "w") as fh:
        fh.write("%.17g\n" % sol.gram_cond)
    with open(os.path.join(out, "residuals.csv"), "w") as fh:
        fh.write("n,abs_residual\n")
        for n, r in enumerate(sol.residuals):
            fh.write("%d,%.17g\n" % (n, abs(r)))
    with open(os.path.join(out, "u.csv"), "w") as fh:
        fh.write("t,u1_re,u1_im,u2_re,u2_im\n")
        for t, a, b in zip(vs.grid.x(), sol.u.h1, sol.u.h2):
            fh.write("%.17g,%.17g,%.17g,%.17g,%.17g\n"
                     % (t, a.real, a.imag, b.real, b.imag))
    cd = recovered_cauchy(sol.u, omega)
    cd.write(os.path.join(out, "cauchy_rec.csv"))
    count = cfg.get_int("weyl_count", max(10, min(n_rows // 2, 30)))
    wd = weyl_data(cd, count)
    wd.write(os.path.join(out, "weyl.csv"))
    q_rec = reconstruct_q(wd, omega, q.grid)
    q_rec.write(os.path.join(out, "recovered.dat"))
    log(f"reconstruction done, gram condition {sol.gram_cond:.3g}")
    return {"gram_cond": sol.gram_cond,
            "max_residual": float(np.max(np.abs(sol.residuals)))}


def _cmd_half_inverse(cfg, out, seed, log):
    n_rows = cfg.get_int("N", 40)
    if n_rows < 5:
        raise ConfigError(f"N = {n_rows} violates N >= 5")
    q_full = _load_potential(cfg, 2 * PI, 4096)
    evs = _load_spectrum(cfg)
    if evs is None:
        evs = full_dirichlet_spectrum(q_full, n_rows + 4)
    omega_spec = cfg.get_str("Omega", "fit")
    big_omega = None if omega_spec == "fit" else cfg.get_complex("Omega")
    inst = HalfInverseInstance(q_full, evs, Omega=big_omega)
    try:
        res = solve_half_inverse(inst, n_rows)
    except ConditionCheckError as exc:
        if exc.report is not None:
            exc.report.write(os.path.join(out, "conditions.csv"))
        raise
    res.report.write(os.path.join(out, "conditions.csv"))
    res.q.write(os.path.join(out, "recovered.dat"))
    res.weyl.write(os.path.join(out, "weyl.csv"))
    res.cauchy.write(os.path.join(out, "cauchy_rec.csv"))
    with open(os.path.join(out, "gram_cond.txt"), "w") as fh:
        fh.write("%.17g\n" % res.moment.gram_cond)
    with open(os.path.join(out, "residuals.csv"), "w") as fh:
        fh.write("n,abs_residual\n")
        for n, r in enumerate(res.moment.residuals):
            fh.write("%d,%.17g\n" % (n, abs(r)))
    log(f"recovered potential written; omega = {res.omega:.6g}")
    return {"omega": repr(res.omega)}


def _cmd_stability(cfg, out, seed, log):
    q = _load_potential(cfg, PI, 2048)
    deltas = cfg.get_floats("deltas", "1e-4,1e-3,1e-2")
    trials = cfg.get_int("trials", 20)
    modes = cfg.get_int("modes", 8)
    count = cfg.get_int("count", 20)
    all_rows = []
    medians = []
    for i, delta in enumerate(deltas):
        reps = perturb_and_measure(q, NoiseSpec(delta, modes), trials,
                                   seed=seed + 1000 * i, count=count)
        ok = [r for r in reps if not r.failed]
        all_rows.extend((delta, r) for r in reps)
        med = dict(
            delta=delta,
            xi=float(np.median([r.Xi for r in ok])) if ok else float("nan"),
            q_err=float(np.median([r.q_err for r in ok])) if ok
            else float("nan"),
            xi_l2=float(np.median([r.xi_l2 for r in ok])) if ok
            else float("nan"),
            gamma=float(np.median([r.M_gamma0_err for r in ok])) if ok
            else float("nan"),
            n_failed=len(reps) - len(ok),
        )
        medians.append(med)
        log(f"delta {delta:g}: median q_err "
            f"{med['q_err']:.3e} over {len(ok)} trials")
    slope = loglog_slope([m["xi"] for m in medians],
                         [m["q_err"] for m in medians])
    with open(os.path.join(out, "trials.csv"), "w") as fh:
        fh.write("# omega held fixed across perturbations\n")
        fh.write("delta,trial,seed,Xi,q_err,xi_l2,M_gamma0_err,C_est,failed\n")
        for delta, r in all_rows:
            fh.write(("%g," % delta) + ",".join(str(v) for v in r.row())
                     + "\n")
    with open(os.path.join(out, "summary.csv"), "w") as fh:
        fh.write("delta,median_Xi,median_q_err,median_xi_l2,"
                 "median_gamma0,ratio_q,ratio_xi,ratio_gamma0,"
                 "n_failed,slope\n")
        for m in medians:
            fh.write("%g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n"
                     % (m["delta"], m["xi"], m["q_err"], m["xi_l2"],
                        m["gamma"], m["q_err"] / m["xi"],
                        m["xi_l2"] / m["xi"], m["gamma"] / m["xi"],
                        m["n_failed"], slope))
    log(f"log-log slope of median q_err vs Xi: {slope:.4f}")
    return {"slope": slope}


_HANDLERS = {
    "forward-spectrum": _cmd_forward_spectrum,
    "cauchy": _cmd_cauchy,
    "reconstruct": _cmd_reconstruct,
    "half-inverse": _cmd_half_inverse,
    "stability": _cmd_stability,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _thread_cap():
    raw = os.environ.get("SPECRECON_THREADS", "")
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


def run(command: str, cfg: RunConfig, out_dir: str, seed: int,
        quiet: bool) -> int:
    def log(msg):
        if not quiet:
            print(f"[specrecon] {msg}")

    if command not in _HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    if "command" in cfg and cfg["command"] != command:
        raise ConfigError(
            f"config says command = {cfg['command']!r}, invoked {command!r}")
    os.makedirs(out_dir, exist_ok=True)

    cap = _thread_cap()
    cap_note = "unset"
    if cap is not None:
        cap_note = str(cap)
        try:
            from threadpoolctl import threadpool_limits
            threadpool_limits(cap)
        except ImportError:
            cap_note += " (threadpoolctl unavailable; advisory only)"

    t0 = time.time()
    extra = _HANDLERS[command](cfg, out_dir, seed, log)
    elapsed = time.time() - t0

    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write(f"command: {command}\n")
        fh.write(f"specrecon version: {__version__}\n")
        fh.write(f"numpy version: {np.__version__}\n")
        fh.write(f"kernel backend: {kernels.backend_name()}\n")
        fh.write(f"seed: {seed}\n")
        fh.write(f"thread cap: {cap_note}\n")
        fh.write(f"elapsed seconds: {elapsed:.3f}\n")
        fh.write("timestamp: %s\n" % time.strftime("%Y-%m-%dT%H:%M:%S"))
        fh.write("config:\n")
        for key in sorted(cfg):
            fh.write(f"  {key} = {cfg[key]}\n")
        for key, val in (extra or {}).items():
            fh.write(f"result {key}: {val}\n")
    log(f"done in {elapsed:.1f}s, outputs in {out_dir}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="specrecon",
        description="Forward and inverse Sturm-Liouville computations with "
                    "entire functions in the boundary condition")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="key = value file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    out_dir = args.out if args.out else f"out-{args.command}"
    try:
        cfg = parse_config(args.config)
        return run(args.command, cfg, out_dir, args.seed, args.quiet)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConditionCheckError, SeparationViolation) as exc:
        print(f"condition check failed: {exc}", file=sys.stderr)
        return 4
    except SpecreconError as exc:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "error.txt"), "w") as fh:
            fh.write(traceback.format_exc())
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
