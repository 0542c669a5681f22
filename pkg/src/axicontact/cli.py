"""Command line front end: configuration, run orchestration and output.

Verbs::

    axicontact solve        --config run.ini [--out DIR] [--quiet]
    axicontact sweep        --config run.ini [--out DIR] [--threads N]
    axicontact convergence  --config run.ini [--out DIR]
    axicontact verify       --config run.ini [--out DIR]

The configuration is an INI file::

    [gas]           gamma, R
    [background]    rho_minus, P_b, rho_plus
    [grid]          L, N1, N2, grids (comma list of N for convergence runs)
    [perturbation]  J / nu / A / B = <basis> <coefficient>, sigma,
                    sigmas (comma list for sweeps)
    [tolerances]    inner_tol, outer_tol, max_inner, max_outer, theta,
                    damping, rho_lo, rho_hi, mach_sq_max, jacobian_min
    [run]           out, lattice

Tables are comma separated with a ``# config_sha256 = ...`` comment line
and a header row; floats are written with ``repr`` so reading them back
is bit exact.  Diagnostics are JSON.  Exit codes: 0 success, 2
configuration error, 3 inner iteration failure, 4 outer divergence, 5
linear solver failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .closure import Admissibility
from .core import BASES, CHANNELS, GasConstants, Grid, Perturbation, make_background, make_inlet
from .elliptic import manufactured_errors, observed_orders
from .errors import (
    BallExit,
    CompatibilityViolation,
    ConfigError,
    DegenerateFlow,
    JacobianDegenerate,
    LinearSolveFailure,
    NoConvergence,
    NonMonotoneRadius,
    NonPositive,
    NonPositiveFlux,
    OuterDivergence,
    RootBracketFailure,
    SolverError,
    SupersonicBackground,
    VacuumOrCavitation,
)
from .free_boundary import DEFAULT_DAMPING, newton_solve
from .lagrangian import to_physical
from .verify import (
    EQUATIONS,
    conservation_checks,
    corrupt_outer_pressure,
    default_bumps,
    lagrangian_residual,
    physical_euler_residual,
    pressure_surface_term,
    rankine_hugoniot_check,
    weak_form_check,
)

log = logging.getLogger("axicontact")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INNER = 3
EXIT_OUTER = 4
EXIT_LINEAR = 5

FIELD_COLUMNS = ("y1", "y2", "x", "r", "W1", "W2", "W3", "rho", "P")
CONTACT_COLUMNS = ("y1", "w", "g")

# --------------------------------------------------------------------------
# configuration

_SCHEMA = {
    "gas": {"gamma": (float, 1.4), "R": (float, 1.0)},
    "background": {"rho_minus": (float, 1.0), "P_b": (float, 5.0), "rho_plus": (float, 1.0)},
    "grid": {"L": (float, 1.0), "N1": (int, 64), "N2": (int, 64), "grids": ("ints", None)},
    "perturbation": {"sigma": (float, 0.0), "sigmas": ("floats", None),
                     **{ch: ("term", None) for ch in CHANNELS}},
    "tolerances": {"inner_tol": (float, 1e-11), "outer_tol": (float, 1e-9),
                   "max_inner": (int, 100), "max_outer": (int, 30), "theta": (float, 1.0),
                   "damping": (float, DEFAULT_DAMPING), "rho_lo": (float, 0.1),
                   "rho_hi": (float, 10.0), "mach_sq_max": (float, 0.99),
                   "jacobian_min": (float, 0.01)},
    "run": {"out": (str, "out"), "lattice": (int, 4)},
}


@dataclass
class Config:
    """Validated run configuration (see the module docstring for keys)."""

    values: dict
    terms: dict = field(default_factory=dict)
    digest: str = ""
    source: str = "<config>"

    def __getitem__(self, key):
        section, name = key
        return self.values[section][name]

    def gas(self) -> GasConstants:
        return GasConstants(self["gas", "gamma"], self["gas", "R"])

    def background(self):
        return make_background(self.gas(), self["background", "rho_minus"],
                               self["background", "P_b"], self["background", "rho_plus"])

    def perturbation(self) -> Perturbation:
        return Perturbation(dict(self.terms))

    def grid(self, N: int | None = None) -> Grid:
        N1 = N if N is not None else self["grid", "N1"]
        N2 = N if N is not None else self["grid", "N2"]
        return Grid(self["grid", "L"], N1, N2)

    def limits(self) -> Admissibility:
        t = self.values["tolerances"]
        return Admissibility(t["rho_lo"], t["rho_hi"], t["mach_sq_max"], t["jacobian_min"])

    def with_sigma(self, sigma: float) -> "Config":
        values = {k: dict(v) for k, v in self.values.items()}
        values["perturbation"]["sigma"] = float(sigma)
        return Config(values, dict(self.terms), self.digest, self.source)


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and "=" in s and s.split("=", 1)[0].strip() == key:
            return n
    return None


def _where(text, source, section, key) -> str:
    line = _line_of(text, section, key)
    at = f"{source}:{line}" if line is not None else source
    return f"{at}: [{section}] {key}"


def _convert(kind, raw: str):
    if kind in (float, int, str):
        return kind(raw)
    if kind == "ints":
        return [int(v) for v in raw.replace(",", " ").split()]
    if kind == "floats":
        return [float(v) for v in raw.replace(",", " ").split()]
    if kind == "term":
        parts = raw.split()
        if len(parts) != 2 or parts[0] not in BASES:
            raise ValueError(f"expected '<basis> <coefficient>' with basis in {sorted(BASES)}")
        return (parts[0], float(parts[1]))
    raise AssertionError(kind)


def parse_config(text: str, source: str = "<config>") -> Config:
    """Parse and validate configuration text; raises ConfigError."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{_where(text, source, section, key)}: unknown key")
    terms = {}
    for section, keys in _SCHEMA.items():
        values[section] = {}
        for key, (kind, default) in keys.items():
            raw = parser.get(section, key, fallback=None)
            if raw is None:
                values[section][key] = default
                continue
            try:
                values[section][key] = _convert(kind, raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{_where(text, source, section, key)} = {raw!r}: {exc}") from exc
            if kind == "term":
                terms[key] = values[section][key]
    _validate(values, text, source)
    canonical = json.dumps({"values": values, "terms": terms}, sort_keys=True)
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    return Config(values, terms, digest, source)


def _validate(values, text, source):
    def fail(section, key, why):
        raise ConfigError(f"{_where(text, source, section, key)} = "
                          f"{values[section][key]!r}: {why}")

    for section, key in (("grid", "L"), ("tolerances", "inner_tol"), ("tolerances", "outer_tol"),
                         ("background", "rho_minus"), ("background", "P_b"),
                         ("background", "rho_plus")):
        if not values[section][key] > 0.0:
            fail(section, key, "must be positive")
    for key in ("N1", "N2"):
        if values["grid"][key] < 8:
            fail("grid", key, "need at least 8 cells")
    grids = values["grid"]["grids"]
    if grids is not None and (len(grids) < 3 or any(b != 2 * a for a, b in zip(grids, grids[1:]))
                              or min(grids) < 8):
        fail("grid", "grids", "need at least three sizes, each doubling the previous")
    if not 0.0 < values["tolerances"]["theta"] <= 1.0:
        fail("tolerances", "theta", "must lie in (0, 1]")
    if values["tolerances"]["damping"] < 0.0:
        fail("tolerances", "damping", "must be non-negative")
    for key in ("max_inner", "max_outer"):
        if values["tolerances"][key] < 1:
            fail("tolerances", key, "must be at least 1")
    if values["perturbation"]["sigma"] < 0.0:
        fail("perturbation", "sigma", "must be non-negative")
    sig = values["perturbation"]["sigmas"]
    if sig is not None and (len(sig) < 2 or min(sig) < 0.0):
        fail("perturbation", "sigmas", "need at least two non-negative values")
    if values["run"]["lattice"] < 1:
        fail("run", "lattice", "must be at least 1")


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config(text, str(path))


# --------------------------------------------------------------------------
# tables


def write_table(path, columns, data, digest: str) -> None:
    """Write equal-length columns with a hash comment line and a header."""
    path = Path(path)
    # plain lists keep their element types (ints next to NaN stay ints)
    cols = [list(data[c]) if isinstance(data[c], (list, tuple)) else np.asarray(data[c]).ravel()
            for c in columns]
    with path.open("w", newline="") as fh:
        fh.write(f"# config_sha256 = {digest}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in zip(*cols):
            writer.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "n/a" if np.isnan(v) else repr(v)


def _parse(v: str):
    if v == "n/a":
        return float("nan")
    try:
        return float(v)
    except ValueError:
        return v


def read_table(path):
    """Read a table back: ``(digest, {column: array})``.

    Numeric columns become float arrays (``n/a`` is NaN); others stay
    arrays of strings.
    """
    with Path(path).open(newline="") as fh:
        first = fh.readline()
        if not first.startswith("# config_sha256 = "):
            raise ValueError(f"{path}: missing config hash line")
        digest = first.split("=", 1)[1].strip()
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[_parse(v) for v in row] for row in reader]
    out = {}
    for k, name in enumerate(header):
        col = [row[k] for row in rows]
        numeric = all(isinstance(v, float) for v in col)
        out[name] = np.array(col, dtype=float if numeric else object)
    return digest, out


def field_table(result, background) -> dict:
    """Columns of the per-cell field table for a Newton result."""
    st, grid = result.state, result.grid
    Y1, Y2 = grid.mesh()
    return {"y1": Y1, "y2": Y2, "x": Y1, "r": st.rhat, "W1": st.W1, "W2": st.W2, "W3": st.W3,
            "rho": st.rho, "P": st.pressure(background.gamma, background)}


def contact_table(result) -> dict:
    c = result.contact
    return {"y1": c.x_centers, "w": c.w, "g": c.g_centers}


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(type(v))


# --------------------------------------------------------------------------
# runs

_INNER_FAILURES = (NoConvergence, BallExit, VacuumOrCavitation, JacobianDegenerate,
                   DegenerateFlow, NonMonotoneRadius)
_DATA_FAILURES = (NonPositive, SupersonicBackground, CompatibilityViolation, NonPositiveFlux,
                  RootBracketFailure)


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the documented exit code (1 if unmapped)."""
    if isinstance(exc, (ConfigError,) + _DATA_FAILURES):
        return EXIT_CONFIG
    if isinstance(exc, _INNER_FAILURES):
        return EXIT_INNER
    if isinstance(exc, OuterDivergence):
        return EXIT_OUTER
    if isinstance(exc, LinearSolveFailure):
        return EXIT_LINEAR
    return 1


def _failure(exc: BaseException) -> dict:
    out = {"status": "failed", "exit_code": exit_code_for(exc),
           "error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, NoConvergence):
        out["history"] = exc.trace
    if isinstance(exc, OuterDivergence):
        out["history"] = exc.history
    return out


def solve_config(cfg: Config, N: int | None = None, sigma: float | None = None):
    """Inlet, background and Newton result for a configuration."""
    bg = cfg.background()
    amp = cfg["perturbation", "sigma"] if sigma is None else sigma
    inlet = make_inlet(bg, cfg.perturbation(), amp)
    t = cfg.values["tolerances"]
    result = newton_solve(inlet, bg, cfg.grid(N), outer_tol=t["outer_tol"],
                          max_outer=t["max_outer"], inner_tol=t["inner_tol"],
                          max_inner=t["max_inner"], limits=cfg.limits(),
                          damping=t["damping"], theta=t["theta"])
    return inlet, bg, result


def solve_diagnostics(inlet, result) -> dict:
    return {
        "status": "converged",
        "sigma_measured": inlet.sigma,
        "grid": {"L": result.grid.L, "N1": result.grid.N1, "N2": result.grid.N2,
                 "m": result.grid.m},
        "outer_iterations": result.outer_iterations,
        "contraction_ratio": result.contraction_ratio,
        "residual_history": result.q_history,
        "mismatch_history": result.mismatch_history,
        "inlet_mismatch_history": result.q0_history,
        "inner_iterations": [t.iterations for t in result.traces],
        "picard_differences": [t.differences for t in result.traces],
    }


def verify_report(result, background, lattice: int = 4, eps: float = 1e-3,
                  inlet=None) -> dict:
    """All verification norms for a converged solve.

    With ``inlet`` given, streamline invariants are compared against the
    inlet profiles at each point's label.
    """
    grid, st, c = result.grid, result.state, result.contact
    lag = lagrangian_residual(st, c, result.tilde, background)
    x = np.linspace(0.0, grid.L, lattice * grid.N1 + 1)
    nr = int(round(lattice * 1.6 * grid.N2)) + 1
    r = np.linspace(0.0, 0.8, nr)
    sol = to_physical(st, c, background, x, r)
    rh = rankine_hugoniot_check(sol)
    cons = conservation_checks(sol, grid.m**2, inlet)
    cons.pop("mass_flux_profile")
    bumps = default_bumps(grid.L)
    weak = weak_form_check(sol, bumps)
    bad = weak_form_check(corrupt_outer_pressure(sol, eps), bumps)
    expected = [pressure_surface_term(sol, b, eps) for b in bumps]
    return {
        "lagrangian": {"sup": lag.sup, "l2": lag.l2, "interior": lag.interior},
        "physical_euler": physical_euler_residual(sol),
        "rankine_hugoniot": {"normal_velocity": rh.normal_velocity,
                             "pressure_jump": rh.pressure_jump,
                             "tangential_jump": rh.tangential_jump},
        "conservation": cons,
        "weak_form": {eq: weak[:, k] for k, eq in enumerate(EQUATIONS)},
        "detector": {"eps": eps, "r_momentum": bad[:, 2], "expected": expected},
    }


def run_solve(cfg: Config, out: Path, verify: bool = False) -> int:
    out.mkdir(parents=True, exist_ok=True)
    try:
        inlet, bg, result = solve_config(cfg)
    except SolverError as exc:
        log.error("solve failed: %s: %s", type(exc).__name__, exc)
        _write_json(out / "diagnostics.json", _failure(exc))
        return exit_code_for(exc)
    write_table(out / "fields.csv", FIELD_COLUMNS, field_table(result, bg), cfg.digest)
    write_table(out / "contact.csv", CONTACT_COLUMNS, contact_table(result), cfg.digest)
    diag = solve_diagnostics(inlet, result)
    diag["config_sha256"] = cfg.digest
    if verify:
        diag["verify"] = verify_report(result, bg, cfg["run", "lattice"], inlet=inlet)
    _write_json(out / "diagnostics.json", diag)
    log.info("converged in %d outer steps, contraction ratio %.3g",
             result.outer_iterations, result.contraction_ratio)
    return EXIT_OK


SWEEP_COLUMNS = ("sigma", "sigma_measured", "status", "exit_code", "U_sup", "W_sup", "rho_sup",
                 "P_sup", "g_sup", "U_ratio", "g_ratio", "outer_iterations", "message")


def sweep_row(cfg: Config, sigma: float) -> dict:
    """One sweep row; failures are recorded rather than raised."""
    row = {k: float("nan") for k in SWEEP_COLUMNS}
    row.update(sigma=float(sigma), status="ok", exit_code=0, message="")
    try:
        inlet, bg, result = solve_config(cfg, sigma=sigma)
    except SolverError as exc:
        row.update(status="failed", exit_code=exit_code_for(exc),
                   message=f"{type(exc).__name__}: {exc}")
        return row
    st = result.state
    W = max(float(np.max(np.abs(f))) for f in (st.W1, st.W2, st.W3))
    rho = float(np.max(np.abs(st.rho - bg.rho_minus)))
    P = float(np.max(np.abs(st.pressure(bg.gamma, bg) - bg.P_b)))
    g = float(np.max(np.abs(result.contact.g_nodes - 0.5)))
    U = max(W, rho, P)
    row.update(sigma_measured=inlet.sigma, U_sup=U, W_sup=W, rho_sup=rho, P_sup=P, g_sup=g,
               outer_iterations=result.outer_iterations)
    if sigma > 0.0:
        row.update(U_ratio=U / sigma, g_ratio=g / sigma)
    return row


def run_sweep(cfg: Config, out: Path, threads: int = 1) -> int:
    sigmas = cfg["perturbation", "sigmas"]
    if sigmas is None:
        raise ConfigError(f"{cfg.source}: [perturbation] sigmas is required for a sweep")
    out.mkdir(parents=True, exist_ok=True)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(sweep_row, [cfg] * len(sigmas), sigmas))
    else:
        rows = [sweep_row(cfg, s) for s in sigmas]
    for row in rows:
        log.info("sigma %g: %s", row["sigma"], row["status"])
    table = {k: [row[k] for row in rows] for k in SWEEP_COLUMNS}
    write_table(out / "sweep.csv", SWEEP_COLUMNS, table, cfg.digest)
    return EXIT_OK


def run_convergence(cfg: Config, out: Path) -> int:
    grids = cfg["grid", "grids"]
    if grids is None:
        raise ConfigError(f"{cfg.source}: [grid] grids is required for a convergence run")
    out.mkdir(parents=True, exist_ok=True)
    bg = cfg.background()
    mms = [manufactured_errors(Grid(cfg["grid", "L"], N, N), bg.mach_sq) for N in grids]
    table = {"N": grids}
    for key in ("div_free", "curl_free"):
        errs = [e[key] for e in mms]
        table[f"{key}_error"] = errs
        table[f"{key}_order"] = np.concatenate(([np.nan], observed_orders(errs)))
    write_table(out / "convergence_mms.csv", tuple(table), table, cfg.digest)

    invariants = ("angular_momentum", "entropy", "bernoulli")
    rows = {"N": [], "interior_residual": [], "residual_sup": [], "mass_flux": []}
    rows.update({k: [] for k in invariants})
    for N in grids:
        try:
            inlet, _, result = solve_config(cfg, N)
        except SolverError as exc:
            log.error("solve at N = %d failed: %s", N, exc)
            return exit_code_for(exc)
        lag = lagrangian_residual(result.state, result.contact, result.tilde, bg)
        x = np.linspace(0.0, result.grid.L, cfg["run", "lattice"] * N + 1)
        r = np.linspace(0.0, 0.8, int(round(cfg["run", "lattice"] * 1.6 * N)) + 1)
        sol = to_physical(result.state, result.contact, bg, x, r)
        rows["N"].append(N)
        rows["interior_residual"].append(max(lag.interior.values()))
        rows["residual_sup"].append(lag.worst())
        cons = conservation_checks(sol, result.grid.m**2, inlet)
        for key in ("mass_flux",) + invariants:
            rows[key].append(cons[key])
    table = dict(rows)
    cols = ["N"]
    for key in ("interior_residual", "residual_sup", "mass_flux") + invariants:
        table[f"{key}_order"] = np.concatenate(([np.nan], observed_orders(rows[key])))
        cols += [key, f"{key}_order"]
    cols = tuple(cols)
    write_table(out / "convergence_residual.csv", cols, table, cfg.digest)
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="axicontact", description=__doc__.splitlines()[0])
    parser.add_argument("verb", choices=("solve", "sweep", "convergence", "verify"))
    parser.add_argument("--config", required=True, metavar="PATH", help="INI configuration")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides [run] out)")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker processes for sweep rows")
    parser.add_argument("--quiet", action="store_true", help="only report errors")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config)
        out = Path(args.out if args.out else cfg["run", "out"])
        if args.verb == "solve":
            return run_solve(cfg, out)
        if args.verb == "verify":
            return run_solve(cfg, out, verify=True)
        if args.verb == "sweep":
            return run_sweep(cfg, out, args.threads)
        return run_convergence(cfg, out)
    except SolverError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exit_code_for(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
