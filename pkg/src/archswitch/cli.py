"""Command-line harness: critical | predict | simulate | compare | sweep.

Settings come from an optional TOML file (``--config``) and are overridden
by flags.  Tables and keys::

    [arch]        Q, a, modes, c            (nondimensional arch)
    [geometry]    span, thickness, width, youngs_modulus, density, rise,
                  damping, a, modes         (dimensional alternative)
    [load]        epsilon | nu, F0
    [simulation]  model, rtol, atol, threshold, max_time, initial,
                  tail_completion, record_stride, post_switch
    [compare]     regimes, Q, epsilon, nu
    [sweep]       axes = [{name = "ratio", values = [...]}, ...], numeric, damped
    [output]      out, format, workers

Exit status: 0 success, 2 invalid input, 3 arch not bistable, 4 integration
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .analytic import Regime, predict
from .dynamics import InertiaWarning, SimulationConfig, simulate_switching, integrate_full, integrate_overdamped
from .errors import ArchSwitchError, IntegrationError, NotBistable, ValidationError
from .model import ArchGeometry, LoadProgram, NondimArch, nondimensionalize
from .statics import critical_point, fold_eigen_ratio, trace_equilibrium_path

__all__ = ["ExperimentSpec", "ResultRow", "main", "build_parser", "load_spec", "run_compare", "run_sweep"]

SCHEMA_VERSION = 1

EXIT_OK, EXIT_VALIDATION, EXIT_NOT_BISTABLE, EXIT_INTEGRATION = 0, 2, 3, 4

_SIM_KEYS = ("model", "rtol", "atol", "threshold", "max_time", "initial", "tail_completion", "record_stride")
_AXIS_SCALARS = ("Q", "c", "epsilon", "nu", "F0", "ratio")


# --------------------------------------------------------------------------
# experiment description


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one CLI invocation needs; picklable for worker processes."""

    arch: NondimArch
    load: LoadProgram = LoadProgram()
    damped: bool | None = None
    sim: SimulationConfig = SimulationConfig()
    regimes: tuple[str, ...] = ()
    grids: dict = field(default_factory=dict)
    axes: tuple[tuple[str, tuple[float, ...]], ...] = ()
    numeric: bool = True
    post_switch: float = 0.0
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1


@dataclass
class ResultRow:
    """One analytic-versus-numeric comparison."""

    regime: str
    Q: float
    a: tuple
    c: float
    epsilon: float | None
    nu: float | None
    F_c: float | None = None
    K: float | None = None
    tau_c: float | None = None
    tau_analytic: float | None = None
    tau_numeric: float | None = None
    delay_analytic: float | None = None
    delay_numeric: float | None = None
    F_switch: float | None = None
    F_switch_analytic: float | None = None
    rel_error: float | None = None
    status: str = "ok"

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["a"] = list(self.a)
        return d


def _floats(v, name) -> tuple[float, ...]:
    if isinstance(v, (int, float)):
        v = [v]
    try:
        out = tuple(float(x) for x in v)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number or a list of numbers") from None
    if not all(math.isfinite(x) for x in out):
        raise ValidationError(f"{name} must be finite")
    return out


def _tidy(x) -> float:
    # generated grid points: drop round-off so 0:1.2:13 gives 0.1, not 0.09999999999999999
    return float(f"{float(x):.15g}")


def _parse_values(text: str) -> tuple[float, ...]:
    """``1,2,3``  or  ``start:stop:num`` (linear)  or  ``log:start:stop:num``."""
    text = text.strip()
    try:
        if text.startswith("log:"):
            lo, hi, n = text[4:].split(":")
            return tuple(_tidy(x) for x in np.logspace(math.log10(float(lo)), math.log10(float(hi)), int(n)))
        if text.count(":") == 2:
            lo, hi, n = text.split(":")
            return tuple(_tidy(x) for x in np.linspace(float(lo), float(hi), int(n)))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ValidationError(f"cannot parse value list {text!r}") from None


def _build_arch(conf: dict, args) -> NondimArch:
    arch_t = dict(conf.get("arch", {}))
    geom_t = dict(conf.get("geometry", {}))
    a = args.a if args.a is not None else arch_t.get("a", geom_t.get("a", [1.0]))
    modes = args.modes if args.modes is not None else arch_t.get("modes", geom_t.get("modes"))
    a = _floats(a, "a")
    modes = None if modes is None else tuple(int(m) for m in modes)
    if geom_t and not arch_t:
        fields = ("span", "thickness", "width", "youngs_modulus", "density", "rise")
        missing = [k for k in fields if k not in geom_t]
        if missing:
            raise ValidationError(f"[geometry] is missing {', '.join(missing)}")
        g = ArchGeometry(**{k: float(geom_t[k]) for k in fields})
        arch, _ = nondimensionalize(g, float(geom_t.get("damping", 0.0)), a, modes)
        if args.Q is not None or args.c is not None:
            arch = replace(
                arch,
                Q=arch.Q if args.Q is None else args.Q,
                c=arch.c if args.c is None else args.c,
            )
        return arch
    Q = args.Q if args.Q is not None else arch_t.get("Q", 6.0)
    c = args.c if args.c is not None else arch_t.get("c", 100.0)
    return NondimArch(Q=float(Q), a=a, c=float(c), modes=modes)


def load_spec(argv_args, command: str) -> ExperimentSpec:
    """Merge the TOML file (if any) with flag overrides."""
    conf: dict = {}
    if getattr(argv_args, "config", None):
        try:
            with open(argv_args.config, "rb") as fh:
                conf = tomllib.load(fh)
        except OSError as e:
            raise ValidationError(f"cannot read config: {e}") from None
        except tomllib.TOMLDecodeError as e:
            raise ValidationError(f"invalid config: {e}") from None
    a = argv_args
    arch = _build_arch(conf, a)

    load_t = conf.get("load", {})
    eps = a.epsilon if a.epsilon is not None else load_t.get("epsilon", 0.0)
    nu = a.nu if a.nu is not None else load_t.get("nu", 0.0)
    F0 = a.F0 if a.F0 is not None else load_t.get("F0", 0.0)
    load = LoadProgram(F0=float(F0), nu=float(nu), epsilon=float(eps))

    sim_t = dict(conf.get("simulation", {}))
    post_switch = float(sim_t.pop("post_switch", 0.0))
    unknown = set(sim_t) - set(_SIM_KEYS)
    if unknown:
        raise ValidationError(f"unknown [simulation] keys: {sorted(unknown)}")
    for k in _SIM_KEYS:
        v = getattr(a, k, None)
        if v is not None:
            sim_t[k] = v
    if getattr(a, "post_switch", None) is not None:
        post_switch = a.post_switch
    sim = SimulationConfig(**sim_t)

    cmp_t = conf.get("compare", {})
    regimes = tuple(a.regime) if getattr(a, "regime", None) else tuple(cmp_t.get("regimes", ()))
    for r in regimes:
        try:
            Regime(r)
        except ValueError:
            raise ValidationError(f"unknown regime {r!r}; choose from {[x.value for x in Regime]}") from None
    grids = {k: _floats(cmp_t[k], k) for k in ("Q", "epsilon", "nu") if k in cmp_t}
    for item in getattr(a, "grid", None) or ():
        name, _, vals = item.partition("=")
        if name not in ("Q", "epsilon", "nu"):
            raise ValidationError(f"--grid name must be Q, epsilon or nu, got {name!r}")
        grids[name] = _parse_values(vals)

    sw_t = conf.get("sweep", {})
    axes = []
    for ax in sw_t.get("axes", ()):
        if not isinstance(ax, dict) or "name" not in ax or "values" not in ax:
            raise ValidationError("each sweep axis needs name and values")
        axes.append((str(ax["name"]), _floats(ax["values"], ax["name"])))
    if getattr(a, "axis", None):
        axes = []
        for item in a.axis:
            name, _, vals = item.partition("=")
            axes.append((name, _parse_values(vals)))
    for name, vals in axes:
        _check_axis(name, arch)
        if not vals:
            raise ValidationError(f"sweep axis {name!r} is empty")
    numeric = bool(sw_t.get("numeric", True)) if getattr(a, "analytic_only", False) is False else False

    damped = sw_t.get("damped") if command == "sweep" else None
    if getattr(a, "damped", None) is not None:
        damped = a.damped

    out_t = conf.get("output", {})
    out = a.out if a.out is not None else out_t.get("out")
    fmt = a.format if a.format is not None else out_t.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ValidationError("format must be csv or json")
    workers = a.workers if a.workers is not None else int(out_t.get("workers", 1))
    if workers < 1:
        raise ValidationError("workers must be at least 1")
    return ExperimentSpec(
        arch=arch,
        load=load,
        damped=damped,
        sim=sim,
        regimes=regimes,
        grids=grids,
        axes=tuple(axes),
        numeric=numeric,
        post_switch=post_switch,
        out=out,
        fmt=fmt,
        workers=workers,
    )


def _check_axis(name: str, arch: NondimArch):
    if name in _AXIS_SCALARS:
        if name == "ratio" and arch.N < 2:
            raise ValidationError("axis 'ratio' needs at least two modes")
        return
    if name.startswith("a") and name[1:].isdigit() and 1 <= int(name[1:]) <= arch.N:
        return
    raise ValidationError(f"unknown sweep axis {name!r}")


# --------------------------------------------------------------------------
# output


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return v
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_num(x) for x in v]
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def write_rows(rows: Sequence[dict], columns: Sequence[str], spec: ExperimentSpec, command: str, extra: dict | None = None):
    """Emit long-form CSV (shortest round-trip floats) or JSON."""
    if spec.fmt == "json":
        payload = {"schema": f"archswitch/{command}/v{SCHEMA_VERSION}", "rows": [_num(r) for r in rows]}
        if extra:
            payload.update(_num(extra))
        text = json.dumps(payload, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# archswitch/{command}/v{SCHEMA_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(k)) for k in columns])
        text = buf.getvalue()
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_critical(spec: ExperimentSpec) -> int:
    cp = critical_point(spec.arch)
    row = cp.as_dict()
    row.update(bistable=True, eig_ratio=fold_eigen_ratio(cp, spec.arch), Q=spec.arch.Q, a=list(spec.arch.a))
    cols = ["Q", "a", "delta_c", "F_c", "K", "p", "A_c", "V1", "eig_ratio", "bistable"]
    write_rows([row], cols, spec, "critical")
    return EXIT_OK


def cmd_predict(spec: ExperimentSpec) -> int:
    cp = critical_point(spec.arch)
    pred = predict(spec.arch, spec.load, damped=spec.damped, cp=cp)
    row = pred.as_dict()
    row.update(F_c=cp.F_c, K=cp.K, p=cp.p, c=spec.arch.c, epsilon=spec.load.epsilon, nu=spec.load.nu)
    cols = ["regime", "c", "epsilon", "nu", "F_c", "K", "p", "tau_c", "delay", "tau_inf", "F_switch"]
    write_rows([row], cols, spec, "predict")
    return EXIT_OK


def _static_overlay(arch, cp, delta):
    """Static force at each ``delta`` and first-branch static deflection at each load."""
    dmax = float(np.nanmax(delta)) if len(delta) else cp.delta_c
    grid = np.linspace(0.0, max(dmax, cp.delta_c), 801)
    try:
        path = trace_equilibrium_path(arch, grid)
        F_grid = np.asarray(path.F)
        d_grid = np.asarray(path.delta)
    except ArchSwitchError:
        grid = np.linspace(0.0, cp.delta_c, 401)
        path = trace_equilibrium_path(arch, grid)
        F_grid, d_grid = np.asarray(path.F), np.asarray(path.delta)
    F_static = np.interp(delta, d_grid, F_grid, left=np.nan, right=np.nan)
    first = d_grid <= cp.delta_c
    return F_static, (d_grid[first], F_grid[first])


def cmd_simulate(spec: ExperimentSpec) -> int:
    arch, load, sim = spec.arch, spec.load, spec.sim
    cp = critical_point(arch)
    ev, ts = simulate_switching(arch, load, sim, cp)
    if spec.post_switch > 0.0:
        run = integrate_full if sim.model == "full" else integrate_overdamped
        ts = run(arch, load, sim.with_(stop_at_switch=False, max_time=ev.tau_switch + spec.post_switch), cp)
    en = ts.energies()
    F_static, (d1, F1) = _static_overlay(arch, cp, ts.delta)
    F = ts.F
    delta_static = np.where((F >= 0.0) & (F <= cp.F_c), np.interp(F, F1, d1), np.nan)
    n = arch.N
    cols = ["tau", "delta", "F", "F_static", "delta_static"]
    cols += [f"A{i + 1}" for i in range(n)] + [f"Adot{i + 1}" for i in range(n)]
    cols += ["bending", "compression", "work", "kinetic", "total"]
    rows = []
    for k in range(len(ts)):
        r = {"tau": ts.tau[k], "delta": ts.delta[k], "F": F[k], "F_static": F_static[k], "delta_static": delta_static[k]}
        for i in range(n):
            r[f"A{i + 1}"] = ts.A[k, i]
            r[f"Adot{i + 1}"] = ts.Adot[k, i]
        for name in ("bending", "compression", "work", "kinetic", "total"):
            r[name] = en[name][k]
        rows.append(r)
    event = ev.as_dict()
    write_rows(rows, cols, spec, "simulate", {"event": event, "critical": cp.as_dict()})
    print(json.dumps(_num({"event": event})), file=sys.stderr)
    return EXIT_OK


def _fit_slope(x, y) -> float | None:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def compare_row(arch: NondimArch, regime: Regime, x: float, sim: SimulationConfig) -> ResultRow:
    """Analytic and numeric switching for one grid point; failures become a status."""
    damped = regime.is_damped
    arch = arch.with_damping(arch.c if damped else 0.0)
    load = LoadProgram(nu=x) if regime.is_ramp else LoadProgram(epsilon=x)
    row = ResultRow(regime.value, arch.Q, tuple(arch.a), arch.c, None if regime.is_ramp else x, x if regime.is_ramp else None)
    try:
        cp = critical_point(arch)
        row.F_c, row.K = cp.F_c, cp.K
        pred = predict(arch, load, damped=damped, cp=cp)
        row.tau_analytic = pred.tau_inf
        row.tau_c, row.delay_analytic = pred.tau_c, pred.delay
        row.F_switch_analytic = pred.F_switch
        cfg = sim.with_(model="overdamped" if damped else "full")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", InertiaWarning)
            ev, _ = simulate_switching(arch, load, cfg, cp)
        row.tau_numeric = ev.tau_switch
        row.F_switch = ev.F_switch
        if regime.is_ramp:
            row.delay_numeric = ev.tau_switch - pred.tau_c
        row.rel_error = abs(row.tau_numeric - row.tau_analytic) / abs(row.tau_numeric)
    except NotBistable as e:
        row.status = f"not-bistable: {e}"
    except IntegrationError as e:
        row.status = f"integration-failed: {e}"
    except ValidationError as e:
        row.status = f"invalid: {e}"
    return row


def _compare_task(args):
    arch, regime, x, sim = args
    return compare_row(arch, Regime(regime), x, sim)


def run_compare(spec: ExperimentSpec) -> tuple[list[ResultRow], dict]:
    if not spec.regimes:
        raise ValidationError("compare needs at least one regime")
    Qs = spec.grids.get("Q", (spec.arch.Q,))
    tasks = []
    for r in spec.regimes:
        reg = Regime(r)
        key = "nu" if reg.is_ramp else "epsilon"
        xs = spec.grids.get(key, ())
        if not xs or not Qs:
            raise ValidationError(f"regime {r} needs a nonempty {key} grid")
        if any(x <= 0.0 for x in xs):
            raise ValidationError(f"{key} grid values must be positive")
        for Q in Qs:
            arch = replace(spec.arch, Q=float(Q))
            tasks.extend((arch, r, float(x), spec.sim) for x in xs)
    rows = _map(_compare_task, tasks, spec.workers)
    summary: dict[str, Any] = {"groups": []}
    errs = [r.rel_error for r in rows if r.rel_error is not None]
    summary["max_rel_error"] = max(errs) if errs else None
    summary["failed"] = sum(r.status != "ok" for r in rows)
    for r in spec.regimes:
        reg = Regime(r)
        for Q in Qs:
            g = [row for row in rows if row.regime == r and row.Q == float(Q)]
            xs = [row.nu if reg.is_ramp else row.epsilon for row in g]
            ys_num = [row.delay_numeric if reg.is_ramp else row.tau_numeric for row in g]
            ys_an = [row.delay_analytic if reg.is_ramp else row.tau_analytic for row in g]
            ge = [row.rel_error for row in g if row.rel_error is not None]
            summary["groups"].append(
                {
                    "regime": r,
                    "Q": float(Q),
                    "slope_numeric": _fit_slope(xs, [np.nan if v is None else v for v in ys_num]),
                    "slope_analytic": _fit_slope(xs, [np.nan if v is None else v for v in ys_an]),
                    "max_rel_error": max(ge) if ge else None,
                }
            )
    return rows, summary


_COMPARE_COLUMNS = [
    "regime", "Q", "a", "c", "epsilon", "nu", "F_c", "K", "tau_c", "tau_analytic", "tau_numeric",
    "delay_analytic", "delay_numeric", "F_switch", "F_switch_analytic", "rel_error", "status",
]


def cmd_compare(spec: ExperimentSpec) -> int:
    rows, summary = run_compare(spec)
    write_rows([r.as_dict() for r in rows], _COMPARE_COLUMNS, spec, "compare", {"summary": summary})
    print(json.dumps(_num(summary)), file=sys.stderr)
    return EXIT_OK


def _apply_axis(arch: NondimArch, load: LoadProgram, name: str, v: float):
    if name == "Q":
        return replace(arch, Q=v), load
    if name == "c":
        return arch.with_damping(v), load
    if name in ("epsilon", "nu", "F0"):
        return arch, replace(load, **{name: v})
    a = list(arch.a)
    if name == "ratio":
        a[1] = v * a[0]
    else:
        a[int(name[1:]) - 1] = v
    return replace(arch, a=tuple(a)), load


def sweep_cell(spec: ExperimentSpec, values: tuple[float, ...]) -> dict:
    """Analytic (and optionally numeric) switching for one sweep cell."""
    row: dict[str, Any] = {name: v for (name, _), v in zip(spec.axes, values)}
    try:
        arch, load = spec.arch, spec.load
        for (name, _), v in zip(spec.axes, values):
            arch, load = _apply_axis(arch, load, name, v)
        damped = (arch.c > 0.0) if spec.damped is None else bool(spec.damped)
        if not damped:
            arch = arch.with_damping(0.0)
        cp = critical_point(arch)
        row.update(F_c=cp.F_c, K=cp.K, delta_c=cp.delta_c)
        pred = predict(arch, load, damped=damped, cp=cp)
        row.update(tau_c=pred.tau_c, tau_inf=pred.tau_inf, F_switch_analytic=pred.F_switch)
        if spec.numeric:
            cfg = spec.sim.with_(model="overdamped" if damped else "full")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", InertiaWarning)
                ev, _ = simulate_switching(arch, load, cfg, cp)
            row.update(tau_switch=ev.tau_switch, F_switch=ev.F_switch)
        row["status"] = "ok"
    except NotBistable as e:
        row["status"] = f"not-bistable: {e}"
    except IntegrationError as e:
        row["status"] = f"integration-failed: {e}"
    except ArchSwitchError as e:
        row["status"] = f"failed: {e}"
    return row


def _sweep_task(args):
    spec, values = args
    return sweep_cell(spec, values)


def run_sweep(spec: ExperimentSpec) -> list[dict]:
    if len(spec.axes) < 1:
        raise ValidationError("sweep needs at least one axis")
    grids = [vals for _, vals in spec.axes]
    cells = [tuple(float(v) for v in c) for c in _product(grids)]
    return _map(_sweep_task, [(spec, c) for c in cells], spec.workers)


def _product(grids):
    if not grids:
        yield ()
        return
    for v in grids[0]:
        for rest in _product(grids[1:]):
            yield (v,) + rest


def _map(fn, tasks, workers):
    # results are gathered in submission order, so output is independent of workers
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=1))


def cmd_sweep(spec: ExperimentSpec) -> int:
    rows = run_sweep(spec)
    cols = [n for n, _ in spec.axes] + [
        "F_c", "K", "delta_c", "tau_c", "tau_inf", "F_switch_analytic", "tau_switch", "F_switch", "status",
    ]
    write_rows(rows, cols, spec, "sweep")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _csv_floats(text):
    return _parse_values(text)


def _csv_ints(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="archswitch", description="Delayed switching of shallow bistable arches.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="TOML experiment file")
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--workers", type=int, help="worker processes for compare/sweep")
    g.add_argument("--format", choices=("csv", "json"))
    g = common.add_argument_group("arch and load overrides")
    g.add_argument("--Q", type=float)
    g.add_argument("--a", type=_csv_floats, help="mode weights, comma separated")
    g.add_argument("--modes", type=_csv_ints, help="mode indices, comma separated")
    g.add_argument("--c", type=float, help="damping coefficient")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--nu", type=float)
    g.add_argument("--F0", type=float)
    g = common.add_argument_group("simulation overrides")
    g.add_argument("--model", choices=("full", "overdamped"))
    g.add_argument("--rtol", type=float)
    g.add_argument("--atol", type=float)
    g.add_argument("--threshold", type=float)
    g.add_argument("--max-time", dest="max_time", type=float)
    g.add_argument("--initial", choices=("auto", "critical", "as-fabricated", "static"))

    sub.add_parser("critical", parents=[common], help="locate the fold")
    sp = sub.add_parser("predict", parents=[common], help="closed-form switching time")
    sp.add_argument("--damped", dest="damped", action="store_true", default=None)
    sp.add_argument("--undamped", dest="damped", action="store_false")
    sp = sub.add_parser("simulate", parents=[common], help="time series with static overlay")
    sp.add_argument("--post-switch", dest="post_switch", type=float, help="keep integrating this long after switching")
    sp = sub.add_parser("compare", parents=[common], help="analytic versus numeric grid")
    sp.add_argument("--regime", action="append", help="static-damped, static-undamped, ramp-damped, ramp-undamped")
    sp.add_argument("--grid", action="append", help="NAME=values for Q, epsilon or nu")
    sp = sub.add_parser("sweep", parents=[common], help="two-axis parameter sweep")
    sp.add_argument("--axis", action="append", help="NAME=values; values as 1,2,3 or lo:hi:n or log:lo:hi:n")
    sp.add_argument("--analytic-only", dest="analytic_only", action="store_true")
    sp.add_argument("--damped", dest="damped", action="store_true", default=None)
    sp.add_argument("--undamped", dest="damped", action="store_false")
    return p


_COMMANDS = {
    "critical": cmd_critical,
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def _fail(code: int, kind: str, exc: Exception) -> int:
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        spec = load_spec(args, args.command)
        return _COMMANDS[args.command](spec)
    except NotBistable as e:
        return _fail(EXIT_NOT_BISTABLE, "not-bistable", e)
    except ValidationError as e:
        return _fail(EXIT_VALIDATION, "invalid-input", e)
    except IntegrationError as e:
        return _fail(EXIT_INTEGRATION, "integration-failed", e)
    except ArchSwitchError as e:
        return _fail(EXIT_INTEGRATION, type(e).__name__, e)
