"""qsense command line: curve, sense, scaling, wigner, oracle.

Every command writes its data files (CSV/JSON), SVG plots rendered from
those files, and a manifest.json with the resolved config and checksums.
Exit codes: 0 ok, 2 config error, 3 numerical or operating-point error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import secrets
import sys
import tempfile
import time
from pathlib import Path

from . import __version__, svgplot
from .estimation import (
    FitError,
    OperatingPointError,
    calibrate,
    default_phi0,
    entangled_limit,
    fit_power_law,
    mean_excess_over_sql,
    scaling_experiment,
    sense_experiment,
    sql,
)
from .interferometer import (
    CircuitKind,
    analytic_observable,
    final_state,
    intermediate_states,
    unentangled_pair_states,
)
from .sampling import PRESETS, ReadoutNoise, get_preset
from .statevector import bloch_vector, probabilities
from .wigner import (
    DegenerateFieldError,
    SphereGrid,
    SymmetricSubspaceError,
    angular_width,
    density_from_state,
    wigner_field,
)

CSV_SCHEMA_VERSION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULTS = {
    "common": {"circuit": "single", "backend": "ideal", "preset": "manila-2021", "seed": None, "out": None,
               "workers": 1},
    "curve": {"shots": 1024, "trials": 5, "angles": 13},
    "sense": {"shots": 100, "trials": 75, "phi0": None, "dphi": 0.2, "angles": 13, "cal_shots": 1024,
              "cal_trials": 5},
    "scaling": {"trials": 600, "n_values": None, "phi0": None, "dphi": 0.0, "angles": 13, "cal_shots": 1024,
                "cal_trials": 5},
    "wigner": {"phi": "pi/3", "grid": "91x180", "unentangled": False},
    "oracle": {"phi": "pi/3", "n": 100},
}


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Floats with 9 significant digits; everything else via str()."""
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


_ANGLE_RE = re.compile(r"^[0-9eE+\-*/(). pi]+$")


def parse_angle(value) -> float:
    """Accept numbers or expressions such as ``pi/3`` or ``3*pi/4``."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().lower()
    if not text or not _ANGLE_RE.match(text):
        raise ConfigError(f"cannot parse angle {value!r}")
    try:
        result = eval(text, {"__builtins__": {}}, {"pi": math.pi})  # noqa: S307  charset is restricted above
    except Exception as exc:
        raise ConfigError(f"cannot parse angle {value!r}: {exc}") from None
    return float(result)


# ---------------------------------------------------------------- output

def atomic_write(path: Path, data: str | bytes) -> None:
    raw = data.encode("utf-8") if isinstance(data, str) else data
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    atomic_write(path, buf.getvalue())


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def write_json(path: Path, obj) -> None:
    atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------- config

def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS["common"])
    cfg.update(DEFAULTS[command])
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(cfg) - {"noise"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(file_cfg)
    for key, value in vars(args).items():
        if key in ("command", "config", "func"):
            continue
        cfg[key] = value
    if cfg.get("seed") is None:
        cfg["seed"] = secrets.randbits(32)
    cfg["command"] = command
    return cfg


def resolve_noise(cfg: dict) -> ReadoutNoise | None:
    backend = str(cfg.get("backend", "ideal")).lower()
    if backend == "ideal":
        return None
    if backend != "noisy":
        raise ConfigError(f"backend must be 'ideal' or 'noisy', got {backend!r}")
    if isinstance(cfg.get("noise"), dict):
        try:
            return ReadoutNoise.from_mapping(cfg["noise"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid inline noise: {exc}") from None
    name = str(cfg.get("preset"))
    if name in PRESETS:
        return get_preset(name)
    if name.endswith(".json") and Path(name).is_file():
        try:
            return ReadoutNoise.load(name)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid noise preset file {name}: {exc}") from None
    raise ConfigError(f"unknown noise preset {name!r}; available presets: {', '.join(sorted(PRESETS))}")


def resolve_kind(cfg: dict) -> CircuitKind:
    try:
        return CircuitKind.parse(cfg["circuit"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def out_dir(cfg: dict) -> Path:
    if cfg.get("out"):
        return Path(cfg["out"])
    return Path(os.environ.get("QSENSE_OUT", "qsense-out")) / cfg["command"]


def finish(out: Path, cfg: dict, files: list[str], started: float) -> dict:
    manifest = {
        "tool": "qsense",
        "version": __version__,
        "command": cfg["command"],
        "config": {k: v for k, v in sorted(cfg.items()) if k != "out"},
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "files": {name: sha256_file(out / name) for name in sorted(files)},
        "duration_s": round(time.monotonic() - started, 3),
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def _int_list(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    try:
        return [int(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse integer list {value!r}") from None


# ---------------------------------------------------------------- commands

def cmd_curve(cfg: dict) -> Path:
    started = time.monotonic()
    kind, noise, out = resolve_kind(cfg), resolve_noise(cfg), out_dir(cfg)
    phis, series, fit = calibrate(kind, noise, int(cfg["seed"]), int(cfg["angles"]), int(cfg["shots"]),
                                  int(cfg["trials"]), workers=int(cfg["workers"]))
    rows = []
    for phi, s in zip(phis, series):
        std = float(s.values.std(ddof=1)) if len(s.values) > 1 else 0.0
        rows.append((float(phi), s.mean, std, len(s.values), s.spec.shots_per_trial))
    write_csv(out / "curve.csv", ["phi", "mean_value", "std_across_trials", "trials", "shots"], rows)
    write_json(out / "fit.json", fit.to_dict())
    plot_curve(out, kind)
    finish(out, cfg, ["curve.csv", "fit.json", "curve.svg"], started)
    return out


def plot_curve(out: Path, kind: CircuitKind) -> None:
    data = read_csv(out / "curve.csv")
    fit = json.loads((out / "fit.json").read_text())
    x = [float(r["phi"]) for r in data]
    y = [float(r["mean_value"]) for r in data]
    e = [float(r["std_across_trials"]) for r in data]
    dense = [2 * math.pi * i / 200 for i in range(201)]
    name = "polarization P" if kind is CircuitKind.SINGLE else "parity"
    ax = svgplot.Axes(title=f"{kind.value} interferometer fringe", xlabel="phi (rad)", ylabel=name)
    ax.add(svgplot.Series(x, y, e, label="measured"))
    ax.add(svgplot.Series(dense, [-fit["A"] * math.cos(fit["k"] * p) + fit["B"] for p in dense], kind="line",
                          label=f"fit A={fit['A']:.3f} B={fit['B']:.3f}"))
    ax.add(svgplot.Series(dense, [analytic_observable(kind, p) for p in dense], kind="line", dash="5,4",
                          label="ideal"))
    atomic_write(out / "curve.svg", svgplot.render(ax))


def cmd_sense(cfg: dict) -> Path:
    started = time.monotonic()
    kind, noise, out = resolve_kind(cfg), resolve_noise(cfg), out_dir(cfg)
    seed = int(cfg["seed"])
    phi0 = default_phi0(kind) if cfg.get("phi0") is None else parse_angle(cfg["phi0"])
    fit = calibrate(kind, noise, seed, int(cfg["angles"]), int(cfg["cal_shots"]), int(cfg["cal_trials"]),
                    workers=int(cfg["workers"]))[2]
    res = sense_experiment(kind, phi0, parse_angle(cfg["dphi"]), int(cfg["shots"]), int(cfg["trials"]), noise,
                           seed, fit, workers=int(cfg["workers"]))
    write_csv(out / "estimates.csv", ["trial", "measured_value", "phi_tilde"],
              [(i, float(m), float(p)) for i, (m, p) in enumerate(zip(res.measured, res.phi_tilde))])
    write_json(out / "fit.json", fit.to_dict())
    summary = res.summary()
    summary["N"] = int(cfg["shots"]) * kind.qubits_per_shot
    write_json(out / "summary.json", summary)
    data = read_csv(out / "estimates.csv")
    svg = svgplot.histogram([float(r["phi_tilde"]) for r in data], bins=15,
                            title=f"inferred phase, {len(data)} trials of N={summary['N']}",
                            xlabel="phi_tilde (rad)",
                            markers=[(res.phi0, "phi0"), (res.phi_true, "true phi")])
    atomic_write(out / "histogram.svg", svg)
    finish(out, cfg, ["estimates.csv", "fit.json", "summary.json", "histogram.svg"], started)
    return out


def cmd_scaling(cfg: dict) -> Path:
    started = time.monotonic()
    kind, noise, out = resolve_kind(cfg), resolve_noise(cfg), out_dir(cfg)
    seed = int(cfg["seed"])
    if cfg.get("n_values"):
        n_values = _int_list(cfg["n_values"])
    elif kind is CircuitKind.SINGLE:
        n_values = [2**i for i in range(11)]
    else:
        n_values = [2**i for i in range(1, 11)]
    phi0 = default_phi0(kind) if cfg.get("phi0") is None else parse_angle(cfg["phi0"])
    fit = calibrate(kind, noise, seed, int(cfg["angles"]), int(cfg["cal_shots"]), int(cfg["cal_trials"]),
                    workers=int(cfg["workers"]))[2]
    try:
        points = scaling_experiment(kind, n_values, phi0, int(cfg["trials"]), noise, seed, fit,
                                    parse_angle(cfg["dphi"]), workers=int(cfg["workers"]))
    except ValueError as exc:
        if isinstance(exc, (OperatingPointError, FitError)):
            raise
        raise ConfigError(str(exc)) from None
    rows = []
    for p in points:
        ent = entangled_limit(p.N) if p.N % 2 == 0 else ""
        rows.append((p.N, p.N // kind.qubits_per_shot, p.sigma_phi, p.se_sigma, p.mean_phi, sql(p.N), ent))
    write_csv(out / "sensitivity.csv", ["N", "shots", "sigma_phi", "se_sigma", "mean_phi", "sql", "entangled_limit"],
              rows)
    write_json(out / "fit.json", fit.to_dict())
    law = fit_power_law(points).to_dict()
    law["mean_excess_over_sql"] = mean_excess_over_sql(points)
    write_json(out / "powerlaw.json", law)
    plot_scaling(out, kind)
    finish(out, cfg, ["sensitivity.csv", "fit.json", "powerlaw.json", "scaling.svg"], started)
    return out


def plot_scaling(out: Path, kind: CircuitKind) -> None:
    data = read_csv(out / "sensitivity.csv")
    law = json.loads((out / "powerlaw.json").read_text())
    N = [float(r["N"]) for r in data]
    ax = svgplot.Axes(title=f"{kind.value}: phase sensitivity vs qubits", xlabel="N (qubits)",
                      ylabel="sigma of inferred phase", logx=True, logy=True)
    ax.add(svgplot.Series(N, [float(r["sigma_phi"]) for r in data], [float(r["se_sigma"]) for r in data],
                          label="measured"))
    ax.add(svgplot.Series(N, [law["prefactor"] * n ** law["exponent"] for n in N], kind="line",
                          label=f"fit {law['prefactor']:.3f} N^{law['exponent']:.3f}"))
    ax.add(svgplot.Series(N, [float(r["sql"]) for r in data], kind="line", dash="6,4", label="1/sqrt(N)"))
    if kind is CircuitKind.ENTANGLED_PAIR:
        ax.add(svgplot.Series(N, [1 / math.sqrt(2 * n) for n in N], kind="line", dash="2,3", label="1/sqrt(2N)"))
    atomic_write(out / "scaling.svg", svgplot.render(ax))


def _parse_grid(value) -> SphereGrid:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return SphereGrid(int(value[0]), int(value[1]))
    m = re.fullmatch(r"\s*(\d+)\s*[xX,]\s*(\d+)\s*", str(value))
    if not m:
        raise ConfigError(f"grid must look like 91x180, got {value!r}")
    try:
        return SphereGrid(int(m.group(1)), int(m.group(2)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


STAGE_NAMES = {
    CircuitKind.SINGLE: ["initial |0>", "after H", "after RZ(phi)", "after H"],
    CircuitKind.ENTANGLED_PAIR: ["initial |00>", "after H(x)X", "after CNOT (Fock)", "after H(x)H (cat)",
                                 "after RZ(x)RZ", "after H(x)H"],
}
UNENTANGLED_NAMES = ["initial |00>", "after H(x)H", "after RZ(x)RZ", "after H(x)H"]


def cmd_wigner(cfg: dict) -> Path:
    started = time.monotonic()
    kind, out = resolve_kind(cfg), out_dir(cfg)
    phi = parse_angle(cfg["phi"])
    grid = _parse_grid(cfg["grid"])
    if cfg.get("unentangled") and kind is CircuitKind.ENTANGLED_PAIR:
        states, names = unentangled_pair_states(phi), UNENTANGLED_NAMES
    else:
        states, names = intermediate_states(kind, phi), STAGE_NAMES[kind]
    files, stages = [], []
    for i, (state, name) in enumerate(zip(states, names), start=1):
        entry = {"stage": i, "name": name, "amplitudes": [[float(a.real), float(a.imag)] for a in state.amps]}
        try:
            field = wigner_field(density_from_state(state), grid)
        except SymmetricSubspaceError as exc:
            entry["skipped"] = str(exc)
            stages.append(entry)
            continue
        stem = f"wigner_stage{i}"
        write_csv(out / f"{stem}.csv", ["theta", "phi_az", "W"], field.rows())
        files.append(f"{stem}.csv")
        th = field.grid.theta
        entry.update(integral=field.integral(), min=float(field.values.min()), max=float(field.values.max()),
                     north_pole=float(field.values[0, 0]), south_pole=float(field.values[-1, 0]))
        try:
            entry["fwhm"] = angular_width(field)
        except DegenerateFieldError:
            entry["fwhm"] = None
        stages.append(entry)
        plot_wigner(out, stem, f"stage {i}: {name}", th, field.grid.phi)
        files.append(f"{stem}.svg")
    write_json(out / "stages.json", {"circuit": kind.value, "phi": phi, "grid": [grid.n_theta, grid.n_phi],
                                     "unentangled": bool(cfg.get("unentangled")), "stages": stages})
    files.append("stages.json")
    if kind is CircuitKind.SINGLE:
        bloch = [{"stage": i, "name": n, "bloch": list(bloch_vector(s).as_tuple())}
                 for i, (s, n) in enumerate(zip(states, names), start=1)]
        write_json(out / "bloch.json", bloch)
        files.append("bloch.json")
    finish(out, cfg, files, started)
    return out


def plot_wigner(out: Path, stem: str, title: str, theta, phi) -> None:
    rows = read_csv(out / f"{stem}.csv")
    nt, nphi = len(theta), len(phi)
    vals = [float(r["W"]) for r in rows]
    grid = [vals[i * nphi:(i + 1) * nphi] for i in range(nt)]
    atomic_write(out / f"{stem}.svg", svgplot.heatmap(theta, phi, grid, title=title))


def oracle_values(kind: CircuitKind, phi: float, n: int) -> dict:
    state = final_state(kind, phi)
    result = {
        "circuit": kind.value,
        "phi": phi,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amps],
        "probabilities": [float(p) for p in probabilities(state)],
        "observable": "polarization" if kind is CircuitKind.SINGLE else "parity",
        "expectation": analytic_observable(kind, phi),
        "N": n,
        "sql": sql(n),
        "entangled_limit": entangled_limit(n) if n % 2 == 0 else None,
    }
    return result


def cmd_oracle(cfg: dict) -> dict:
    kind = resolve_kind(cfg)
    try:
        n = int(cfg["n"])
        values = oracle_values(kind, parse_angle(cfg["phi"]), n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = json.dumps(values, indent=2, sort_keys=True)
    print(text)
    if cfg.get("out"):
        out = Path(cfg["out"])
        atomic_write(out / "oracle.json", text + "\n")
    return values


COMMANDS = {"curve": cmd_curve, "sense": cmd_sense, "scaling": cmd_scaling, "wigner": cmd_wigner,
            "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qsense {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p, noise=True):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--circuit", choices=["single", "pair"], default=S)
        if noise:
            p.add_argument("--backend", choices=["ideal", "noisy"], default=S)
            p.add_argument("--preset", default=S, help="noise preset name or path to a JSON preset")
            p.add_argument("--seed", type=int, default=S)
            p.add_argument("--workers", type=int, default=S, help="threads for trial execution")
        p.add_argument("--out", default=S, help="output directory (default $QSENSE_OUT/<command>)")

    p = sub.add_parser("curve", help="fringe sweep with cosine fit")
    common(p)
    p.add_argument("--shots", type=int, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--angles", type=int, default=S)

    p = sub.add_parser("sense", help="repeated phase inference at one operating point")
    common(p)
    p.add_argument("--shots", type=int, default=S, help="shots per estimate")
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--phi0", default=S)
    p.add_argument("--dphi", default=S)
    p.add_argument("--angles", type=int, default=S, help="calibration sweep angles")

    p = sub.add_parser("scaling", help="phase sensitivity versus number of qubits")
    common(p)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--n-values", dest="n_values", default=S, help="comma-separated qubit counts N")
    p.add_argument("--phi0", default=S)
    p.add_argument("--dphi", default=S)
    p.add_argument("--angles", type=int, default=S, help="calibration sweep angles")

    p = sub.add_parser("wigner", help="spin Wigner fields after each gate")
    common(p, noise=False)
    p.add_argument("--phi", default=S)
    p.add_argument("--grid", default=S, help="n_theta x n_phi, e.g. 91x180")
    p.add_argument("--unentangled", action="store_true", default=S,
                   help="pair only: run |00> through the interferometer without the CNOT")

    p = sub.add_parser("oracle", help="closed-form values for one phase")
    common(p, noise=False)
    p.add_argument("--phi", default=S)
    p.add_argument("--n", type=int, default=S, help="qubit count N for the sensitivity limits")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        COMMANDS[args.command](cfg)
    except (OperatingPointError, FitError, DegenerateFieldError, ArithmeticError) as exc:
        print(f"qsense: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, SymmetricSubspaceError, KeyError) as exc:
        print(f"qsense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"qsense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
