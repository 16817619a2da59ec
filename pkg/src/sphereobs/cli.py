"""Experiment runner.

One experiment per process: ``sphereobs <subcommand> [--config FILE]
[--key value ...]``. Configuration is a flat key = value file (# comments),
with command-line flags overriding file entries. Every run writes its
artifacts atomically into the output directory together with an echo of the
effective configuration and the tool version, so identical configs give
byte-identical outputs.

Exit codes: 0 success, 2 precondition or configuration violation,
3 numerical guard tripped during propagation.
"""

import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .evolution import (
    EvolutionParams,
    EvolutionUnstable,
    WavePacketSpec,
    make_wavepacket,
    observability_quotient,
)
from .geodesics import check_vgcc, orbit_trace
from .harmonics import HarmonicCoeffs, apply_multiplier, evaluate_at
from .radon import TriaxialForm, funk_multipliers, invert_even, synthesize_potential
from .sphere import Cap, PhasePoint, QuadGrid, Region, check_gcc, full_sphere, normalize

__all__ = ["main", "ConfigError"]

FLOAT_FMT = "%.17g"


class ConfigError(Exception):
    pass


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT % float(x)
    return str(x)


def _atomic_write(path, text):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _write_json(path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


# ---------------------------------------------------------------- config

def _parse_file(path):
    entries = {}
    try:
        with open(path) as f:
            raw_lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(raw_lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        k, v = line.split("=", 1)
        entries[k.strip()] = (v.strip(), f"line {lineno}")
    return entries


def _parse_flags(args):
    entries = {}
    i = 0
    while i < len(args):
        a = args[i]
        if not a.startswith("--"):
            raise ConfigError(f"expected a --key, got {a!r}")
        if i + 1 >= len(args):
            raise ConfigError(f"flag {a} is missing a value")
        entries[a[2:]] = (args[i + 1], "flag")
        i += 2
    return entries


def _convert(key, raw, where, kind):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        return raw
    except ValueError:
        raise ConfigError(f"key '{key}' expects {kind}, got {raw!r} ({where})")


def _effective(schema, entries):
    """Validate raw entries against the subcommand's schema."""
    cfg = {}
    for key, (raw, where) in entries.items():
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' ({where})")
        cfg[key] = _convert(key, raw, where, schema[key][0])
    for key, (kind, default) in schema.items():
        if key in cfg:
            continue
        if default is REQUIRED:
            raise ConfigError(f"missing required key '{key}'")
        cfg[key] = default
    return cfg


REQUIRED = object()

_COMMON = {"out": ("str", "."), "seed": ("int", 0)}


def _parse_vec3(key, raw):
    parts = raw.split(",")
    if len(parts) != 3:
        raise ConfigError(f"key '{key}' expects 'x,y,z', got {raw!r}")
    try:
        v = np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"key '{key}' expects three floats, got {raw!r}")
    if np.linalg.norm(v) < 1e-12:
        raise ConfigError(f"key '{key}' must be a nonzero vector")
    return v


def _parse_region(raw):
    if raw.strip().lower() in ("", "full"):
        return full_sphere()
    caps = []
    for chunk in raw.split(";"):
        parts = chunk.split(",")
        if len(parts) != 4:
            raise ConfigError(f"region cap {chunk!r} is not 'cx,cy,cz,r'")
        try:
            cx, cy, cz, r = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"region cap {chunk!r} has a non-numeric entry")
        caps.append(Cap(tuple(normalize([cx, cy, cz])), r))
    return Region(tuple(caps))


def _load_coeffs(path):
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read coefficient file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"coefficient file {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict) or "coeffs" not in doc:
        raise ConfigError(f"coefficient file {path} lacks a 'coeffs' list")
    return HarmonicCoeffs.from_records(doc["coeffs"], l_max=doc.get("l_max"))


def _coeffs_doc(coeffs, **extra):
    doc = {"l_max": coeffs.l_max, "coeffs": coeffs.to_records()}
    doc.update(extra)
    return doc


def _potential_from_cfg(cfg):
    """Potential spec: either a coefficient file or triaxial a,b,c (+ eps)."""
    if cfg.get("potential"):
        if cfg.get("a") is not None:
            raise ConfigError("give either 'potential' or 'a,b,c', not both")
        return _load_coeffs(cfg["potential"]), cfg["potential"]
    if cfg.get("a") is not None or cfg.get("b") is not None or cfg.get("c") is not None:
        if None in (cfg.get("a"), cfg.get("b"), cfg.get("c")):
            raise ConfigError("triaxial potential needs all of a, b, c")
        eps = cfg.get("eps", 1.0)
        try:
            form = TriaxialForm(eps * cfg["a"], eps * cfg["b"], eps * cfg["c"])
        except ValueError as exc:
            raise ConfigError(str(exc))
        label = "triaxial(%s,%s,%s)*%s" % tuple(
            _fmt(v) for v in (cfg["a"], cfg["b"], cfg["c"], eps)
        )
        return form, label
    return None, "none"


def _echo(out_dir, subcommand, cfg):
    os.makedirs(out_dir, exist_ok=True)
    lines = [f"# sphereobs {__version__}", f"subcommand = {subcommand}"]
    for k in sorted(cfg):
        v = cfg[k]
        lines.append(f"{k} = {_fmt(v) if v is not None else ''}")
    _atomic_write(os.path.join(out_dir, "config_echo.txt"), "\n".join(lines) + "\n")


# ------------------------------------------------------------ subcommands

def _cmd_synth(entries):
    schema = dict(_COMMON, a=("float", REQUIRED), b=("float", REQUIRED), c=("float", REQUIRED))
    cfg = _effective(schema, entries)
    form = TriaxialForm(cfg["a"], cfg["b"], cfg["c"])
    V = synthesize_potential(form)
    closed = "V(x) = %s - 2*(%s*x1^2 + %s*x2^2 + %s*x3^2)" % (
        _fmt(form.a + form.b + form.c), _fmt(form.a), _fmt(form.b), _fmt(form.c))
    _echo(cfg["out"], "synth", cfg)
    _write_json(os.path.join(cfg["out"], "potential.json"),
                _coeffs_doc(V, a=form.a, b=form.b, c=form.c, closed_form=closed))
    print(closed)
    return 0


def _cmd_radon(entries):
    schema = dict(_COMMON, input=("str", REQUIRED), direction=("str", "forward"))
    cfg = _effective(schema, entries)
    if cfg["direction"] not in ("forward", "inverse"):
        raise ConfigError("key 'direction' must be 'forward' or 'inverse'")
    coeffs = _load_coeffs(cfg["input"])
    if cfg["direction"] == "forward":
        out = apply_multiplier(coeffs, funk_multipliers(coeffs.l_max))
    else:
        out = invert_even(coeffs)
    _echo(cfg["out"], "radon", cfg)
    _write_json(os.path.join(cfg["out"], "radon.json"),
                _coeffs_doc(out, direction=cfg["direction"], source=cfg["input"]))
    return 0


def _cmd_gcc(entries):
    schema = dict(_COMMON, region=("str", REQUIRED), T=("float", 2 * math.pi),
                  samples=("int", 2000))
    cfg = _effective(schema, entries)
    region = _parse_region(cfg["region"])
    res = check_gcc(region, cfg["T"], n_samples=cfg["samples"])
    _echo(cfg["out"], "gcc", cfg)
    worst = res.worst_start
    _write_json(os.path.join(cfg["out"], "gcc.json"), {
        "holds": bool(res.holds),
        "T": cfg["T"],
        "n_samples": res.n_samples,
        "worst_margin": res.worst_margin,
        "worst_base": [float(v) for v in worst.base] if worst is not None else None,
        "worst_dir": [float(v) for v in worst.dir] if worst is not None else None,
        "n_misses": len(res.misses),
    })
    print(f"holds = {res.holds}")
    return 0


def _cmd_vgcc(entries):
    schema = dict(_COMMON, region=("str", REQUIRED), horizon=("float", REQUIRED),
                  samples=("int", 2000), ds=("float", 1e-3),
                  a=("float", None), b=("float", None), c=("float", None),
                  eps=("float", 1.0), potential=("str", None),
                  n0=("str", None), s_max=("float", None), stride=("int", 1))
    cfg = _effective(schema, entries)
    region = _parse_region(cfg["region"])
    ham, label = _potential_from_cfg(cfg)
    res = check_vgcc(region, ham, cfg["horizon"], n_samples=cfg["samples"], ds=cfg["ds"])
    _echo(cfg["out"], "vgcc", cfg)
    rows = []
    for s in res.samples:
        rows.append((s.start[0], s.start[1], s.start[2], s.energy,
                     s.orbit_class, s.first_hit_time, s.best_margin))
    _write_csv(os.path.join(cfg["out"], "samples.csv"),
               ["n_x", "n_y", "n_z", "energy", "orbit_class", "first_hit_time", "margin"],
               rows)
    _write_json(os.path.join(cfg["out"], "vgcc.json"), {
        "holds": bool(res.holds),
        "horizon": res.horizon,
        "n_samples": res.n_samples,
        "worst_margin": res.worst_margin,
        "potential": label,
    })
    if cfg["n0"] is not None:
        n0 = normalize(_parse_vec3("n0", cfg["n0"]))
        s_max = cfg["s_max"] if cfg["s_max"] is not None else cfg["horizon"]
        times, points = orbit_trace(n0, ham, s_max, ds=cfg["ds"], stride=cfg["stride"])
        if isinstance(ham, TriaxialForm):
            energies = ham.values(points)
        elif ham is None:
            energies = np.zeros(len(times))
        else:
            energies = evaluate_at(ham, points).real
        _write_csv(os.path.join(cfg["out"], "trajectory.csv"),
                   ["s", "n_x", "n_y", "n_z", "H"],
                   [(t, p[0], p[1], p[2], e) for t, p, e in
                    zip(times, points, energies)])
    print(f"holds = {res.holds}")
    return 0


def _parse_phase_point(raw):
    parts = raw.split(";")
    if len(parts) != 2:
        raise ConfigError("key 'wavepacket' expects 'x0x,x0y,x0z;xi0x,xi0y,xi0z'")
    x0 = normalize(_parse_vec3("wavepacket", parts[0]))
    xi = _parse_vec3("wavepacket", parts[1])
    xi = xi - (xi @ x0) * x0
    if np.linalg.norm(xi) < 1e-12:
        raise ConfigError("wavepacket direction is parallel to the base point")
    return PhasePoint(x0, normalize(xi))


def _initial_state(cfg, l_max):
    if (cfg.get("wavepacket") is None) == (cfg.get("init") is None):
        raise ConfigError("give exactly one of 'wavepacket' or 'init'")
    if cfg.get("init") is not None:
        u0 = _load_coeffs(cfg["init"])
        if u0.l_max > l_max:
            raise ConfigError("initial data band limit exceeds lmax")
        return u0.resized(l_max)
    if cfg.get("h") is None:
        raise ConfigError("wavepacket initial data needs 'h'")
    spec = WavePacketSpec(_parse_phase_point(cfg["wavepacket"]), cfg["h"])
    return make_wavepacket(spec, QuadGrid(l_max))


def _cmd_grid(entries):
    """Pointwise values of a coefficient state on a lat-lon raster.

    The plotting side consumes this table; it never re-synthesizes
    harmonics itself.
    """
    schema = dict(_COMMON, input=("str", None), harmonic=("str", None),
                  quantity=("str", "density"), nlat=("int", 91), nlon=("int", 180))
    cfg = _effective(schema, entries)
    if (cfg["input"] is None) == (cfg["harmonic"] is None):
        raise ConfigError("give exactly one of 'input' or 'harmonic'")
    if cfg["quantity"] not in ("density", "real"):
        raise ConfigError("key 'quantity' must be 'density' or 'real'")
    if cfg["nlat"] < 2 or cfg["nlon"] < 4:
        raise ConfigError("need nlat >= 2 and nlon >= 4")
    if cfg["input"] is not None:
        coeffs = _load_coeffs(cfg["input"])
    else:
        parts = cfg["harmonic"].split(",")
        if len(parts) != 2:
            raise ConfigError("key 'harmonic' expects 'l,m'")
        try:
            l, m = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError("key 'harmonic' expects two integers")
        if l < 0 or abs(m) > l:
            raise ConfigError("harmonic needs l >= 0 and |m| <= l")
        coeffs = HarmonicCoeffs(l)
        coeffs[l, m] = 1.0
    thetas = np.linspace(0.0, math.pi, cfg["nlat"])
    phis = np.linspace(0.0, 2.0 * math.pi, cfg["nlon"], endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    st = np.sin(tt.ravel())
    pts = np.stack([st * np.cos(pp.ravel()), st * np.sin(pp.ravel()),
                    np.cos(tt.ravel())], axis=1)
    vals = evaluate_at(coeffs, pts)
    col = np.abs(vals) ** 2 if cfg["quantity"] == "density" else vals.real
    _echo(cfg["out"], "grid", cfg)
    _write_csv(os.path.join(cfg["out"], "grid.csv"), ["theta", "phi", "value"],
               zip(tt.ravel(), pp.ravel(), col))
    return 0


def _cmd_wavepacket(entries):
    schema = dict(_COMMON, h=("float", REQUIRED), lmax=("int", REQUIRED),
                  wavepacket=("str", REQUIRED))
    cfg = _effective(schema, entries)
    spec = WavePacketSpec(_parse_phase_point(cfg["wavepacket"]), cfg["h"])
    u0 = make_wavepacket(spec, QuadGrid(cfg["lmax"]))
    _echo(cfg["out"], "wavepacket", cfg)
    _write_json(os.path.join(cfg["out"], "packet.json"),
                _coeffs_doc(u0, h=cfg["h"], norm=u0.norm()))
    return 0


def _cmd_evolve(entries):
    schema = dict(_COMMON, alpha=("float", REQUIRED), T=("float", REQUIRED),
                  dt=("float", REQUIRED), lmax=("int", REQUIRED),
                  h=("float", None), potential=("str", None),
                  a=("float", None), b=("float", None), c=("float", None),
                  eps=("float", 1.0),
                  region=("str", "full"), wavepacket=("str", None),
                  init=("str", None), dispersion=("str", "fractional"),
                  max_saves=("int", 401))
    cfg = _effective(schema, entries)
    region = _parse_region(cfg["region"])
    potential, label = _potential_from_cfg(cfg)
    params = EvolutionParams(
        alpha=cfg["alpha"], t_final=cfg["T"], dt=cfg["dt"], l_max=cfg["lmax"],
        potential=potential, dispersion=cfg["dispersion"], max_saves=cfg["max_saves"])
    u0 = _initial_state(cfg, cfg["lmax"])
    report = observability_quotient(u0, params, region)
    _echo(cfg["out"], "evolve", cfg)
    _write_csv(os.path.join(cfg["out"], "series.csv"), ["t", "mass_omega", "norm"],
               list(zip(report.times, report.region_masses, report.norms)))
    _write_json(os.path.join(cfg["out"], "report.json"), {
        "quotient": report.quotient,
        "norm_drift": report.norm_drift,
        "params": {
            "alpha": params.alpha, "T": params.t_final, "dt": params.dt,
            "lmax": params.l_max, "dispersion": params.dispersion,
            "potential": label, "region": cfg["region"],
            "cadence": report.cadence, "version": __version__,
        },
    })
    print(f"quotient = {_fmt(report.quotient)}")
    return 0


def _scan_setup(entries, extra=None):
    schema = dict(_COMMON, alpha=("float", REQUIRED), lmax=("int", REQUIRED),
                  potential=("str", None), a=("float", None), b=("float", None),
                  c=("float", None), eps=("float", 1.0))
    if extra:
        schema.update(extra)
    cfg = _effective(schema, entries)
    potential, label = _potential_from_cfg(cfg)
    from .spectra import eigensolve

    decomp = eigensolve(cfg["alpha"], potential, cfg["lmax"])
    return cfg, decomp, label


def _cmd_spectrum(entries):
    cfg, decomp, label = _scan_setup(entries)
    _echo(cfg["out"], "spectrum", cfg)
    clusters = decomp.cluster_indices()
    trusted = decomp.trusted()
    rows = [(i, decomp.eigenvalues[i], int(clusters[i]), decomp.residuals[i],
             bool(trusted[i])) for i in range(len(decomp.eigenvalues))]
    _write_csv(os.path.join(cfg["out"], "spectrum.csv"),
               ["index", "lambda", "cluster_k", "residual", "trusted"], rows)
    return 0


def _cmd_eigenobs(entries):
    cfg, decomp, label = _scan_setup(entries, {"region": ("str", REQUIRED)})
    region = _parse_region(cfg["region"])
    from .spectra import eigen_obs_scan

    rows = eigen_obs_scan(decomp, region)
    _echo(cfg["out"], "eigenobs", cfg)
    _write_csv(os.path.join(cfg["out"], "scan.csv"),
               ["index", "lambda", "cluster_k", "mass_omega", "min_in_cluster", "trusted"],
               [(r.index, r.eigenvalue, r.cluster_k, r.mass, r.min_in_cluster,
                 r.trusted) for r in rows])
    return 0


_SUBCOMMANDS = {
    "synth": _cmd_synth,
    "radon": _cmd_radon,
    "gcc": _cmd_gcc,
    "vgcc": _cmd_vgcc,
    "evolve": _cmd_evolve,
    "eigenobs": _cmd_eigenobs,
    "wavepacket": _cmd_wavepacket,
    "spectrum": _cmd_spectrum,
    "grid": _cmd_grid,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        names = ", ".join(sorted(_SUBCOMMANDS))
        print(f"usage: sphereobs <subcommand> [--config FILE] [--key value ...]\n"
              f"subcommands: {names}")
        return 0 if argv else 2
    sub, rest = argv[0], argv[1:]
    if sub not in _SUBCOMMANDS:
        print(f"error: unknown subcommand {sub!r}", file=sys.stderr)
        return 2
    try:
        flag_entries = _parse_flags(rest)
        entries = {}
        if "config" in flag_entries:
            entries.update(_parse_file(flag_entries.pop("config")[0]))
        entries.update(flag_entries)
        return _SUBCOMMANDS[sub](entries)
    except EvolutionUnstable as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
