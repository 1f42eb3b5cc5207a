"""Config file schema: YAML key:value mappings resolved to run configurations.

Scenario keys (defaults in parentheses): m, K [required]; n_theta (1000);
g: dirac|gaussian (dirac); omega0 (0.0); n_omega (600); omega_L (5.0);
rho0 (gaussian); u0 ("0"); init_table [replaces rho0/u0]; t_end (5.0);
record_dt (0.01); snapshot_times ([]); solver: eulerian|lagrangian|both
(eulerian); n_samples (1024); dt_oracle (1e-3); scheme: {cfl, max_dt,
blowup_rho_factor, blowup_grad, eps_speed, clip_abort}.  A sweep section
turns the result into a SweepConfig: k_min (0) / k_max (4) / k_step (0.1)
building the path k_min -> k_max -> k_min, or an explicit k_path list, plus
steady_tol (1e-4), steady_window (1.0), t_max (50), refine_step (null),
refine_window (0.3).

rho0 accepts the named forms uniform | gaussian | gaussian(mu,sigma) |
point(theta0) or a nonnegative wave expression; u0 accepts wave expressions
"A*sin(c*theta)+B", "A*cos(c*theta)+B", or a constant.
"""
from __future__ import annotations

import re

import numpy as np
import yaml

from .domain import (
    InitSpec,
    Params,
    RhoGaussian,
    RhoPointCell,
    RhoUniform,
    TableData,
    UConst,
    UCosine,
    USine,
)
from .experiments import ScenarioConfig, SweepConfig
from .fv import SchemeConfig

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_CONST_RE = re.compile(rf"^[+-]?{_NUM}$")
_WAVE_RE = re.compile(
    rf"^(?:(?P<c1>[+-]?{_NUM})(?=[+-]))?"
    rf"(?P<sgn>[+-])?"
    rf"(?:(?P<amp>{_NUM})\*)?"
    rf"(?P<fn>sin|cos)"
    rf"\((?:(?P<freq>[+-]?{_NUM})\*)?theta\)"
    rf"(?:(?P<op2>[+-])(?P<c2>{_NUM}))?$"
)
_RHO_CALL_RE = re.compile(r"^(gaussian|point)\(([^)]*)\)$")


def parse_wave_expression(text):
    """Parse "A*sin(c*theta)+B" style expressions (or constants) to a profile."""
    s = re.sub(r"\s+", "", str(text))
    if not s:
        raise ValueError("empty profile expression")
    if _CONST_RE.match(s):
        return UConst(float(s))
    mobj = _WAVE_RE.match(s)
    if mobj is None:
        raise ValueError(
            f"cannot parse profile expression {text!r}: expected "
            "'A*sin(c*theta)+B', 'A*cos(c*theta)+B', or a constant"
        )
    g = mobj.groupdict()
    amp = float(g["amp"]) if g["amp"] else 1.0
    if g["sgn"] == "-":
        amp = -amp
    freq = float(g["freq"]) if g["freq"] else 1.0
    offset = float(g["c1"]) if g["c1"] else 0.0
    if g["c2"]:
        offset += float(g["op2"] + g["c2"])
    cls = USine if g["fn"] == "sin" else UCosine
    return cls(amp, freq, offset)


def _fmt(x):
    return repr(float(x))


def format_wave(spec):
    """Canonical expression string for a profile; inverse of the parser."""
    if isinstance(spec, UConst):
        return _fmt(spec.value)
    if not isinstance(spec, (USine, UCosine)):
        raise TypeError(f"cannot format profile of type {type(spec).__name__}")
    fn = "sin" if isinstance(spec, USine) else "cos"
    if spec.amplitude == 1.0:
        head = fn
    elif spec.amplitude == -1.0:
        head = "-" + fn
    else:
        head = f"{_fmt(spec.amplitude)}*{fn}"
    arg = "theta" if spec.freq == 1.0 else f"{_fmt(spec.freq)}*theta"
    out = f"{head}({arg})"
    if spec.offset > 0:
        out += f"+{_fmt(spec.offset)}"
    elif spec.offset < 0:
        out += f"-{_fmt(-spec.offset)}"
    return out


def parse_rho0(text):
    """Parse a rho0 spec: named density forms or a wave expression."""
    s = re.sub(r"\s+", "", str(text))
    if s == "uniform":
        return RhoUniform()
    if s == "gaussian":
        return RhoGaussian()
    mobj = _RHO_CALL_RE.match(s)
    if mobj is not None:
        name, args = mobj.groups()
        try:
            values = [float(a) for a in args.split(",")] if args else []
        except ValueError:
            raise ValueError(f"bad numeric arguments in rho0 spec {text!r}") from None
        if name == "gaussian":
            if len(values) != 2:
                raise ValueError("gaussian(mu, sigma) takes exactly two arguments")
            return RhoGaussian(*values)
        if len(values) != 1:
            raise ValueError("point(theta0) takes exactly one argument")
        return RhoPointCell(values[0])
    return parse_wave_expression(s)


def format_rho0(spec):
    """Canonical config string for a rho0 spec; inverse of parse_rho0."""
    if isinstance(spec, RhoUniform):
        return "uniform"
    if isinstance(spec, RhoGaussian):
        if spec.mu == 0.0 and spec.sigma == 1.0:
            return "gaussian"
        return f"gaussian({_fmt(spec.mu)},{_fmt(spec.sigma)})"
    if isinstance(spec, RhoPointCell):
        return f"point({_fmt(spec.theta0)})"
    return format_wave(spec)


_SCENARIO_DEFAULTS = {
    "n_theta": 1000,
    "g": "dirac",
    "omega0": 0.0,
    "n_omega": 600,
    "omega_L": 5.0,
    "rho0": "gaussian",
    "u0": "0",
    "t_end": 5.0,
    "record_dt": 0.01,
    "snapshot_times": (),
    "solver": "eulerian",
    "n_samples": 1024,
    "dt_oracle": 1e-3,
}
_SCHEME_DEFAULTS = {
    "cfl": 0.4,
    "max_dt": 1e-2,
    "blowup_rho_factor": 1e3,
    "blowup_grad": 1e6,
    "eps_speed": 1e-12,
    "clip_abort": 1e-8,
}
_SWEEP_DEFAULTS = {
    "k_min": 0.0,
    "k_max": 4.0,
    "k_step": 0.1,
    "steady_tol": 1e-4,
    "steady_window": 1.0,
    "t_max": 50.0,
    "refine_step": None,
    "refine_window": 0.3,
}


def resolve_config(data):
    """Resolve a parsed mapping to a ScenarioConfig or SweepConfig."""
    if not isinstance(data, dict):
        raise ValueError("config must be a key:value mapping")
    data = dict(data)
    sweep_data = data.pop("sweep", None)
    scheme_data = data.pop("scheme", None) or {}
    table_path = data.pop("init_table", None)
    unknown = sorted(set(data) - set(_SCENARIO_DEFAULTS) - {"m", "K"})
    if unknown:
        raise ValueError("unknown config keys: " + ", ".join(unknown))
    missing = [k for k in ("m", "K") if k not in data]
    if missing:
        raise ValueError("missing required config keys: " + ", ".join(missing))
    merged = {**_SCENARIO_DEFAULTS, **data}

    if table_path is not None:
        if "rho0" in data or "u0" in data:
            raise ValueError("init_table replaces rho0/u0; remove those keys")
        init = InitSpec.from_table(table_path)
    else:
        init = InitSpec(
            rho0=parse_rho0(merged["rho0"]), u0=parse_wave_expression(merged["u0"])
        )

    unknown_scheme = sorted(set(scheme_data) - set(_SCHEME_DEFAULTS))
    if unknown_scheme:
        raise ValueError("unknown scheme keys: " + ", ".join(unknown_scheme))
    scheme_kwargs = {**_SCHEME_DEFAULTS, **scheme_data}
    scheme = SchemeConfig(**{k: float(v) for k, v in scheme_kwargs.items()})

    scenario = ScenarioConfig(
        params=Params(float(merged["m"]), float(merged["K"])),
        init=init,
        n_theta=int(merged["n_theta"]),
        g=str(merged["g"]),
        omega0=float(merged["omega0"]),
        n_omega=int(merged["n_omega"]),
        omega_L=float(merged["omega_L"]),
        t_end=float(merged["t_end"]),
        record_dt=float(merged["record_dt"]),
        snapshot_times=tuple(float(x) for x in merged["snapshot_times"] or ()),
        solver=str(merged["solver"]),
        scheme=scheme,
        n_samples=int(merged["n_samples"]),
        dt_oracle=float(merged["dt_oracle"]),
    )
    if sweep_data is None:
        return scenario
    return _resolve_sweep(sweep_data, scenario)


def _resolve_sweep(data, base):
    if not isinstance(data, dict):
        raise ValueError("sweep section must be a key:value mapping")
    data = dict(data)
    unknown = sorted(set(data) - set(_SWEEP_DEFAULTS) - {"k_path"})
    if unknown:
        raise ValueError("unknown sweep keys: " + ", ".join(unknown))
    merged = {**_SWEEP_DEFAULTS, **data}
    if "k_path" in data:
        k_path = tuple(float(k) for k in data["k_path"])
    else:
        lo, hi, step = (float(merged[k]) for k in ("k_min", "k_max", "k_step"))
        if not step > 0 or not hi >= lo:
            raise ValueError("sweep needs k_max >= k_min and k_step > 0")
        ks = np.round(np.arange(lo, hi + 0.5 * step, step), 12)
        k_path = tuple(ks) + tuple(ks[-2::-1])
    refine = merged["refine_step"]
    return SweepConfig(
        k_path=k_path,
        steady_tol=float(merged["steady_tol"]),
        steady_window=float(merged["steady_window"]),
        t_max=float(merged["t_max"]),
        refine_step=None if refine is None else float(refine),
        refine_window=float(merged["refine_window"]),
        base=base,
    )


def serialize_config(config):
    """Config object -> plain mapping; resolve_config inverts it exactly."""
    if isinstance(config, SweepConfig):
        out = serialize_config(config.base) if config.base is not None else {}
        out["sweep"] = {
            "k_path": [float(k) for k in config.k_path],
            "steady_tol": config.steady_tol,
            "steady_window": config.steady_window,
            "t_max": config.t_max,
            "refine_step": config.refine_step,
            "refine_window": config.refine_window,
        }
        return out
    c = config
    out = {
        "m": c.params.m,
        "K": c.params.K,
        "n_theta": c.n_theta,
        "g": c.g,
        "omega0": c.omega0,
        "n_omega": c.n_omega,
        "omega_L": c.omega_L,
    }
    if isinstance(c.init.rho0, TableData):
        out["init_table"] = c.init.rho0.path
    else:
        out["rho0"] = format_rho0(c.init.rho0)
        out["u0"] = format_wave(c.init.u0)
    out.update(
        t_end=c.t_end,
        record_dt=c.record_dt,
        snapshot_times=list(c.snapshot_times),
        solver=c.solver,
        n_samples=c.n_samples,
        dt_oracle=c.dt_oracle,
        scheme={
            "cfl": c.scheme.cfl,
            "max_dt": c.scheme.max_dt,
            "blowup_rho_factor": c.scheme.blowup_rho_factor,
            "blowup_grad": c.scheme.blowup_grad,
            "eps_speed": c.scheme.eps_speed,
            "clip_abort": c.scheme.clip_abort,
        },
    )
    return out


def load_config_data(path):
    """Read a YAML config file into a plain mapping (empty file -> {})."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a key:value mapping")
    return data


def apply_overrides(data, overrides):
    """Apply dotted key=value strings (e.g. scheme.cfl=0.3) to a mapping."""
    for item in overrides:
        key, sep, raw = str(item).partition("=")
        if not sep or not key:
            raise ValueError(f"override {item!r} must look like key=value")
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"override {item!r} descends into a non-mapping")
        node[parts[-1]] = yaml.safe_load(raw) if raw != "" else None
    return data


def parse_config(path, overrides=()):
    """Read, override, and resolve a config file."""
    return resolve_config(apply_overrides(load_config_data(path), overrides))


def dump_config(config):
    """YAML text of a config object."""
    return yaml.safe_dump(serialize_config(config), sort_keys=False)


def write_config(path, config):
    """Write a config object to a YAML file."""
    with open(path, "w") as fh:
        fh.write(dump_config(config))
