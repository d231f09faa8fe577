"""Command-line front end: every command writes a data file and a manifest.

Exit codes: 0 success, 2 invalid parameters or configuration, 3 numerical
guard (aliasing, non-convergence, lattice snapping).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .device import (as_dict, device_from_mapping, parse_config_text, preset, PRESETS,
                     validate)
from .errors import ConfigError, NumericalGuardError, ValidationError
from .intracavity import enhancement_factor, horizontal_mean_intensity, segment_amplitudes
from .loss import LOSS_HEADER, MIRROR_SETS, ifm_fractions, wavepacket_absorption, with_absorption
from .pulse import PULSE_HEADER, PulseSpec, TimeGrid, propagate_pulse
from .spectral import SWEEP_HEADER, SpectralGrid, delay_time, response_sweep, splitting_estimate
from .xpm import EitMediumParams, feasibility_report, rubidium_medium, tau_s_for_factor

THREADS_ENV = "CAVITY_EIT_THREADS"
MEDIUM_KEYS = tuple(f.name for f in fields(EitMediumParams))


# ---------------------------------------------------------------------------
# formatting

def _num(x):
    return format(float(x), ".17g")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else _num(v) for v in row])
    return buf.getvalue()


def _json_default(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _table_text(header, rows, fmt):
    if fmt == "json":
        data = [[v if isinstance(v, str) else float(v) for v in row] for row in rows]
        return _json_text({"columns": list(header), "rows": data})
    return _csv_text(header, rows)


def _report_text(report, fmt):
    if fmt == "json":
        return _json_text(report)
    lines = []

    def walk(prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                walk(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for item in value:
                name = item.get("name", "?")
                lines.append(f"{prefix}[{name}] = {item['status']} (ratio {item['ratio']:.4g}; "
                             f"{item['lhs']:.6g} {item['relation']} {item['rhs']:.6g})")
        else:
            lines.append(f"{prefix} = {value}")

    walk("", report)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# inputs

def _load_inputs(args):
    """Device parameters plus any ``medium.*`` overrides."""
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        values = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
        device = device_from_mapping(values)
        medium = {}
        for key, value in values.items():
            if key.startswith("medium."):
                name = key[len("medium."):]
                if name not in MEDIUM_KEYS:
                    raise ConfigError("unknown medium key", key=key)
                medium[name] = value
        return device, medium, {"config": str(args.config)}
    name = args.preset or "fig2a"
    try:
        device = preset(name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    return device, {}, {"preset": name}


def _tau_s(args, device, default_rel=1.0):
    if args.tau_s is not None and args.tau_s_rel is not None:
        raise ConfigError("give either --tau-s or --tau-s-rel, not both")
    if args.tau_s is not None:
        return args.tau_s
    rel = args.tau_s_rel if args.tau_s_rel is not None else default_rel
    return rel * delay_time(device)


def _threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return n


def _map(func, items):
    # ordered by input index regardless of completion order
    n = _threads()
    if n == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# commands; each returns (text, extra manifest entries)

def cmd_response(args, device, medium):
    k0 = device.k0
    half = 4.0 * splitting_estimate(device) if device.bs2.R > 0 else 1e3
    k_min = args.kmin if args.kmin is not None else k0 - half
    k_max = args.kmax if args.kmax is not None else k0 + half
    grid = SpectralGrid(k_min, k_max, args.points)
    table = response_sweep(device, grid)
    extra = {"k_min": k_min, "k_max": k_max, "points": args.points}
    if args.oracle:
        from .oracle import steady_state
        idx = np.unique(np.linspace(0, args.points - 1, min(args.points, 25)).astype(int))
        worst = 0.0
        for i in idx:
            s = steady_state(device, table.k[i])
            worst = max(worst, abs(s.a_out - table.g.g11[i]), abs(s.b_out - table.g.g21[i]))
        extra["oracle_max_deviation"] = worst
        extra["oracle_points"] = len(idx)
    return _table_text(SWEEP_HEADER, table.columns(), args.format), extra


def cmd_pulse(args, device, medium):
    tau_s = _tau_s(args, device)
    pulse = PulseSpec(device.k0, tau_s)
    grid = TimeGrid.default_for(device, pulse, 2 ** args.log2_samples)
    rec = propagate_pulse(device, pulse, grid)
    extra = {"tau_s": tau_s, "tau_D": delay_time(device), "samples": grid.n,
             "grid_start": grid.start, "grid_stop": grid.stop,
             "transmitted": rec.transmitted, "reflected": rec.reflected}
    if args.oracle:
        from .oracle import compare_with_spectral
        cmp = compare_with_spectral(device, pulse, grid.n)
        extra.update(oracle_rms_a=cmp.rms_a, oracle_rms_b=cmp.rms_b,
                     oracle_energy_error=cmp.energy_error)
    return _table_text(PULSE_HEADER, rec.rows(), args.format), extra


def cmd_intracavity(args, device, medium):
    k = device.k0 + args.dk
    seg = segment_amplitudes(device, k)
    rows = [(name, complex(v).real, complex(v).imag, abs(complex(v)) ** 2)
            for name, v in seg.items()]
    extra = {"k": k, "horizontal_mean_intensity": horizontal_mean_intensity(device, seg)}
    if device.bs2.R > 0:
        extra["enhancement_R1_over_4R2"] = enhancement_factor(device)
    if args.oracle:
        from .oracle import steady_state
        ref = steady_state(device, k).segments
        extra["oracle_max_deviation"] = max(
            abs(complex(getattr(ref, name)) - complex(v)) / max(1.0, abs(complex(v)))
            for name, v in seg.items())
    return _table_text(("segment", "re", "im", "abs2_ratio_to_input"), rows, args.format), extra


def cmd_loss(args, device, medium):
    sets = [s.strip() for s in args.sweep.split(",") if s.strip()]
    for s in sets:
        if s not in MIRROR_SETS:
            raise ConfigError(f"unknown mirror set {s!r}; choose from {', '.join(MIRROR_SETS)}")
    values = np.logspace(math.log10(args.amin), math.log10(args.amax), args.points)
    tau_s = _tau_s(args, device)
    pulse = PulseSpec(device.k0, tau_s)
    jobs = [(s, float(v)) for s in sets for v in values]
    results = _map(lambda job: wavepacket_absorption(with_absorption(device, *job), pulse), jobs)
    rows = [(v, s, p) for (s, v), p in zip(jobs, results)]
    return _table_text(LOSS_HEADER, rows, args.format), {"tau_s": tau_s, "sets": sets}


def cmd_ifm(args, device, medium):
    absorbers = {"M1": dict(A1=1.0), "M3": dict(A3=1.0), "both": dict(A1=1.0, A3=1.0)}
    dev = device.with_mirror_absorption(**absorbers[args.absorber])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        f = ifm_fractions(dev)
    rows = [("transmitted", f.transmitted, f.exact_transmitted),
            ("reflected", f.reflected, f.exact_reflected),
            ("lost", f.lost, f.exact_lost)]
    return (_table_text(("quantity", "closed_form", "exact"), rows, args.format),
            {"absorber": args.absorber})


def _xpm_report(args, device, medium):
    med = rubidium_medium(device, **medium)
    if args.tau_s is None and args.tau_s_rel is None:
        tau_s = tau_s_for_factor(delay_time(device), 0.5)
    else:
        tau_s = _tau_s(args, device)
    report = feasibility_report(device, med, tau_s)
    return med, report


def cmd_xpm(args, device, medium):
    med, report = _xpm_report(args, device, medium)
    d = report.as_dict()
    keys = ("delta_phi", "target_phase", "scale_to_target", "R1_over_R2",
            "R1_over_R2_for_target", "P2", "P2_over_delta_phi", "v_g", "alpha1", "alpha1_L",
            "energy_integral", "tau_D", "tau_s", "broadening_factor", "switching_time",
            "g11_expansion", "g21_expansion", "reflection_probability", "g11_exact",
            "g21_exact", "conditions", "free_medium")
    out = {"medium": asdict(med)}
    out.update({k: d[k] for k in keys})
    fmt = "text" if args.format == "csv" else args.format
    return _report_text(out, fmt), {"tau_s": report.tau_s}


def cmd_feasibility(args, device, medium):
    med, report = _xpm_report(args, device, medium)
    from .loss import loss_negligibility
    conds = [c.as_dict() for c in report.conditions]
    conds += [c.as_dict() for c in loss_negligibility(device)]
    out = {"conditions": conds, "delta_phi": report.delta_phi, "P2": report.P2}
    fmt = "text" if args.format == "csv" else args.format
    return _report_text(out, fmt), {"tau_s": report.tau_s}


def cmd_oracle_check(args, device, medium):
    from .oracle import steady_state
    from .device import BeamSplitterSpec, DeviceParams, MirrorSpec
    from .spectral import g_matrix

    rng = np.random.default_rng(args.seed)
    rows = []
    geometry = device.geometry
    for i in range(args.draws):
        R1 = 10 ** rng.uniform(-3, -0.3)
        R2 = 10 ** rng.uniform(-6, -1)
        A = rng.uniform(0.0, 1e-3, 4) * (i % 2)
        dev = DeviceParams(BeamSplitterSpec.from_reflectivity(R1),
                           BeamSplitterSpec.from_reflectivity(R2),
                           *[MirrorSpec(a) for a in A], geometry=geometry)
        k = dev.k0 + rng.uniform(-1, 1) * 4 * splitting_estimate(dev)
        s = steady_state(dev, k)
        g = g_matrix(dev, k)
        rows.append((i, R1, R2, float(A.max()), k, abs(s.a_out - g.g11),
                     abs(s.b_out - g.g21), s.iterations))
    header = ("draw", "R1", "R2", "max_mirror_A", "k", "dev_g11", "dev_g21", "iterations")
    worst = max(max(r[5], r[6]) for r in rows) if rows else 0.0
    return _table_text(header, rows, args.format), {"max_deviation": worst, "seed": args.seed}


COMMANDS = {
    "response": cmd_response, "pulse": cmd_pulse, "intracavity": cmd_intracavity,
    "loss": cmd_loss, "ifm": cmd_ifm, "xpm": cmd_xpm, "feasibility": cmd_feasibility,
    "oracle-check": cmd_oracle_check,
}


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="cavity-eit", description="Double-cavity EIT emulator: data for figures and reports.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("csv", "json")):
        p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
        p.add_argument("--config", type=Path, help="key = value parameter file")
        p.add_argument("--out", type=Path, help="data file (default: stdout, no manifest)")
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--oracle", action="store_true",
                       help="cross-check against the brute-force reference")

    def tau(p):
        g = p.add_argument_group("pulse width")
        g.add_argument("--tau-s", type=float, help="amplitude half-width in seconds")
        g.add_argument("--tau-s-rel", type=float, help="half-width in units of tau_D")

    p = sub.add_parser("response", help="G-matrix sweep over k")
    common(p)
    p.add_argument("--kmin", type=float, help="rad/m (default k0 - 4 dk_split)")
    p.add_argument("--kmax", type=float, help="rad/m (default k0 + 4 dk_split)")
    p.add_argument("--points", type=int, default=4001)

    p = sub.add_parser("pulse", help="time-domain fields and energy fractions")
    common(p)
    tau(p)
    p.add_argument("--log2-samples", type=int, default=16)

    p = sub.add_parser("intracavity", help="amplitudes on all internal segments")
    common(p)
    p.add_argument("--dk", type=float, default=0.0, help="detuning from k0 in rad/m")

    p = sub.add_parser("loss", help="wave-packet absorption vs mirror absorption")
    common(p)
    tau(p)
    p.add_argument("--sweep", default="H,V",
                   help=f"comma-separated mirror sets from {', '.join(MIRROR_SETS)}")
    p.add_argument("--amin", type=float, default=1e-8)
    p.add_argument("--amax", type=float, default=1.0)
    p.add_argument("--points", type=int, default=33)

    p = sub.add_parser("ifm", help="fractions with a fully absorbing horizontal mirror")
    common(p)
    p.add_argument("--absorber", choices=("M1", "M3", "both"), default="M1")

    for name, helptext in (("xpm", "conditional phase shift report"),
                           ("feasibility", "all parameter conditions")):
        p = sub.add_parser(name, help=helptext)
        common(p, formats=("text", "json", "csv"))
        tau(p)

    p = sub.add_parser("oracle-check", help="random closed-form vs brute-force comparison")
    common(p)
    p.add_argument("--draws", type=int, default=25)
    p.add_argument("--seed", type=int, default=12345)
    return parser


def _manifest(args, device, source, out_path, extra):
    options = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
               if k not in ("preset", "config", "out")}
    return {
        "command": args.command,
        "tool_version": __version__,
        "source": source,
        "device": as_dict(device),
        "options": options,
        "results": extra,
        "outputs": [str(out_path)],
        "determinism": "no random state except --seed; identical manifest gives identical data",
    }


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        device, medium, source = _load_inputs(args)
        report = validate(device)
        report.raise_if_failed()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            text, extra = COMMANDS[args.command](args, device, medium)
    except (ValidationError, ConfigError, ValueError, OSError) as exc:
        print(f"cavity-eit: error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"cavity-eit: numerical guard '{exc.guard}' failed: {exc}", file=sys.stderr)
        return 3
    if args.out is None:
        sys.stdout.write(text)
        return 0
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text, encoding="utf-8")
    manifest_path = args.out.with_name(args.out.name + ".manifest.json")
    manifest_path.write_text(_json_text(_manifest(args, device, source, args.out, extra)),
                             encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
