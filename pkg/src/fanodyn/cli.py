"""Command-line front end: detuning scans, solver comparisons, self-validation
and trajectory dumps, driven by flat INI-style configs.

Configs read like the figure captions: intensities in W/cm^2, durations in
fs, bandwidths in a.u.; everything is converted to atomic units at this
boundary.  Output is deterministic for a fixed config and seed: CSV files
carry a ``#``-prefixed metadata header and are byte-identical across runs.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 validation
failure.
"""

import argparse
import configparser
import math
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .decorrelated import matexp_populations, propagate_averaged
from .model import (FIELD_MODELS, FieldConfig, helium_2s2p_params,
                    solver_context)
from .observables import (SOLVER_TAGS, profile_metrics, scan_profile)
from .propagator import monte_carlo_average, propagate_trajectory
from .pulses import PULSE_KINDS, PulseShape
from .laplace import solve_populations
from .stochastic import (estimate_correlation, estimate_moment_ratio,
                         sample_chaotic, sample_phase_diffusion)
from .units import intensity_to_au, time_fs_to_au

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4

_SWEEPABLE = ("intensity_w_cm2", "duration_fs", "bandwidth_au")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Curve:
    label: str
    i0: float        # a.u.
    gamma_l: float   # a.u.
    t_pulse: float   # a.u.


@dataclass(frozen=True)
class RunConfig:
    curves: list
    pulse_kind: str
    ramp_fraction: float
    window_factor: float
    model: str
    deltas: np.ndarray
    solver: str
    compare: list
    n_traj: int
    seed: int
    rate_stationary: bool
    basename: str
    double_ionization: bool

    def shape_for(self, curve: Curve) -> PulseShape:
        return PulseShape(self.pulse_kind, curve.t_pulse,
                          self.ramp_fraction, self.window_factor)

    def field_for(self, curve: Curve, delta=0.0) -> FieldConfig:
        return FieldConfig(i0=curve.i0, gamma_l=curve.gamma_l, delta=delta,
                           pulse=self.shape_for(curve), t_pulse=curve.t_pulse,
                           model=self.model)


def _get(section, key, cast=str, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"[{section.name}] missing required key '{key}'")
        return default
    raw = section[key].strip()
    try:
        if cast is bool:
            if raw.lower() in ("on", "true", "yes", "1"):
                return True
            if raw.lower() in ("off", "false", "no", "0"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] key '{key}': cannot parse {raw!r}") from exc


def _float_list(section, key):
    raw = section.get(key, "").strip()
    if not raw:
        raise ConfigError(f"[{section.name}] missing required key '{key}'")
    try:
        return [float(tok) for tok in raw.split(",")]
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] key '{key}': cannot parse {raw!r}") from exc


def load_config(path, seed_override=None, solver_override=None,
                correction_override=None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    for name in ("field", "scan", "solver", "output"):
        if name not in parser:
            raise ConfigError(f"missing section [{name}]")
    field = parser["field"]
    scan = parser["scan"]
    solver_sec = parser["solver"]
    output = parser["output"]

    pulse_kind = _get(field, "pulse", str, "square")
    if pulse_kind not in PULSE_KINDS:
        raise ConfigError(f"[field] unknown pulse kind {pulse_kind!r}")
    model = _get(field, "model", str, "deterministic")
    if model not in FIELD_MODELS:
        raise ConfigError(f"[field] unknown field model {model!r}")
    ramp_fraction = _get(field, "ramp_fraction", float, 0.0)
    window_factor = _get(field, "window_factor", float, 3.0)

    values = {key: _float_list(field, key) for key in _SWEEPABLE}
    sweep_keys = [key for key in _SWEEPABLE if len(values[key]) > 1]
    if len(sweep_keys) > 1:
        raise ConfigError("only one of intensity/duration/bandwidth may be a list")
    sweep_key = sweep_keys[0] if sweep_keys else None

    def curve_for(idx):
        vals = {k: (values[k][idx] if k == sweep_key else values[k][0])
                for k in _SWEEPABLE}
        label = (f"{sweep_key}={vals[sweep_key]:g}" if sweep_key else "profile")
        return Curve(label=label,
                     i0=intensity_to_au(vals["intensity_w_cm2"]),
                     gamma_l=vals["bandwidth_au"],
                     t_pulse=time_fs_to_au(vals["duration_fs"]))

    n_curves = len(values[sweep_key]) if sweep_key else 1
    curves = [curve_for(i) for i in range(n_curves)]

    d_min = _get(scan, "delta_min_au", float, required=True)
    d_max = _get(scan, "delta_max_au", float, required=True)
    points = _get(scan, "points", int, required=True)
    if points < 2 or not (d_max > d_min):
        raise ConfigError("[scan] grid must have points >= 2 and delta_max_au > delta_min_au")
    deltas = np.linspace(d_min, d_max, points)

    solver = solver_override or _get(solver_sec, "kind", str, "laplace")
    if solver not in SOLVER_TAGS:
        raise ConfigError(f"[solver] unknown kind {solver!r}")
    compare_raw = solver_sec.get("compare", "").strip()
    compare = [tok.strip() for tok in compare_raw.split(",") if tok.strip()]
    for tag in compare:
        if tag not in SOLVER_TAGS:
            raise ConfigError(f"[solver] unknown solver {tag!r} in compare list")

    n_traj = _get(solver_sec, "n_traj", int, 1000)
    seed = seed_override if seed_override is not None else _get(solver_sec, "seed", int, 0)
    stationary = _get(solver_sec, "stationary", bool, False)

    basename = _get(output, "basename", str, "scan")
    double_ionization = _get(output, "double_ionization", bool, False)
    if correction_override is not None:
        double_ionization = correction_override

    return RunConfig(curves=curves, pulse_kind=pulse_kind,
                     ramp_fraction=ramp_fraction, window_factor=window_factor,
                     model=model, deltas=deltas, solver=solver, compare=compare,
                     n_traj=n_traj, seed=seed, rate_stationary=stationary,
                     basename=basename, double_ionization=double_ionization)


def _fmt(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "nan"
    return f"{x:.17g}"


def _header_lines(cfg: RunConfig, config_path):
    atom = helium_2s2p_params()
    yield f"# fanodyn {__version__}"
    yield f"# config = {Path(config_path).name}"
    yield (f"# atom: q={atom.q:g} Gamma={atom.big_gamma:g} d21={atom.d21:g} "
           f"c_gamma={atom.gamma_per_intensity:g} omega_ag={atom.omega_ag:g} "
           f"sigma_di={atom.sigma_di:.8g}")
    yield (f"# pulse={cfg.pulse_kind} window_factor={cfg.window_factor:g} "
           f"ramp_fraction={cfg.ramp_fraction:g} model={cfg.model} "
           f"solver={cfg.solver} seed={cfg.seed} n_traj={cfg.n_traj} "
           f"double_ionization={'on' if cfg.double_ionization else 'off'}")
    for curve in cfg.curves:
        yield (f"# curve {curve.label}: i0_au={curve.i0:.8g} "
               f"gamma_l_au={curve.gamma_l:g} t_pulse_au={curve.t_pulse:.8g}")


def _run_curve_scan(cfg: RunConfig, curve: Curve):
    atom = helium_2s2p_params()
    shape = cfg.shape_for(curve)
    template = cfg.field_for(curve)
    return scan_profile(atom, template, shape, cfg.deltas, solver=cfg.solver,
                        corrected=cfg.double_ionization, n_traj=cfg.n_traj,
                        seed=cfg.seed, rate_stationary=cfg.rate_stationary)


def _write_scan_csv(path, cfg: RunConfig, config_path, scans):
    atom = helium_2s2p_params()
    cols = ["delta_au", "omega_au"]
    for curve, scan in zip(cfg.curves, scans):
        cols.append(f"p_ion[{curve.label}]")
        if scan.p_corrected is not None:
            cols.append(f"p_ion_corrected[{curve.label}]")
        if scan.std_err is not None:
            cols.append(f"stderr[{curve.label}]")
    with open(path, "w") as fh:
        for line in _header_lines(cfg, config_path):
            fh.write(line + "\n")
        fh.write(",".join(cols) + "\n")
        for k, delta in enumerate(cfg.deltas):
            row = [_fmt(delta), _fmt(atom.omega_ag + delta)]
            for scan in scans:
                row.append(_fmt(scan.p_ion[k]))
                if scan.p_corrected is not None:
                    row.append(_fmt(scan.p_corrected[k]))
                if scan.std_err is not None:
                    row.append(_fmt(scan.std_err[k]))
            fh.write(",".join(row) + "\n")


def _write_metrics(path, cfg: RunConfig, scans):
    def show(v):
        return "absent" if v is None else f"{v:.8g}"

    with open(path, "w") as fh:
        fh.write("# profile metrics per curve\n")
        for curve, scan in zip(cfg.curves, scans):
            m = profile_metrics(scan)
            fh.write(
                f"curve={curve.label} peak_position={show(m.peak_position)} "
                f"min_position={show(m.min_position)} fwhm={show(m.fwhm)} "
                f"contrast={m.contrast:.8g} min_value={m.min_value:.8g}\n")


def cmd_scan(args):
    cfg = load_config(args.config, seed_override=args.seed,
                      solver_override=args.solver,
                      correction_override=args.double_ionization)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scans = [_run_curve_scan(cfg, curve) for curve in cfg.curves]
    csv_path = out_dir / f"{cfg.basename}.csv"
    _write_scan_csv(csv_path, cfg, args.config, scans)
    _write_metrics(out_dir / f"{cfg.basename}_metrics.txt", cfg, scans)
    n_failed = sum(len(s.failures) for s in scans)
    print(f"wrote {csv_path} ({len(cfg.curves)} curve(s), {len(cfg.deltas)} points)")
    if n_failed:
        for scan, curve in zip(scans, cfg.curves):
            for k, msg in scan.failures:
                print(f"solver failure [{curve.label}] at grid point {k}: {msg}",
                      file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_compare_solvers(args):
    cfg = load_config(args.config, seed_override=args.seed)
    if len(cfg.compare) < 2:
        raise ConfigError("[solver] compare must list at least 2 solvers")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve = cfg.curves[0]
    scans = {}
    for tag in cfg.compare:
        run_cfg = replace(cfg, solver=tag)
        scans[tag] = _run_curve_scan(run_cfg, curve)

    csv_path = out_dir / f"{cfg.basename}_compare.csv"
    with open(csv_path, "w") as fh:
        for line in _header_lines(cfg, args.config):
            fh.write(line + "\n")
        cols = ["delta_au"] + [f"p_ion[{tag}]" for tag in cfg.compare]
        for tag in cfg.compare:
            if scans[tag].std_err is not None:
                cols.append(f"stderr[{tag}]")
        fh.write(",".join(cols) + "\n")
        for k, delta in enumerate(cfg.deltas):
            row = [_fmt(delta)] + [_fmt(scans[tag].p_ion[k]) for tag in cfg.compare]
            for tag in cfg.compare:
                if scans[tag].std_err is not None:
                    row.append(_fmt(scans[tag].std_err[k]))
            fh.write(",".join(row) + "\n")

    print(f"wrote {csv_path}")
    failed = sum(len(s.failures) for s in scans.values())
    for i, tag_a in enumerate(cfg.compare):
        for tag_b in cfg.compare[i + 1:]:
            dev = np.nanmax(np.abs(scans[tag_a].p_ion - scans[tag_b].p_ion))
            print(f"max |p_ion({tag_a}) - p_ion({tag_b})| = {dev:.6g}")
    return EXIT_NUMERICAL if failed else EXIT_OK


def _validation_checks(n_traj, seed):
    """Yield (name, deviation, tolerance, note) for the built-in check suite."""
    atom = helium_2s2p_params()
    i0 = intensity_to_au(1e13)
    gl = 0.0018
    T = time_fs_to_au(120.0)

    # 1) laplace vs decorrelated, and laplace vs matrix exponential
    dev_ode = 0.0
    dev_expm = 0.0
    for delta in (0.0, atom.big_gamma, -atom.big_gamma):
        ctx = solver_context(atom, i0, delta, gl)
        sol = solve_populations(atom, ctx, i0)
        s11_l, s22_l = sol.populations_at(T)
        s11_e, s22_e = matexp_populations(atom, ctx, i0, T)
        cfg = FieldConfig.create(i0, gl, delta, "square", T)
        res = propagate_averaged(atom, cfg, cfg.pulse, t_grid=[0.0, T])
        dev_ode = max(dev_ode, abs(res.s11[-1] - s11_l), abs(res.s22[-1] - s22_l))
        dev_expm = max(dev_expm, abs(s11_e - s11_l), abs(s22_e - s22_l))
    yield "laplace-vs-decorrelated", dev_ode, 1e-8, ""
    yield "laplace-vs-matrix-exponential", dev_expm, 1e-10, ""

    # 2) Monte Carlo (phase diffusion) vs decorrelated
    note = ""
    if n_traj < 100:
        note = "warning: small ensemble, tolerance widened by the 3 s.e. scaling"
    cfg = FieldConfig.create(i0, gl, 0.0, "square", T, model="phase-diffusion")
    mc = monte_carlo_average(atom, cfg, cfg.pulse, n_traj=n_traj, seed=seed)
    res = propagate_averaged(atom, cfg, cfg.pulse, t_grid=[0.0, T])
    dev = abs(mc.mean_sigma11[-1] - res.s11[-1])
    se = float(mc.final_sigma11.std(ddof=1) / math.sqrt(n_traj))
    yield "mc-vs-decorrelated(phase-diffusion)", dev, 3.0 * se, note

    # 3) first-order correlation functions
    dt = 0.1 / gl
    n_steps = 400
    lag = round((2.0 / gl) / dt) * dt
    for tag, sampler in (("phase-diffusion", sample_phase_diffusion),
                         ("chaotic", sample_chaotic)):
        trajs = [sampler(gl, dt, n_steps, seed, stream_index=i)
                 for i in range(max(n_traj, 200))]
        est = estimate_correlation(trajs, lag)
        dev = abs(est.value - math.exp(-0.5 * gl * lag))
        yield f"correlation({tag})", dev, 3.0 * est.std_error, ""

    # 4) field moment ratios
    trajs_pd = [sample_phase_diffusion(gl, dt, n_steps, seed, stream_index=i)
                for i in range(max(n_traj, 200))]
    ratio, _ = estimate_moment_ratio(trajs_pd, 2)
    yield "moment-ratio(phase-diffusion,n=2)", abs(ratio - 1.0), 1e-9, "exact"
    trajs_ch = [sample_chaotic(gl, dt, n_steps, seed, stream_index=i)
                for i in range(max(n_traj, 200))]
    ratio, se = estimate_moment_ratio(trajs_ch, 2)
    yield "moment-ratio(chaotic,n=2)", abs(ratio - 2.0), 3.0 * se, ""
    ratio, se = estimate_moment_ratio(trajs_ch, 3)
    yield "moment-ratio(chaotic,n=3)", abs(ratio - 6.0), 3.0 * se, ""


def cmd_validate(args):
    failures = 0
    for name, dev, tol, note in _validation_checks(args.n_traj, args.seed):
        ok = dev <= tol
        line = f"{'PASS' if ok else 'FAIL'} {name}: deviation={dev:.3e} tolerance={tol:.3e}"
        if note:
            line += f" ({note})"
        print(line)
        if not ok:
            failures += 1
    print(f"validation: {failures} failure(s)")
    return EXIT_VALIDATION if failures else EXIT_OK


def cmd_trajectory_dump(args):
    sampler = {"phase-diffusion": sample_phase_diffusion,
               "chaotic": sample_chaotic}[args.model]
    traj = sampler(args.bandwidth_au, args.dt_au, args.steps, args.seed,
                   stream_index=args.stream_index)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.config:
        cfg = load_config(args.config)
        curve = cfg.curves[0]
        atom = helium_2s2p_params()
        shape = cfg.shape_for(curve)
        field_cfg = replace(cfg.field_for(curve), model=args.model)
        result = propagate_trajectory(atom, traj, field_cfg, shape)
        with open(out, "w") as fh:
            fh.write(f"# driven trajectory, model={args.model}, seed={args.seed}\n")
            fh.write("t_au,re_eps,im_eps,sigma11,sigma22,re_sigma21,im_sigma21\n")
            for k in range(len(result.times)):
                fh.write(
                    f"{result.times[k]:.17g},{traj.samples[k].real:.17g},"
                    f"{traj.samples[k].imag:.17g},{result.sigma11[k]:.17g},"
                    f"{result.sigma22[k]:.17g},{result.sigma21[k].real:.17g},"
                    f"{result.sigma21[k].imag:.17g}\n")
    else:
        from .stochastic import dump_trajectory_csv
        dump_trajectory_csv(traj, out)
    print(f"wrote {out}")
    return EXIT_OK


def bundled_config_path(name):
    """Filesystem path of a bundled figure config such as 'fig1.cfg'."""
    ref = resources.files("fanodyn").joinpath("configs", name)
    return str(ref)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fanodyn",
        description="Ionization profiles of a driven autoionizing resonance",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="run a detuning scan from a config")
    p_scan.add_argument("--config", required=True)
    p_scan.add_argument("--seed", type=int, default=None)
    p_scan.add_argument("--solver", choices=SOLVER_TAGS, default=None)
    p_scan.add_argument("--double-ionization", choices=("on", "off"), default=None)
    p_scan.add_argument("--out", default=".")
    p_scan.set_defaults(func=cmd_scan)

    p_cmp = sub.add_parser("compare-solvers", help="side-by-side solver columns")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--seed", type=int, default=None)
    p_cmp.add_argument("--out", default=".")
    p_cmp.set_defaults(func=cmd_compare_solvers)

    p_val = sub.add_parser("validate", help="run the built-in cross checks")
    p_val.add_argument("--n-traj", type=int, default=1000)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=cmd_validate)

    p_dump = sub.add_parser("trajectory-dump", help="dump one field realization")
    p_dump.add_argument("--model", choices=("phase-diffusion", "chaotic"),
                        required=True)
    p_dump.add_argument("--bandwidth-au", type=float, required=True)
    p_dump.add_argument("--dt-au", type=float, required=True)
    p_dump.add_argument("--steps", type=int, required=True)
    p_dump.add_argument("--seed", type=int, default=0)
    p_dump.add_argument("--stream-index", type=int, default=0)
    p_dump.add_argument("--config", default=None,
                        help="also integrate the driven density matrix")
    p_dump.add_argument("--out", required=True)
    p_dump.set_defaults(func=cmd_trajectory_dump)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "double_ionization", None) is not None:
        args.double_ionization = args.double_ionization == "on"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
