"""Configuration-driven experiment harness.

Each subcommand assembles an ExperimentConfig, runs the matching pipeline,
writes CSV artifacts plus a JSON run report, and exits nonzero if any
requested assertion fails.  Identical (config, seed) produce byte-identical
CSVs: all randomness is counter-based and all float formatting is
shortest-round-trip.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import arith, counting, dwcore, flowavg, io, thermo

KINDS = ("spectrum", "thermo", "flowavg", "arith", "trace", "count")

# allowed parameter keys and their requiredness, per experiment kind
_SCHEMAS = {
    "spectrum": {"mean": False, "cos": False, "sin": False, "twist": False,
                 "K": False, "lam": False},
    "thermo": {"model": False, "q": False, "roof": False,
               "beta_min": False, "beta_max": False, "n_beta": False},
    "flowavg": {"T": False, "step": False, "tmax": False, "fd_step": False},
    "arith": {"A": False, "p": False, "m_max": False, "box": False,
              "weight_mode": False},
    "trace": {"A": False, "p": False, "m_max": False, "box": False,
              "T": False, "M": False, "beta": False, "sigma": False,
              "area": False, "n_lengths": False},
    "count": {"planted_exponent": False, "n_ladder": False, "base_count": False},
}


@dataclass
class ExperimentConfig:
    kind: str
    parameters: dict
    seed: int = 0
    output_dir: str = "."
    threads: int = 1

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; know {KINDS}")
        schema = _SCHEMAS[self.kind]
        unknown = set(self.parameters) - set(schema)
        if unknown:
            raise ValueError(
                f"unknown parameter keys for kind={self.kind}: {sorted(unknown)}")
        missing = [k for k, required in schema.items()
                   if required and k not in self.parameters]
        if missing:
            raise ValueError(f"missing required parameters: {missing}")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def content_hash(self) -> str:
        blob = json.dumps({"kind": self.kind, "parameters": self.parameters,
                           "seed": self.seed}, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Assertion:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured {self.measured:.6g} vs tolerance {self.tolerance:.6g}"


@dataclass
class RunReport:
    config: dict
    input_hash: str
    wall_time_s: float
    files: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def all_passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def to_dict(self) -> dict:
        return {"config": self.config, "input_hash": self.input_hash,
                "wall_time_s": self.wall_time_s, "files": self.files,
                "notes": self.notes,
                "assertions": [{"name": a.name, "passed": a.passed,
                                "measured": a.measured, "tolerance": a.tolerance}
                               for a in self.assertions]}


def _check(assertions, name, measured, tolerance, mode="le"):
    if mode == "le":
        ok = measured <= tolerance
    elif mode == "ge":
        ok = measured >= tolerance
    else:  # pragma: no cover
        raise ValueError(mode)
    assertions.append(Assertion(name=name, passed=bool(ok),
                                measured=float(measured), tolerance=float(tolerance)))


# ---------------------------------------------------------------------------
# pipelines

def _run_spectrum(cfg, out, verify, assertions, files, notes):
    p = cfg.parameters
    profile = dwcore.DampingProfile(mean=float(p.get("mean", 0.5)),
                                    cosine_coeffs=tuple(p.get("cos", ())),
                                    sine_coeffs=tuple(p.get("sin", ())),
                                    twist=float(p.get("twist", 0.0)))
    K = int(p.get("K", 64))
    spec = dwcore.solve_profile_spectrum(profile, K)
    path = os.path.join(out, "spectrum.csv")
    io.write_spectrum_csv(path, spec)
    files.append(path)
    lam = float(p.get("lam", K / 4))
    wc = dwcore.weyl_window_count(spec, lam)
    notes["weyl_count"] = wc.count
    notes["weyl_predicted"] = wc.predicted
    notes["weyl_trusted"] = wc.trusted
    if verify:
        _check(assertions, "spectrum.symmetry", dwcore.symmetry_defect(spec), 1e-8)
        if profile.twist == 0.0:
            _check(assertions, "spectrum.band_bound",
                   dwcore.band_bound_defect(spec, profile), 1e-6)
        pencil = dwcore.assemble_pencil(profile, K)
        _check(assertions, "spectrum.rayleigh",
               float(dwcore.rayleigh_residuals(pencil).max()), 1e-7)


def _run_thermo(cfg, out, verify, assertions, files, notes):
    p = cfg.parameters
    name = p.get("model", "full-2-shift")
    if name == "full-2-shift":
        model = thermo.full_shift(2, q_by_symbol=p.get("q", (0.0, 1.0)),
                                  roof_by_symbol=p.get("roof"))
    elif name == "golden-mean":
        model = thermo.golden_mean_shift()
    else:
        raise ValueError(f"unknown builtin model {name!r}")
    betas = np.linspace(float(p.get("beta_min", -40.0)),
                        float(p.get("beta_max", 40.0)),
                        int(p.get("n_beta", 801)))
    curve = thermo.pressure_curve(model, betas)
    rate = thermo.legendre_rate(curve)
    cpath = os.path.join(out, "pressure.csv")
    rpath = os.path.join(out, "rate.csv")
    io.write_curve_csv(cpath, curve.betas, curve.values)
    io.write_curve_csv(rpath, rate.alphas, rate.values)
    files.extend([cpath, rpath])
    notes["q_minus"] = rate.q_minus
    notes["q_plus"] = rate.q_plus
    if verify:
        worst = max(abs(thermo.legendre_roundtrip(curve, rate, b) -
                        thermo.pressure_transfer(model, b))
                    for b in (-2.0, -0.5, 0.0, 0.5, 2.0))
        _check(assertions, "thermo.legendre_roundtrip", worst, 1e-6)
        qbar = thermo.mean_under_max_entropy(model)
        _check(assertions, "thermo.rate_peak",
               abs(thermo.legendre_rate(curve, [qbar]).values[0] -
                   thermo.topological_entropy(model)), 1e-8)


def _run_flowavg(cfg, out, verify, assertions, files, notes):
    p = cfg.parameters
    T = float(p.get("T", 8.0))
    step = float(p.get("step", 1e-3))
    tmax = float(p.get("tmax", 4.0))
    fd_step = float(p.get("fd_step", 1e-4))
    q = flowavg.Observable(lambda g: g[..., 0, 0] / (1.0 + g[..., 0, 0] ** 2),
                           name="bounded-entry", smoothness="rational in g11")
    point = flowavg.FlowPoint(np.array([[1.0, 1.0], [0.5, 1.5]]))
    table = flowavg.trajectory_table(q, point, tmax, max(step, 1e-2))
    tpath = os.path.join(out, "trajectory.csv")
    io.write_trajectory_csv(tpath, table)
    files.append(tpath)
    notes["birkhoff_average"] = flowavg.birkhoff_average(q, point, T, step)
    if verify:
        _check(assertions, "flowavg.cohomology_residual",
               flowavg.cohomology_residual(q, point, T, fd_step, step), 1e-4)
        a = flowavg.geodesic_flow(flowavg.geodesic_flow(point, 1.3), 0.9)
        b = flowavg.geodesic_flow(point, 2.2)
        _check(assertions, "flowavg.group_law",
               float(np.abs(a.g - b.g).max()), 1e-12)


def _arith_cache_path(out):
    return os.path.join(out, "length_spectrum.cache")


def _run_arith(cfg, out, verify, assertions, files, notes):
    p = cfg.parameters
    A = int(p.get("A", 2))
    pp = int(p.get("p", 5))
    m_max = int(p.get("m_max", 5))
    box = int(p.get("box", 8))
    mode = p.get("weight_mode", arith.ZERO_FORM)
    path = _arith_cache_path(out)
    cache_hit = False
    if os.path.exists(path):
        try:
            wls = io.read_length_spectrum_cache(path, expect={"A": A, "p": pp, "box": box})
            cache_hit = True
        except ValueError:
            wls = None
    else:
        wls = None
    if wls is None:
        wls = arith.build_length_spectrum(A, pp, m_max, box, weight_mode=mode,
                                          seed=cfg.seed)
        io.write_length_spectrum_cache(path, wls)
    files.append(path)
    notes["cache_hit"] = cache_hit
    notes["mu"] = {str(m): v for m, v in sorted(wls.mu_dict().items())}
    if verify:
        ms = np.arange(2, max(m_max, 3) + 1)
        ident = np.abs(np.log(arith.xm_array(ms)) - 2.0 * np.arccosh(ms.astype(float)))
        _check(assertions, "arith.length_identity", float(ident.max()), 1e-12)
        worst = max((abs(arith.norm_form_residual(c.representative, A, pp))
                     for e in wls.entries for c in e.classes), default=0)
        _check(assertions, "arith.norm_residual", float(worst), 0.0)
    return wls


def _run_trace(cfg, out, verify, assertions, files, notes):
    p = cfg.parameters
    A = int(p.get("A", 2))
    pp = int(p.get("p", 5))
    T = float(p.get("T", 2.0))
    M = float(p.get("M", 10.0))
    beta = float(p.get("beta", 0.8))
    m_max = int(p.get("m_max", 14))
    box = int(p.get("box", 20))
    n_lengths = int(p.get("n_lengths", 8))
    area = float(p.get("area", 4.0 * math.pi))
    wls = arith.build_length_spectrum(A, pp, m_max, box, seed=cfg.seed)
    lengths = sorted({e.length for e in wls.entries if e.classes and e.length <= 5.0 * T})
    lengths = lengths[:n_lengths]
    R = arith.r_search(lengths, M, T)
    notes["R"] = R
    sigma = float(p.get("sigma", 1.0))
    params = arith.TraceWindowParams(sigma=sigma, R=R, T=T, beta=beta)
    sides = arith.gaussian_trace_sides(params, wls, area)
    alpha = 2.0 * beta * math.log(max(T, 20.0)) - arith.C_SPLIT
    moment_T = max(T, 20.0)
    moment = arith.windowed_second_moment(wls, alpha, beta, moment_T)
    rows = [("metric", "value"),
            ("R", R),
            ("geodesic_sum_abs", abs(sides.geodesic_sum)),
            ("modulus_lower_bound", sides.modulus_lower_bound),
            ("plancherel_abs", abs(sides.plancherel_term)),
            ("I", moment.I), ("I1", moment.I1), ("I2", moment.I2),
            ("C_split", moment.split_constant)]
    path = os.path.join(out, "trace_summary.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(f"{a},{b!r}" if not isinstance(b, str) else f"{a},{b}"
                           for a, b in rows) + "\n")
    files.append(path)
    notes["second_moment_regime_ok"] = moment.regime_ok
    if verify:
        worst_cos = min(math.cos(R * l) for l in lengths)
        _check(assertions, "trace.r_search_cos", worst_cos, 0.5, mode="ge")
        _check(assertions, "trace.modulus_bound",
               abs(sides.geodesic_sum), sides.modulus_lower_bound, mode="ge")
        if moment.regime_ok and moment.I1 > 0:
            _check(assertions, "trace.second_moment_split",
                   abs(moment.I2), moment.I1 / 100.0)
        rel = abs(moment.quadrature_I - (moment.I1 + moment.I2)) / abs(moment.I)
        _check(assertions, "trace.moment_quadrature", rel, 1e-6)


def _run_count(cfg, out, verify, assertions, files, notes):
    p = cfg.parameters
    exponent = float(p.get("planted_exponent", 0.5))
    n_ladder = int(p.get("n_ladder", 6))
    base = float(p.get("base_count", 4.0))
    hbars = [2.0 ** -(k + 2) for k in range(n_ladder)]
    ladder = [(h, max(1, round(base * h ** (-exponent)))) for h in hbars]
    fit = counting.deviation_exponent(ladder)
    rows = [(h, 1.0, 0.0, "above", c) for h, c in ladder]
    path = os.path.join(out, "counts.csv")
    io.write_counts_csv(path, rows)
    io.append_exponent_report(path, fit.slope, fit.residual)
    files.append(path)
    notes["slope"] = fit.slope
    if verify:
        _check(assertions, "count.exponent_recovered",
               abs(fit.slope - exponent), 0.05)


_PIPELINES = {"spectrum": _run_spectrum, "thermo": _run_thermo,
              "flowavg": _run_flowavg, "arith": _run_arith,
              "trace": _run_trace, "count": _run_count}


def run_experiment(config: ExperimentConfig, verify: bool = True) -> RunReport:
    """Validate, execute the named pipeline, persist artifacts and report."""
    config.validate()
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    assertions, files, notes = [], [], {}
    t0 = time.perf_counter()
    _PIPELINES[config.kind](config, out, verify, assertions, files, notes)
    wall = time.perf_counter() - t0
    report = RunReport(config={"kind": config.kind, "parameters": config.parameters,
                               "seed": config.seed, "threads": config.threads},
                       input_hash=config.content_hash(),
                       wall_time_s=wall, files=files, assertions=assertions,
                       notes=notes)
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--threads", type=int, default=1,
                     help="parallelism cap (results are identical regardless)")
    sub.add_argument("--verify", action="store_true",
                     help="run the assertion suite on the produced data")


def _params_from_pairs(pairs):
    params = {}
    for item in pairs or ():
        key, _, val = item.partition("=")
        if not _:
            raise SystemExit(f"--param expects key=value, got {item!r}")
        try:
            params[key] = json.loads(val)
        except json.JSONDecodeError:
            params[key] = val
    return params


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dwlab",
                                 description="spectral experiments harness")
    subs = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sub = subs.add_parser(kind, help=f"run a {kind} experiment")
        sub.add_argument("--param", action="append", metavar="KEY=VALUE",
                         help="pipeline parameter (JSON-typed value)")
        _add_common(sub)
    run = subs.add_parser("run", help="run an experiment from a JSON config file")
    run.add_argument("config_path")
    _add_common(run)
    cache = subs.add_parser("cache", help="write or inspect a length-spectrum cache")
    cache.add_argument("--A", type=int, default=2)
    cache.add_argument("--p", type=int, default=5)
    cache.add_argument("--m-max", type=int, default=5)
    cache.add_argument("--box", type=int, default=8)
    cache.add_argument("--load", metavar="PATH",
                       help="read an existing cache and print a summary")
    _add_common(cache)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "cache":
        if args.load:
            try:
                wls = io.read_length_spectrum_cache(args.load)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
            print(f"cache: A={wls.A} p={wls.p} box={wls.box} "
                  f"entries={len(wls.entries)} mode={wls.weight_mode}")
            return 0
        cfg = ExperimentConfig(kind="arith",
                               parameters={"A": args.A, "p": args.p,
                                           "m_max": args.m_max, "box": args.box},
                               seed=args.seed, output_dir=args.out,
                               threads=args.threads)
    elif args.command == "run":
        try:
            with open(args.config_path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        extra = set(doc) - {"kind", "parameters", "seed", "output_dir", "threads"}
        if extra:
            print(f"error: unknown config keys {sorted(extra)}", file=sys.stderr)
            return 2
        cfg = ExperimentConfig(kind=doc.get("kind", ""),
                               parameters=doc.get("parameters", {}),
                               seed=int(doc.get("seed", args.seed)),
                               output_dir=doc.get("output_dir", args.out),
                               threads=int(doc.get("threads", args.threads)))
    else:
        cfg = ExperimentConfig(kind=args.command,
                               parameters=_params_from_pairs(args.param),
                               seed=args.seed, output_dir=args.out,
                               threads=args.threads)
    try:
        report = run_experiment(cfg, verify=getattr(args, "verify", False) or
                                args.command == "run")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for a in report.assertions:
        print(a.line())
    print(f"report: {os.path.join(cfg.output_dir, 'report.json')}")
    return 0 if report.all_passed() else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
