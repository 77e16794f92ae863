"""
Command-line front end.

Subcommands::

    rbfid analyze       --config FILE [--out DIR] [--seed N]
    rbfid simulate      --config FILE [--out DIR] [--seed N]
    rbfid sweep-fig1    [--grid N] [--out DIR] [--seed N]
    rbfid proctor-scan  [--theta LIST] [--config FILE] [--out DIR] [--seed N]

Exit codes: 0 success, 2 invalid noise model, 3 unreadable or malformed
configuration, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .analytic import (
    analyze_model,
    build_M,
    fig1_sweep,
    infidelity_bound,
    lgr_geometry,
)
from .channels import (
    GateIndependentLR,
    PauliLR,
    PerGateUnitary,
    ProctorPrimitive,
    decomposition_gate,
    model_from_dict,
    noisy_gateset,
)
from .clifford import clifford_group
from .errors import (
    ConfigError,
    DecompositionGateFailed,
    EigSolverFailure,
    RBFidError,
    TaylorIllConditioned,
)
from .metrics import rb_number
from .montecarlo import RBConfig, run_rb, validate_against_spectrum
from .perturbation import perturb_series

EXIT_OK = 0
EXIT_MODEL = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4

ANALYSES = ("spectral", "montecarlo", "perturbative", "bounds")
DEFAULT_THETAS = (0.02, 0.03, 0.05, 0.07, 0.1, 0.14, 0.2)
THETA_MAX = 0.3
EQ_TOL = 1e-10


@dataclass
class ExperimentConfig:
    noise: dict
    rb: Optional[dict] = None
    outputs: str = "out"
    analyses: List[str] = field(default_factory=lambda: ["spectral"])

    @classmethod
    def from_dict(cls, raw) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        extra = set(raw) - {"noise", "rb", "outputs", "analyses"}
        if extra:
            raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
        if "noise" not in raw:
            raise ConfigError("configuration needs a 'noise' entry")
        analyses = raw.get("analyses", ["spectral"])
        if not isinstance(analyses, list) or any(a not in ANALYSES for a in analyses):
            raise ConfigError(f"analyses must be a list drawn from {ANALYSES}")
        rb = raw.get("rb")
        if rb is not None and not isinstance(rb, dict):
            raise ConfigError("'rb' must be a JSON object")
        return cls(raw["noise"], rb, str(raw.get("outputs", "out")), list(analyses))


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ------------------------------------------------------------------ helpers

def _load_config(path: str) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CLIError(EXIT_CONFIG, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(EXIT_CONFIG, f"{path}: invalid JSON: {exc}") from exc
    try:
        return ExperimentConfig.from_dict(raw)
    except ConfigError as exc:
        raise CLIError(EXIT_CONFIG, str(exc)) from exc


def _build_model(cfg: ExperimentConfig):
    try:
        return model_from_dict(cfg.noise)
    except ConfigError as exc:
        raise CLIError(EXIT_CONFIG, str(exc)) from exc
    except RBFidError as exc:
        raise CLIError(EXIT_MODEL, f"invalid noise model: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise CLIError(EXIT_CONFIG, f"malformed noise model: {exc}") from exc


def _rb_config(raw: Optional[dict], seed: Optional[int]) -> RBConfig:
    spec = dict(raw or {})
    if seed is not None:
        spec["seed"] = seed
    try:
        return RBConfig.from_dict(spec)
    except ConfigError as exc:
        raise CLIError(EXIT_CONFIG, str(exc)) from exc


def _out_dir(arg: Optional[str], cfg: Optional[ExperimentConfig]) -> Path:
    out = Path(arg if arg is not None else (cfg.outputs if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def _lr_pair(model):
    if isinstance(model, PauliLR):
        model = model.as_lr()
    if isinstance(model, GateIndependentLR):
        return model.left, model.right
    return None


def comparison_notes(p: float, q: float) -> List[str]:
    r, eps = rb_number(p), (1 - q) / 2
    notes = []
    if abs(p - q) <= EQ_TOL:
        notes.append("p == q")
    elif q < p:
        notes.append("q < p: the RB number underestimates the gate-set infidelity")
    else:
        notes.append("q > p")
    if abs(r) <= EQ_TOL and eps > EQ_TOL:
        notes.append("r = 0, ε > 0")
    return notes


# ----------------------------------------------------------------- commands

def cmd_analyze(args) -> int:
    cfg = _load_config(args.config)
    model = _build_model(cfg)
    group = clifford_group()
    spectral, fidelity = analyze_model(model, group)
    report = {"spectral": spectral.to_dict(), "fidelity": fidelity.to_dict(),
              "notes": comparison_notes(spectral.p, spectral.q)}

    if "bounds" in cfg.analyses:
        pair = _lr_pair(model)
        if pair is not None and pair[0].is_unital and pair[1].is_unital:
            geo = lgr_geometry(*pair)
            bound = infidelity_bound(geo.alpha, geo.r)
            report["bounds"] = {"alpha": geo.alpha, "beta": geo.beta, "x1": geo.x1, "x2": geo.x2,
                                "q_over_alpha": geo.q / geo.alpha,
                                "q_over_alpha_max": (1 + geo.beta) / 2,
                                "epsilon_lower_bound": bound.general,
                                "epsilon_lower_bound_qubit": bound.qubit}
        else:
            report["bounds"] = None
    if "perturbative" in cfg.analyses:
        if isinstance(model, (PerGateUnitary, ProctorPrimitive)):
            report["perturbative"] = perturb_series(model, group=group).to_dict()
        else:
            report["perturbative"] = None
    if "montecarlo" in cfg.analyses:
        run = run_rb(_rb_config(cfg.rb, args.seed), model, group)
        M = build_M(group, noisy_gateset(model, group))
        report["montecarlo"] = {"run": run.to_dict(),
                                "validation": validate_against_spectrum(run, M).to_dict()}

    out = _out_dir(args.out, cfg)
    _write_json(out / "report.json", report)
    for note in report["notes"]:
        if note.startswith("r = 0"):
            print(f"WARNING: {note} (RB sees no error although the gates are noisy)", file=sys.stderr)
        else:
            print(note)
    print(f"p = {spectral.p:.12g}  q = {spectral.q:.12g}  r = {spectral.r:.6g}  epsilon = {spectral.epsilon:.6g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    model = _build_model(cfg)
    rb_cfg = _rb_config(cfg.rb, args.seed)
    group = clifford_group()
    run = run_rb(rb_cfg, model, group)
    M = build_M(group, noisy_gateset(model, group))
    data = run.to_dict()
    data["validation"] = validate_against_spectrum(run, M).to_dict()
    out = _out_dir(args.out, cfg)
    _write_json(out / "rbrun.json", data)
    (out / "rb.csv").write_text(run.to_csv())
    if run.flags:
        print(f"flags: {', '.join(run.flags)}", file=sys.stderr)
    print(f"fitted p = {run.p:.10g} +/- {run.p_stderr:.2g}")
    return EXIT_OK


def cmd_sweep_fig1(args) -> int:
    if args.grid < 2:
        raise CLIError(EXIT_CONFIG, "--grid must be at least 2")
    rows = fig1_sweep(args.grid, seed=args.seed if args.seed is not None else 0)
    out = _out_dir(args.out, None)
    _write_csv(out / "fig1.csv",
               ["beta", "p_over_alpha", "q_over_alpha_min", "q_over_alpha_max", "q_over_alpha_sample"],
               rows)
    print(f"wrote {len(rows)} rows to {out / 'fig1.csv'}")
    return EXIT_OK


def _parse_thetas(text: Optional[str]) -> List[float]:
    if text is None:
        return list(DEFAULT_THETAS)
    try:
        thetas = [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise CLIError(EXIT_CONFIG, f"bad --theta list: {exc}") from exc
    if not thetas or any(not 0 <= t <= THETA_MAX for t in thetas):
        raise CLIError(EXIT_CONFIG, f"theta values must lie in [0, {THETA_MAX}]")
    return thetas


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def cmd_proctor_scan(args) -> int:
    thetas = _parse_thetas(args.theta)
    base = ProctorPrimitive(0.0)
    rb_raw = None
    if args.config:
        cfg = _load_config(args.config)
        base = _build_model(cfg)
        rb_raw = cfg.rb
        if not isinstance(base, ProctorPrimitive):
            raise CLIError(EXIT_CONFIG, "proctor-scan needs a 'proctor' noise model")
    rb_cfg = _rb_config(rb_raw, args.seed)
    group = clifford_group()
    ratio = decomposition_gate(base, group=group)

    rows = []
    for theta in thetas:
        model = base.with_theta(theta)
        spectral, fidelity = analyze_model(model, group)
        if theta == 0:
            rows.append((0.0, 0.0, 0.0, 0.0))
            continue
        run = run_rb(rb_cfg, model, group)
        rows.append((theta, fidelity.epsilon, spectral.r, rb_number(run.p)))
    rows_arr = np.array(rows)
    summary = {
        "decomposition_ratio": ratio,
        "slope_epsilon": loglog_slope(rows_arr[:, 0], rows_arr[:, 1]),
        "slope_r_spectral": loglog_slope(rows_arr[:, 0], rows_arr[:, 2]),
        "thetas": thetas,
        "rb": rb_cfg.to_dict(),
    }
    out = _out_dir(args.out, None)
    _write_csv(out / "proctor_scan.csv", ["theta", "epsilon", "r_spectral", "r_fitted"], rows)
    _write_json(out / "proctor_scan.json", summary)
    print(f"<theta_k^2>/theta^2 = {ratio:.6f}")
    print(f"slope(epsilon) = {summary['slope_epsilon']:.4f}  slope(r) = {summary['slope_r_spectral']:.4f}")
    return EXIT_OK


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbfid", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required, help="experiment configuration (JSON)")
        p.add_argument("--out", help="output directory (overrides the config's 'outputs')")
        p.add_argument("--seed", type=int, help="RNG seed (overrides the config)")

    p = sub.add_parser("analyze", help="spectral p, fidelity q and optional extras -> report.json")
    common(p, True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte-Carlo RB -> rbrun.json, rb.csv")
    common(p, True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-fig1", help="q/alpha band versus beta -> fig1.csv")
    p.add_argument("--grid", type=int, default=101, help="number of beta grid points (>= 2)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="seed for the sample column")
    p.set_defaults(func=cmd_sweep_fig1)

    p = sub.add_parser("proctor-scan", help="epsilon and r versus theta for the XY-compiled model")
    common(p, False)
    p.add_argument("--theta", help="comma-separated angles in [0, 0.3]")
    p.set_defaults(func=cmd_proctor_scan)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EigSolverFailure, TaylorIllConditioned, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DecompositionGateFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except RBFidError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
