"""Command-line interface.

Exit codes: 0 on success, 1 for usage and configuration errors, 2 when
a computation is degenerate or fails numerically (impossible herald
pattern, non-convergent fit, truncation overflow).

Relative output paths resolve inside --output-dir, which can also be
set through the PHOTONPURIFY_OUTPUT_DIR environment variable; that is
the only environment override the tool honors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, config as config_mod
from .detection import DetectorModel
from .errors import (
    BasisSizeError,
    ConfigurationError,
    DegenerateOutcomeError,
    FitFailureError,
    InsufficientDataError,
    TruncationOverflowError,
)
from .experiment import (
    ExperimentConfig,
    double_pair_penalty,
    fringe_scan,
    full_experiment,
    hom_scan,
    overlap_for_visibility,
)
from .protocol import (
    EntangledPairSpec,
    PROTOCOL_TRANSMITTANCE,
    PurificationSetup,
    RepeaterScenario,
    purified_fidelity,
    repeater_trajectory,
    simulate_purification,
    success_probability,
    sweep_transmittance,
)

_USAGE_ERRORS = (ConfigurationError, BasisSizeError)
_NUMERICAL_ERRORS = (
    DegenerateOutcomeError,
    FitFailureError,
    InsufficientDataError,
    TruncationOverflowError,
)


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser: _Parser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="random seed (default 42, or the seed in --config when given)",
    )
    parser.add_argument(
        "--output-dir",
        default=None,
        help="directory for output files (default: PHOTONPURIFY_OUTPUT_DIR or '.')",
    )
    parser.add_argument("--json", metavar="FILE", default=None, help="write results as JSON")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="thread budget hint exported to numerical backends",
    )


def _output_dir(args) -> Path:
    base = args.output_dir or os.environ.get("PHOTONPURIFY_OUTPUT_DIR") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve(path_str: str, out_dir: Path) -> Path:
    path = Path(path_str)
    return path if path.is_absolute() else out_dir / path


def _apply_threads(args) -> None:
    if args.threads is None:
        return
    if args.threads < 1:
        raise ConfigurationError(f"--threads must be >= 1, got {args.threads}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(args.threads)


def _effective_seed(args) -> int:
    return 42 if args.seed is None else args.seed


def _write_json(args, out_dir: Path, payload: dict, digest: str, seed: int | None = None) -> None:
    if args.json is None:
        return
    document = {
        "command": payload.pop("_command"),
        "seed": _effective_seed(args) if seed is None else seed,
        "config_digest": digest,
        "results": payload,
    }
    path = _resolve(args.json, out_dir)
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def _params_digest(params: dict) -> str:
    return config_mod.config_digest(json.dumps(params, sort_keys=True))


def _load_experiment_config(args) -> tuple[ExperimentConfig, str]:
    """Experiment-style config from --config plus command-line overrides."""
    if getattr(args, "config", None):
        cfg, digest = config_mod.load_config(args.config)
    else:
        cfg, digest = ExperimentConfig(), None
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "shots", None) is not None:
        if args.shots <= 0:
            raise ConfigurationError(f"--shots must be positive, got {args.shots}")
        cfg.shots_per_point = args.shots
        cfg.dwell_s = None
    if getattr(args, "noise_sigma", None) is not None:
        cfg.noise_sigma_1 = args.noise_sigma
        cfg.noise_sigma_2 = args.noise_sigma
    if getattr(args, "switch_index", None) is not None:
        cfg.noise_switch_index = args.switch_index
        if not 0 <= cfg.noise_switch_index <= cfg.scan_phases.size:
            raise ConfigurationError(
                f"--switch-index {cfg.noise_switch_index} outside [0, {cfg.scan_phases.size}]"
            )
    if digest is None:
        digest = _params_digest(config_mod.config_to_dict(cfg))
    return cfg, digest


def _cmd_purify(args) -> int:
    out_dir = _output_dir(args)
    fid = purified_fidelity(args.f1, args.f2)
    prob = success_probability(args.f1, args.f2)
    if args.herald in ("alice", "bob"):
        prob /= 2.0
    print(f"input fidelities: {args.f1:.6f} {args.f2:.6f}")
    print(f"purified fidelity: {fid:.6f}")
    print(f"success probability ({args.herald}): {prob:.6f}")
    print(f"fidelity gain: {fid - max(args.f1, args.f2):+.6f}")
    params = {"f1": args.f1, "f2": args.f2, "herald": args.herald}
    _write_json(
        args,
        out_dir,
        {
            "_command": "purify",
            "purified_fidelity": fid,
            "success_probability": prob,
            "herald": args.herald,
        },
        _params_digest(params),
    )
    return 0


def _cmd_simulate(args) -> int:
    out_dir = _output_dir(args)
    spec1 = EntangledPairSpec(args.f1, args.vacuum1, args.double1)
    spec2 = EntangledPairSpec(args.f2, args.vacuum2, args.double2)
    setup = PurificationSetup(args.t_alice, args.t_bob, args.herald)
    detectors = None
    if args.herald_efficiency is not None or args.herald_dark is not None:
        det = DetectorModel(
            efficiency=1.0 if args.herald_efficiency is None else args.herald_efficiency,
            dark_prob_per_window=0.0 if args.herald_dark is None else args.herald_dark,
            number_resolving=False,
        )
        detectors = {"alice": det, "bob": det}
    outcome = simulate_purification(spec1, spec2, setup, detectors)

    closed_f = purified_fidelity(args.f1, args.f2)
    closed_p = success_probability(args.f1, args.f2)
    if args.herald in ("alice", "bob"):
        closed_p /= 2.0
    print(f"simulated fidelity: {outcome.fidelity:.9f}")
    print(f"  closed form at equal-loss couplers: {closed_f:.9f} (diff {outcome.fidelity - closed_f:+.2e})")
    print(f"success probability ({args.herald}): {outcome.success_probability:.9f}")
    print(f"  closed form: {closed_p:.9f} (diff {outcome.success_probability - closed_p:+.2e})")
    print(f"single-photon weight of heralded state: {outcome.single_photon_weight:.9f}")
    params = {
        "f1": args.f1, "f2": args.f2,
        "vacuum1": args.vacuum1, "double1": args.double1,
        "vacuum2": args.vacuum2, "double2": args.double2,
        "t_alice": args.t_alice, "t_bob": args.t_bob, "herald": args.herald,
    }
    _write_json(
        args,
        out_dir,
        {
            "_command": "simulate",
            "fidelity": outcome.fidelity,
            "success_probability": outcome.success_probability,
            "single_photon_weight": outcome.single_photon_weight,
            "closed_form_fidelity": closed_f,
            "closed_form_success_probability": closed_p,
        },
        _params_digest(params),
    )
    return 0


def _cmd_sweep(args) -> int:
    out_dir = _output_dir(args)
    if not 0.0 <= args.t_min < args.t_max <= 1.0:
        raise ConfigurationError(
            f"need 0 <= t-min < t-max <= 1, got [{args.t_min}, {args.t_max}]"
        )
    grid = np.linspace(args.t_min, args.t_max, args.points)
    sweep = sweep_transmittance(args.f1, args.f2, grid, herald_mode=args.herald)
    print(f"swept {args.points} transmittance points on [{args.t_min}, {args.t_max}]")
    print(f"best transmittance: {sweep.argmax_transmittance:.9f}")
    print(f"best fidelity: {sweep.max_fidelity:.9f}")
    print(f"nominal operating point: {PROTOCOL_TRANSMITTANCE:.9f}")
    if args.csv:
        path = _resolve(args.csv, out_dir)
        with path.open("w", encoding="utf-8") as handle:
            handle.write("T,F_tilde,p_success\n")
            for t, f, p in sweep.rows():
                handle.write(f"{t!r},{f!r},{p!r}\n")
        print(f"wrote {path}")
    if args.figures:
        from . import report

        fig_path = report.render_sweep(
            sweep.transmittances, sweep.fidelities, sweep.success_probabilities,
            out_dir / "sweep.png",
        )
        print(f"wrote {fig_path}")
    params = {
        "f1": args.f1, "f2": args.f2, "points": args.points,
        "t_min": args.t_min, "t_max": args.t_max, "herald": args.herald,
    }
    _write_json(
        args,
        out_dir,
        {
            "_command": "sweep",
            "argmax_transmittance": sweep.argmax_transmittance,
            "max_fidelity": sweep.max_fidelity,
        },
        _params_digest(params),
    )
    return 0


def _cmd_hom(args) -> int:
    out_dir = _output_dir(args)
    cfg, digest = _load_experiment_config(args)
    overlaps = None
    if args.overlap_points is not None:
        overlaps = np.linspace(0.0, args.max_overlap, args.overlap_points)
    elif args.max_overlap != 1.0:
        overlaps = np.linspace(0.0, args.max_overlap, 41)
    scan = hom_scan(cfg, overlaps)
    vis = scan.visibility
    print(f"dip scan: {scan.overlaps.size} overlap points, {cfg.resolved_shots} shots/point")
    print(f"dip visibility: {'n/a' if vis is None else f'{vis:.6f}'}")
    print(f"model visibility at max overlap: {scan.meta['model_visibility']:.6f}")
    print(f"double-pair penalty at emission_prob {cfg.source.emission_prob}: "
          f"{double_pair_penalty(cfg.source.emission_prob):.6f}")
    if args.target_visibility is not None:
        lam = overlap_for_visibility(args.target_visibility, cfg.source.emission_prob)
        print(f"overlap needed for visibility {args.target_visibility}: {lam:.7f}")
    if scan.low_statistics:
        print("warning: low statistics at the dip reference point")
    if args.csv:
        path = _resolve(args.csv, out_dir)
        scan.to_csv(path)
        print(f"wrote {path}")
    if args.figures:
        from . import report

        fig_path = report.render_hom(scan, out_dir / "hom.png")
        print(f"wrote {fig_path}")
    _write_json(
        args,
        out_dir,
        {
            "_command": "hom",
            "visibility": vis,
            "model_visibility": scan.meta["model_visibility"],
            "low_statistics": scan.low_statistics,
        },
        digest,
        seed=cfg.seed,
    )
    return 0


def _cmd_fringe(args) -> int:
    out_dir = _output_dir(args)
    cfg, digest = _load_experiment_config(args)
    scan = fringe_scan(args.kind, cfg)
    segment = scan if scan.transition_index is None else scan.regime_slice(1)
    estimate = analysis.sliding_fidelity_distribution(
        segment, subtract=cfg.subtract_accidentals
    )
    lo, hi = estimate.interval_95
    print(f"scan {args.kind}: {scan.n_points} points, {cfg.resolved_shots} shots/point")
    print(f"mean fidelity: {estimate.mean:.6f} (sigma {estimate.sigma:.6f})")
    print(f"median fidelity: {estimate.median:.6f}")
    print(f"95% interval: [{lo:.6f}, {hi:.6f}]")
    print(f"windows: {estimate.n_windows} ({estimate.n_discarded} discarded)")
    if args.csv:
        path = _resolve(args.csv, out_dir)
        scan.to_csv(path)
        print(f"wrote {path}")
    if args.histogram:
        path = analysis.write_histogram_csv(estimate, _resolve(args.histogram, out_dir))
        print(f"wrote {path}")
    if args.figures:
        from . import report

        fit = None
        if scan.transition_index is None:
            try:
                fit = analysis.fit_sinusoid(
                    scan.phases, np.maximum(scan.counts - scan.accidentals, 0.0)
                )
            except FitFailureError:
                fit = None
        fig1 = report.render_fringe(scan, out_dir / f"{args.kind}.png", fit)
        fig2 = report.render_fidelity_distribution(
            estimate, out_dir / f"{args.kind}_fidelity_hist.png"
        )
        print(f"wrote {fig1}")
        print(f"wrote {fig2}")
    _write_json(
        args,
        out_dir,
        {
            "_command": "fringe",
            "kind": args.kind,
            "estimate": estimate.to_dict(),
        },
        digest,
        seed=cfg.seed,
    )
    return 0


def _cmd_experiment(args) -> int:
    out_dir = _output_dir(args)
    if args.sample_config:
        path = _resolve(args.sample_config, out_dir)
        text = json.dumps(config_mod.sample_config(), indent=2) + "\n"
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")
        return 0
    cfg, digest = _load_experiment_config(args)
    dataset = full_experiment(cfg)

    baselines = dataset.summary["baseline_means"]
    for kind in ("pair1", "pair2", "purified"):
        est = dataset.estimates[kind]
        line = f"{kind}: mean fidelity {est.mean:.6f} (sigma {est.sigma:.6f})"
        if baselines[kind] is not None:
            line += f", noise-off baseline {baselines[kind]:.6f}"
        print(line)
    print(f"herald probability: {dataset.summary['herald_probability']:.6f}")
    vis = dataset.summary["hom_visibility"]
    print(f"dip visibility: {'n/a' if vis is None else f'{vis:.6f}'}")

    for kind, scan in dataset.fringes.items():
        path = out_dir / f"{kind}.csv"
        scan.to_csv(path)
        print(f"wrote {path}")
        hist_path = analysis.write_histogram_csv(
            dataset.estimates[kind], out_dir / f"{kind}_hist.csv"
        )
        print(f"wrote {hist_path}")
    dataset.hom.to_csv(out_dir / "hom.csv")
    print(f"wrote {out_dir / 'hom.csv'}")

    if args.figures:
        from . import report

        for kind, scan in dataset.fringes.items():
            print(f"wrote {report.render_fringe(scan, out_dir / f'{kind}.png')}")
            print(f"wrote {report.render_fidelity_distribution(dataset.estimates[kind], out_dir / f'{kind}_fidelity_hist.png')}")
        print(f"wrote {report.render_hom(dataset.hom, out_dir / 'hom.png')}")

    payload = {
        "_command": "experiment",
        "fidelity_means": dataset.summary["fidelity_means"],
        "fidelity_sigmas": dataset.summary["fidelity_sigmas"],
        "fidelity_medians": dataset.summary["fidelity_medians"],
        "baseline_means": baselines,
        "estimates": {k: est.to_dict() for k, est in dataset.estimates.items()},
        "herald_probability": dataset.summary["herald_probability"],
        "hom_visibility": vis,
        "budget": dataset.summary["budget"],
        "shots_per_point": dataset.summary["shots_per_point"],
    }
    _write_json(args, out_dir, payload, digest, seed=cfg.seed)
    return 0


def _cmd_repeater(args) -> int:
    out_dir = _output_dir(args)
    if args.purify:
        schedule = (True,) * args.levels
    elif args.purify_after:
        chosen = set(args.purify_after)
        bad = sorted(i for i in chosen if not 1 <= i <= args.levels)
        if bad:
            raise ConfigurationError(
                f"--purify-after levels {bad} outside [1, {args.levels}]"
            )
        schedule = tuple(level + 1 in chosen for level in range(args.levels))
    else:
        schedule = ()
    scenario = RepeaterScenario(
        initial_error=args.initial_error,
        swap_levels=args.levels,
        purify_after_level=schedule,
    )
    trajectory = repeater_trajectory(scenario)
    print("level  error")
    for level, err in enumerate(trajectory.errors):
        print(f"{level:5d}  {err:.9f}")
    if trajectory.saturated:
        print("note: error saturated at 0.5 (fully mixed)")
    if args.csv:
        path = _resolve(args.csv, out_dir)
        with path.open("w", encoding="utf-8") as handle:
            handle.write("level,epsilon\n")
            for level, err in enumerate(trajectory.errors):
                handle.write(f"{level},{err!r}\n")
        print(f"wrote {path}")
    params = {
        "initial_error": args.initial_error,
        "levels": args.levels,
        "purify_after": list(schedule),
    }
    _write_json(
        args,
        out_dir,
        {
            "_command": "repeater",
            "errors": list(trajectory.errors),
            "saturated": trajectory.saturated,
        },
        _params_digest(params),
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="photonpurify",
        description="Simulate and analyze heralded purification of path entanglement.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("purify", parents=[], help="closed-form purified fidelity and success probability")
    _add_common(p)
    p.add_argument("--f1", type=float, required=True, help="fidelity of the first pair")
    p.add_argument("--f2", type=float, required=True, help="fidelity of the second pair")
    p.add_argument("--herald", choices=("alice", "bob", "either"), default="either")
    p.set_defaults(func=_cmd_purify)

    p = sub.add_parser("simulate", help="brute-force density-operator simulation of one round")
    _add_common(p)
    p.add_argument("--f1", type=float, required=True)
    p.add_argument("--f2", type=float, required=True)
    p.add_argument("--vacuum1", type=float, default=0.0, help="vacuum weight of pair 1")
    p.add_argument("--vacuum2", type=float, default=0.0, help="vacuum weight of pair 2")
    p.add_argument("--double1", type=float, default=0.0, help="double-occupancy weight of pair 1")
    p.add_argument("--double2", type=float, default=0.0, help="double-occupancy weight of pair 2")
    p.add_argument("--t-alice", type=float, default=PROTOCOL_TRANSMITTANCE)
    p.add_argument("--t-bob", type=float, default=1.0 - PROTOCOL_TRANSMITTANCE)
    p.add_argument("--herald", choices=("alice", "bob", "either"), default="either")
    p.add_argument("--herald-efficiency", type=float, default=None,
                   help="use threshold monitor detectors with this efficiency")
    p.add_argument("--herald-dark", type=float, default=None,
                   help="dark-count probability per window of the monitor detectors")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="sweep coupler transmittance at fixed input fidelities")
    _add_common(p)
    p.add_argument("--f1", type=float, required=True)
    p.add_argument("--f2", type=float, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--t-min", type=float, default=0.5)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--herald", choices=("alice", "bob", "either"), default="either")
    p.add_argument("--csv", metavar="FILE", default=None)
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("hom", help="two-photon interference dip scan")
    _add_common(p)
    p.add_argument("--config", metavar="FILE", default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--overlap-points", type=int, default=None)
    p.add_argument("--max-overlap", type=float, default=1.0)
    p.add_argument("--target-visibility", type=float, default=None,
                   help="also report the overlap needed for this dip visibility")
    p.add_argument("--csv", metavar="FILE", default=None)
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_hom)

    p = sub.add_parser("fringe", help="sample one interference fringe and estimate fidelity")
    _add_common(p)
    p.add_argument("--kind", choices=("pair1", "pair2", "purified"), default="purified")
    p.add_argument("--config", metavar="FILE", default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--switch-index", type=int, default=None,
                   help="first scan point with the noise generators on")
    p.add_argument("--csv", metavar="FILE", default=None)
    p.add_argument("--histogram", metavar="FILE", default=None,
                   help="write the per-window fidelity histogram as CSV")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_fringe)

    p = sub.add_parser("experiment", help="full measurement sequence with analysis")
    _add_common(p)
    p.add_argument("--config", metavar="FILE", default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=None,
                   help="set both phase-noise generator widths")
    p.add_argument("--switch-index", type=int, default=None)
    p.add_argument("--figures", action="store_true")
    p.add_argument("--sample-config", metavar="FILE", default=None,
                   help="write a template configuration file and exit")
    p.set_defaults(func=_cmd_experiment, json="summary.json")

    p = sub.add_parser("repeater", help="error growth across entanglement-swapping levels")
    _add_common(p)
    p.add_argument("--initial-error", type=float, default=0.05)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--purify", action="store_true", help="purify after every swap level")
    p.add_argument("--purify-after", type=int, nargs="*", default=None,
                   help="swap levels after which to purify (1-based)")
    p.add_argument("--csv", metavar="FILE", default=None)
    p.set_defaults(func=_cmd_repeater)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_threads(args)
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
