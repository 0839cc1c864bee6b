"""Command line front end.

Subcommands: ring-sim (gauge-field read-out), qpe (register pipeline),
compare (both routes against direct diagonalization), bench (scaling
measurements), figure (plot-ready CSV emission). Options resolve as
command-line flags over --config JSON values over built-in natural-unit
defaults; RINGQPE_OUT_DIR supplies the output directory when no flag or
config value names one.

Exit codes:
  0  success
  1  usage error or violated invariant (grids too coarse, bad values)
  2  unreadable problem file, malformed JSON, or unwritable output
  3  compare: routes disagree beyond the combined resolution bound
  4  compare: ambiguous spectrum (secondary ring peak above threshold)
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .angles import TWO_PI, circular_distance
from .bench import (
    ALL_METHODS,
    append_bench_csv,
    fit_scaling,
    fits_to_json,
    run_scaling_suite,
)
from .encode import (
    EnergyProblem,
    UnitarySpec,
    encode_hamiltonian_as_gauge,
    encode_unitary_as_gauge,
    load_problem,
    phase_to_energy,
    unwrap_phase,
)
from .errors import (
    PreconditionError,
    ProblemFormatError,
    ResolutionError,
    ResourceLimitError,
    RingQpeError,
)
from .linalg import unitary_from_hermitian
from .qpe import (
    QpeConfig,
    estimate_to_json,
    qpe_estimate,
    write_distribution_csv,
)
from .ring import (
    RingPhysicalParams,
    build_hamiltonian,
    default_peak_window,
    estimate_phase_via_ring,
    evolve_block,
    extract_peaks,
    initial_localized_state,
    peak_set_to_json,
    position_density,
    return_time,
    write_density_csv,
)

PROG = "ringqpe"
OUT_DIR_ENV = "RINGQPE_OUT_DIR"

# compare flags the spectrum as ambiguous when a secondary relocalization
# peak carries at least this much weight
AMBIGUITY_WEIGHT = 0.1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_MISMATCH = 3
EXIT_AMBIGUOUS = 4

_COMMON_DEFAULTS = {
    "seed": 0,
    "hbar": 1.0,
    "charge_q": 1.0,
    "radius_r": 1.0,
    "mass_mq": 1.0,
    "out_dir": None,
}

_DEFAULTS = {
    "ring-sim": {
        "mode_cutoff_l": 50, "grid_size_n": 512, "times": (0.0, 0.5, 1.0),
    },
    "qpe": {"t_bits": 10, "shots": 0},
    "compare": {
        "mode_cutoff_l": 200, "grid_size_n": 1024, "t_bits": 10, "shots": 0,
    },
    "figure": {
        "mode_cutoff_l": 50, "grid_size_n": 512, "t_bits": 3,
        "times": (0.0, 0.5, 1.0),
    },
    "bench": {
        "sizes": (64, 128, 256, 512), "repeats": 5, "count_ops": False,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved options for one subcommand invocation."""

    subcommand: str
    problem_path: str | None
    out_dir: str
    seed: int
    params: RingPhysicalParams
    mode_cutoff_l: int = 50
    grid_size_n: int = 512
    t_bits: int = 10
    shots: int = 0
    times: tuple = (0.0, 0.5, 1.0)
    sizes: tuple = (64, 128, 256, 512)
    repeats: int = 5
    count_ops: bool = False

    def require_ring_resolution(self) -> None:
        needed = 2 * self.mode_cutoff_l + 1
        if self.grid_size_n < needed:
            raise ResolutionError(
                f"grid of {self.grid_size_n} points cannot resolve {needed} "
                f"modes; need N >= 2l+1"
            )

    def require_compare_resolution(self) -> None:
        self.require_ring_resolution()
        if self.grid_size_n < (1 << self.t_bits):
            raise ResolutionError(
                f"grid of {self.grid_size_n} points is coarser than the "
                f"2^{self.t_bits} register; need N >= 2^t"
            )


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; our taxonomy reserves 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(sub: argparse.ArgumentParser, with_problem: bool = True) -> None:
    if with_problem:
        sub.add_argument("--problem", help="problem JSON file")
    sub.add_argument("--out-dir", dest="out_dir",
                     help=f"output directory (default: ${OUT_DIR_ENV} or cwd)")
    sub.add_argument("--config", help="JSON file of default option values")
    sub.add_argument("--seed", type=int, help="seed for any sampling")
    sub.add_argument("--hbar", type=float, help="reduced Planck constant")
    sub.add_argument("--charge", dest="charge_q", type=float, help="particle charge")
    sub.add_argument("--radius", dest="radius_r", type=float, help="ring radius")
    sub.add_argument("--mass", dest="mass_mq", type=float, help="particle mass")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog=PROG,
        description="Eigenphase read-out on a gauge-threaded ring, and by "
                    "register-level phase estimation.",
        epilog="Exit codes: 0 ok, 1 usage or invariant violation, 2 I/O, "
               "3 route mismatch, 4 ambiguous spectrum (secondary ring peak "
               f"weight >= {AMBIGUITY_WEIGHT}).",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    ring = sub.add_parser(
        "ring-sim",
        help="evolve a localized packet and read eigenphases from its peaks",
        description="Writes density_XX.csv snapshots, peaks.json and "
                    "summary.txt into the output directory.",
    )
    _add_common(ring)
    ring.add_argument("-l", "--mode-cutoff", dest="mode_cutoff_l", type=int,
                      help="angular momentum cutoff (modes -l..l)")
    ring.add_argument("-N", "--grid-size", dest="grid_size_n", type=int,
                      help="position grid size (N >= 2l+1)")
    ring.add_argument("--times", help="comma-separated snapshot times as "
                                      "fractions of the return time")

    qpe = sub.add_parser(
        "qpe",
        help="estimate an eigenphase with the register pipeline",
        description="Writes qpe_distribution.csv and qpe_estimate.json.",
    )
    _add_common(qpe)
    qpe.add_argument("--t-bits", dest="t_bits", type=int,
                     help="read-out register width")
    qpe.add_argument("--shots", type=int,
                     help="samples to draw (0 = exact distribution)")

    comp = sub.add_parser(
        "compare",
        help="cross-validate ring, register and direct diagonalization",
        description="Writes compare.json; exits 3 when the routes disagree "
                    "beyond 2 pi/2^t + 2 pi/(2l+1), 4 when the ring sees an "
                    "ambiguous spectrum.",
    )
    _add_common(comp)
    comp.add_argument("-l", "--mode-cutoff", dest="mode_cutoff_l", type=int)
    comp.add_argument("-N", "--grid-size", dest="grid_size_n", type=int)
    comp.add_argument("--t-bits", dest="t_bits", type=int)
    comp.add_argument("--shots", type=int)

    fig = sub.add_parser(
        "figure",
        help="emit plot-ready CSV data",
        description="Writes fig_density_XX.csv snapshots and slice_table.csv "
                    "mapping read-out values k to phase windows.",
    )
    _add_common(fig)
    fig.add_argument("-l", "--mode-cutoff", dest="mode_cutoff_l", type=int)
    fig.add_argument("-N", "--grid-size", dest="grid_size_n", type=int)
    fig.add_argument("--t-bits", dest="t_bits", type=int)
    fig.add_argument("--times", help="comma-separated snapshot times as "
                                     "fractions of the return time")

    bench = sub.add_parser(
        "bench",
        help="measure wall-time scaling of the evolution routes",
        description="Appends bench.csv and writes bench_fits.json.",
    )
    _add_common(bench, with_problem=False)
    bench.add_argument("--sizes", help="comma-separated matrix dimensions")
    bench.add_argument("--repeats", type=int, help="timed repeats per point")
    bench.add_argument("--count-ops", dest="count_ops", action="store_true",
                       default=None, help="record multiply-accumulate counts")

    return parser


def _parse_times(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    try:
        return tuple(float(v) for v in str(value).split(",") if v.strip())
    except ValueError as exc:
        raise PreconditionError(f"bad --times value {value!r}: {exc}") from exc


def _parse_sizes(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    try:
        return tuple(int(v) for v in str(value).split(",") if v.strip())
    except ValueError as exc:
        raise PreconditionError(f"bad --sizes value {value!r}: {exc}") from exc


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    defaults = dict(_COMMON_DEFAULTS)
    defaults.update(_DEFAULTS[args.subcommand])

    file_values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            try:
                file_values = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ProblemFormatError(
                    f"{args.config} is not valid JSON: {exc}"
                ) from exc
        if not isinstance(file_values, dict):
            raise PreconditionError("--config file must hold a JSON object")
        unknown = set(file_values) - set(defaults) - {"problem"}
        if unknown:
            raise PreconditionError(
                f"--config has keys not used by {args.subcommand}: {sorted(unknown)}"
            )

    def pick(key):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in file_values:
            return file_values[key]
        return defaults.get(key)

    out_dir = pick("out_dir")
    if out_dir is None:
        out_dir = os.environ.get(OUT_DIR_ENV) or os.getcwd()

    params = RingPhysicalParams(
        hbar=float(pick("hbar")),
        charge_q=float(pick("charge_q")),
        radius_r=float(pick("radius_r")),
        mass_mq=float(pick("mass_mq")),
    )

    kwargs = {}
    for key, caster in (
        ("mode_cutoff_l", int), ("grid_size_n", int), ("t_bits", int),
        ("shots", int), ("repeats", int), ("count_ops", bool),
    ):
        if key in defaults or getattr(args, key, None) is not None:
            value = pick(key)
            if value is not None:
                kwargs[key] = caster(value)
    if "times" in defaults or getattr(args, "times", None) is not None:
        value = pick("times")
        if value is not None:
            kwargs["times"] = _parse_times(value)
    if "sizes" in defaults or getattr(args, "sizes", None) is not None:
        value = pick("sizes")
        if value is not None:
            kwargs["sizes"] = _parse_sizes(value)

    problem = getattr(args, "problem", None) or file_values.get("problem")

    return RunConfig(
        subcommand=args.subcommand,
        problem_path=problem,
        out_dir=str(out_dir),
        seed=int(pick("seed")),
        params=params,
        **kwargs,
    )


def _require_problem(cfg: RunConfig):
    if not cfg.problem_path:
        raise PreconditionError(
            f"{cfg.subcommand} needs --problem (or a 'problem' config entry)"
        )
    return load_problem(cfg.problem_path)


def _gauge_for(problem, params: RingPhysicalParams):
    if isinstance(problem, EnergyProblem):
        return encode_hamiltonian_as_gauge(problem, params)
    return encode_unitary_as_gauge(problem, params)


def _unitary_for(problem) -> np.ndarray:
    if isinstance(problem, EnergyProblem):
        return unitary_from_hermitian(problem.hamiltonian, 1.0 / problem.E_R)
    return problem.u_matrix


def _state_for(problem) -> np.ndarray:
    if isinstance(problem, EnergyProblem):
        return problem.candidate_state
    return problem.eigenstate


def _snapshot_densities(cfg: RunConfig, problem, prefix: str) -> list[str]:
    gauge = _gauge_for(problem, cfg.params)
    state = initial_localized_state(cfg.mode_cutoff_l, _state_for(problem))
    ham = build_hamiltonian(gauge, cfg.mode_cutoff_l)
    t_r = return_time(cfg.params)
    written = []
    for i, fraction in enumerate(cfg.times):
        evolved = evolve_block(state, ham, fraction * t_r)
        density = position_density(evolved, cfg.grid_size_n)
        path = os.path.join(cfg.out_dir, f"{prefix}_{i:02d}.csv")
        write_density_csv(density, path)
        written.append(path)
    return written


def cmd_ring_sim(cfg: RunConfig) -> int:
    problem = _require_problem(cfg)
    cfg.require_ring_resolution()
    os.makedirs(cfg.out_dir, exist_ok=True)

    snapshot_paths = _snapshot_densities(cfg, problem, "density")

    gauge = _gauge_for(problem, cfg.params)
    peaks = estimate_phase_via_ring(
        gauge, _state_for(problem), cfg.mode_cutoff_l, cfg.grid_size_n
    )
    peaks_path = os.path.join(cfg.out_dir, "peaks.json")
    with open(peaks_path, "w") as fh:
        json.dump(peak_set_to_json(peaks), fh, indent=2)

    lines = [
        f"problem: {cfg.problem_path}",
        f"mode cutoff l = {cfg.mode_cutoff_l}, grid N = {cfg.grid_size_n}",
        f"return time t_R = {return_time(cfg.params)!r}",
        f"peaks found: {len(peaks)}",
    ]
    for i, p in enumerate(peaks):
        lines.append(
            f"  peak {i}: phi = {p.phi:.6f}, weight = {p.weight:.4f}, "
            f"width = {p.width:.6f}"
        )
    if len(peaks):
        signed = unwrap_phase(peaks.dominant.phi)
        lines.append(f"dominant eigenphase (signed) = {signed:.6f}")
        if isinstance(problem, EnergyProblem):
            energy = phase_to_energy(signed, problem.E_R)
            lines.append(f"energy = E_R * phase = {energy:.6f}")
    summary = "\n".join(lines) + "\n"
    with open(os.path.join(cfg.out_dir, "summary.txt"), "w") as fh:
        fh.write(summary)
    sys.stdout.write(summary)
    for path in snapshot_paths + [peaks_path]:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_qpe(cfg: RunConfig) -> int:
    problem = _require_problem(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    qpe_cfg = QpeConfig(cfg.t_bits, shots=cfg.shots, rng_seed=cfg.seed)
    estimate = qpe_estimate(_unitary_for(problem), _state_for(problem), qpe_cfg)

    dist_path = os.path.join(cfg.out_dir, "qpe_distribution.csv")
    write_distribution_csv(estimate.distribution, dist_path)
    est_path = os.path.join(cfg.out_dir, "qpe_estimate.json")
    with open(est_path, "w") as fh:
        json.dump(estimate_to_json(estimate, qpe_cfg), fh, indent=2)

    print(
        f"k = {estimate.k_best} of 2^{cfg.t_bits}, "
        f"phi = {estimate.phi_estimate:.6f} "
        f"({estimate.distribution.mode}, seed {cfg.seed})"
    )
    print(f"wrote {dist_path}")
    print(f"wrote {est_path}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    problem = _require_problem(cfg)
    cfg.require_compare_resolution()
    os.makedirs(cfg.out_dir, exist_ok=True)

    gauge = _gauge_for(problem, cfg.params)
    state = _state_for(problem)
    peaks = estimate_phase_via_ring(
        gauge, state, cfg.mode_cutoff_l, cfg.grid_size_n
    )
    if not len(peaks):
        raise PreconditionError("ring read-out found no relocalization peak")

    ambiguous = len(peaks) > 1 and peaks.peaks[1].weight >= AMBIGUITY_WEIGHT

    u = _unitary_for(problem)
    estimate = qpe_estimate(
        u, state, QpeConfig(cfg.t_bits, shots=cfg.shots, rng_seed=cfg.seed)
    )
    phi_ring = peaks.dominant.phi
    phi_qpe = estimate.phi_estimate
    phi_eig = float(np.angle(np.vdot(state, u @ state)) % TWO_PI)

    bound = TWO_PI / (1 << cfg.t_bits) + TWO_PI / (2 * cfg.mode_cutoff_l + 1)
    distances = {
        "ring_qpe": circular_distance(phi_ring, phi_qpe),
        "ring_eig": circular_distance(phi_ring, phi_eig),
        "qpe_eig": circular_distance(phi_qpe, phi_eig),
    }
    ok = not ambiguous and all(d <= bound for d in distances.values())

    report = {
        "phi_ring": phi_ring,
        "phi_qpe": phi_qpe,
        "phi_eig": phi_eig,
        "distances": distances,
        "bound": bound,
        "ambiguous": ambiguous,
        "secondary_weight": peaks.peaks[1].weight if len(peaks) > 1 else 0.0,
        "ok": ok,
    }
    report_path = os.path.join(cfg.out_dir, "compare.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)

    print(f"phi_ring = {phi_ring:.6f}")
    print(f"phi_qpe  = {phi_qpe:.6f}")
    print(f"phi_eig  = {phi_eig:.6f}")
    print(f"max distance = {max(distances.values()):.6f}, bound = {bound:.6f}")
    print(f"wrote {report_path}")
    if ambiguous:
        print(
            f"ambiguous spectrum: secondary peak weight "
            f"{report['secondary_weight']:.3f} >= {AMBIGUITY_WEIGHT}",
            file=sys.stderr,
        )
        return EXIT_AMBIGUOUS
    if not ok:
        print("routes disagree beyond the resolution bound", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_figure(cfg: RunConfig) -> int:
    problem = _require_problem(cfg)
    cfg.require_ring_resolution()
    os.makedirs(cfg.out_dir, exist_ok=True)

    written = _snapshot_densities(cfg, problem, "fig_density")

    size = 1 << cfg.t_bits
    slice_path = os.path.join(cfg.out_dir, "slice_table.csv")
    with open(slice_path, "w", newline="") as fh:
        fh.write("k,phi_lo,phi_hi\n")
        for k in range(size):
            lo = TWO_PI * k / size
            hi = TWO_PI * (k + 1) / size
            fh.write(f"{k},{lo!r},{hi!r}\n")
    written.append(slice_path)

    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    points = run_scaling_suite(
        cfg.sizes, repeats=cfg.repeats, seed=cfg.seed, count_ops=cfg.count_ops
    )
    csv_path = os.path.join(cfg.out_dir, "bench.csv")
    append_bench_csv(points, csv_path, cfg.seed)

    fits = []
    for method in ALL_METHODS:
        mine = [p for p in points if p.method == method]
        if len(mine) >= 4:
            fits.append(fit_scaling(mine))
    fits_path = os.path.join(cfg.out_dir, "bench_fits.json")
    with open(fits_path, "w") as fh:
        json.dump(fits_to_json(fits), fh, indent=2)

    for p in points:
        ops = "-" if p.op_count is None else str(p.op_count)
        print(
            f"{p.method:16s} size={p.size_param:<6d} median={p.wall_time_s:.6e}s "
            f"spread={p.spread:.3f} ops={ops}"
        )
    for f in fits:
        print(f"{f.method:16s} slope={f.slope:.3f} r2={f.r_squared:.4f} vs {f.x_axis}")
    print(f"wrote {csv_path}")
    print(f"wrote {fits_path}")
    return EXIT_OK


_HANDLERS = {
    "ring-sim": cmd_ring_sim,
    "qpe": cmd_qpe,
    "compare": cmd_compare,
    "figure": cmd_figure,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = _resolve_config(args)
        return _HANDLERS[args.subcommand](cfg)
    except (ProblemFormatError, OSError) as exc:
        print(f"{PROG}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PreconditionError, ResourceLimitError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RingQpeError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
