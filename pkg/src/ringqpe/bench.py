"""Wall-time scaling of the dense exponential against the block route.

Both ring methods run the same seeded workload, a random gauge field evolved
for one return time, differing only in the evolution routine: `dense_expm`
assembles the full (2l+1)n matrix and exponentiates it, `block_evolve`
diagonalizes the 2l+1 independent blocks. `qpe_statevector` times the
register pipeline with the read-out width t chosen so the register matches
the requested size. Every timed result is validated against the block
oracle before being recorded; a benchmark that returns wrong numbers is
worthless no matter how fast.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import opcount
from .errors import PreconditionError, ResourceLimitError
from .linalg import eig_hermitian, unitary_from_hermitian
from .qpe import QpeConfig, qpe_estimate
from .ring import (
    GaugeField,
    RingPhysicalParams,
    build_hamiltonian,
    evolve_block,
    evolve_dense,
    initial_localized_state,
    return_time,
)

log = logging.getLogger(__name__)

METHOD_DENSE = "dense_expm"
METHOD_BLOCK = "block_evolve"
METHOD_QPE = "qpe_statevector"
ALL_METHODS = (METHOD_DENSE, METHOD_BLOCK, METHOD_QPE)

# timed results must agree with the block oracle to this tolerance; looser
# than the small-dimension contract because squaring counts grow with l^2
_VALIDATION_ATOL = 1e-6


@dataclass(frozen=True)
class BenchPoint:
    """One measured configuration: median wall time over `repeats` runs."""

    method: str
    size_param: int
    wall_time_s: float
    op_count: int | None
    repeats: int
    spread: float

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise PreconditionError(f"unknown bench method {self.method!r}")
        if self.size_param < 1:
            raise PreconditionError("size_param must be positive")
        if not (self.wall_time_s > 0):
            raise PreconditionError("wall time must be positive")
        if self.repeats < 3:
            raise PreconditionError(f"need >= 3 repeats, got {self.repeats}")
        if self.spread < 0:
            raise PreconditionError("spread must be non-negative")


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares slope of log(time) against the documented x axis."""

    method: str
    slope: float
    intercept: float
    r_squared: float
    x_axis: str


def _random_hermitian(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (m + m.conj().T)


def _ring_workload(size: int, n_colors: int, rng: np.random.Generator):
    """Largest (2l+1)*n_colors ring that fits in `size` dimensions."""
    l = ((size // n_colors) - 1) // 2
    if l < 1:
        return None
    params = RingPhysicalParams()
    # keep gauge amplitudes ~1/(2 pi) so read-out phases spread over the circle
    gauge = GaugeField(_random_hermitian(rng, n_colors, 1.0 / (2.0 * np.pi)), params)
    color = rng.standard_normal(n_colors) + 1j * rng.standard_normal(n_colors)
    color = color / np.linalg.norm(color)
    state = initial_localized_state(l, color)
    ham = build_hamiltonian(gauge, l)
    return state, ham, return_time(params), (2 * l + 1) * n_colors


def _qpe_workload(size: int, n_colors: int, rng: np.random.Generator):
    t_bits = min(24, max(1, round(math.log2(size))))
    h = _random_hermitian(rng, n_colors, 1.0)
    u = unitary_from_hermitian(h, 1.0)
    color = eig_hermitian(h).eigenvectors[:, 0]
    return u, color, QpeConfig(t_bits)


def _time_repeats(fn, repeats: int) -> tuple[float, float]:
    fn()  # warm-up, untimed
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    median = statistics.median(times)
    spread = (max(times) - min(times)) / median if median > 0 else 0.0
    return median, spread


def run_scaling_suite(
    sizes,
    repeats: int = 5,
    seed: int = 0,
    methods=ALL_METHODS,
    n_colors: int = 2,
    count_ops: bool = False,
) -> list[BenchPoint]:
    """Measure each method at each size on seeded random inputs.

    Points the resource guard rejects (or sizes too small to host a ring)
    are skipped with a logged reason rather than recorded. Measurements run
    strictly sequentially; validation happens outside the timed region.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise PreconditionError("sizes must be positive integers")
    if repeats < 3:
        raise PreconditionError(f"need >= 3 repeats, got {repeats}")
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise PreconditionError(f"unknown bench methods: {sorted(unknown)}")

    points: list[BenchPoint] = []
    for method in methods:
        for size_index, size in enumerate(sizes):
            rng = np.random.default_rng(
                [seed, size_index, ALL_METHODS.index(method)]
            )
            if method == METHOD_QPE:
                u, color, cfg = _qpe_workload(size, n_colors, rng)
                runner = lambda: qpe_estimate(u, color, cfg)
                size_param = cfg.t_bits
            else:
                workload = _ring_workload(size, n_colors, rng)
                if workload is None:
                    log.warning("skipping %s at size %d: no ring fits", method, size)
                    continue
                state, ham, t_r, size_param = workload
                if method == METHOD_DENSE:
                    runner = lambda: evolve_dense(state, ham, t_r)
                else:
                    runner = lambda: evolve_block(state, ham, t_r)

            try:
                median, spread = _time_repeats(runner, repeats)
            except ResourceLimitError as exc:
                log.warning("skipping %s at size %d: %s", method, size, exc)
                continue

            if method in (METHOD_DENSE, METHOD_BLOCK):
                reference = evolve_block(state, ham, t_r)
                result = runner()
                drift = float(np.max(np.abs(result.coeffs - reference.coeffs)))
                if drift > _VALIDATION_ATOL:
                    raise PreconditionError(
                        f"{method} at size {size} drifted {drift:.3e} from the "
                        f"block oracle; refusing to record a wrong timing"
                    )

            ops = None
            if count_ops:
                with opcount.count_macs() as counter:
                    runner()
                ops = counter.total

            points.append(
                BenchPoint(method, size_param, median, ops, repeats, spread)
            )
    return points


def fit_scaling(points) -> ScalingFit:
    """Fit log(median time) linearly in the method's documented size axis."""
    points = list(points)
    if len(points) < 4:
        raise PreconditionError(f"need >= 4 points to fit, got {len(points)}")
    methods = {p.method for p in points}
    if len(methods) != 1:
        raise PreconditionError(f"fit expects one method, got {sorted(methods)}")
    method = points[0].method
    if method == METHOD_QPE:
        # size_param stores t; the register grows like 2^t
        x = np.array([p.size_param * math.log(2.0) for p in points])
        x_axis = "log(2**size_param)"
    else:
        x = np.array([math.log(p.size_param) for p in points])
        x_axis = "log(size_param)"
    y = np.array([math.log(p.wall_time_s) for p in points])
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(method, float(slope), float(intercept), r_squared, x_axis)


def append_bench_csv(points, path, seed: int) -> None:
    """Append `method,size,median_s,spread,op_count,seed` rows."""
    write_header = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if write_header:
            writer.writerow(["method", "size", "median_s", "spread", "op_count", "seed"])
        for p in points:
            writer.writerow([
                p.method,
                p.size_param,
                repr(p.wall_time_s),
                repr(p.spread),
                "" if p.op_count is None else p.op_count,
                seed,
            ])


def fits_to_json(fits) -> list[dict]:
    return [
        {
            "method": f.method,
            "slope": f.slope,
            "intercept": f.intercept,
            "r_squared": f.r_squared,
            "x_axis": f.x_axis,
        }
        for f in fits
    ]
