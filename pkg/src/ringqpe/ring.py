"""Charged particle on a ring threaded by a constant U(n) gauge potential.

The state is a truncated angular-momentum expansion psi(phi) =
sum_m c_{m,a} e^{i m phi} / sqrt(2 pi) with a color index a for the internal
n-dimensional space. A phi-independent Hermitian gauge potential couples
only to color, so the Hamiltonian splits into independent n x n blocks

    H_m = ((hbar m / r) I - q A_phi)^2 / (2 m_q),

one per mode. At the return time t_R = 4 pi m_q r^2 / hbar the free part of
the phase, -2 pi m^2, is a multiple of 2 pi for every mode, so a packet that
started localized at phi = 0 relocalizes. The surviving mode-linear phase
shifts each gauge eigencolor to its own angle: an eigencolor with A_phi
eigenvalue lam reappears at

    phi = -VELOCITY_FACTOR * 2 pi r (q / hbar) lam   (mod 2 pi),

which is the eigenphase read-out. The factor of two is kinematic: by t_R
each mode has classically completed two laps, so the accumulated holonomy
angle is twice the single-lap one, and encoders divide by VELOCITY_FACTOR
to compensate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import opcount
from .angles import TWO_PI, wrap_to_signed, wrap_to_unit
from .errors import PreconditionError, ResolutionError
from .linalg import (
    DENSE_DIMENSION_GUARD,
    expm_dense,
    require_hermitian,
)

# Relocalization shift at t_R is this multiple of the single-lap holonomy
# phase (the classical angular velocity is twice the quantum phase velocity).
VELOCITY_FACTOR = 2.0

_STATE_NORM_TOL = 1e-10
_DENSITY_INTEGRAL_TOL = 1e-8


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RingPhysicalParams:
    """Ring constants; natural units (all ones) unless configured otherwise."""

    hbar: float = 1.0
    charge_q: float = 1.0
    radius_r: float = 1.0
    mass_mq: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "charge_q", "radius_r", "mass_mq"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise PreconditionError(f"{name} must be finite")
        if self.hbar <= 0 or self.radius_r <= 0 or self.mass_mq <= 0:
            raise PreconditionError("hbar, radius_r and mass_mq must be positive")
        if self.charge_q == 0:
            raise PreconditionError("charge_q must be non-zero")


@dataclass(frozen=True, eq=False)
class GaugeField:
    """Constant Hermitian gauge potential acting on the color space."""

    a_phi: np.ndarray
    params: RingPhysicalParams = field(default_factory=RingPhysicalParams)
    hermiticity_tol: float = 1e-10

    def __post_init__(self):
        a = require_hermitian(self.a_phi, self.hermiticity_tol)
        object.__setattr__(self, "a_phi", _readonly(a))

    @property
    def n_colors(self) -> int:
        return self.a_phi.shape[0]


@dataclass(frozen=True, eq=False)
class RingState:
    """Mode-space coefficients c_{m,a}, rows ordered m = -l ... +l."""

    mode_cutoff_l: int
    n_colors: int
    coeffs: np.ndarray
    norm_tol: float = _STATE_NORM_TOL

    def __post_init__(self):
        if self.mode_cutoff_l < 1:
            raise PreconditionError(f"mode cutoff must be >= 1, got {self.mode_cutoff_l}")
        if self.n_colors < 1:
            raise PreconditionError(f"need at least one color, got {self.n_colors}")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        expected = (2 * self.mode_cutoff_l + 1, self.n_colors)
        if c.shape != expected:
            raise PreconditionError(
                f"coefficient array shape {c.shape} does not match {expected}"
            )
        if not np.all(np.isfinite(c)):
            raise PreconditionError("coefficients must be finite")
        norm = float(np.linalg.norm(c))
        if abs(norm - 1.0) > self.norm_tol:
            raise PreconditionError(
                f"state norm {norm!r} deviates from 1 beyond tolerance {self.norm_tol}"
            )
        object.__setattr__(self, "coeffs", _readonly(c))

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.mode_cutoff_l, self.mode_cutoff_l + 1)


@dataclass(frozen=True, eq=False)
class ModeBlockHamiltonian:
    """Stack of per-mode n x n Hermitian blocks, ordered m = -l ... +l."""

    blocks: np.ndarray
    mode_cutoff_l: int
    params: RingPhysicalParams

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=np.complex128)
        count = 2 * self.mode_cutoff_l + 1
        if b.ndim != 3 or b.shape[0] != count or b.shape[1] != b.shape[2]:
            raise PreconditionError(
                f"expected block stack of shape ({count}, n, n), got {b.shape}"
            )
        asym = float(np.max(np.abs(b - np.conj(np.transpose(b, (0, 2, 1))))))
        if asym > 1e-10:
            raise PreconditionError(
                f"blocks are not Hermitian: max asymmetry {asym:.3e}"
            )
        object.__setattr__(self, "blocks", _readonly(b))

    @property
    def n_colors(self) -> int:
        return self.blocks.shape[1]

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.mode_cutoff_l, self.mode_cutoff_l + 1)


@dataclass(frozen=True, eq=False)
class PositionDensity:
    """|psi|^2 sampled on the uniform grid phi_j = 2 pi j / N."""

    phi_grid: np.ndarray
    density: np.ndarray
    per_color: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi_grid, dtype=np.float64)
        d = np.asarray(self.density, dtype=np.float64)
        pc = np.asarray(self.per_color, dtype=np.float64)
        if phi.ndim != 1 or d.shape != phi.shape:
            raise PreconditionError("phi grid and density must be matching 1-D arrays")
        if pc.ndim != 2 or pc.shape[0] != phi.size:
            raise PreconditionError("per-color density must be (N, n_colors)")
        if np.any(d < -1e-12):
            raise PreconditionError("density must be non-negative")
        integral = float(np.sum(d)) * TWO_PI / phi.size
        if abs(integral - 1.0) > _DENSITY_INTEGRAL_TOL:
            raise PreconditionError(
                f"density integrates to {integral!r}, expected 1 within "
                f"{_DENSITY_INTEGRAL_TOL}"
            )
        object.__setattr__(self, "phi_grid", _readonly(phi))
        object.__setattr__(self, "density", _readonly(d))
        object.__setattr__(self, "per_color", _readonly(pc))

    @property
    def grid_size_N(self) -> int:
        return self.phi_grid.size

    @property
    def n_colors(self) -> int:
        return self.per_color.shape[1]


@dataclass(frozen=True)
class Peak:
    """One relocalization peak: position, integrated weight, spread."""

    phi: float
    weight: float
    width: float

    def __post_init__(self):
        if not (0.0 <= self.phi < TWO_PI):
            raise PreconditionError(f"peak phase {self.phi} outside [0, 2*pi)")
        if not (-1e-12 <= self.weight <= 1.0 + 1e-6):
            raise PreconditionError(f"peak weight {self.weight} outside [0, 1]")
        if self.width < 0:
            raise PreconditionError("peak width must be non-negative")


@dataclass(frozen=True)
class PeakSet:
    """Peaks sorted by descending weight, plus the grid resolution."""

    peaks: tuple
    resolution: float

    def __post_init__(self):
        object.__setattr__(self, "peaks", tuple(self.peaks))
        total = sum(p.weight for p in self.peaks)
        if total > 1.0 + 1e-6:
            raise PreconditionError(f"peak weights sum to {total}, above 1")
        weights = [p.weight for p in self.peaks]
        if weights != sorted(weights, reverse=True):
            raise PreconditionError("peaks must be sorted by descending weight")
        if self.resolution <= 0:
            raise PreconditionError("resolution must be positive")

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def dominant(self) -> Peak:
        if not self.peaks:
            raise PreconditionError("peak set is empty")
        return self.peaks[0]


def return_time(params: RingPhysicalParams) -> float:
    """t_R = 4 pi m_q r^2 / hbar, the packet revival time."""
    return 4.0 * np.pi * params.mass_mq * params.radius_r ** 2 / params.hbar


def build_hamiltonian(gauge: GaugeField, mode_cutoff_l: int) -> ModeBlockHamiltonian:
    """Assemble the per-mode blocks ((hbar m / r) I - q A_phi)^2 / (2 m_q)."""
    if mode_cutoff_l < 1:
        raise PreconditionError(f"mode cutoff must be >= 1, got {mode_cutoff_l}")
    p = gauge.params
    n = gauge.n_colors
    modes = np.arange(-mode_cutoff_l, mode_cutoff_l + 1)
    eye = np.eye(n, dtype=np.complex128)
    # base[m] = (hbar m / r) I - q A_phi, then square each block
    base = (p.hbar * modes / p.radius_r)[:, None, None] * eye - p.charge_q * gauge.a_phi
    blocks = np.einsum("mij,mjk->mik", base, base) / (2.0 * p.mass_mq)
    # squaring a Hermitian block is Hermitian up to rounding; symmetrize
    blocks = 0.5 * (blocks + np.conj(np.transpose(blocks, (0, 2, 1))))
    return ModeBlockHamiltonian(blocks, mode_cutoff_l, p)


def initial_localized_state(mode_cutoff_l: int, color) -> RingState:
    """Packet at phi = 0: every mode carries the same unit color vector."""
    c = np.asarray(color, dtype=np.complex128)
    if c.ndim != 1 or c.size < 1:
        raise PreconditionError("color must be a 1-D vector")
    norm = float(np.linalg.norm(c))
    if abs(norm - 1.0) > _STATE_NORM_TOL:
        raise PreconditionError(
            f"color norm {norm!r} deviates from 1 beyond {_STATE_NORM_TOL}"
        )
    count = 2 * mode_cutoff_l + 1
    coeffs = np.tile(c / math.sqrt(count), (count, 1))
    return RingState(mode_cutoff_l, c.size, coeffs)


def _require_compatible(state: RingState, ham: ModeBlockHamiltonian) -> None:
    if state.mode_cutoff_l != ham.mode_cutoff_l:
        raise PreconditionError(
            f"state cutoff {state.mode_cutoff_l} does not match "
            f"Hamiltonian cutoff {ham.mode_cutoff_l}"
        )
    if state.n_colors != ham.n_colors:
        raise PreconditionError(
            f"state has {state.n_colors} colors, Hamiltonian has {ham.n_colors}"
        )


def evolve_block(state: RingState, ham: ModeBlockHamiltonian, t: float) -> RingState:
    """Apply exp(-i H_m t / hbar) block by block.

    Each block is exponentiated through its own eigendecomposition, so the
    cost is (2l+1) independent n x n problems. This is the
    structure-exploiting route the dense path is benchmarked against.
    """
    _require_compatible(state, ham)
    if not math.isfinite(t):
        raise PreconditionError("time must be finite")
    w, v = np.linalg.eigh(ham.blocks)
    phases = np.exp(-1j * w * (t / ham.params.hbar))
    # (V^dagger c), scale by the phases, map back with V
    projected = np.einsum("mba,mb->ma", v.conj(), state.coeffs)
    rotated = np.einsum("mab,mb->ma", v, phases * projected)
    count, n = rotated.shape
    opcount.add(count * (n ** 3 + 2 * n ** 2))
    # unitary per block: renormalization would only mask a bug
    return RingState(state.mode_cutoff_l, state.n_colors, rotated)


def evolve_dense(
    state: RingState,
    ham: ModeBlockHamiltonian,
    t: float,
    max_dim: int = DENSE_DIMENSION_GUARD,
) -> RingState:
    """Assemble the full (2l+1)n matrix and exponentiate it densely.

    Same map as evolve_block, deliberately ignoring the block structure;
    exists as the brute-force cross-check and cost baseline.
    """
    _require_compatible(state, ham)
    count = 2 * state.mode_cutoff_l + 1
    n = state.n_colors
    dim = count * n
    full = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(count):
        full[i * n:(i + 1) * n, i * n:(i + 1) * n] = ham.blocks[i]
    propagator = expm_dense(full, t / ham.params.hbar, max_dim=max_dim)
    flat = propagator @ state.coeffs.reshape(-1)
    opcount.add(dim * dim)
    return RingState(state.mode_cutoff_l, n, flat.reshape(count, n))


def position_density(state: RingState, grid_size_N: int) -> PositionDensity:
    """Sample |psi|^2 on phi_j = 2 pi j / N via zero-padded inverse FFT.

    Requires N >= 2l+1 so every mode maps to a distinct grid frequency;
    the sampled density then integrates to exactly the state norm.
    """
    count = 2 * state.mode_cutoff_l + 1
    if grid_size_N < count:
        raise ResolutionError(
            f"grid of {grid_size_N} points cannot resolve {count} modes; "
            f"need N >= 2l+1"
        )
    spectrum = np.zeros((grid_size_N, state.n_colors), dtype=np.complex128)
    spectrum[state.modes % grid_size_N, :] = state.coeffs
    # N * ifft gives sum_m c_m e^{+i m phi_j} with the e^{i m phi} convention
    psi = np.fft.ifft(spectrum, axis=0) * grid_size_N
    opcount.add(state.n_colors * (grid_size_N // 2) * max(1, int(math.log2(grid_size_N))))
    per_color = (psi.real ** 2 + psi.imag ** 2) / TWO_PI
    density = per_color.sum(axis=1)
    phi_grid = TWO_PI * np.arange(grid_size_N) / grid_size_N
    return PositionDensity(phi_grid, density, per_color)


def extract_peaks(density: PositionDensity, max_peaks: int, window: int = 5) -> PeakSet:
    """Locate up to max_peaks local maxima and weigh them by window mass.

    Peaks are circular local maxima of the sampled density, accepted in
    descending height order subject to a minimum separation of `window`
    bins, so their windows never overlap. Each accepted peak is refined to
    the circular centroid of the density over its window; its weight is the
    integrated density over the window and its width the weighted circular
    spread. Choose `window` wide enough to cover the resolution lobe when
    weights matter; the default 5 suits near-delta densities.
    """
    if max_peaks < 1:
        raise PreconditionError(f"max_peaks must be >= 1, got {max_peaks}")
    if window < 1 or window % 2 == 0:
        raise PreconditionError(f"window must be a positive odd integer, got {window}")
    n_bins = density.grid_size_N
    if window > n_bins:
        raise PreconditionError(
            f"window of {window} bins exceeds the {n_bins}-point grid"
        )
    d = density.density
    half = (window - 1) // 2
    bin_width = TWO_PI / n_bins

    # strict on one side so flat stretches contribute no candidates
    is_max = (d > np.roll(d, 1)) & (d >= np.roll(d, -1))
    order = np.argsort(-d, kind="stable")  # ties resolve to the lower index

    accepted: list[int] = []
    for j in order:
        if not is_max[j]:
            continue
        j = int(j)
        far = True
        for a in accepted:
            sep = abs(j - a)
            if min(sep, n_bins - sep) < window:
                far = False
                break
        if far:
            accepted.append(j)
            if len(accepted) == max_peaks:
                break

    peaks = []
    for j in accepted:
        idx = (j + np.arange(-half, half + 1)) % n_bins
        mass = float(d[idx].sum())
        weight = mass * bin_width
        if mass <= 0.0:
            phi = float(density.phi_grid[j])
            width = 0.0
        else:
            z = np.sum(d[idx] * np.exp(1j * density.phi_grid[idx]))
            phi = float(wrap_to_unit(np.angle(z)))
            dev = wrap_to_signed(density.phi_grid[idx] - phi)
            width = float(math.sqrt(np.sum(d[idx] * dev ** 2) / mass))
        peaks.append(Peak(phi, min(weight, 1.0 + 1e-9), width))

    peaks.sort(key=lambda p: (-p.weight, p.phi))
    return PeakSet(tuple(peaks), bin_width)


def default_peak_window(mode_cutoff_l: int, grid_size_N: int,
                        halfwidths: float = 8.0) -> int:
    """Odd window covering +-halfwidths resolution lobes of the kernel.

    The localized packet's density lobe first touches zero 2 pi/(2l+1) away
    from its center, i.e. N/(2l+1) bins. Integrating +-8 of those captures
    about 99 percent of a lobe's mass, enough for weights good to 0.01.
    """
    lobe_bins = grid_size_N / (2 * mode_cutoff_l + 1)
    w = 2 * math.ceil(halfwidths * lobe_bins) + 1
    cap = grid_size_N // 2
    if cap % 2 == 0:
        cap -= 1
    return max(1, min(w, cap))


def estimate_phase_via_ring(
    gauge: GaugeField,
    color,
    mode_cutoff_l: int,
    grid_size_N: int,
    max_peaks: int | None = None,
    window: int | None = None,
) -> PeakSet:
    """Full read-out: localize, evolve for t_R, locate relocalization peaks.

    Defaults extract one candidate peak per color with a window matched to
    the mode-cutoff resolution, so peak weights track the color overlaps
    |c_k|^2 with the gauge eigencolors.
    """
    state = initial_localized_state(mode_cutoff_l, color)
    if grid_size_N < 2 * mode_cutoff_l + 1:
        raise ResolutionError(
            f"grid of {grid_size_N} points cannot resolve {2 * mode_cutoff_l + 1} "
            f"modes; need N >= 2l+1"
        )
    ham = build_hamiltonian(gauge, mode_cutoff_l)
    evolved = evolve_block(state, ham, return_time(gauge.params))
    density = position_density(evolved, grid_size_N)
    if max_peaks is None:
        max_peaks = gauge.n_colors
    if window is None:
        window = default_peak_window(mode_cutoff_l, grid_size_N)
    return extract_peaks(density, max_peaks, window)


def eigenvalue_to_peak_phase(gauge: GaugeField, eigenvalue: float) -> float:
    """Predicted relocalization angle for a gauge eigencolor."""
    p = gauge.params
    shift = -VELOCITY_FACTOR * TWO_PI * p.radius_r * (p.charge_q / p.hbar) * eigenvalue
    return float(wrap_to_unit(shift))


def write_density_csv(density: PositionDensity, path) -> None:
    """Write `phi,density,density_color_0,...` rows at full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["phi", "density"] + [
            f"density_color_{a}" for a in range(density.n_colors)
        ]
        writer.writerow(header)
        for j in range(density.grid_size_N):
            row = [repr(float(density.phi_grid[j])), repr(float(density.density[j]))]
            row += [repr(float(x)) for x in density.per_color[j]]
            writer.writerow(row)


def read_density_csv(path) -> PositionDensity:
    """Parse a density CSV written by write_density_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["phi", "density"]:
            raise PreconditionError(f"unrecognized density CSV header in {path}")
        rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise PreconditionError(f"density CSV {path} has no data rows")
    data = np.asarray(rows, dtype=np.float64)
    per_color = data[:, 2:] if data.shape[1] > 2 else data[:, 1:2]
    return PositionDensity(data[:, 0], data[:, 1], per_color)


def peak_set_to_json(peak_set: PeakSet) -> dict:
    return {
        "peaks": [
            {"phi": p.phi, "weight": p.weight, "width": p.width}
            for p in peak_set.peaks
        ],
        "resolution": peak_set.resolution,
    }


def peak_set_from_json(obj) -> PeakSet:
    try:
        peaks = tuple(
            Peak(float(p["phi"]), float(p["weight"]), float(p["width"]))
            for p in obj["peaks"]
        )
        return PeakSet(peaks, float(obj["resolution"]))
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed peak set JSON: {exc}") from exc
