"""Circle arithmetic shared by the ring and register pipelines.

Phases live on [0, 2*pi) when reported as positions and on (-pi, pi] when
reported as signed eigenphases. All comparisons between phases go through
circular_distance so the 0/2*pi seam never matters.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_to_unit(phi):
    """Map angles onto [0, 2*pi)."""
    w = np.mod(phi, TWO_PI)
    # np.mod of a tiny negative rounds up to the period itself
    w = np.where(w >= TWO_PI, 0.0, w)
    if np.ndim(phi) == 0:
        return float(w)
    return w


def wrap_to_signed(phi):
    """Map angles onto (-pi, pi]."""
    w = np.mod(phi, TWO_PI)
    # np.where keeps ndarray inputs vectorized; scalars come back as 0-d
    w = np.where(w > np.pi, w - TWO_PI, w)
    if np.ndim(phi) == 0:
        return float(w)
    return w


def circular_distance(a, b):
    """Shortest arc length between two angles, in [0, pi]."""
    d = np.abs(wrap_to_unit(a) - wrap_to_unit(b))
    d = np.minimum(d, TWO_PI - d)
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(d)
    return d
