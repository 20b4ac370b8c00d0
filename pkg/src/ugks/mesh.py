"""One-dimensional finite-volume meshes."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError

__all__ = ["Mesh1D", "uniform_mesh", "stretched_mesh"]


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Cells defined by their ordered interface positions."""

    faces: np.ndarray
    kind: str = "uniform"
    ratio: float = 1.0

    def __post_init__(self):
        faces = np.asarray(self.faces, dtype=float)
        if faces.ndim != 1 or faces.size < 2:
            raise ConfigurationError("a mesh needs at least two faces")
        if np.any(np.diff(faces) <= 0):
            raise ConfigurationError("mesh faces must be strictly increasing")
        object.__setattr__(self, "faces", faces)

    @property
    def n(self):
        return self.faces.size - 1

    @property
    def widths(self):
        return np.diff(self.faces)

    @property
    def centers(self):
        return 0.5 * (self.faces[1:] + self.faces[:-1])

    def extended_centers(self, ng=2, periodic=False):
        """Centres including ``ng`` ghost cells per side.

        Ghost cells mirror the widths of the boundary cells; on a periodic
        mesh they copy the widths from the opposite end.
        """
        dx = self.widths
        if periodic:
            left = dx[-ng:]
            right = dx[:ng]
        else:
            left = np.repeat(dx[0], ng)
            right = np.repeat(dx[-1], ng)
        widths = np.concatenate([left, dx, right])
        faces = self.faces[0] - left.sum() + np.concatenate([[0.0], np.cumsum(widths)])
        return 0.5 * (faces[1:] + faces[:-1]), faces


def uniform_mesh(x0, x1, n):
    if not n >= 1 or not x1 > x0:
        raise ConfigurationError("uniform mesh needs n >= 1 and x1 > x0")
    return Mesh1D(np.linspace(x0, x1, int(n) + 1), "uniform")


def _growth(h, length, count):
    """Ratio r with h (r + r^2 + ... + r^count) = length."""
    if count == 0:
        return 1.0
    if abs(h * count - length) < 1e-14 * length:
        return 1.0

    def g(r):
        return h * sum(r ** k for k in range(1, count + 1)) - length

    lo, hi = (1.0 + 1e-12, 50.0) if h * count < length else (1e-6, 1.0 - 1e-12)
    return brentq(g, lo, hi, xtol=1e-15)


def stretched_mesh(x0, x1, fine, n_left, n_fine, n_right):
    """Uniform fine zone [a, b] with geometrically growing cells outside.

    Returns the mesh; the growth ratios on each side are chosen so the
    coarse zones exactly fill [x0, a] and [b, x1].
    """
    a, b = fine
    if not (x0 < a < b < x1) or min(n_left, n_right) < 0 or n_fine < 1:
        raise ConfigurationError("stretched mesh needs x0 < a < b < x1 and positive counts")
    h = (b - a) / n_fine
    rl = _growth(h, a - x0, n_left)
    rr = _growth(h, x1 - b, n_right)
    left = a - np.cumsum(h * rl ** np.arange(1, n_left + 1))[::-1]
    right = b + np.cumsum(h * rr ** np.arange(1, n_right + 1))
    faces = np.concatenate([left, np.linspace(a, b, n_fine + 1), right])
    faces[0], faces[-1] = x0, x1
    return Mesh1D(faces, "geometric", max(rl, rr))
