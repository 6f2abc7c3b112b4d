"""Reproducible Brownian paths from a counter-based generator.

A path is addressed by ``(seed, path_index)``.  Its coarse increments on
``base_steps`` equal intervals are drawn first; each further dyadic level
splits every interval with a Brownian-bridge midpoint draw.  Every normal
variate is a pure function of (seed, path_index, level, interval index), so
a refined path contains the coarse one exactly and paths can be produced in
any order.
"""
from __future__ import annotations

import functools

import numpy as np
from scipy.special import ndtri

__all__ = ["keyed_normals", "BrownianPath"]

_MASK64 = (1 << 64) - 1


def keyed_normals(seed: int, path_index: int, level: int, count: int) -> np.ndarray:
    """Standard normals number 0..count-1 of stream (seed, path_index, level).

    Philox4x64 is keyed with (seed, path_index) and started at counter
    (0, level, 0, 0); raw word i is mapped to a uniform in (0, 1) and then
    through the inverse normal CDF, so word i always gives variate i.
    """
    if count == 0:
        return np.zeros(0)
    bitgen = np.random.Philox(key=np.array([seed & _MASK64, path_index & _MASK64], dtype=np.uint64),
                              counter=np.array([0, level, 0, 0], dtype=np.uint64))
    words = bitgen.random_raw(count)
    uniforms = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(uniforms)


class BrownianPath:
    """Wiener path on [0, t_end] with dyadically refinable increments."""

    def __init__(self, seed: int, path_index: int, t_end: float, base_steps: int):
        if base_steps < 1:
            raise ValueError("base_steps must be >= 1")
        self.seed = int(seed)
        self.path_index = int(path_index)
        self.t_end = float(t_end)
        self.base_steps = int(base_steps)
        self._levels = functools.lru_cache(maxsize=None)(self._increments)

    def _increments(self, level: int) -> np.ndarray:
        if level == 0:
            dt = self.t_end / self.base_steps
            z = keyed_normals(self.seed, self.path_index, 0, self.base_steps)
            return np.sqrt(dt) * z
        coarse = self._levels(level - 1)
        dt_coarse = self.t_end / (self.base_steps * 2 ** (level - 1))
        z = keyed_normals(self.seed, self.path_index, level, coarse.size)
        # bridge midpoint: W(mid) - W(a) = dW/2 + sqrt(dt)/2 * Z
        half = 0.5 * coarse
        kick = 0.5 * np.sqrt(dt_coarse) * z
        out = np.empty(2 * coarse.size)
        out[0::2] = half + kick
        out[1::2] = half - kick
        return out

    def increments(self, level: int = 0) -> np.ndarray:
        """Increments on the grid of ``base_steps * 2**level`` intervals (read-only)."""
        if level < 0:
            raise ValueError("level must be >= 0")
        inc = self._levels(level)
        inc.setflags(write=False)
        return inc

    def values(self, level: int = 0) -> np.ndarray:
        """W at the grid times, starting with W(0) = 0."""
        return np.concatenate([[0.0], np.cumsum(self.increments(level))])
