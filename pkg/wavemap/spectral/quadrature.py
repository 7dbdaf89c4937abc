"""Composite Chebyshev-Lobatto panels with cumulative (Clenshaw-Curtis type) integration.

Each panel carries order + 1 nodes t_k = -cos(pi k / order) mapped to
[a, b]; neighbouring panels share their endpoint node. Cumulative integrals
are exact for polynomials of degree `order` on every panel.
"""
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev


@lru_cache(maxsize=None)
def reference_panel(order: int):
    """Nodes, cumulative integration and differentiation matrices on [-1, 1]."""
    t = -np.cos(np.pi * np.arange(order + 1) / order)
    t[0], t[-1] = -1.0, 1.0
    inverse = np.linalg.inv(chebyshev.chebvander(t, order))
    integral = chebyshev.chebint(inverse, lbnd=-1, axis=0)
    cumulative = chebyshev.chebvander(t, order + 1) @ integral
    cumulative[0, :] = 0.0
    derivative = chebyshev.chebvander(t, order - 1) @ chebyshev.chebder(inverse, axis=0)
    for matrix in (t, cumulative, derivative):
        matrix.setflags(write=False)
    return t, cumulative, derivative


class CompositeGrid:
    def __init__(self, breakpoints, order: int = 8):
        breakpoints = np.asarray(breakpoints, dtype=float)
        if breakpoints.ndim != 1 or len(breakpoints) < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        self.breakpoints = breakpoints
        self.order = order
        t, self._cumulative, self._derivative = reference_panel(order)
        left, right = breakpoints[:-1], breakpoints[1:]
        self.half_widths = 0.5 * (right - left)
        local = 0.5 * (left + right)[:, None] + self.half_widths[:, None] * t[None, :]
        local[:, 0], local[:, -1] = left, right
        self.panels = len(left)
        self._index = np.arange(self.panels)[:, None] * order + np.arange(order + 1)[None, :]
        self.nodes = np.empty(self.panels * order + 1)
        self.nodes[self._index] = local

    @classmethod
    def uniform(cls, a: float, b: float, panels: int, order: int = 8) -> "CompositeGrid":
        return cls(np.linspace(a, b, panels + 1), order)

    @classmethod
    def geometric(cls, a: float, b: float, ratio: float = 0.75, order: int = 12) -> "CompositeGrid":
        """Panels [b r^{k+1}, b r^k] graded toward a > 0."""
        if not 0 < a < b:
            raise ValueError(f"geometric grading needs 0 < a < b, got {a}, {b}")
        count = max(1, int(np.ceil(np.log(a / b) / np.log(ratio))))
        breakpoints = b * ratio ** np.arange(count, -1, -1.0)
        breakpoints[0] = a
        breakpoints[-1] = b
        if count > 1 and breakpoints[1] <= a:
            breakpoints = np.delete(breakpoints, 1)
        return cls(breakpoints, order)

    def __len__(self) -> int:
        return len(self.nodes)

    def _panel_values(self, values):
        values = np.asarray(values)
        if values.shape != self.nodes.shape:
            raise ValueError(f"expected {self.nodes.shape} samples, got {values.shape}")
        return values[self._index]

    def cumulative(self, values):
        """int_{nodes[0]}^{x_i} f for every node."""
        f = self._panel_values(values)
        local = (f @ self._cumulative.T) * self.half_widths[:, None]
        offsets = np.concatenate(([0.0], np.cumsum(local[:, -1])[:-1]))
        out = np.empty(self.nodes.shape, dtype=local.dtype)
        out[self._index] = local + offsets[:, None]
        return out

    def reverse_cumulative(self, values):
        """int_{x_i}^{nodes[-1]} f for every node."""
        f = self._panel_values(values)
        to_right = self._cumulative[-1][None, :] - self._cumulative
        local = (f @ to_right.T) * self.half_widths[:, None]
        totals = local[:, 0]
        offsets = np.concatenate((np.cumsum(totals[::-1])[::-1][1:], [0.0]))
        out = np.empty(self.nodes.shape, dtype=local.dtype)
        out[self._index] = local + offsets[:, None]
        return out

    def integrate(self, values):
        f = self._panel_values(values)
        return np.sum((f @ self._cumulative[-1]) * self.half_widths)

    def derivative(self, values):
        """Panelwise spectral derivative; shared nodes get the mean of both sides."""
        f = self._panel_values(values)
        local = (f @ self._derivative.T) / self.half_widths[:, None]
        out = np.zeros(self.nodes.shape, dtype=local.dtype)
        counts = np.zeros(self.nodes.shape)
        np.add.at(out, self._index, local)
        np.add.at(counts, self._index, 1.0)
        return out / counts
