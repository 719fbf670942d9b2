"""Adaptive Gauss-Legendre rules and hyperbolic triangle quadrature."""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from core.errors import QuadratureError
from core.geometry import CompactTriangle, IdealTriangle, Isometry, orientation

logger = logging.getLogger(__name__)

# Density: complex interior points -> real values w.r.t. hyperbolic area.
Density = Callable[[np.ndarray], np.ndarray]

DEFAULT_TOLERANCE = 1e-8
LINE_ORDER = 10
AREA_ORDER = 6
MAX_CELLS = 60000
MAX_DEPTH = 40
# Starting cell height of a cusp piece in log-height units.
CUSP_CELL = 0.5

# Images of -1, 1 and infinity under the Cayley map w -> (w - i) / (w + i).
STANDARD_IDEAL_VERTICES = (np.pi / 2.0, 3.0 * np.pi / 2.0, 0.0)


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value with its error estimate and the number of accepted cells."""

    value: float
    error: float
    cells: int = 0

    def __float__(self) -> float:
        return self.value


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1]."""
    return np.polynomial.legendre.leggauss(order)


def _interval_rule(func, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = gauss_legendre(order)
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    x = mid[:, None] + half[:, None] * nodes[None, :]
    values = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return half * (values @ weights)


def adaptive_interval(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOLERANCE,
    order: int = LINE_ORDER,
    initial_cells: int = 4,
    max_cells: int = MAX_CELLS,
) -> QuadratureResult:
    """
    Globally adaptive Gauss-Legendre quadrature of a vectorized function on [a, b].

    Each cell is compared against the sum over its two halves; a cell is
    accepted when the difference is below its share of `tol`.
    """
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    sign = 1.0 if b > a else -1.0
    a, b = min(a, b), max(a, b)
    total = b - a
    edges = np.linspace(a, b, initial_cells + 1)
    lo, hi = edges[:-1], edges[1:]
    value, error, accepted = 0.0, 0.0, 0
    depth = 0
    while lo.size:
        mid = (lo + hi) / 2.0
        coarse = _interval_rule(func, lo, hi, order)
        fine = _interval_rule(func, lo, mid, order) + _interval_rule(func, mid, hi, order)
        diff = np.abs(fine - coarse)
        local_tol = tol * (hi - lo) / total
        done = (diff <= local_tol) | (depth >= MAX_DEPTH)
        pending = int(lo.size - done.sum())
        if pending and accepted + lo.size + pending > max_cells:
            raise QuadratureError(f"Interval quadrature hit the cell cap {max_cells} on [{a}, {b}]")
        value += float(fine[done].sum())
        error += float(diff[done].sum())
        accepted += int(done.sum())
        keep = ~done
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        depth += 1
    return QuadratureResult(sign * value, error, accepted)


def _rectangle_rule(func, x0, x1, y0, y1, order: int) -> np.ndarray:
    nodes, weights = gauss_legendre(order)
    xm, xh = (x0 + x1) / 2.0, (x1 - x0) / 2.0
    ym, yh = (y0 + y1) / 2.0, (y1 - y0) / 2.0
    x = xm[:, None, None] + xh[:, None, None] * nodes[None, :, None]
    y = ym[:, None, None] + yh[:, None, None] * nodes[None, None, :]
    x, y = np.broadcast_arrays(x, y)
    values = np.asarray(func(x.ravel(), y.ravel()), dtype=float).reshape(x.shape)
    return xh * yh * np.einsum("cij,i,j->c", values, weights, weights)


def adaptive_rectangle(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    lower: tuple[float, float],
    upper: tuple[float, float],
    tol: float = DEFAULT_TOLERANCE,
    order: int = AREA_ORDER,
    initial_cells: Union[int, tuple[int, int]] = 4,
    max_cells: int = MAX_CELLS,
) -> QuadratureResult:
    """
    Globally adaptive tensor Gauss-Legendre cubature on an axis-aligned rectangle.

    Args:
        func: vectorized integrand f(x, y).
        lower: (x0, y0) corner.
        upper: (x1, y1) corner.
        tol: absolute tolerance, distributed over cells by area.
        initial_cells: starting grid, one count for both axes or (nx, ny).

    Returns:
        QuadratureResult: value, summed error estimate and accepted cell count.

    Raises:
        QuadratureError: refinement would exceed max_cells.
    """
    nx, ny = (initial_cells, initial_cells) if isinstance(initial_cells, int) else initial_cells
    xs = np.linspace(lower[0], upper[0], nx + 1)
    ys = np.linspace(lower[1], upper[1], ny + 1)
    gx0, gy0 = np.meshgrid(xs[:-1], ys[:-1], indexing="ij")
    gx1, gy1 = np.meshgrid(xs[1:], ys[1:], indexing="ij")
    x0, x1, y0, y1 = gx0.ravel(), gx1.ravel(), gy0.ravel(), gy1.ravel()
    total = (upper[0] - lower[0]) * (upper[1] - lower[1])
    if total == 0:
        return QuadratureResult(0.0, 0.0, 0)
    value, error, accepted = 0.0, 0.0, 0
    depth = 0
    while x0.size:
        xm, ym = (x0 + x1) / 2.0, (y0 + y1) / 2.0
        coarse = _rectangle_rule(func, x0, x1, y0, y1, order)
        fine = (
            _rectangle_rule(func, x0, xm, y0, ym, order)
            + _rectangle_rule(func, xm, x1, y0, ym, order)
            + _rectangle_rule(func, x0, xm, ym, y1, order)
            + _rectangle_rule(func, xm, x1, ym, y1, order)
        )
        diff = np.abs(fine - coarse)
        local_tol = tol * (x1 - x0) * (y1 - y0) / total
        done = (diff <= local_tol) | (depth >= MAX_DEPTH)
        pending = int(x0.size - done.sum())
        if pending and accepted + x0.size + 3 * pending > max_cells:
            raise QuadratureError(
                f"Cubature hit the cell cap {max_cells} with error {error + float(diff.sum()):.3e} against tol {tol:.3e}"
            )
        value += float(fine[done].sum())
        error += float(diff[done].sum())
        accepted += int(done.sum())
        keep = ~done
        x0, x1, y0, y1, xm, ym = (arr[keep] for arr in (x0, x1, y0, y1, xm, ym))
        x0, x1, y0, y1 = (
            np.concatenate([x0, xm, x0, xm]),
            np.concatenate([xm, x1, xm, x1]),
            np.concatenate([y0, y0, ym, ym]),
            np.concatenate([ym, ym, y1, y1]),
        )
        depth += 1
    logger.debug(f"Cubature accepted {accepted} cells at depth {depth}")
    return QuadratureResult(value, error, accepted)


def _cusp_piece_integrand(frame: Isometry, density: Density) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    def integrand(x: np.ndarray, s: np.ndarray) -> np.ndarray:
        floor = np.sqrt(4.0 - (np.abs(x) - 1.0) ** 2)
        w = x + 1j * floor * np.exp(s)
        return density(frame.apply((w - 1j) / (w + 1j))) * np.exp(-s) / floor

    return integrand


def ideal_triangle_quadrature(
    t: IdealTriangle,
    density: Density,
    tail_bound: float,
    tol: float = DEFAULT_TOLERANCE,
) -> QuadratureResult:
    """
    Signed integral of density * dVol over an ideal triangle.

    The triangle is moved onto the half-plane triangle with vertices -1, 1,
    infinity and cut from its center i*sqrt(3) by the perpendiculars to the
    sides into three congruent cusp pieces. The piece at infinity is
    {|x| <= 1, y >= h(x)} with h(x) = sqrt(4 - (|x| - 1)^2); the other two are
    reached by cycling the target vertices. Each piece is integrated in
    (x, s) with y = h(x) e^s, where dVol = e^-s / h(x) dx ds and the lifted
    density varies on a fixed scale in s. Heights beyond s_max are left out
    and bounded by tail_bound * pi * e^-s_max.

    Args:
        t: the triangle; a degenerate triple integrates to exactly 0.
        density: vectorized density on complex points of the disk.
        tail_bound: an upper bound for |density|.
        tol: requested absolute tolerance.

    Returns:
        QuadratureResult: signed value (sign = orientation of t) and error estimate.

    Raises:
        QuadratureError: a piece needs more than MAX_CELLS cells.
    """
    if t.is_degenerate() or tail_bound == 0:
        return QuadratureResult(0.0, 0.0, 0)
    sign = orientation(t)
    a, b, c = t.angles
    target = (a, b, c) if sign > 0 else (a, c, b)

    tail_share = 0.25 * tol
    height = float(np.log(tail_bound * np.pi / tail_share))
    piece_tol = (tol - tail_share) / 6.0
    rows = max(1, int(np.ceil(height / CUSP_CELL)))

    value, error, cells = 0.0, tail_bound * np.pi * np.exp(-height), 0
    for k in range(3):
        frame = Isometry.from_boundary_triples(STANDARD_IDEAL_VERTICES, target[k:] + target[:k])
        integrand = _cusp_piece_integrand(frame, density)
        for lower, upper in ((-1.0, 0.0), (0.0, 1.0)):
            half = adaptive_rectangle(
                integrand, (lower, 0.0), (upper, height), piece_tol, initial_cells=(2, rows)
            )
            value += half.value
            error += half.error
            cells += half.cells
    return QuadratureResult(sign * value, error, cells)


def _to_klein(z):
    return 2.0 * z / (1.0 + np.abs(z) ** 2)


def _from_klein(k):
    return k / (1.0 + np.sqrt(np.maximum(1.0 - np.abs(k) ** 2, 0.0)))


def _cross(u: complex, v: complex) -> float:
    return float((np.conj(u) * v).imag)


def compact_triangle_quadrature(
    t: CompactTriangle,
    density: Density,
    tol: float = DEFAULT_TOLERANCE,
) -> QuadratureResult:
    """
    Signed integral of density * dVol over a compact geodesic triangle.

    Works in the Klein model, where the sides are straight segments and
    dVol = dx dy / (1 - |k|^2)^(3/2). The triangle is moved so that its Klein
    centroid sits at the origin and is cut there into three pieces; each
    piece (0, A, B) is swept by k = s((1 - t) A + t B) with Jacobian
    s * cross(A, B), which carries the orientation sign.

    Raises:
        QuadratureError: a piece needs more than MAX_CELLS cells.
    """
    vertices = np.asarray(t.vertices, dtype=complex)
    if min(abs(vertices[0] - vertices[1]), abs(vertices[1] - vertices[2]), abs(vertices[0] - vertices[2])) < 1e-14:
        return QuadratureResult(0.0, 0.0, 0)
    centroid = complex(_from_klein(np.mean(_to_klein(vertices))))
    to_center = Isometry.moving(centroid).inverse()
    corners = _to_klein(to_center.apply(vertices))
    if abs(_cross(corners[1] - corners[0], corners[2] - corners[0])) < 1e-14:
        return QuadratureResult(0.0, 0.0, 0)
    back = to_center.inverse()

    value, error, cells = 0.0, 0.0, 0
    for k in range(3):
        A, B = complex(corners[k]), complex(corners[(k + 1) % 3])
        jacobian = _cross(A, B)

        def integrand(u: np.ndarray, s: np.ndarray, A=A, B=B, jacobian=jacobian) -> np.ndarray:
            point = s * ((1.0 - u) * A + u * B)
            weight = s * jacobian / (1.0 - np.abs(point) ** 2) ** 1.5
            return density(back.apply(_from_klein(point))) * weight

        piece = adaptive_rectangle(integrand, (0.0, 0.0), (1.0, 1.0), tol / 3.0, initial_cells=2)
        value += piece.value
        error += piece.error
        cells += piece.cells
    return QuadratureResult(value, error, cells)
