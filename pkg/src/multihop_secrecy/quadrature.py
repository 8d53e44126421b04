"""Adaptive tensor-product Gauss-Kronrod (7/15) cubature on rectangles."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

import numpy as np

# Kronrod 15-point nodes on [0, 1]; the Gauss 7-point rule uses the odd entries.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes sit at +-XGK[1], +-XGK[3], +-XGK[5], 0
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]


class QuadratureError(RuntimeError):
    """Tolerance not reached within the subdivision budget."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (best estimate {estimate!r}, error bound {error!r})")
        self.estimate = estimate
        self.error = error


@dataclass
class CubatureResult:
    value: float
    error: float
    n_regions: int


def _rule(f, x0, x1, y0, y1):
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    xs = 0.5 * (x0 + x1) + hx * NODES
    ys = 0.5 * (y0 + y1) + hy * NODES
    values = f(xs[:, None], ys[None, :])
    kron = hx * hy * (KRONROD_WEIGHTS @ values @ KRONROD_WEIGHTS)
    gauss = hx * hy * (GAUSS_WEIGHTS @ values @ GAUSS_WEIGHTS)
    return float(kron), abs(float(kron - gauss))


def adaptive_cubature(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_breaks,
    y_breaks,
    abs_tol: float,
    max_regions: int = 200_000,
) -> CubatureResult:
    """Integrate ``f(x, y)`` over the rectangle spanned by the break lists.

    ``f`` must broadcast over a column of x values and a row of y values. The
    initial partition is the tensor product of the break lists; the region
    with the largest error estimate is quartered until the summed error
    estimate drops to ``abs_tol``.
    """
    heap = []
    total = 0.0
    total_err = 0.0
    for x0, x1 in zip(x_breaks[:-1], x_breaks[1:]):
        for y0, y1 in zip(y_breaks[:-1], y_breaks[1:]):
            val, err = _rule(f, x0, x1, y0, y1)
            total += val
            total_err += err
            heapq.heappush(heap, (-err, val, x0, x1, y0, y1))
    n_regions = len(heap)

    while total_err > abs_tol:
        if n_regions >= max_regions:
            raise QuadratureError("cubature budget exhausted", total, total_err)
        neg_err, val, x0, x1, y0, y1 = heapq.heappop(heap)
        total -= val
        total_err += neg_err
        xm = 0.5 * (x0 + x1)
        ym = 0.5 * (y0 + y1)
        for a0, a1 in ((x0, xm), (xm, x1)):
            for b0, b1 in ((y0, ym), (ym, y1)):
                v, e = _rule(f, a0, a1, b0, b1)
                total += v
                total_err += e
                heapq.heappush(heap, (-e, v, a0, a1, b0, b1))
        n_regions += 3
        if not heap or -heap[0][0] == 0.0:
            break
    # re-sum to shed accumulated cancellation in the running totals
    total = float(sum(item[1] for item in heap))
    total_err = float(sum(-item[0] for item in heap))
    return CubatureResult(total, total_err, n_regions)
