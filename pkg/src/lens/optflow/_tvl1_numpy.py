"""Pure numpy TV-L1 level solver (fallback for the compiled kernel).

Implements the duality-based solver: pointwise L1 thresholding on the
auxiliary field, Chambolle-style dual ascent for the TV term, bilinear
warping with clamped coordinates, and a 3x3 median filter between warps.
The compiled twin in ``_tvl1_cy`` follows the exact same arithmetic.
"""
from __future__ import annotations

import numpy as np

GRAD_EPS = 1e-12


def warp_bilinear(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample ``img`` at (x + u, y + v) with coordinates clamped to the border."""
    h, w = img.shape
    yy, xx = np.mgrid[0:h, 0:w]
    x = np.clip(xx + u, 0.0, w - 1.0)
    y = np.clip(yy + v, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def central_gradient(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central differences inside, one-sided at the borders."""
    gx = np.empty_like(img)
    gy = np.empty_like(img)
    gx[:, 1:-1] = (img[:, 2:] - img[:, :-2]) * 0.5
    gx[:, 0] = img[:, 1] - img[:, 0]
    gx[:, -1] = img[:, -1] - img[:, -2]
    gy[1:-1, :] = (img[2:, :] - img[:-2, :]) * 0.5
    gy[0, :] = img[1, :] - img[0, :]
    gy[-1, :] = img[-1, :] - img[-2, :]
    return gx, gy


def forward_gradient(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = np.zeros_like(a)
    gy = np.zeros_like(a)
    gx[:, :-1] = a[:, 1:] - a[:, :-1]
    gy[:-1, :] = a[1:, :] - a[:-1, :]
    return gx, gy


def divergence(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    d = np.empty_like(p1)
    d[:, 0] = p1[:, 0]
    d[:, 1:-1] = p1[:, 1:-1] - p1[:, :-2]
    d[:, -1] = -p1[:, -2]
    d[0, :] += p2[0, :]
    d[1:-1, :] += p2[1:-1, :] - p2[:-2, :]
    d[-1, :] += -p2[-2, :]
    return d


def median3x3(a: np.ndarray) -> np.ndarray:
    padded = np.pad(a, 1, mode="edge")
    h, w = a.shape
    stack = np.empty((9, h, w), dtype=a.dtype)
    k = 0
    for dy in range(3):
        for dx in range(3):
            stack[k] = padded[dy : dy + h, dx : dx + w]
            k += 1
    stack.sort(axis=0)
    return stack[4].copy()


def solve_level(
    i0: np.ndarray,
    i1: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    lam: float,
    theta: float,
    tau: float,
    warps: int,
    iters: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Refine the flow (u, v) between i0 and i1 at a single pyramid level."""
    i1x, i1y = central_gradient(i1)
    u = u.copy()
    v = v.copy()
    lt = lam * theta
    taut = tau / theta
    for warp_idx in range(warps):
        # dual variables restart at every warp (fresh linearization point)
        p11 = np.zeros_like(u)
        p12 = np.zeros_like(u)
        p21 = np.zeros_like(u)
        p22 = np.zeros_like(u)
        i1w = warp_bilinear(i1, u, v)
        ix = warp_bilinear(i1x, u, v)
        iy = warp_bilinear(i1y, u, v)
        grad2 = ix * ix + iy * iy
        rho_c = i1w - ix * u - iy * v - i0
        for _ in range(iters):
            rho = rho_c + ix * u + iy * v
            th = lt * grad2
            coef = np.where(
                rho < -th,
                lt,
                np.where(rho > th, -lt, -rho / np.maximum(grad2, GRAD_EPS)),
            )
            zu = u + coef * ix
            zv = v + coef * iy
            u = zu + theta * divergence(p11, p12)
            v = zv + theta * divergence(p21, p22)
            ux, uy = forward_gradient(u)
            vx, vy = forward_gradient(v)
            nu = 1.0 + taut * np.sqrt(ux * ux + uy * uy)
            p11 = (p11 + taut * ux) / nu
            p12 = (p12 + taut * uy) / nu
            nv = 1.0 + taut * np.sqrt(vx * vx + vy * vy)
            p21 = (p21 + taut * vx) / nv
            p22 = (p22 + taut * vy) / nv
        if warp_idx < warps - 1:
            u = median3x3(u)
            v = median3x3(v)
    return u, v
