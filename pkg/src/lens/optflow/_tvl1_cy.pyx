# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled TV-L1 level solver.

Mirrors the arithmetic of ``_tvl1_numpy`` exactly: same warping, gradient,
thresholding, and dual-ascent update order, so both backends agree to
floating-point noise and either can serve the same pyramid orchestrator.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()


cdef inline double _clampd(double x, double lo, double hi) noexcept nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


cdef void _warp(double[:, ::1] img, double[:, ::1] u, double[:, ::1] v,
                double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t i, j, x0, y0, x1, y1
    cdef double x, y, fx, fy, top, bot
    for i in range(h):
        for j in range(w):
            x = _clampd(j + u[i, j], 0.0, w - 1.0)
            y = _clampd(i + v[i, j], 0.0, h - 1.0)
            x0 = <Py_ssize_t>floor(x)
            y0 = <Py_ssize_t>floor(y)
            x1 = x0 + 1 if x0 + 1 < w - 1 else w - 1
            y1 = y0 + 1 if y0 + 1 < h - 1 else h - 1
            fx = x - x0
            fy = y - y0
            top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
            bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
            out[i, j] = top * (1.0 - fy) + bot * fy


cdef void _central_gradient(double[:, ::1] img, double[:, ::1] gx,
                            double[:, ::1] gy) noexcept nogil:
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t i, j
    for i in range(h):
        for j in range(1, w - 1):
            gx[i, j] = (img[i, j + 1] - img[i, j - 1]) * 0.5
        gx[i, 0] = img[i, 1] - img[i, 0]
        gx[i, w - 1] = img[i, w - 1] - img[i, w - 2]
    for j in range(w):
        for i in range(1, h - 1):
            gy[i, j] = (img[i + 1, j] - img[i - 1, j]) * 0.5
        gy[0, j] = img[1, j] - img[0, j]
        gy[h - 1, j] = img[h - 1, j] - img[h - 2, j]


cdef void _forward_gradient(double[:, ::1] a, double[:, ::1] gx,
                            double[:, ::1] gy) noexcept nogil:
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1]
    cdef Py_ssize_t i, j
    for i in range(h):
        for j in range(w - 1):
            gx[i, j] = a[i, j + 1] - a[i, j]
        gx[i, w - 1] = 0.0
    for i in range(h - 1):
        for j in range(w):
            gy[i, j] = a[i + 1, j] - a[i, j]
    for j in range(w):
        gy[h - 1, j] = 0.0


cdef void _divergence(double[:, ::1] p1, double[:, ::1] p2,
                      double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t h = p1.shape[0], w = p1.shape[1]
    cdef Py_ssize_t i, j
    for i in range(h):
        out[i, 0] = p1[i, 0]
        for j in range(1, w - 1):
            out[i, j] = p1[i, j] - p1[i, j - 1]
        out[i, w - 1] = -p1[i, w - 2]
    for j in range(w):
        out[0, j] += p2[0, j]
        for i in range(1, h - 1):
            out[i, j] += p2[i, j] - p2[i - 1, j]
        out[h - 1, j] += -p2[h - 2, j]


cdef void _median3x3(double[:, ::1] a, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1]
    cdef Py_ssize_t i, j, dy, dx, yy, xx, k, m
    cdef double window[9]
    cdef double key
    for i in range(h):
        for j in range(w):
            k = 0
            for dy in range(-1, 2):
                for dx in range(-1, 2):
                    yy = i + dy
                    if yy < 0:
                        yy = 0
                    elif yy >= h:
                        yy = h - 1
                    xx = j + dx
                    if xx < 0:
                        xx = 0
                    elif xx >= w:
                        xx = w - 1
                    window[k] = a[yy, xx]
                    k += 1
            for k in range(1, 9):
                key = window[k]
                m = k - 1
                while m >= 0 and window[m] > key:
                    window[m + 1] = window[m]
                    m -= 1
                window[m + 1] = key
            out[i, j] = window[4]


def warp_bilinear(img, u, v):
    cdef cnp.ndarray[double, ndim=2] out = np.empty_like(img)
    _warp(img, u, v, out)
    return out


def median3x3(a):
    cdef cnp.ndarray[double, ndim=2] out = np.empty_like(a)
    _median3x3(a, out)
    return out


def central_gradient(img):
    cdef cnp.ndarray[double, ndim=2] gx = np.empty_like(img)
    cdef cnp.ndarray[double, ndim=2] gy = np.empty_like(img)
    _central_gradient(img, gx, gy)
    return gx, gy


def solve_level(i0, i1, u0, v0, double lam, double theta, double tau,
                int warps, int iters):
    """Refine the flow (u, v) between i0 and i1 at a single pyramid level."""
    cdef double[:, ::1] i0v = np.ascontiguousarray(i0, dtype=np.float64)
    cdef double[:, ::1] i1v = np.ascontiguousarray(i1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] u = np.array(u0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[double, ndim=2] v = np.array(v0, dtype=np.float64, copy=True)
    cdef Py_ssize_t h = i0v.shape[0], w = i0v.shape[1]

    cdef double[:, ::1] uv = u
    cdef double[:, ::1] vv = v
    shape = (h, w)
    cdef double[:, ::1] i1x = np.empty(shape)
    cdef double[:, ::1] i1y = np.empty(shape)
    cdef double[:, ::1] i1w = np.empty(shape)
    cdef double[:, ::1] ix = np.empty(shape)
    cdef double[:, ::1] iy = np.empty(shape)
    cdef double[:, ::1] rho_c = np.empty(shape)
    cdef double[:, ::1] p11 = np.zeros(shape)
    cdef double[:, ::1] p12 = np.zeros(shape)
    cdef double[:, ::1] p21 = np.zeros(shape)
    cdef double[:, ::1] p22 = np.zeros(shape)
    cdef double[:, ::1] div_buf = np.empty(shape)
    cdef double[:, ::1] gx = np.empty(shape)
    cdef double[:, ::1] gy = np.empty(shape)
    cdef double[:, ::1] med = np.empty(shape)

    cdef double lt = lam * theta
    cdef double taut = tau / theta
    cdef Py_ssize_t warp_idx, it, i, j
    cdef double rho, th, coef, g2, norm

    with nogil:
        _central_gradient(i1v, i1x, i1y)
        for warp_idx in range(warps):
            # dual variables restart at every warp (fresh linearization point)
            p11[:, :] = 0.0
            p12[:, :] = 0.0
            p21[:, :] = 0.0
            p22[:, :] = 0.0
            _warp(i1v, uv, vv, i1w)
            _warp(i1x, uv, vv, ix)
            _warp(i1y, uv, vv, iy)
            for i in range(h):
                for j in range(w):
                    rho_c[i, j] = (i1w[i, j] - ix[i, j] * uv[i, j]
                                   - iy[i, j] * vv[i, j] - i0v[i, j])
            for it in range(iters):
                # thresholding step, then u takes the TV-denoised value
                _divergence(p11, p12, div_buf)
                for i in range(h):
                    for j in range(w):
                        g2 = ix[i, j] * ix[i, j] + iy[i, j] * iy[i, j]
                        rho = rho_c[i, j] + ix[i, j] * uv[i, j] + iy[i, j] * vv[i, j]
                        th = lt * g2
                        if rho < -th:
                            coef = lt
                        elif rho > th:
                            coef = -lt
                        else:
                            coef = -rho / (g2 if g2 > 1e-12 else 1e-12)
                        uv[i, j] = (uv[i, j] + coef * ix[i, j]
                                    + theta * div_buf[i, j])
                        # stash the v-threshold coefficient for the second pass
                        gx[i, j] = coef
                _divergence(p21, p22, div_buf)
                for i in range(h):
                    for j in range(w):
                        vv[i, j] = (vv[i, j] + gx[i, j] * iy[i, j]
                                    + theta * div_buf[i, j])
                _forward_gradient(uv, gx, gy)
                for i in range(h):
                    for j in range(w):
                        norm = 1.0 + taut * sqrt(gx[i, j] * gx[i, j]
                                                 + gy[i, j] * gy[i, j])
                        p11[i, j] = (p11[i, j] + taut * gx[i, j]) / norm
                        p12[i, j] = (p12[i, j] + taut * gy[i, j]) / norm
                _forward_gradient(vv, gx, gy)
                for i in range(h):
                    for j in range(w):
                        norm = 1.0 + taut * sqrt(gx[i, j] * gx[i, j]
                                                 + gy[i, j] * gy[i, j])
                        p21[i, j] = (p21[i, j] + taut * gx[i, j]) / norm
                        p22[i, j] = (p22[i, j] + taut * gy[i, j]) / norm
            if warp_idx < warps - 1:
                _median3x3(uv, med)
                uv[:, :] = med
                _median3x3(vv, med)
                vv[:, :] = med
    return u, v
