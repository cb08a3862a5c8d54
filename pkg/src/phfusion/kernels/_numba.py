"""JIT-compiled loop kernels. Signatures mirror :mod:`._numpy` exactly."""
import math

import numpy as np
from numba import njit

_TAN_22_5 = 0.41421356237309503
_TAN_67_5 = 2.414213562373095

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True)
def correlate_replicate(img, kernel):
    h, w = img.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(kh):
                yy = min(max(y + dy - ry, 0), h - 1)
                for dx in range(kw):
                    xx = min(max(x + dx - rx, 0), w - 1)
                    acc += kernel[dy, dx] * img[yy, xx]
            out[y, x] = acc
    return out


@njit(cache=True)
def nonmax_suppress(mag, gx, gy):
    h, w = mag.shape
    out = np.zeros((h, w))
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            m = mag[y, x]
            if m <= 0.0:
                continue
            ax = abs(gx[y, x])
            ay = abs(gy[y, x])
            if ay <= _TAN_22_5 * ax:
                ox, oy = 1, 0
            elif ay >= _TAN_67_5 * ax:
                ox, oy = 0, 1
            elif gx[y, x] * gy[y, x] > 0.0:
                ox, oy = 1, 1
            else:
                ox, oy = 1, -1
            prev = mag[y - oy, x - ox]
            nxt = mag[y + oy, x + ox]
            if m > prev and m >= nxt:
                out[y, x] = m
    return out


@njit(cache=True)
def hysteresis(nms, low, high):
    h, w = nms.shape
    mask = np.zeros((h, w), dtype=np.bool_)
    stack_y = np.empty(h * w, dtype=np.int64)
    stack_x = np.empty(h * w, dtype=np.int64)
    top = 0
    for y in range(h):
        for x in range(w):
            if nms[y, x] > 0.0 and nms[y, x] >= high and not mask[y, x]:
                mask[y, x] = True
                stack_y[top] = y
                stack_x[top] = x
                top += 1
                while top > 0:
                    top -= 1
                    cy = stack_y[top]
                    cx = stack_x[top]
                    for dy in range(-1, 2):
                        ny = cy + dy
                        if ny < 0 or ny >= h:
                            continue
                        for dx in range(-1, 2):
                            nx = cx + dx
                            if nx < 0 or nx >= w or mask[ny, nx]:
                                continue
                            v = nms[ny, nx]
                            if v > 0.0 and v >= low:
                                mask[ny, nx] = True
                                stack_y[top] = ny
                                stack_x[top] = nx
                                top += 1
    return mask


@njit(cache=True)
def sift_histograms(mag, ori, xs, ys, patch):
    n = xs.shape[0]
    out = np.zeros((n, 128))
    sub = patch // 4
    for k in range(n):
        x0 = xs[k]
        y0 = ys[k]
        for py in range(patch):
            row = (py // sub) * 4
            for px in range(patch):
                m = mag[y0 + py, x0 + px]
                if m == 0.0:
                    continue
                t = ori[y0 + py, x0 + px] / 45.0
                b0 = int(math.floor(t))
                frac = t - b0
                b0 = b0 % 8
                b1 = (b0 + 1) % 8
                base = (row + px // sub) * 8
                out[k, base + b0] += (1.0 - frac) * m
                out[k, base + b1] += frac * m
    return out


@njit(cache=True)
def nearest_center(points, centers):
    n, d = points.shape
    k = centers.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist2 = np.empty(n)
    for i in range(n):
        best = np.inf
        arg = 0
        for c in range(k):
            s = 0.0
            for j in range(d):
                diff = points[i, j] - centers[c, j]
                s += diff * diff
            if s < best:
                best = s
                arg = c
        labels[i] = arg
        dist2[i] = best
    return labels, dist2


@njit(cache=True)
def _splitmix_next(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return state, z


@njit(cache=True)
def _smo_step(i, j, K, y, alpha, f, b, C, eps):
    n = y.shape[0]
    yi = y[i]
    yj = y[j]
    Ei = f[i] - yi
    Ej = f[j] - yj
    ai_old = alpha[i]
    aj_old = alpha[j]
    if yi != yj:
        L = max(0.0, aj_old - ai_old)
        H = min(C, C + aj_old - ai_old)
    else:
        L = max(0.0, ai_old + aj_old - C)
        H = min(C, ai_old + aj_old)
    if L >= H:
        return False, b
    eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
    if eta >= 0.0:
        return False, b
    aj = aj_old - yj * (Ei - Ej) / eta
    if aj > H:
        aj = H
    elif aj < L:
        aj = L
    if abs(aj - aj_old) < eps * (aj + aj_old + eps):
        return False, b
    ai = ai_old + yi * yj * (aj_old - aj)
    # snap rounding debris onto the box so bound multipliers stay exact
    snap = 1e-12 * C
    if ai < snap:
        ai = 0.0
    elif ai > C - snap:
        ai = C
    if aj < snap:
        aj = 0.0
    elif aj > C - snap:
        aj = C
    dai = ai - ai_old
    daj = aj - aj_old
    b1 = b - Ei - yi * dai * K[i, i] - yj * daj * K[i, j]
    b2 = b - Ej - yi * dai * K[i, j] - yj * daj * K[j, j]
    if 0.0 < ai < C:
        b_new = b1
    elif 0.0 < aj < C:
        b_new = b2
    else:
        b_new = 0.5 * (b1 + b2)
    db = b_new - b
    alpha[i] = ai
    alpha[j] = aj
    ci = yi * dai
    cj = yj * daj
    for t in range(n):
        f[t] += ci * K[i, t] + cj * K[j, t] + db
    return True, b_new


@njit(cache=True)
def smo_solve(K, y, C, tol, max_passes, max_iter, seed, eps):
    n = y.shape[0]
    alpha = np.zeros(n)
    f = np.zeros(n)
    b = 0.0
    state = np.uint64(seed)
    nm1 = np.uint64(n - 1)
    un = np.uint64(n)
    passes = 0
    it = 0
    while passes < max_passes and it < max_iter:
        changed = 0
        for i in range(n):
            ri = y[i] * (f[i] - y[i])
            if not ((ri < -tol and alpha[i] < C) or (ri > tol and alpha[i] > 0.0)):
                continue
            state, z = _splitmix_next(state)
            j = np.int64(z % nm1)
            if j >= i:
                j += 1
            ok, b = _smo_step(i, j, K, y, alpha, f, b, C, eps)
            if not ok:
                # random partner made no progress: scan the rest from a random offset
                state, z = _splitmix_next(state)
                start = np.int64(z % un)
                for t in range(n):
                    j2 = (start + t) % n
                    if j2 == i or j2 == j:
                        continue
                    ok, b = _smo_step(i, j2, K, y, alpha, f, b, C, eps)
                    if ok:
                        break
            if ok:
                changed += 1
        if changed == 0:
            passes += 1
        else:
            passes = 0
        it += 1
    return alpha, b, it
