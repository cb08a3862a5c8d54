"""Pure-numpy kernels. Vectorized where the algorithm allows it; the SMO
sweep is inherently sequential and runs as a Python loop over numpy rows.
"""
import numpy as np

_TAN_22_5 = 0.41421356237309503
_TAN_67_5 = 2.414213562373095
_MASK64 = 0xFFFFFFFFFFFFFFFF

# keeps the broadcast block of nearest_center near 32 MB
_NN_BLOCK_ELEMS = 4_000_000


def correlate_replicate(img, kernel):
    h, w = img.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    padded = np.pad(img, ((ry, ry), (rx, rx)), mode="edge")
    out = np.zeros((h, w))
    for dy in range(kh):
        for dx in range(kw):
            out += kernel[dy, dx] * padded[dy:dy + h, dx:dx + w]
    return out


def nonmax_suppress(mag, gx, gy):
    h, w = mag.shape
    out = np.zeros((h, w))
    if h < 3 or w < 3:
        return out
    m = mag[1:-1, 1:-1]
    ax = np.abs(gx[1:-1, 1:-1])
    ay = np.abs(gy[1:-1, 1:-1])
    horiz = ay <= _TAN_22_5 * ax
    vert = ~horiz & (ay >= _TAN_67_5 * ax)
    diag = ~horiz & ~vert
    diag_pos = diag & (gx[1:-1, 1:-1] * gy[1:-1, 1:-1] > 0.0)
    diag_neg = diag & ~diag_pos

    def shifted(oy, ox):
        return mag[1 + oy:h - 1 + oy, 1 + ox:w - 1 + ox]

    keep = np.zeros_like(m, dtype=bool)
    for sel, (ox, oy) in (
        (horiz, (1, 0)),
        (vert, (0, 1)),
        (diag_pos, (1, 1)),
        (diag_neg, (1, -1)),
    ):
        prev = shifted(-oy, -ox)
        nxt = shifted(oy, ox)
        keep |= sel & (m > prev) & (m >= nxt)
    keep &= m > 0.0
    out[1:-1, 1:-1] = np.where(keep, m, 0.0)
    return out


def _dilate8(mask):
    padded = np.pad(mask, 1)
    h, w = mask.shape
    out = np.zeros_like(mask)
    for dy in range(3):
        for dx in range(3):
            out |= padded[dy:dy + h, dx:dx + w]
    return out


def hysteresis(nms, low, high):
    positive = nms > 0.0
    weak = positive & (nms >= low)
    mask = positive & (nms >= high)
    while True:
        grown = _dilate8(mask) & weak | mask
        if np.array_equal(grown, mask):
            return mask
        mask = grown


def sift_histograms(mag, ori, xs, ys, patch):
    n = xs.shape[0]
    if n == 0:
        return np.zeros((0, 128))
    sub = patch // 4
    offs = np.arange(patch)
    rows = ys[:, None, None] + offs[None, :, None]
    cols = xs[:, None, None] + offs[None, None, :]
    m = mag[rows, cols]
    t = ori[rows, cols] / 45.0
    b0 = np.floor(t)
    frac = t - b0
    b0 = b0.astype(np.int64) % 8
    b1 = (b0 + 1) % 8
    cell = (offs[:, None] // sub) * 4 + (offs[None, :] // sub)
    base = np.arange(n)[:, None, None] * 128 + cell[None] * 8
    flat = np.zeros(n * 128)
    flat += np.bincount((base + b0).ravel(), ((1.0 - frac) * m).ravel(),
                        minlength=n * 128)
    flat += np.bincount((base + b1).ravel(), (frac * m).ravel(),
                        minlength=n * 128)
    return flat.reshape(n, 128)


def nearest_center(points, centers):
    n, d = points.shape
    k = centers.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist2 = np.empty(n)
    block = max(1, _NN_BLOCK_ELEMS // max(1, k * d))
    for s in range(0, n, block):
        diff = points[s:s + block, None, :] - centers[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        idx = np.argmin(d2, axis=1)
        labels[s:s + block] = idx
        dist2[s:s + block] = d2[np.arange(idx.shape[0]), idx]
    return labels, dist2


def _splitmix_next(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return state, z


def _smo_step(i, j, K, y, alpha, f, b, C, eps):
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
    aj = min(max(aj_old - yj * (Ei - Ej) / eta, L), H)
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
    f += (yi * dai) * K[i] + (yj * daj) * K[j] + db
    return True, b_new


def smo_solve(K, y, C, tol, max_passes, max_iter, seed, eps):
    n = y.shape[0]
    alpha = np.zeros(n)
    f = np.zeros(n)
    b = 0.0
    state = int(seed) & _MASK64
    passes = 0
    it = 0
    while passes < max_passes and it < max_iter:
        changed = 0
        for i in range(n):
            ri = y[i] * (f[i] - y[i])
            if not ((ri < -tol and alpha[i] < C) or (ri > tol and alpha[i] > 0.0)):
                continue
            state, z = _splitmix_next(state)
            j = z % (n - 1)
            if j >= i:
                j += 1
            ok, b = _smo_step(i, j, K, y, alpha, f, b, C, eps)
            if not ok:
                # random partner made no progress: scan the rest from a random offset
                state, z = _splitmix_next(state)
                start = z % n
                for t in range(n):
                    j2 = (start + t) % n
                    if j2 == i or j2 == j:
                        continue
                    ok, b = _smo_step(i, j2, K, y, alpha, f, b, C, eps)
                    if ok:
                        break
            if ok:
                changed += 1
        passes = passes + 1 if changed == 0 else 0
        it += 1
    return alpha, b, it
