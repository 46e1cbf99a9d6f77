"""Pure numpy/python fallback backend.

Mirrors numba_impl exactly, including floating-point operation order, so
both backends produce bit-identical outputs. Vectorized where that does not
change the arithmetic; plain loops where sequential order matters (dart
acceptance).
"""

import numpy as np
from scipy import ndimage

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def assign_pixels(rgb, depth, cx, cy, ccol, cdep, crad, inv_mc2, inv_mz2,
                  labels_in, labels_out, dist_out):
    h, w = depth.shape
    k = cx.shape[0]
    xs = np.arange(w, dtype=np.float64) + 0.5
    ys = np.arange(h, dtype=np.float64) + 0.5

    li = labels_in
    safe = np.where(li < 0, 0, li)
    dr = rgb[:, :, 0] - ccol[safe, 0]
    dg = rgb[:, :, 1] - ccol[safe, 1]
    db = rgb[:, :, 2] - ccol[safe, 2]
    tcol = dr * dr + dg * dg + db * db
    dz = depth - cdep[safe]
    dx = xs[None, :] - cx[safe]
    dy = ys[:, None] - cy[safe]
    ir = 1.0 / (crad[safe] * crad[safe])
    d = tcol * inv_mc2 + (dz * dz) * inv_mz2 + (dx * dx + dy * dy) * ir
    np.copyto(dist_out, np.where(li < 0, np.inf, d))
    np.copyto(labels_out, li)

    for i in range(k):
        half = 2.0 * crad[i]
        x0 = max(int(np.floor(cx[i] - half)), 0)
        x1 = min(int(np.ceil(cx[i] + half)), w)
        y0 = max(int(np.floor(cy[i] - half)), 0)
        y1 = min(int(np.ceil(cy[i] + half)), h)
        if x0 >= x1 or y0 >= y1:
            continue
        ir = 1.0 / (crad[i] * crad[i])
        dr = rgb[y0:y1, x0:x1, 0] - ccol[i, 0]
        dg = rgb[y0:y1, x0:x1, 1] - ccol[i, 1]
        db = rgb[y0:y1, x0:x1, 2] - ccol[i, 2]
        tcol = dr * dr + dg * dg + db * db
        dz = depth[y0:y1, x0:x1] - cdep[i]
        dx = xs[x0:x1][None, :] - cx[i]
        dy = ys[y0:y1][:, None] - cy[i]
        d = tcol * inv_mc2 + (dz * dz) * inv_mz2 + (dx * dx + dy * dy) * ir
        dwin = dist_out[y0:y1, x0:x1]
        lwin = labels_out[y0:y1, x0:x1]
        upd = d < dwin
        dwin[upd] = d[upd]
        lwin[upd] = i


def assign_nearest(rgb, depth, cx, cy, ccol, cdep, crad, inv_mc2, inv_mz2,
                   labels_out, dist_out):
    un = labels_out < 0
    if not un.any():
        return
    yy, xx = np.nonzero(un)
    # chunk so the (n, k) distance matrix stays small even when everything
    # is unclaimed on the first sweep
    for s in range(0, yy.size, 4096):
        yb = yy[s:s + 4096]
        xb = xx[s:s + 4096]
        px = xb + 0.5
        py = yb + 0.5
        ax = px[:, None] - cx[None, :]
        ay = py[:, None] - cy[None, :]
        sp = ax * ax + ay * ay
        best = np.argmin(sp, axis=1)
        dr = rgb[yb, xb, 0] - ccol[best, 0]
        dg = rgb[yb, xb, 1] - ccol[best, 1]
        db = rgb[yb, xb, 2] - ccol[best, 2]
        tcol = dr * dr + dg * dg + db * db
        dz = depth[yb, xb] - cdep[best]
        dx = px - cx[best]
        dy = py - cy[best]
        ir = 1.0 / (crad[best] * crad[best])
        labels_out[yb, xb] = best.astype(np.int32)
        dist_out[yb, xb] = tcol * inv_mc2 + (dz * dz) * inv_mz2 + (dx * dx + dy * dy) * ir


def poisson_accept(px, py, rr, slack, cap, cell, gw, gh, accepted_out):
    n = px.shape[0]
    head = np.full(gw * gh, -1, np.int32)
    nxt = np.full(n, -1, np.int32)
    count = 0
    for j in range(n):
        if count >= cap:
            break
        x = px[j]
        y = py[j]
        reach = slack * rr[j]
        cx0 = max(int((x - reach) / cell), 0)
        cx1 = min(int((x + reach) / cell), gw - 1)
        cy0 = max(int((y - reach) / cell), 0)
        cy1 = min(int((y + reach) / cell), gh - 1)
        ok = True
        for gyy in range(cy0, cy1 + 1):
            for gxx in range(cx0, cx1 + 1):
                q = head[gyy * gw + gxx]
                while q >= 0:
                    dx = x - px[q]
                    dy = y - py[q]
                    rmin = rr[q] if rr[q] < rr[j] else rr[j]
                    thr = slack * rmin
                    if dx * dx + dy * dy < thr * thr:
                        ok = False
                        break
                    q = nxt[q]
                if not ok:
                    break
            if not ok:
                break
        if ok:
            accepted_out[count] = j
            gx = min(int(x / cell), gw - 1)
            gy = min(int(y / cell), gh - 1)
            idx = gy * gw + gx
            nxt[j] = head[idx]
            head[idx] = j
            count += 1
    return count


def connected_components(labels, comp_out):
    h, w = labels.shape
    comp = np.full((h, w), -1, np.int64)
    offset = 0
    for lab in range(int(labels.max()) + 1):
        m = labels == lab
        if not m.any():
            continue
        cc, ncc = ndimage.label(m, structure=_FOUR_CONN)
        comp[m] = cc[m].astype(np.int64) - 1 + offset
        offset += ncc
    # canonical numbering: order components by first raster occurrence,
    # matching the numba backend
    flat = comp.ravel()
    first = np.full(offset, flat.size, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(flat.size))
    order = np.argsort(first, kind="stable")
    remap = np.empty(offset, np.int64)
    remap[order] = np.arange(offset)
    comp_out[...] = remap[flat].reshape(h, w).astype(np.int32)
    return offset
