"""numba backend for the hot loops.

No fastmath anywhere: operation order must stay IEEE-identical to the
numpy backend so both produce bit-equal outputs.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def assign_pixels(rgb, depth, cx, cy, ccol, cdep, crad, inv_mc2, inv_mz2,
                  labels_in, labels_out, dist_out):
    """One superpixel assignment sweep.

    Seeds every pixel with its incumbent center's distance (so reassignment
    can only improve), then lets each center claim pixels inside its
    (4r)x(4r) window when strictly closer.
    """
    h, w = depth.shape
    k = cx.shape[0]
    for y in range(h):
        for x in range(w):
            li = labels_in[y, x]
            if li >= 0:
                dr = rgb[y, x, 0] - ccol[li, 0]
                dg = rgb[y, x, 1] - ccol[li, 1]
                db = rgb[y, x, 2] - ccol[li, 2]
                tcol = dr * dr + dg * dg + db * db
                dz = depth[y, x] - cdep[li]
                dx = (x + 0.5) - cx[li]
                dy = (y + 0.5) - cy[li]
                ir = 1.0 / (crad[li] * crad[li])
                d = tcol * inv_mc2 + (dz * dz) * inv_mz2 + (dx * dx + dy * dy) * ir
                labels_out[y, x] = li
                dist_out[y, x] = d
            else:
                labels_out[y, x] = -1
                dist_out[y, x] = np.inf
    for i in range(k):
        half = 2.0 * crad[i]
        x0 = int(np.floor(cx[i] - half))
        x1 = int(np.ceil(cx[i] + half))
        y0 = int(np.floor(cy[i] - half))
        y1 = int(np.ceil(cy[i] + half))
        if x0 < 0:
            x0 = 0
        if y0 < 0:
            y0 = 0
        if x1 > w:
            x1 = w
        if y1 > h:
            y1 = h
        ir = 1.0 / (crad[i] * crad[i])
        for y in range(y0, y1):
            for x in range(x0, x1):
                dr = rgb[y, x, 0] - ccol[i, 0]
                dg = rgb[y, x, 1] - ccol[i, 1]
                db = rgb[y, x, 2] - ccol[i, 2]
                tcol = dr * dr + dg * dg + db * db
                dz = depth[y, x] - cdep[i]
                dx = (x + 0.5) - cx[i]
                dy = (y + 0.5) - cy[i]
                d = tcol * inv_mc2 + (dz * dz) * inv_mz2 + (dx * dx + dy * dy) * ir
                if d < dist_out[y, x]:
                    dist_out[y, x] = d
                    labels_out[y, x] = i


@njit(cache=True)
def assign_nearest(rgb, depth, cx, cy, ccol, cdep, crad, inv_mc2, inv_mz2,
                   labels_out, dist_out):
    """Assign every still-unclaimed pixel to the spatially nearest center."""
    h, w = depth.shape
    k = cx.shape[0]
    for y in range(h):
        for x in range(w):
            if labels_out[y, x] >= 0:
                continue
            px = x + 0.5
            py = y + 0.5
            best = 0
            bestd = np.inf
            for i in range(k):
                dx = px - cx[i]
                dy = py - cy[i]
                sp = dx * dx + dy * dy
                if sp < bestd:
                    bestd = sp
                    best = i
            dr = rgb[y, x, 0] - ccol[best, 0]
            dg = rgb[y, x, 1] - ccol[best, 1]
            db = rgb[y, x, 2] - ccol[best, 2]
            tcol = dr * dr + dg * dg + db * db
            dz = depth[y, x] - cdep[best]
            dx = px - cx[best]
            dy = py - cy[best]
            ir = 1.0 / (crad[best] * crad[best])
            labels_out[y, x] = best
            dist_out[y, x] = tcol * inv_mc2 + (dz * dz) * inv_mz2 + (dx * dx + dy * dy) * ir


@njit(cache=True)
def poisson_accept(px, py, rr, slack, cap, cell, gw, gh, accepted_out):
    """Sequential dart acceptance against already-accepted darts.

    A dart conflicts with an accepted one when their distance is below
    slack*min(r_i, r_j); the search radius slack*r_j therefore suffices.
    Returns the number accepted (stops at cap).
    """
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
        cx0 = int((x - reach) / cell)
        cx1 = int((x + reach) / cell)
        cy0 = int((y - reach) / cell)
        cy1 = int((y + reach) / cell)
        if cx0 < 0:
            cx0 = 0
        if cy0 < 0:
            cy0 = 0
        if cx1 > gw - 1:
            cx1 = gw - 1
        if cy1 > gh - 1:
            cy1 = gh - 1
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
            gx = int(x / cell)
            gy = int(y / cell)
            if gx > gw - 1:
                gx = gw - 1
            if gy > gh - 1:
                gy = gh - 1
            idx = gy * gw + gx
            nxt[j] = head[idx]
            head[idx] = j
            count += 1
    return count


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def connected_components(labels, comp_out):
    """4-connected components of equal-label regions.

    Components are numbered by first raster occurrence, which is the
    canonical order shared with the numpy backend.
    """
    h, w = labels.shape
    parent = np.empty(h * w, np.int32)
    ncomp = 0
    for y in range(h):
        for x in range(w):
            lab = labels[y, x]
            up = y > 0 and labels[y - 1, x] == lab
            left = x > 0 and labels[y, x - 1] == lab
            if up and left:
                ra = _find(parent, comp_out[y - 1, x])
                rb = _find(parent, comp_out[y, x - 1])
                if ra < rb:
                    parent[rb] = ra
                    comp_out[y, x] = ra
                else:
                    parent[ra] = rb
                    comp_out[y, x] = rb
            elif up:
                comp_out[y, x] = _find(parent, comp_out[y - 1, x])
            elif left:
                comp_out[y, x] = _find(parent, comp_out[y, x - 1])
            else:
                parent[ncomp] = ncomp
                comp_out[y, x] = ncomp
                ncomp += 1
    remap = np.full(ncomp, -1, np.int32)
    n_final = 0
    for y in range(h):
        for x in range(w):
            r = _find(parent, comp_out[y, x])
            if remap[r] < 0:
                remap[r] = n_final
                n_final += 1
            comp_out[y, x] = remap[r]
    return n_final
