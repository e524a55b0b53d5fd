"""Single-pass split scan kernel.

For one numeric feature restricted to a node (values ascending, residuals
aligned), finds the best-RSS candidate of each requested model kind in one
sweep over the admissible split points.  Running sufficient statistics
(count, sum x, sum x^2, sum y, sum y^2, sum xy) are kept for the left side;
right-side sums follow by subtraction.  The broken-line fit uses the hinge
basis {1, x, (x - s)+}, whose Gram entries are linear in the right-side
sums, so it needs no extra pass.

Internally x and y are shifted by their means before scanning; every fitted
model contains a free intercept per piece, so RSS is unchanged while the
normal equations stay well conditioned.  Splits are placed at the midpoint
of consecutive distinct values.
"""

import numpy as np
from numba import njit

# kind slots in the kernel output arrays
LIN_SLOT = 0
PCON_SLOT = 1
BLIN_SLOT = 2
PLIN_SLOT = 3

# a piece whose predictor variance falls below this fraction of the node
# variance gets a zero slope (mean fit) to avoid catastrophic cancellation
_PIECE_VAR_FRACTION = 1e-12


@njit(cache=True)
def scan_numeric_kernel(x, r, min_leaf, want):
    """Scan one sorted numeric column.

    Parameters
    ----------
    x : float64[:]
        Feature values in ascending order.
    r : float64[:]
        Residuals aligned with ``x``.
    min_leaf : int
        Minimum number of cases required on each side of a split.
    want : bool[:]
        Length-4 flags for the LIN/PCON/BLIN/PLIN slots.

    Returns
    -------
    found : bool[4]
    rss : float64[4]
    split : float64[4]
    coef : float64[4, 4]
        Rows are (intercept_left, slope_left, intercept_right, slope_right).
    """
    n = x.shape[0]
    found = np.zeros(4, np.bool_)
    best_rss = np.full(4, np.inf)
    best_split = np.zeros(4)
    best_coef = np.zeros((4, 4))
    if n < 2 or x[n - 1] == x[0]:
        return found, best_rss, best_split, best_coef

    mu = 0.0
    my = 0.0
    for i in range(n):
        mu += x[i]
        my += r[i]
    mu /= n
    my /= n

    Sxx = 0.0
    Syy = 0.0
    Sxy = 0.0
    for i in range(n):
        u = x[i] - mu
        v = r[i] - my
        Sxx += u * u
        Syy += v * v
        Sxy += u * v
    # after centering: Sx = Sy = 0
    Vxx = Sxx
    if Vxx <= 0.0:
        return found, best_rss, best_split, best_coef

    if want[LIN_SLOT]:
        b = Sxy / Vxx
        rss = Syy - Sxy * Sxy / Vxx
        if rss < 0.0:
            rss = 0.0
        found[LIN_SLOT] = True
        best_rss[LIN_SLOT] = rss
        best_coef[LIN_SLOT, 0] = -b * mu + my
        best_coef[LIN_SLOT, 1] = b
        best_coef[LIN_SLOT, 2] = -b * mu + my
        best_coef[LIN_SLOT, 3] = b

    if not (want[PCON_SLOT] or want[BLIN_SLOT] or want[PLIN_SLOT]):
        return found, best_rss, best_split, best_coef

    piece_tol = _PIECE_VAR_FRACTION * Vxx
    nf = float(n)
    ln = 0.0
    lSx = 0.0
    lSxx = 0.0
    lSy = 0.0
    lSyy = 0.0
    lSxy = 0.0
    for i in range(n - 1):
        u = x[i] - mu
        v = r[i] - my
        ln += 1.0
        lSx += u
        lSxx += u * u
        lSy += v
        lSyy += v * v
        lSxy += u * v
        if x[i + 1] <= x[i]:
            continue
        if i + 1 < min_leaf:
            continue
        if n - i - 1 < min_leaf:
            break
        s = 0.5 * ((x[i] - mu) + (x[i + 1] - mu))
        rn = nf - ln
        rSx = -lSx
        rSxx = Sxx - lSxx
        rSy = -lSy
        rSyy = Syy - lSyy
        rSxy = Sxy - lSxy
        lVyy = lSyy - lSy * lSy / ln
        rVyy = rSyy - rSy * rSy / rn

        if want[PCON_SLOT]:
            rss = lVyy + rVyy
            if rss < 0.0:
                rss = 0.0
            if rss < best_rss[PCON_SLOT]:
                found[PCON_SLOT] = True
                best_rss[PCON_SLOT] = rss
                best_split[PCON_SLOT] = s + mu
                best_coef[PCON_SLOT, 0] = lSy / ln + my
                best_coef[PCON_SLOT, 1] = 0.0
                best_coef[PCON_SLOT, 2] = rSy / rn + my
                best_coef[PCON_SLOT, 3] = 0.0

        if want[PLIN_SLOT]:
            lVxx = lSxx - lSx * lSx / ln
            lVxy = lSxy - lSx * lSy / ln
            rVxx = rSxx - rSx * rSx / rn
            rVxy = rSxy - rSx * rSy / rn
            if lVxx > piece_tol:
                bl = lVxy / lVxx
                rss_l = lVyy - lVxy * lVxy / lVxx
            else:
                bl = 0.0
                rss_l = lVyy
            al = (lSy - bl * lSx) / ln
            if rVxx > piece_tol:
                br = rVxy / rVxx
                rss_r = rVyy - rVxy * rVxy / rVxx
            else:
                br = 0.0
                rss_r = rVyy
            ar = (rSy - br * rSx) / rn
            rss = rss_l + rss_r
            if rss < 0.0:
                rss = 0.0
            if rss < best_rss[PLIN_SLOT]:
                found[PLIN_SLOT] = True
                best_rss[PLIN_SLOT] = rss
                best_split[PLIN_SLOT] = s + mu
                best_coef[PLIN_SLOT, 0] = al - bl * mu + my
                best_coef[PLIN_SLOT, 1] = bl
                best_coef[PLIN_SLOT, 2] = ar - br * mu + my
                best_coef[PLIN_SLOT, 3] = br

        if want[BLIN_SLOT]:
            # hinge aggregates from right-side sums: h = (u - s)+
            Sh = rSx - s * rn
            Shh = rSxx - 2.0 * s * rSx + s * s * rn
            Sxh = rSxx - s * rSx
            Syh = rSxy - s * rSy
            # symmetric normal matrix [[n, 0, Sh], [0, Sxx, Sxh], [Sh, Sxh, Shh]]
            # (Sx = Sy = 0 after centering), rhs (0, Sxy, Syh); Cramer's rule
            det = nf * (Sxx * Shh - Sxh * Sxh) - Sxx * Sh * Sh
            scale = nf * abs(Sxx * Shh) + abs(Sxx * Sh * Sh) + 1e-300
            if abs(det) > 1e-12 * scale:
                b0 = Sh * (Sxy * Sxh - Sxx * Syh) / det
                b1 = (nf * (Sxy * Shh - Sxh * Syh) - Sxy * Sh * Sh) / det
                b2 = nf * (Sxx * Syh - Sxy * Sxh) / det
                rss = Syy - (b1 * Sxy + b2 * Syh)
                if rss < 0.0:
                    rss = 0.0
                if rss < best_rss[BLIN_SLOT]:
                    found[BLIN_SLOT] = True
                    best_rss[BLIN_SLOT] = rss
                    best_split[BLIN_SLOT] = s + mu
                    # left piece: b0 + b1 u; right piece: (b0 - b2 s) + (b1 + b2) u
                    best_coef[BLIN_SLOT, 0] = b0 - b1 * mu + my
                    best_coef[BLIN_SLOT, 1] = b1
                    best_coef[BLIN_SLOT, 2] = (b0 - b2 * s) - (b1 + b2) * mu + my
                    best_coef[BLIN_SLOT, 3] = b1 + b2

    return found, best_rss, best_split, best_coef
