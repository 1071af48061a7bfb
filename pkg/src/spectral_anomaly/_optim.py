"""One-dimensional Nelder-Mead minimizer.

Follows the simplex rules of R's ``optim(method = "Nelder-Mead")``
(reflection 1, contraction 0.5, expansion 2, relative tolerance
1.490116e-08, initial step 10% of the start or 0.1 at zero, non-finite
values replaced by 1e35) so rotation searches behave like that reference.
"""

import math

_BIG = 1.0e35


def nelder_mead_1d(f, x0, *, alpha=1.0, beta=0.5, gamma=2.0, reltol=1.490116e-08,
                   maxit=500):
    """Minimize ``f`` starting from ``x0``.

    Returns
    -------
    (x, fx, nevals) : tuple
    """

    def ev(x):
        v = f(x)
        return v if math.isfinite(v) else _BIG

    fx0 = f(x0)
    if not math.isfinite(fx0):
        raise ValueError("function cannot be evaluated at the initial point")
    convtol = reltol * (abs(fx0) + reltol)
    px = [x0, 0.0, 0.0]  # two vertices plus the centroid slot
    pf = [fx0, 0.0, 0.0]
    nevals = 1
    low = 0
    step = 0.1 * abs(x0) or 0.1
    trystep = step
    px[1] = x0
    while px[1] == x0:
        px[1] = x0 + trystep
        trystep *= 10
    oldsize = trystep
    calcvert = True
    while True:
        if calcvert:
            for j in range(2):
                if j != low:
                    pf[j] = ev(px[j])
                    nevals += 1
            calcvert = False
        vl = vh = pf[low]
        high = low
        for j in range(2):
            if j != low:
                if pf[j] < vl:
                    low, vl = j, pf[j]
                if pf[j] > vh:
                    high, vh = j, pf[j]
        if vh <= vl + convtol:
            break
        px[2] = px[0] + px[1] - px[high]
        xr = (1 + alpha) * px[2] - alpha * px[high]
        vr = ev(xr)
        nevals += 1
        if vr < vl:
            pf[2] = vr
            xe = gamma * xr + (1 - gamma) * px[2]
            px[2] = xr
            ve = ev(xe)
            nevals += 1
            if ve < vr:
                px[high], pf[high] = xe, ve
            else:
                px[high], pf[high] = px[2], vr
        else:
            if vr < vh:
                px[high], pf[high] = xr, vr
            xc = (1 - beta) * px[high] + beta * px[2]
            vc = ev(xc)
            nevals += 1
            if vc < pf[high]:
                px[high], pf[high] = xc, vc
            elif vr >= vh:
                calcvert = True
                size = 0.0
                for j in range(2):
                    if j != low:
                        px[j] = beta * (px[j] - px[low]) + px[low]
                        size += abs(px[j] - px[low])
                if size < oldsize:
                    oldsize = size
                else:
                    break
        if nevals > maxit:
            break
    return px[low], pf[low], nevals
