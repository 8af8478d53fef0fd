"""Independent reference implementations used by the test suite.

Everything here is deliberately built on different algorithms than the
package: quadrature and bisection for the special functions, grid scans for
the transition curves, exact-penalty subgradient descent with a
KKT-polish/certificate for the constrained-l1 programs, projected gradient
ascent for the scalar programs, and raw sorted-sample averages for the
order-statistic limits.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfinv as sp_erfinv


# ---------------------------------------------------------------------------
# special-function oracles


def erf_quadrature(x: float, points: int = 64) -> float:
    """(2/sqrt(pi)) * integral_0^x e^{-t^2} dt by Gauss-Legendre."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    t = 0.5 * x * (nodes + 1.0)
    return float(0.5 * x * np.sum(weights * np.exp(-t * t)) * 2.0 / math.sqrt(math.pi))


def erfinv_bisection(p: float, lo: float, hi: float, iters: int = 200) -> float:
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if math.erf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def curve_beta_grid_scan(alpha_w: float, signed: bool, points: int = 10**6) -> float:
    """Sign-change location of the transition residual on a dense beta grid."""
    betas = np.linspace(1e-9, alpha_w - 1e-9, points)
    if signed:
        t = sp_erfinv(2.0 * (1.0 - alpha_w) / (1.0 - betas) - 1.0)
        resid = (1.0 - betas) * np.sqrt(1.0 / (2 * np.pi)) * np.exp(-t * t) / alpha_w \
            - np.sqrt(2.0) * t
    else:
        t = sp_erfinv((1.0 - alpha_w) / (1.0 - betas))
        resid = (1.0 - betas) * np.sqrt(2.0 / np.pi) * np.exp(-t * t) / alpha_w \
            - np.sqrt(2.0) * t
    signs = np.sign(resid)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    assert flips.size == 1, f"expected one sign change, found {flips.size}"
    i = flips[0]
    return float(0.5 * (betas[i] + betas[i + 1]))


# ---------------------------------------------------------------------------
# sorted-Gaussian sample averages


def sorted_blocks(n: int, beta_w: float, rng, signed: bool = False):
    """One draw of the rearranged Gaussian vector, split into its blocks."""
    k = int(round(beta_w * n))
    h = rng.standard_normal(n)
    if signed:
        zero = np.sort(-h[: n - k])
    else:
        zero = np.sort(np.abs(h[: n - k]))
    sparse = np.sort(-h[n - k:])[::-1]
    return zero, sparse


# ---------------------------------------------------------------------------
# constrained-l1 oracle: exact-penalty subgradient + KKT polish


def _subgradient_descent(A, y, r, nonneg, rng, restarts=6, iters=4000, mu=20.0):
    m, n = A.shape
    x0s = [np.zeros(n), np.linalg.lstsq(A, y, rcond=None)[0]]
    x0s += [rng.standard_normal(n) for _ in range(restarts - 2)]
    if nonneg:
        x0s = [np.maximum(v, 0.0) for v in x0s]
    best, best_f = None, math.inf
    for x in x0s:
        x = x.copy()
        scale = 0.3 * max(1.0, float(np.linalg.norm(x)))
        for it in range(1, iters + 1):
            res = A @ x - y
            nr = float(np.linalg.norm(res))
            g = np.sign(x) if not nonneg else np.ones(n)
            if nr > r:
                g = g + mu * (A.T @ res) / nr
            x = x - (scale / math.sqrt(it)) * g
            if nonneg:
                x = np.maximum(x, 0.0)
            f = float(np.abs(x).sum() + mu * max(nr - r, 0.0))
            if f < best_f:
                best_f, best = f, x.copy()
        # polish candidate per start as well
    return best


def _kkt_polish(A, y, r, x0, nonneg, tol=1e-9):
    """Active-set refinement: exact support solve + optimality certificate.

    Returns (x, objective) on success, None when no certified support was
    found from this starting point.
    """
    m, n = A.shape
    scale = max(1e-12, float(np.max(np.abs(x0))))
    support = set(np.flatnonzero(np.abs(x0) > 1e-3 * scale).tolist())
    x0 = x0.copy()
    seen = set()
    escapes = 0
    for _round in range(160):
        if not support or len(support) > m:
            return None
        S = np.array(sorted(support))
        signs = np.ones(S.size) if nonneg else np.sign(x0[S])
        signs[signs == 0.0] = 1.0
        state = (tuple(S.tolist()), tuple(int(s) for s in signs))
        if state in seen:
            # active-set cycle: force diversification by dropping the
            # weakest support entry, a bounded number of times
            escapes += 1
            if escapes > 5 or len(support) <= 1:
                return None
            weakest = int(S[np.argmin(np.abs(x0[S]))])
            support.discard(weakest)
            x0[weakest] = 0.0
            seen.clear()
            continue
        seen.add(state)
        AS = A[:, S]
        gram = AS.T @ AS
        if np.linalg.cond(gram) > 1e12:
            return None
        gi_y = np.linalg.solve(gram, AS.T @ y)
        gi_s = np.linalg.solve(gram, signs)
        res0 = y - AS @ gi_y
        msn = float(signs @ gi_s)  # ||A_S (gram)^{-1} s||^2 through the gram
        room = r * r - float(res0 @ res0)
        if room <= 0.0:
            # support too small to reach the ball: grow it greedily along the
            # column most correlated with the residual
            corr = A.T @ res0
            score = corr.copy() if nonneg else np.abs(corr)
            score[S] = -np.inf
            cand = int(np.argmax(score))
            if score[cand] <= 1e-12:
                return None
            support.add(cand)
            x0[cand] = math.copysign(1e-6, float(corr[cand]))
            continue
        if msn <= 0.0:
            return None
        t = math.sqrt(room / msn)
        xS = gi_y - t * gi_s
        resid = y - AS @ xS
        p = resid / t
        # consistency repairs, in order of precedence: nonnegative violations
        # drop out / sign mismatches flip in place, and only with a clean
        # sign pattern does the worst dual violator join the support
        if nonneg:
            bad = np.nonzero(xS < -tol)[0]
            if bad.size:
                for j in bad:
                    support.discard(int(S[j]))
                x0[S] = xS
                continue
        elif bool(np.any(np.sign(xS) * signs < 0)):
            x0[S] = xS  # signs refresh from the new solve
            continue
        dual = A.T @ p
        excess = dual.copy() if nonneg else np.abs(dual)
        excess[S] = -np.inf
        cand = int(np.argmax(excess))
        x0[S] = xS
        if excess[cand] > 1.0 + 1e-8:
            support.add(cand)
            x0[cand] = math.copysign(1e-6, float(dual[cand]))
            continue
        x = np.zeros(n)
        x[S] = xS
        prim = float(np.abs(x).sum())
        dval = float(y @ p - r * np.linalg.norm(p))
        if abs(prim - dval) <= 1e-7 * (1.0 + prim):
            return x, prim
        return None
    return None


def _homotopy_ball(A, y, r, nonneg, max_steps=500):
    """Exact solution of the ball-constrained l1 program by the l1 homotopy.

    Follows the regularization path of (1/2)||Ax-y||^2 + lam*||x||_1 from
    lam = ||A'y||_inf downward (active-set segments with add/drop events)
    and stops where the residual norm crosses r; the path point's KKT system
    is exactly the ball-constrained program's with dual p = res/lam.
    """
    m, n = A.shape
    corr = A.T @ y
    crit = corr if nonneg else np.abs(corr)
    j0 = int(np.argmax(crit))
    lam = float(crit[j0])
    if lam <= 0:
        return None
    S = [j0]
    signs = [1.0 if nonneg else float(np.sign(corr[j0]))]
    x = np.zeros(n)
    eps = 1e-12
    for _step in range(max_steps):
        Sa = np.array(S)
        sa = np.array(signs)
        AS = A[:, Sa]
        try:
            dS = np.linalg.solve(AS.T @ AS, sa)
        except np.linalg.LinAlgError:
            return None
        v = AS @ dS  # d(res)/d(delta), with res shrinking as lam drops by delta
        res = y - A @ x
        # ball crossing: ||res - delta*v||^2 = r^2
        a2 = float(v @ v)
        b2 = -2.0 * float(res @ v)
        c2 = float(res @ res) - r * r
        delta_ball = math.inf
        disc = b2 * b2 - 4.0 * a2 * c2
        if a2 > 0 and disc >= 0:
            for root in ((-b2 - math.sqrt(disc)) / (2 * a2), (-b2 + math.sqrt(disc)) / (2 * a2)):
                if root >= -eps:
                    delta_ball = min(delta_ball, max(root, 0.0))
        # drop events: x_i + delta*dS_i = 0
        delta_drop, drop_idx = math.inf, None
        for i, j in enumerate(S):
            if dS[i] * signs[i] < 0:  # moving toward zero
                d = -x[j] / dS[i]
                if eps < d < delta_drop:
                    delta_drop, drop_idx = d, i
        # activation events: off-support correlation catches lam - delta
        cj = A.T @ res
        w = A.T @ v
        delta_add, add_idx, add_sign = math.inf, None, 1.0
        for j in range(n):
            if j in S:
                continue
            den_p = 1.0 - w[j]
            if abs(den_p) > eps:
                d = (lam - cj[j]) / den_p
                if eps < d < delta_add and d <= lam + eps:
                    delta_add, add_idx, add_sign = d, j, 1.0
            if not nonneg:
                den_m = 1.0 + w[j]
                if abs(den_m) > eps:
                    d = (lam + cj[j]) / den_m
                    if eps < d < delta_add and d <= lam + eps:
                        delta_add, add_idx, add_sign = d, j, -1.0
        delta = min(delta_ball, delta_drop, delta_add, lam)
        if not math.isfinite(delta):
            return None
        x = x.copy()
        x[Sa] = x[Sa] + delta * dS
        lam -= delta
        if delta == delta_ball:
            return x
        if delta == delta_drop:
            j = S[drop_idx]
            x[j] = 0.0
            del S[drop_idx], signs[drop_idx]
            if not S:
                return None
        elif delta == delta_add:
            S.append(add_idx)
            signs.append(add_sign)
        if lam <= eps:
            # path exhausted without reaching the ball: residual floor > r
            return x if float(np.linalg.norm(y - A @ x)) <= r * (1 + 1e-9) else None
    return None


def _verify_kkt(A, y, r, x, nonneg, tol=1e-7):
    res = y - A @ x
    nr = float(np.linalg.norm(res))
    if abs(nr - r) > tol * (1 + r) and float(np.abs(x).sum()) > tol:
        return False
    supp = np.flatnonzero(np.abs(x) > 1e-10 * max(1.0, float(np.max(np.abs(x)))))
    if supp.size == 0:
        return nr <= r * (1 + tol)
    scale = float(A[:, supp[0]] @ res)
    ref = scale / (1.0 if nonneg else float(np.sign(x[supp[0]])))
    if ref <= 0:
        return False
    p = res / ref
    dual = A.T @ p
    for j in supp:
        target = 1.0 if nonneg else float(np.sign(x[j]))
        if abs(dual[j] - target) > 1e-6:
            return False
    off = np.setdiff1d(np.arange(A.shape[1]), supp)
    lim = dual[off] if nonneg else np.abs(dual[off])
    return bool(np.all(lim <= 1.0 + 1e-6))


def socp_oracle(A, y, r, nonneg=False, seed=0):
    """Certified optimal value of the ball-constrained l1 program.

    The l1 homotopy path provides the exact optimum (verified through its
    KKT system); exact-penalty subgradient descent from multiple restarts
    independently confirms the value.
    """
    if float(np.linalg.norm(y)) <= r:
        return np.zeros(A.shape[1]), 0.0
    rng = np.random.default_rng(seed)
    x = _homotopy_ball(A, y, r, nonneg)
    assert x is not None, "homotopy path failed"
    assert _verify_kkt(A, y, r, x, nonneg), "homotopy endpoint violates KKT"
    prim = float(np.abs(x).sum())
    x_sub = _subgradient_descent(A, y, r, nonneg, rng)
    res_sub = max(float(np.linalg.norm(A @ x_sub - y)) - r, 0.0)
    f_sub = float(np.abs(x_sub).sum()) + 20.0 * res_sub
    assert prim <= f_sub + 1e-9 and f_sub - prim <= 0.25 * (1.0 + prim), \
        "subgradient cross-check disagrees with the homotopy optimum"
    return x, prim


# ---------------------------------------------------------------------------
# scalar-program oracle: projected gradient ascent over (nu, lambda)


def surrogate_pga_oracle(hbar, gg, k, sigma, x_mag, r, signed=False,
                         starts=20, iters=6000, seed=0):
    """Best objective found by dense projected-gradient ascent; the problem
    is concave so every start converges to the global maximum."""
    n = hbar.size
    nk = n - k
    rng = np.random.default_rng(seed)
    pen = np.zeros(n)
    pen[nk:] = x_mag

    def clip(lam):
        if signed:
            return np.maximum(lam, 0.0)
        out = np.empty_like(lam)
        out[:nk] = np.clip(lam[:nk], 0.0, 1.0)
        out[nk:] = np.clip(lam[nk:], 0.0, 2.0)
        return out

    def value(nu, lam):
        v = nu * hbar - 1.0 + lam
        e = gg * nu * nu - float(v @ v)
        if e < 0.0:
            return -math.inf
        return sigma * math.sqrt(e) - float(pen @ lam) - nu * r

    best = -math.inf
    for s in range(starts):
        if s == 0:
            nu = 1.0
            lam = clip(1.0 - nu * hbar)
        else:
            nu = float(rng.uniform(0.05, 2.5))
            lam = clip(1.0 - nu * hbar + 0.3 * rng.standard_normal(n))
        f = value(nu, lam)
        if f == -math.inf:
            nu, lam = 0.5, clip(1.0 - 0.5 * hbar)
            f = value(nu, lam)
        step = 0.05
        stalls = 0
        for _ in range(iters):
            v = nu * hbar - 1.0 + lam
            e = gg * nu * nu - float(v @ v)
            se = math.sqrt(max(e, 1e-300))
            glam = -sigma * v / se - pen
            gnu = sigma * (gg * nu - float(hbar @ v)) / se - r
            nu2 = max(nu + step * gnu, 0.0)
            lam2 = clip(lam + step * glam)
            f2 = value(nu2, lam2)
            if f2 >= f:
                stalls = stalls + 1 if f2 - f <= 1e-15 * (1.0 + abs(f)) else 0
                nu, lam, f = nu2, lam2, f2
                step = min(step * 1.2, 1e3)
            else:
                step *= 0.5
                stalls += 1
            if step < 1e-14 or stalls > 60:
                break
        best = max(best, f)
    return best


def ray_pga_oracle(hbar_plus, gg, k, sigma, x_mag, r, iters=30000):
    """Max of the signed recession objective by projected gradient ascent;
    -inf when the recession set is empty."""
    n = hbar_plus.size
    nk = n - k
    lam = np.maximum(-hbar_plus, 0.0)
    if gg - float(np.sum((hbar_plus + lam) ** 2)) < 0.0:
        return -math.inf
    pen = np.zeros(n)
    pen[nk:] = x_mag

    def value(lam):
        e = gg - float(np.sum((hbar_plus + lam) ** 2))
        if e < 0.0:
            return -math.inf
        return sigma * math.sqrt(e) - float(pen @ lam) - r

    f = value(lam)
    step = 1e-2
    for _ in range(iters):
        e = gg - float(np.sum((hbar_plus + lam) ** 2))
        se = math.sqrt(max(e, 1e-300))
        grad = -sigma * (hbar_plus + lam) / se - pen
        lam2 = np.maximum(lam + step * grad, 0.0)
        f2 = value(lam2)
        if f2 >= f:
            lam, f = lam2, f2
            step *= 1.1
        else:
            step *= 0.5
            if step < 1e-14:
                break
    return f
