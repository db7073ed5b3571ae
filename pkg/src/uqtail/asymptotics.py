"""Tail asymptotics assembly: escape probabilities of the twisted chain, the
boundary constant eta, the closed-form prefactors, the two-term expansion,
small-breakdown limits, the matched-M/M/1 comparison, empirical tail fits,
and the product-form reference distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .kernels import rs_rd_kernel
from .params import (DOWN, UP, InvalidParameters, Model, ModelParams,
                     make_params)
from .qbd import (ConvergenceError, StationaryTable, boundary_vector,
                  truncated_stationary)
from .spectral import characteristic_roots
from .twist import harmonic, horizontal_drift, markov_part_stationary, twisted_kernel


@dataclass(frozen=True)
class EscapeProbs:
    up: float
    down: float
    x_max_used: int
    method_gap: float  # absorbing solve vs first-passage iteration


@dataclass(frozen=True)
class EtaEstimate:
    value: float
    std_error: float
    method: str  # "exact" (Model 1) or "monte-carlo" (Model 2)


@dataclass(frozen=True)
class TailAsymptotic:
    model: Model
    gamma: float
    prefactor_up: float | None
    prefactor_down: float | None
    eta: float | None
    escape_up: float | None
    escape_down: float | None
    secondary_gamma: float | None
    secondary_weight: float | None
    y_ratio: float | None  # per-unit-of-y geometric factor (tandem model)
    provenance: str


@dataclass(frozen=True)
class TwoTermFit:
    w2: float
    w3: float
    k_window: tuple[int, int]
    max_relative_residual: float
    geometric_ok: bool


@dataclass(frozen=True)
class TailFit:
    gamma_est: float
    log_prefactor_est: float
    k_window: tuple[int, int]
    max_relative_deviation: float


@dataclass(frozen=True)
class TwoGeometricFit:
    rates: tuple[float, float]
    weights: tuple[float, float]
    dominant_rate: float  # rate of the larger-weight term
    k_window: tuple[int, int]


@dataclass(frozen=True)
class Mm1Comparison:
    gamma_1: float
    mm1_ratio: float
    dominance: bool  # gamma_1 >= mm1_ratio, always true under stability
    lambda0: float
    mu0: float

    def pi0(self, level: int) -> float:
        rho = self.lambda0 / self.mu0
        return (1.0 - rho) * rho ** level


@dataclass(frozen=True)
class AlphaLimits:
    case: str  # "service_below_lam_beta" or "service_above_lam_beta"
    limit_gamma: float
    limit_g: float | None
    limit_drift_per_time: float | None  # limit of C * drift
    limit_prefactor_up: float | None    # None when eta-dependent or unknown
    limit_prefactor_down: float
    limit_b: float | None               # tandem model only
    alpha_eval: float
    gamma_at_eval: float
    g_at_eval: float | None
    drift_per_time_at_eval: float | None
    b_at_eval: float | None
    gamma_gap: float
    prefactor_up_at_eval: float | None
    prefactor_up_limit_gap: float | None


def _twisted_blocks(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(up, local, down) 2x2 blocks of the Model 1 twisted chain."""
    a0 = np.zeros((2, 2))
    a1 = np.zeros((2, 2))
    a2 = np.zeros((2, 2))
    for sigma in (UP, DOWN):
        for target, prob in twisted_kernel(params, Model.MODEL1, (1, sigma)).targets:
            x, sigma2 = target
            (a0 if x == 2 else a1 if x == 1 else a2)[sigma, sigma2] = prob
    return a0, a1, a2


def _escape_absorbing(params: ModelParams, x_max: int) -> np.ndarray:
    """P(never reach level 0) from level 1, by absorbing solve on [0, x_max]."""
    a0, a1, a2 = _twisted_blocks(params)
    n = x_max - 1  # unknowns at levels 1..x_max-1
    size = 2 * n
    eye2 = np.eye(2)
    rows, cols, vals = [], [], []
    rhs = np.zeros(size)
    for i in range(n):
        for si in range(2):
            r = 2 * i + si
            for sj in range(2):
                rows.append(r); cols.append(2 * i + sj); vals.append(eye2[si, sj] - a1[si, sj])
                if i + 1 < n:
                    rows.append(r); cols.append(2 * (i + 1) + sj); vals.append(-a0[si, sj])
                if i - 1 >= 0:
                    rows.append(r); cols.append(2 * (i - 1) + sj); vals.append(-a2[si, sj])
            if i + 1 == n:
                rhs[r] = a0[si, :].sum()  # level x_max counts as escaped
    m = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    v = spla.spsolve(m.tocsc(), rhs)
    return v[0:2]  # v at level 1, (U, D)


def _escape_first_passage(params: ModelParams, tol: float = 1e-14,
                          max_iter: int = 10 ** 6) -> np.ndarray:
    """Same quantity via the minimal solution of G = A2 + A1 G + A0 G^2."""
    a0, a1, a2 = _twisted_blocks(params)
    g = np.zeros((2, 2))
    for _ in range(max_iter):
        g_next = a2 + a1 @ g + a0 @ g @ g
        if np.max(np.abs(g_next - g)) <= tol:
            g = g_next
            break
        g = g_next
    else:
        raise ConvergenceError("first-passage matrix iteration did not converge")
    return 1.0 - g @ np.ones(2)


def escape_probabilities(params: ModelParams, x_max0: int = 1024,
                         tol: float = 1e-10,
                         agreement: float = 1e-8) -> EscapeProbs:
    """P(twisted chain started at (0, sigma) never revisits level 0).

    Computed two ways (absorbing solve with doubling cut; first-passage
    matrix iteration) that must agree within `agreement`.
    """
    up_move = np.array([twisted_kernel(params, Model.MODEL1, (0, s)).prob((1, s))
                        for s in (UP, DOWN)])
    x_max = x_max0
    v_prev = None
    while True:
        v = _escape_absorbing(params, x_max)
        if v_prev is not None and np.max(np.abs(v - v_prev)) <= tol:
            break
        if x_max > 2 ** 17:
            raise ConvergenceError("absorbing escape solve did not stabilize")
        v_prev = v
        x_max *= 2
    h_abs = up_move * v
    h_fp = up_move * _escape_first_passage(params)
    gap = float(np.max(np.abs(h_abs - h_fp)))
    if gap > agreement:
        raise ConvergenceError(f"escape-probability methods disagree by {gap:.3g}")
    return EscapeProbs(up=float(h_abs[UP]), down=float(h_abs[DOWN]),
                       x_max_used=x_max, method_gap=gap)


def eta(params: ModelParams, model: Model, *, table: StationaryTable | None = None,
        samples: int = 200, x_escape: int = 40, step_cap: int = 10 ** 5,
        seed: int = 0) -> EtaEstimate:
    """Boundary constant: sum over the boundary of pi * h * escape probability.

    Model 1 has a two-state boundary, so the value is exact.  The tandem
    boundary is infinite: pi comes from the truncated oracle and the escape
    probabilities from Monte Carlo on the twisted chain, with the standard
    error reported.
    """
    if model is Model.MODEL1:
        pi0 = boundary_vector(params)
        h = harmonic(params, model)
        esc = escape_probabilities(params)
        value = pi0[UP] * esc.up + pi0[DOWN] * h.value((0, DOWN)) * esc.down
        return EtaEstimate(value=float(value), std_error=0.0, method="exact")
    return _eta_model2(params, table=table, samples=samples, x_escape=x_escape,
                       step_cap=step_cap, seed=seed)


def _model2_twisted_move_table(params: ModelParams):
    """Cached twisted move lists keyed by (min(y,1), sigma): (dx, dy, sigma', p)."""
    cache = {}
    for y0 in (0, 1):
        for sigma in (UP, DOWN):
            moves = []
            for target, prob in twisted_kernel(params, Model.MODEL2, (0, y0, sigma)).targets:
                moves.append((target[0], target[1] - y0, target[2], prob))
            cum = np.cumsum([m[3] for m in moves])
            cum[-1] = 1.0
            cache[(y0, sigma)] = (moves, cum)
    return cache


def _eta_model2(params: ModelParams, *, table, samples, x_escape, step_cap,
                seed) -> EtaEstimate:
    if params.p != 1.0:
        raise InvalidParameters("the boundary constant is computed for the tandem only")
    sol = characteristic_roots(params)
    if not params.lam / (params.mu * params.p) < sol.gamma_p:
        raise ArithmeticError("boundary sum not summable: lambda/(mu p) >= gamma_p")
    if table is None:
        table = truncated_stationary(params, Model.MODEL2, x_max=60, y_max=60)
    h = harmonic(params, Model.MODEL2)
    moves = _model2_twisted_move_table(params)
    rng = np.random.default_rng(seed)

    def escape_estimate(y, sigma):
        if y == 0:
            return 0.0, 0.0  # every first move from (0, 0, sigma) revisits level 0
        wins = 0
        for _ in range(samples):
            x, yy, s = 0, y, sigma
            for _ in range(step_cap):
                mv, cum = moves[(min(yy, 1), s)]
                j = int(np.searchsorted(cum, rng.random(), side="right"))
                dx, dy, s = mv[min(j, len(mv) - 1)][:3]
                x += dx
                yy += dy
                if x == 0:
                    break
                if x >= x_escape:
                    wins += 1
                    break
            else:
                wins += 1  # drift is positive; a capped path counts as escaped
        p_hat = wins / samples
        return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / samples)

    y_max = table.y_max
    value = 0.0
    var = 0.0
    weights = []
    for y in range(y_max + 1):
        for sigma in (UP, DOWN):
            weight = table.prob((0, y, sigma)) * h.value((0, y, sigma))
            weights.append(weight)
            if weight == 0.0:
                continue
            p_hat, se = escape_estimate(y, sigma)
            value += weight * p_hat
            var += (weight * se) ** 2
    # geometric-tail gate on the deterministic weights
    tail = [weights[2 * y] + weights[2 * y + 1] for y in range(y_max - 9, y_max + 1)]
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 0]
    if not ratios or max(ratios) >= 1.0:
        raise ArithmeticError("boundary sum tail is not decreasing geometrically; "
                              "enlarge the truncated table")
    rho = max(ratios)
    remainder = tail[-1] * rho / (1.0 - rho)  # escape probability bounded by 1
    return EtaEstimate(value=float(value),
                       std_error=float(math.sqrt(var) + remainder),
                       method="monte-carlo")


def prefactors(params: ModelParams, model: Model, *,
               eta_estimate: EtaEstimate | None = None,
               table: StationaryTable | None = None,
               seed: int = 0) -> TailAsymptotic:
    """Closed-form tail constants of the dominant geometric term."""
    sol = characteristic_roots(params)
    lam, mu, alpha, beta = params.lam, params.mu, params.alpha, params.beta
    if model is Model.MODEL2 and params.p != 1.0:
        return TailAsymptotic(model=model, gamma=sol.gamma_p, prefactor_up=None,
                              prefactor_down=None, eta=None, escape_up=None,
                              escape_down=None, secondary_gamma=sol.gamma_secondary,
                              secondary_weight=None, y_ratio=None,
                              provenance="shape-only")
    drift = horizontal_drift(params, model)
    sqrt_s = math.sqrt(sol.s_p)
    den = lam + beta - mu - alpha + sqrt_s
    g = sol.g_constant
    if model is Model.MODEL1:
        est = eta_estimate or eta(params, model)
        scale = est.value / drift.value
        esc = escape_probabilities(params)
        return TailAsymptotic(model=model, gamma=sol.gamma_p,
                              prefactor_up=scale * den / 2.0 / g,
                              prefactor_down=scale * alpha / g,
                              eta=est.value, escape_up=esc.up, escape_down=esc.down,
                              secondary_gamma=sol.gamma_secondary,
                              secondary_weight=None, y_ratio=None,
                              provenance="closed-form")
    est = eta_estimate or eta(params, model, table=table, seed=seed)
    b = 1.0 - (lam + beta + mu + alpha - sqrt_s) / (2.0 * mu)
    scale = est.value / drift.value * b
    return TailAsymptotic(model=model, gamma=sol.gamma_p,
                          prefactor_up=scale * den / 2.0 / g,
                          prefactor_down=scale * alpha / g,
                          eta=est.value, escape_up=None, escape_down=None,
                          secondary_gamma=sol.gamma_secondary,
                          secondary_weight=None, y_ratio=lam / mu,
                          provenance="closed-form+monte-carlo")


def two_term_tail(params: ModelParams, table: StationaryTable,
                  k_lo: int = 1, k_hi: int | None = None) -> TwoTermFit:
    """Two-term geometric expansion pi(k, Up) ~ w2 gamma_1^k + w3 gamma^k.

    w2 is the closed-form dominant prefactor; w3 has no closed form and is
    fitted by least squares on the residuals at small k.
    """
    asym = prefactors(params, Model.MODEL1)
    gamma1, gamma = asym.gamma, asym.secondary_gamma
    w2 = asym.prefactor_up
    if k_hi is None:
        k_hi = min(40, table.x_max)
    ks = np.arange(k_lo, k_hi + 1)
    pi_up = np.array([table.prob((int(k), UP)) for k in ks])
    resid = pi_up - w2 * gamma1 ** ks
    weights = gamma ** ks
    w3 = float(np.dot(resid, weights) / np.dot(weights, weights))
    # diagnostics restricted to k where the second term is resolvable
    resolvable = np.abs(w3) * weights > 1e-10 * w2 * gamma1 ** ks
    if resolvable.any():
        pred = w2 * gamma1 ** ks + w3 * weights
        max_rel = float(np.max(np.abs((pi_up - pred) / pi_up)[resolvable]))
        r = resid[resolvable]
        ratios = r[1:] / r[:-1] if len(r) > 2 and np.all(r != 0) else np.array([])
        geometric_ok = bool(len(ratios) == 0
                            or abs(np.median(ratios) - gamma) <= 0.2 * gamma)
    else:
        max_rel = float("nan")
        geometric_ok = False
    return TwoTermFit(w2=w2, w3=w3, k_window=(k_lo, k_hi),
                      max_relative_residual=max_rel, geometric_ok=geometric_ok)


def alpha_limits(lam: float, mu: float, beta: float, p: float = 1.0,
                 model: Model = Model.MODEL1, alpha_eval: float = 1e-6,
                 evaluate_prefactor: bool = False) -> AlphaLimits:
    """Vanishing-breakdown-rate limits, with numeric evaluation at alpha_eval."""
    split = mu * p - (lam + beta)
    if split == 0.0:
        raise InvalidParameters("degenerate case mu*p = lambda+beta; limit split undefined")
    below = split < 0.0
    limit_gamma = lam / (mu * p) if below else lam / (lam + beta)
    limit_g = limit_drift = limit_c_up = None
    limit_b = None
    if p == 1.0:
        if below:
            limit_g = lam + beta - mu
            limit_drift = mu - lam
        else:
            limit_g = beta * (mu - lam - beta) / (lam + beta)
            limit_drift = lam + beta
        limit_c_up = None if below else 0.0  # below: eta-dependent, checked numerically
        if model is Model.MODEL2:
            limit_b = 0.0 if below else (mu - lam - beta) / mu
    pe = make_params(lam, mu, alpha_eval, beta, p=p, model=model)
    sol = characteristic_roots(pe)
    g_at = sol.g_constant
    drift_at = b_at = None
    if p == 1.0:
        drift_at = horizontal_drift(pe, model).per_time
        if model is Model.MODEL2:
            b_at = 1.0 - (lam + beta + mu + alpha_eval - math.sqrt(sol.s_p)) / (2.0 * mu)
    c_up_at = c_up_gap = None
    if evaluate_prefactor and model is Model.MODEL1:
        asym = prefactors(pe, Model.MODEL1)
        c_up_at = asym.prefactor_up
        if below:
            target = asym.eta * pe.C / (mu - lam)
            c_up_gap = abs(c_up_at - target) / target
        else:
            c_up_gap = abs(c_up_at)  # the limit is 0; report the raw magnitude
    return AlphaLimits(
        case="service_below_lam_beta" if below else "service_above_lam_beta",
        limit_gamma=limit_gamma, limit_g=limit_g, limit_drift_per_time=limit_drift,
        limit_prefactor_up=limit_c_up, limit_prefactor_down=0.0, limit_b=limit_b,
        alpha_eval=alpha_eval, gamma_at_eval=sol.gamma_p, g_at_eval=g_at,
        drift_per_time_at_eval=drift_at, b_at_eval=b_at,
        gamma_gap=abs(sol.gamma_p - limit_gamma) / limit_gamma,
        prefactor_up_at_eval=c_up_at, prefactor_up_limit_gap=c_up_gap)


def mm1_comparison(params: ModelParams) -> Mm1Comparison:
    """Match a plain M/M/1 queue with the same effective rates and compare tails."""
    lam, mu, alpha, beta = params.lam, params.mu, params.alpha, params.beta
    sol = characteristic_roots(params)
    mm1_ratio = (alpha + beta) / beta * lam / mu
    return Mm1Comparison(gamma_1=sol.gamma_p, mm1_ratio=mm1_ratio,
                         dominance=sol.gamma_p >= mm1_ratio,
                         lambda0=lam, mu0=beta / (alpha + beta) * mu)


def tail_fit(table: StationaryTable, sigma: int, k_min: int, k_max: int,
             y: int | None = None) -> TailFit:
    """Log-linear least squares of pi over a window of levels."""
    ks, logs = [], []
    for k in range(k_min, k_max + 1):
        state = (k, sigma) if table.y_max is None else (k, y if y is not None else 0, sigma)
        value = table.prob(state)
        if value > 1e-300:
            ks.append(k)
            logs.append(math.log(value))
    if len(ks) < 5:
        raise ValueError(f"fit window holds {len(ks)} usable points; need at least 5")
    slope, intercept = np.polyfit(ks, logs, 1)
    deviation = float(np.max(np.abs(1.0 - np.exp(slope * np.array(ks) + intercept - np.array(logs)))))
    return TailFit(gamma_est=float(math.exp(slope)), log_prefactor_est=float(intercept),
                   k_window=(k_min, k_max), max_relative_deviation=deviation)


def two_geometric_fit(table: StationaryTable, sigma: int, k_min: int,
                      k_max: int) -> TwoGeometricFit:
    """Model-free fit of pi(k, sigma) = w a^k + v b^k on a window of levels.

    A sum of two geometrics satisfies a linear two-step recurrence; its
    coefficients are fitted by least squares (rows scaled to equalize the
    widely varying magnitudes) and the rates recovered as the roots.
    """
    ks = np.arange(k_min, k_max + 1)
    pi = np.array([table.prob((int(k), sigma)) for k in ks])
    if np.any(pi <= 0.0) or len(ks) < 6:
        raise ValueError("fit window needs at least 6 strictly positive entries")
    rows = np.column_stack([pi[1:-1], pi[:-2]])
    rhs = pi[2:]
    scale = 1.0 / rhs
    c1, c2 = np.linalg.lstsq(rows * scale[:, None], rhs * scale, rcond=None)[0]
    roots = np.roots([1.0, -c1, -c2])
    if np.iscomplexobj(roots) and np.max(np.abs(roots.imag)) > 1e-12 * np.max(np.abs(roots)):
        raise ArithmeticError("recurrence roots are not real; window is not two-geometric")
    roots = np.real(roots)
    basis = np.column_stack([roots[0] ** ks, roots[1] ** ks])
    weights = np.linalg.lstsq(basis / pi[:, None], np.ones_like(pi), rcond=None)[0]
    dominant = float(roots[int(np.argmax(np.abs(weights)))])
    return TwoGeometricFit(rates=(float(roots[0]), float(roots[1])),
                           weights=(float(weights[0]), float(weights[1])),
                           dominant_rate=dominant, k_window=(k_min, k_max))


def rs_rd_stationary(params: ModelParams, x_max: int, y_max: int) -> StationaryTable:
    """Closed-form product stationary law of the rerouting comparison network."""
    lam, mu, alpha, beta, p = params.lam, params.mu, params.alpha, params.beta, params.p
    r = lam / (mu * p)
    if r >= 1.0:
        raise InvalidParameters("product form requires lambda < mu * p")
    norm = (1.0 - r) ** 2
    share = {UP: beta / (alpha + beta), DOWN: alpha / (alpha + beta)}

    def pi(x, y, sigma):
        return norm * r ** (x + y) * share[sigma]

    entries = {(x, y, sigma): pi(x, y, sigma)
               for x in range(x_max + 1) for y in range(y_max + 1)
               for sigma in (UP, DOWN)}
    # global-balance residual of the closed form against the actual kernel;
    # inflow sources one step outside the window are evaluated in closed form
    inflow = {s: 0.0 for s in entries}
    for x in range(x_max + 2):
        for y in range(y_max + 2):
            for sigma in (UP, DOWN):
                src = (x, y, sigma)
                weight = pi(x, y, sigma)
                for target, prob in rs_rd_kernel(params, src).targets:
                    if target in inflow:
                        inflow[target] += weight * prob
    residual = max(abs(inflow[s] - entries[s]) for s in entries
                   if s[0] <= x_max and s[1] <= y_max)
    tail = 1.0 - (1.0 - r ** (x_max + 1)) * (1.0 - r ** (y_max + 1))
    return StationaryTable(model=Model.RSRD, entries=entries, x_max=x_max,
                           y_max=y_max, residual=residual, tail_mass_bound=tail,
                           truncation_warning=tail > 1e-8)
