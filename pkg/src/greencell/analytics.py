"""Numerical evaluation of the network's analytic performance metrics.

Average interference, rate lower bound, transmit power, energy efficiency
and coverage efficiency, for three switch-off strategies:

* ``ppp``     -- every station stays on (Poisson geometry, parent density);
* ``matern``  -- hard-core switch-off (dependent thinning, repulsive);
* ``random``  -- independent switch-off matched to the hard-core density.

The interference integral diverges as printed whenever an interferer could
sit on top of the user; the default ``exclusion-ball`` regularization
integrates only over interferers no closer than the serving station, which
is exactly what nearest-station association realizes in the simulator.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import hcpp
from .channel import RadioParams, ShadowingModel, TrafficModel
from .errors import (
    InterferenceDivergenceError,
    MonotonicityError,
    ParameterError,
)
from .hcpp import HcppParams

STRATEGIES = ("ppp", "matern", "random")
REGULARIZATIONS = ("exclusion-ball", "min-distance", "none")

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(96)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL32_NODES, _GL32_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class Scenario:
    """Immutable description of one network configuration."""

    hcpp: HcppParams
    radio: RadioParams = RadioParams()
    shadowing: ShadowingModel = ShadowingModel(6.0)
    traffic: TrafficModel = TrafficModel()
    ues_per_cell: int = 5
    strategy: str = "matern"
    regularization: str = "exclusion-ball"
    min_distance_eps: float = 1.0
    sinr_shadow_weight: str = "mean-square"  # or "unit"
    random_mode: str = "retain"  # 'retain': keep prob = matched density ratio

    def __post_init__(self) -> None:
        if self.ues_per_cell < 0:
            raise ParameterError("ues_per_cell must be >= 0")
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"strategy must be one of {STRATEGIES}")
        if self.regularization not in REGULARIZATIONS:
            raise ParameterError(f"regularization must be one of {REGULARIZATIONS}")
        if self.sinr_shadow_weight not in ("mean-square", "unit"):
            raise ParameterError("sinr_shadow_weight must be 'mean-square' or 'unit'")
        if self.random_mode not in ("retain", "remove"):
            raise ParameterError("random_mode must be 'retain' or 'remove'")

    def with_strategy(self, strategy: str) -> "Scenario":
        return replace(self, strategy=strategy)

    @property
    def retain_probability(self) -> float:
        """Retention probability of the matched random strategy."""
        p = hcpp.zeta1(self.hcpp) / self.hcpp.lambda_b
        if self.random_mode == "remove":
            p = 1.0 - p
        return p


class InversionResult(NamedTuple):
    r: float
    clipped: bool


def _panelize(edges, nodes, weights):
    """Gauss-Legendre nodes/weights on a sequence of contiguous panels."""
    edges = np.asarray(edges, float)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


class AnalyticEngine:
    """Evaluates the closed-form metrics for one scenario.

    All methods are pure; a few per-scenario tables (the SINR-vs-distance
    grid and the fitted nearest-distance model) are computed lazily once
    and then read-only.
    """

    #: inversion grid for SINR(r); log-spaced
    R_GRID_LO = 0.5
    R_GRID_HI = 6000.0
    R_GRID_N = 400

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    # ---- strategy-dependent geometry -------------------------------------

    @cached_property
    def active_density(self) -> float:
        """First moment of the active-station process (lambda_star density)."""
        s = self.scenario
        if s.strategy == "ppp":
            return s.hcpp.lambda_b
        if s.strategy == "matern":
            return hcpp.zeta1(s.hcpp)
        return s.retain_probability * s.hcpp.lambda_b

    def second_moment(self, u):
        """Radial second-order product density of the active process."""
        s = self.scenario
        if s.strategy == "matern":
            return hcpp.zeta2(u, s.hcpp)
        u = np.asarray(u, float)
        out = np.full_like(u, self.active_density**2)
        return out if out.ndim else float(out)

    @cached_property
    def _hard_core(self) -> float:
        """Radius inside which the second moment vanishes (0 for Poisson-like)."""
        return self.scenario.hcpp.delta if self.scenario.strategy == "matern" else 0.0

    @cached_property
    def nearest_model(self):
        s = self.scenario
        if s.strategy == "matern":
            return hcpp.fit_nearest_model(s.hcpp)
        return hcpp.RayleighNearestModel(self.active_density)

    @cached_property
    def lambda_star_fit(self) -> float:
        if self.scenario.strategy == "matern":
            return self.nearest_model.lambda_star_fit
        return self.active_density

    @cached_property
    def k_ue(self) -> float:
        """Average UEs per active cell (offloading-conserving)."""
        s = self.scenario
        return s.ues_per_cell * s.hcpp.lambda_b / self.active_density

    # ---- spatial integrals -----------------------------------------------

    def _radial_integral(self, r, p_exp: float):
        """Integral of second_moment(|x|) * |x + x_int|^(-p_exp) over the plane,
        with |x_int| = r, under the scenario's regularization.  Geometry is
        centered on the serving station; ``u`` is the interferer's distance to
        it and ``dist`` its distance to the user."""
        reg = self.scenario.regularization
        if reg == "exclusion-ball":
            return self._radial_integral_exclusion(np.atleast_1d(np.asarray(r, float)), p_exp)
        return np.array(
            [self._radial_integral_quad(float(ri), p_exp) for ri in np.atleast_1d(np.asarray(r, float))]
        )

    def _radial_integral_exclusion(self, r: np.ndarray, p_exp: float) -> np.ndarray:
        if np.any(r <= 0):
            raise ParameterError("serving distance must be > 0")
        return np.array([self._exclusion_single(float(ri), p_exp) for ri in r])

    def _angular(self, u: np.ndarray, r: float, psi_min: np.ndarray, p_exp: float) -> np.ndarray:
        """2 * integral over psi in [psi_min, pi] of dist^-p, per u node."""
        half = 0.5 * (np.pi - psi_min)
        mid = 0.5 * (np.pi + psi_min)
        psi = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        wpsi = half[:, None] * _GL_WEIGHTS[None, :]
        dist_sq = u[:, None] ** 2 + r**2 - 2.0 * u[:, None] * r * np.cos(psi)
        return 2.0 * (wpsi * dist_sq ** (-p_exp / 2.0)).sum(axis=1)

    def _exclusion_single(self, r: float, p_exp: float) -> float:
        """Plane integral with the exclusion ball, serving-station centered.

        The allowed angular sector closes with a square-root law at u = 2r,
        so that stretch is integrated in the substituted variable
        u = 2r cos(beta), which is smooth; beyond 2r the full circle is
        allowed and plain geometric panels suffice.
        """
        delta = self._hard_core
        u_cut = max(30.0 * r, 30.0 * delta, 100.0)
        total = 0.0
        if delta < 2.0 * r:
            # region A: exclusion active, u in (delta, 2r)
            b_hi = np.arccos(delta / (2.0 * r)) if delta > 0 else np.pi / 2.0
            edges = {0.0, b_hi}
            for u_split in (r, delta, 1.5 * delta, 2.0 * delta):
                if 0.0 < u_split < 2.0 * r:
                    edges.add(float(np.arccos(u_split / (2.0 * r))))
            beta, wb = _panelize(sorted(e for e in edges if e <= b_hi), _GL32_NODES, _GL32_WEIGHTS)
            u = 2.0 * r * np.cos(beta)
            jac = 2.0 * r * np.sin(beta)
            k = np.asarray(self.second_moment(u), float)
            total += float((wb * u * k * jac * self._angular(u, r, beta, p_exp)).sum())
        # region B: full circle, u in (max(delta, 2r), u_cut)
        lo = max(delta, 2.0 * r)
        edges = [lo]
        for u_split in (1.5 * delta, 2.0 * delta):
            if lo < u_split < u_cut:
                edges.append(u_split)
        g = edges[-1]
        while g < u_cut:
            g = min(g * 1.7, u_cut)
            edges.append(g)
        u, wu = _panelize(sorted(set(edges)), _GL32_NODES, _GL32_WEIGHTS)
        k = np.asarray(self.second_moment(u), float)
        total += float((wu * u * k * self._angular(u, r, np.zeros_like(u), p_exp)).sum())
        # analytic tail beyond u_cut with second-order offset correction
        tail = (
            float(self.second_moment(u_cut * 2.0))
            * 2.0
            * np.pi
            * u_cut ** (2.0 - p_exp)
            / (p_exp - 2.0)
            * (1.0 + p_exp * (p_exp - 2.0) * r**2 / (4.0 * u_cut**2))
        )
        return total + tail

    def _radial_integral_quad(self, r: float, p_exp: float) -> float:
        """Adaptive-quadrature path for the 'none' and 'min-distance' modes."""
        s = self.scenario
        delta = self._hard_core
        if s.regularization == "none":
            if delta == 0:
                raise InterferenceDivergenceError(
                    "unregularized interference integral diverges for a Poisson-type "
                    "second moment (an interferer may coincide with the user)"
                )
            if r >= delta:
                raise InterferenceDivergenceError(
                    f"unregularized interference integral diverges for serving distance "
                    f"{r:g} m >= hard-core distance {delta:g} m"
                )
            eps = 0.0
        else:
            eps = s.min_distance_eps
            if eps <= 0:
                raise ParameterError("min_distance_eps must be > 0")

        def inner(u: float) -> float:
            def ang(psi: float) -> float:
                d = np.sqrt(u**2 + r**2 - 2.0 * u * r * np.cos(psi))
                return max(d, eps) ** (-p_exp)

            val, _ = quad(ang, 0.0, np.pi, limit=200)
            return 2.0 * u * float(self.second_moment(u)) * val

        u_cut = max(30.0 * r, 30.0 * delta, 100.0)
        pts = [x for x in (delta, 2.0 * delta, r, 2.0 * r) if 0 < x < u_cut]
        val, _ = quad(inner, delta, u_cut, points=sorted(set(pts)), limit=400)
        tail = float(self.second_moment(u_cut * 2.0)) * 2.0 * np.pi * u_cut ** (2.0 - p_exp) / (
            p_exp - 2.0
        )
        return float(val) + tail

    # ---- metrics ---------------------------------------------------------

    def interference_base(self, r):
        """Average interference divided by M^2 (kept antenna-free so that the
        antenna count cancels bit-exactly in the noise-free SINR)."""
        s = self.scenario
        j = self._radial_integral(r, 2.0 * s.radio.alpha)
        base = s.radio.p_f * s.radio.p_p * s.shadowing.moment(2) / self.active_density * j
        return base if np.ndim(r) else float(base[0])

    def avg_interference(self, r_int: float) -> float:
        """Average interference power seen at serving distance ``r_int``."""
        if r_int <= 0:
            raise ParameterError("r_int must be > 0")
        m2 = float(self.scenario.radio.antennas_m) ** 2
        return m2 * self.interference_base(r_int)

    def _rate_from_base(self, r: np.ndarray, base: np.ndarray) -> np.ndarray:
        """Jensen lower bound of the mean achievable rate at distances ``r``,
        averaging log2(1 + SINR(omega)) over the shadowing distribution with
        the mean interference in the denominator."""
        s = self.scenario
        m2 = float(s.radio.antennas_m) ** 2
        num = m2 * (s.radio.p_f * s.radio.p_p * r ** (-2.0 * s.radio.alpha))
        den = m2 * base + s.radio.noise_power
        c = num / den
        ls = s.shadowing.log_std
        if ls == 0:
            return np.log1p(c) / np.log(2.0)
        shift = np.sqrt(2.0) * ls * _GH_NODES  # s-values; omega = e^s
        expo = 2.0 * shift[None, :] + np.log(c)[:, None]
        vals = np.logaddexp(0.0, expo)  # ln(1 + omega^2 c)
        return (vals @ _GH_WEIGHTS) / np.sqrt(np.pi) / np.log(2.0)

    def rate_lower_bound(self, r_int: float) -> float:
        if r_int <= 0:
            raise ParameterError("r_int must be > 0")
        r = np.asarray([r_int], float)
        return float(self._rate_from_base(r, self.interference_base(r))[0])

    @cached_property
    def _serving_grid(self):
        """Quadrature nodes/weights against the serving-distance PDF."""
        model = self.nearest_model
        r_sup = model.support_radius()
        delta = self._hard_core
        edges = sorted({0.0, delta / 2.0, delta, 2.0 * delta, r_sup / 2.0, r_sup} - {0.0})
        edges = [0.0] + [e for e in edges if e < r_sup] + [r_sup]
        r, w = _panelize(np.unique(edges), _GL32_NODES, _GL32_WEIGHTS)
        f = np.asarray(model.pdf(r), float)
        return r, w * f

    def avg_cell_rate(self) -> float:
        """Per-cell sum rate: K times the serving-distance average of the
        rate lower bound."""
        if self.scenario.ues_per_cell == 0:
            return 0.0
        r, wf = self._serving_grid
        base = self.interference_base(r)
        rates = self._rate_from_base(r, base)
        return float(self.k_ue * (wf * rates).sum())

    def avg_tx_power(self) -> float:
        """Mean per-station transmit power of the precoded downlink."""
        s = self.scenario
        if s.radio.alpha <= 2.0:
            raise InterferenceDivergenceError(
                f"transmit-power integral diverges for alpha={s.radio.alpha} <= 2"
            )
        if self.scenario.ues_per_cell == 0:
            return 0.0
        r, wf = self._serving_grid
        j = self._radial_integral(r, s.radio.alpha) / self.active_density
        mean_j = float((wf * j).sum())
        return s.radio.antennas_m * s.radio.p_p * self.k_ue * s.shadowing.moment(1) * mean_j

    def bs_power(self, p_tx: float | None = None) -> float:
        """Linear station power model: amplifier draw plus RF chains plus static."""
        s = self.scenario
        if p_tx is None:
            p_tx = self.avg_tx_power()
        if p_tx < 0:
            raise ParameterError("p_tx must be >= 0")
        return p_tx / s.radio.eta + s.radio.antennas_m * s.radio.p_rf_chain + s.radio.p_sta

    def energy_efficiency(self) -> float:
        """Area rate over area power; the active density cancels, leaving the
        per-cell sum rate over the per-station power draw."""
        return self.avg_cell_rate() / self.bs_power()

    # ---- SINR-vs-distance and coverage -----------------------------------

    @cached_property
    def _sinr_weight_sq(self) -> float:
        if self.scenario.sinr_shadow_weight == "mean-square":
            return self.scenario.shadowing.moment(2)
        return 1.0

    def _sinr_from_base(self, r: np.ndarray, base: np.ndarray) -> np.ndarray:
        s = self.scenario
        m2 = float(s.radio.antennas_m) ** 2
        num = m2 * (s.radio.p_f * s.radio.p_p * self._sinr_weight_sq * r ** (-2.0 * s.radio.alpha))
        return num / (m2 * base + s.radio.noise_power)

    def sinr_of_distance(self, r):
        """Mean-interference SINR as a deterministic function of distance."""
        r_arr = np.atleast_1d(np.asarray(r, float))
        if np.any(r_arr <= 0):
            raise ParameterError("r must be > 0")
        out = self._sinr_from_base(r_arr, self.interference_base(r_arr))
        return out if np.ndim(r) else float(out[0])

    @cached_property
    def _sinr_grid(self):
        r = np.geomspace(self.R_GRID_LO, self.R_GRID_HI, self.R_GRID_N)
        gamma = self._sinr_from_base(r, self.interference_base(r))
        if not np.all(np.diff(gamma) < 0):
            raise MonotonicityError(
                "SINR-vs-distance is not strictly decreasing on the grid; "
                "inversion undefined"
            )
        return r, gamma

    def invert_sinr(self, gamma: float) -> InversionResult:
        """Distance at which the mean-interference SINR equals ``gamma``."""
        r_grid, g_grid = self._sinr_grid
        if gamma >= g_grid[0]:
            return InversionResult(float(r_grid[0]), clipped=gamma > g_grid[0])
        if gamma <= g_grid[-1]:
            return InversionResult(float(r_grid[-1]), clipped=gamma < g_grid[-1])
        k = int(np.searchsorted(-g_grid, -gamma))
        lo, hi = float(r_grid[k - 1]), float(r_grid[k])

        def f(r):
            return float(self.sinr_of_distance(r)) - gamma

        root = brentq(f, lo, hi, xtol=1e-12, rtol=1e-13)
        if abs(float(self.sinr_of_distance(root)) - gamma) > 1e-9 * gamma:
            raise MonotonicityError("SINR inversion failed to polish")
        return InversionResult(float(root), clipped=False)

    def _sinr_slope(self, r: float) -> float:
        """d(SINR)/dr by central finite difference."""
        h = 1e-5 * r
        lo, hi = self.sinr_of_distance(r - h), self.sinr_of_distance(r + h)
        return (float(hi) - float(lo)) / (2.0 * h)

    def coverage_efficiency(self, rho: float, method: str = "cross-check") -> float:
        """Probability that the mean-interference rate exceeds ``rho``.

        ``method``: 'cdf' integrates the serving-distance PDF up to the
        threshold distance; 'change-of-variables' integrates the SINR density
        over the threshold-exceeding range; 'cross-check' (default) computes
        both and asserts agreement to 1e-6.
        """
        if rho < 0:
            raise ParameterError("rho must be >= 0")
        gamma_t = float(2.0**rho - 1.0)
        r_grid, g_grid = self._sinr_grid
        if gamma_t <= g_grid[-1]:
            # below the weakest grid SINR: (numerically) full support covered
            return min(float(self.nearest_model.cdf(float(r_grid[-1]))), 1.0)
        if gamma_t >= g_grid[0]:
            return float(self.nearest_model.cdf(float(r_grid[0])))
        r_star = self.invert_sinr(gamma_t).r

        def cdf_form() -> float:
            return min(float(self.nearest_model.cdf(r_star)), 1.0)

        def cov_form() -> float:
            gamma_hi = float(g_grid[0])
            pdf = self.nearest_model.pdf

            def integrand(lng: float) -> float:
                g = np.exp(lng)
                r = self.invert_sinr(float(g)).r
                return float(pdf(r)) / abs(self._sinr_slope(r)) * g

            val, _ = quad(
                integrand, np.log(gamma_t), np.log(gamma_hi), limit=300, epsabs=1e-9, epsrel=1e-9
            )
            return min(float(val) + float(self.nearest_model.cdf(float(r_grid[0]))), 1.0)

        if method == "cdf":
            return cdf_form()
        if method == "change-of-variables":
            return cov_form()
        a, b = cdf_form(), cov_form()
        if abs(a - b) > 1e-6:
            raise MonotonicityError(
                f"coverage paths disagree: cdf={a:.9f}, change-of-variables={b:.9f}"
            )
        return a

    def coverage_efficiency_traffic(self, mode: str = "at-mean") -> float:
        """Coverage against the traffic model: either at the mean demand or
        marginalized over the demand distribution."""
        t = self.scenario.traffic
        if mode == "at-mean":
            return self.coverage_efficiency(t.mean(), method="cdf")
        if mode != "marginalized":
            raise ParameterError("mode must be 'at-mean' or 'marginalized'")

        # substitute v = ccdf(rho): rho = rho_min * v**(-1/theta), v in (0, 1]
        def integrand(v: float) -> float:
            rho = t.rho_min * v ** (-1.0 / t.theta)
            return self.coverage_efficiency(rho, method="cdf")

        val, _ = quad(integrand, 0.0, 1.0, limit=200, epsabs=1e-8, epsrel=1e-7)
        return min(float(val), 1.0)
