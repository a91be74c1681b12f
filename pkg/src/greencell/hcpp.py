"""Closed-form moments of the hard-core (Matern II) process.

First/second product densities, the geometric kernels they depend on, and
the nearest-active-station distance PDF with its normalization root-solve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import NormalizationFitError, ParameterError


@dataclass(frozen=True)
class HcppParams:
    """Parent intensity and hard-core distance of the thinned process."""

    lambda_b: float  # parent PPP intensity, m^-2
    delta: float  # minimum distance between retained points, m

    def __post_init__(self) -> None:
        if not self.lambda_b > 0:
            raise ParameterError(f"lambda_b must be > 0, got {self.lambda_b}")
        if not self.delta >= 0:
            raise ParameterError(f"delta must be >= 0, got {self.delta}")


def zeta1(p: HcppParams) -> float:
    """Retained (active) density: (1 - exp(-lambda_b*pi*delta^2)) / (pi*delta^2).

    The delta -> 0 limit is the parent intensity itself.
    """
    a = np.pi * p.delta**2
    x = p.lambda_b * a
    if x < 1e-8:
        # series of (1 - e^-x)/x to avoid 0/0
        return p.lambda_b * (1.0 - x / 2.0 + x**2 / 6.0)
    return float(-np.expm1(-x) / a)


def union_area(r, delta: float):
    """Area of the union of two delta-disks whose centers are ``r`` apart."""
    if delta <= 0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    r = np.asarray(r, float)
    if np.any(r < 0):
        raise ParameterError("r must be >= 0")
    rc = np.minimum(r, 2.0 * delta)
    v = (
        2.0 * np.pi * delta**2
        - 2.0 * delta**2 * np.arccos(rc / (2.0 * delta))
        + rc * np.sqrt(np.maximum(delta**2 - rc**2 / 4.0, 0.0))
    )
    out = np.where(r >= 2.0 * delta, 2.0 * np.pi * delta**2, v)
    return out if out.ndim else float(out)


def phi(r, p: HcppParams):
    """Pair-retention kernel: probability density factor that two parent points
    at distance ``r`` both survive the thinning.  Zero inside the hard core."""
    r = np.asarray(r, float)
    a = np.pi * p.delta**2
    if p.delta == 0:
        out = np.ones_like(r)
        return out if out.ndim else float(out)
    v = np.asarray(union_area(r, p.delta), float)
    lam = p.lambda_b
    with np.errstate(divide="ignore", invalid="ignore"):
        num = 2.0 * v * -np.expm1(-lam * a) - 2.0 * a * -np.expm1(-lam * v)
        den = lam**2 * a * v * (v - a)
        val = num / den
    out = np.where(r > p.delta, val, 0.0)
    return out if out.ndim else float(out)


def zeta2(r, p: HcppParams):
    """Second-order product density of the thinned process (m^-4)."""
    out = p.lambda_b**2 * np.asarray(phi(r, p), float)
    return out if out.ndim else float(out)


def excluded_area(r, delta: float):
    """Area term governing the nearest-active-station distance model.

    Zero for r <= delta/2, continuous and nondecreasing beyond.
    """
    if delta <= 0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    r = np.asarray(r, float)
    if np.any(r < 0):
        raise ParameterError("r must be >= 0")
    with np.errstate(invalid="ignore"):
        x = np.clip(delta / (2.0 * np.where(r > 0, r, 1.0)), 0.0, 1.0)
        m = (
            np.pi * r**2
            - (2.0 * np.arcsin(x) + np.arccos(x)) * r**2
            + delta * np.sqrt(np.maximum(r**2 - delta**2 / 4.0, 0.0))
        )
    out = np.where(r > delta / 2.0, m, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class NearestPdfModel:
    """Fitted nearest-active-station distance PDF for the hard-core process.

    ``lambda_star_fit`` is the normalization constant making the PDF proper;
    it is distinct from the active density zeta1 (both are reported).
    """

    params: HcppParams
    lambda_star_fit: float

    @property
    def prefactor(self) -> float:
        p = self.params
        if p.delta == 0:
            return 2.0 * np.pi * p.lambda_b
        return 2.0 * -np.expm1(-p.lambda_b * np.pi * p.delta**2) / p.delta**2

    def pdf(self, r):
        r = np.asarray(r, float)
        out = (
            self.prefactor
            * r
            * np.exp(-self.lambda_star_fit * np.asarray(excluded_area_or_disk(r, self.params.delta), float))
        )
        return out if out.ndim else float(out)

    def cdf(self, r: float) -> float:
        val, _ = quad(self.pdf, 0.0, r, limit=200)
        return float(val)

    def support_radius(self, tail: float = 1e-9) -> float:
        """Radius beyond which the remaining PDF mass is below ``tail``."""
        r = self.params.delta if self.params.delta > 0 else 1.0
        while self.cdf(r) < 1.0 - tail:
            r *= 1.5
            if r > 1e7:
                break
        return r


def excluded_area_or_disk(r, delta: float):
    """excluded_area for delta > 0; the half-disk limit pi r^2 / 2 at delta = 0."""
    if delta > 0:
        return excluded_area(r, delta)
    r = np.asarray(r, float)
    out = np.pi * r**2 / 2.0
    return out if out.ndim else float(out)


def _pdf_integral(p: HcppParams, lam_star: float) -> float:
    """Total mass of the (unnormalized) nearest-distance PDF for a trial
    normalization constant."""
    model = NearestPdfModel(p, lam_star)
    # integrand decays like exp(-lam* pi r^2 / 2); truncate where negligible
    r_hi = np.sqrt(80.0 / (lam_star * np.pi / 2.0)) if lam_star > 0 else np.inf
    r_hi = max(r_hi, 4.0 * p.delta + 1.0)
    pts = [p.delta / 2.0, p.delta, 2.0 * p.delta] if p.delta > 0 else None
    pts = [x for x in pts if x < r_hi] if pts else None
    val, _ = quad(model.pdf, 0.0, r_hi, points=pts, limit=400, epsabs=1e-12, epsrel=1e-12)
    return float(val)


def fit_lambda_star(p: HcppParams, tol: float = 1e-9) -> float:
    """Normalization constant of the nearest-distance PDF, by bracketed root
    solve of (total mass - 1).  Strictly decreasing in the constant, so the
    bracket is guaranteed to work whenever it straddles the root."""
    lo, hi = 1e-12, 10.0 * p.lambda_b
    f_lo = _pdf_integral(p, lo) - 1.0
    f_hi = _pdf_integral(p, hi) - 1.0
    if not (f_lo > 0 > f_hi):
        raise NormalizationFitError(
            f"root not bracketed in [{lo:g}, {hi:g}]: N(lo)={f_lo:g}, N(hi)={f_hi:g} "
            f"for lambda_b={p.lambda_b:g}, delta={p.delta:g}"
        )
    root = brentq(lambda lam: _pdf_integral(p, lam) - 1.0, lo, hi, xtol=1e-18, rtol=1e-14)
    if abs(_pdf_integral(p, root) - 1.0) > tol:
        raise NormalizationFitError(f"converged root misses tolerance {tol:g}")
    return float(root)


def fit_nearest_model(p: HcppParams) -> NearestPdfModel:
    return NearestPdfModel(p, fit_lambda_star(p))


def ppp_nearest_pdf(r, intensity: float):
    """Rayleigh contact PDF of a Poisson process: 2 pi lambda r exp(-lambda pi r^2)."""
    if not intensity > 0:
        raise ParameterError(f"intensity must be > 0, got {intensity}")
    r = np.asarray(r, float)
    out = 2.0 * np.pi * intensity * r * np.exp(-intensity * np.pi * r**2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RayleighNearestModel:
    """Nearest-distance model for a stationary Poisson set of given intensity."""

    intensity: float

    def pdf(self, r):
        return ppp_nearest_pdf(r, self.intensity)

    def cdf(self, r: float) -> float:
        return float(-np.expm1(-self.intensity * np.pi * r**2))

    def support_radius(self, tail: float = 1e-9) -> float:
        return float(np.sqrt(-np.log(tail) / (self.intensity * np.pi)))
