"""
Koefficientformler och anpassning av entropiserier mot L^{d-1} ln L.

Denna modul innehåller den ledande koefficienten Σ₀ för den fria gasen,
skrankorna Σ_l och Σ_u, minstakvadratanpassning mot basen
{L^{d-1} ln L, L^{d-1}, 1}, en dyadisk differensskattning som är okänslig
för konstanter samt beslutet om logaritmbas.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, stats
from scipy.special import gamma

from .errors import DomainError, PreconditionError
from .free_kernel import EnergyParams
from .restricted_projection import DomainSpec

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 4

# Σ_u = UPPER_FACTOR·Σ₀
UPPER_FACTOR = 2508.0

# Största relativa skillnad mellan anpassning och dyadisk skattning
METHOD_AGREEMENT = 0.10

# Tolerans när logaritmbasen bestäms
LOG_BASE_TOLERANCE = 0.15


@dataclass
class ScalingSeries:
    """Entropin S samplad över strikt växande L."""

    L: np.ndarray
    S: np.ndarray
    dimension: int
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=float).ravel()
        self.S = np.asarray(self.S, dtype=float).ravel()
        if self.L.shape != self.S.shape:
            raise DomainError("L och S måste ha samma längd")
        if self.L.size and (self.L.min() <= 0 or np.any(np.diff(self.L) <= 0)):
            raise DomainError("L måste vara positiva och strikt växande")
        if self.dimension < 1:
            raise DomainError("Dimensionen måste vara positiv")

    def __len__(self) -> int:
        return int(self.L.size)

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, Any]], dimension: int, column: str = "S",
                  **metadata) -> "ScalingSeries":
        """
        Bygg en serie från resultatrader, sorterade på L.

        Rader vars status inte är "ok" eller som saknar värden hoppas över.
        """
        pairs = sorted(
            (float(r["L"]), float(r[column])) for r in rows
            if r.get("status", "ok") == "ok" and r.get(column) is not None and np.isfinite(float(r[column]))
        )
        if not pairs:
            return cls(np.empty(0), np.empty(0), dimension, dict(metadata))
        L, S = zip(*pairs)
        return cls(np.array(L), np.array(S), dimension, dict(metadata))

    def scaled(self, factor: float) -> "ScalingSeries":
        """Samma serie med S multiplicerad med factor."""
        return ScalingSeries(self.L.copy(), factor * self.S, self.dimension, dict(self.metadata))


@dataclass
class FitResult:
    """Anpassad koefficient för L^{d-1} ln L."""

    sigma_hat: float
    area_coeff: float
    residual_rms: float
    method: str
    constant: float = 0.0
    points: int = 0
    pair_estimates: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma_hat": self.sigma_hat,
            "area_coeff": self.area_coeff,
            "constant": self.constant,
            "residual_rms": self.residual_rms,
            "method": self.method,
            "points": self.points,
            "pair_estimates": list(self.pair_estimates),
        }


@dataclass
class BoundVerdict:
    """Jämförelse av Σ̂ vid ändligt L mot de asymptotiska skrankorna."""

    passed: bool
    sigma_hat: float
    sigma_l: float
    sigma_u: float
    lower_margin: float
    upper_margin: float
    label: str = "finite-L surrogate for liminf/limsup bounds"

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "sigma_hat": self.sigma_hat,
            "sigma_l": self.sigma_l,
            "sigma_u": self.sigma_u,
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
            "label": self.label,
        }


@dataclass
class TrendResult:
    """Lutning med standardfel och 95 %-intervall."""

    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    rvalue: float
    points: int

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class LogBaseDecision:
    """Vilken logaritmbas som ger Σ̂ = Σ₀."""

    base: Optional[str]
    sigma0: float
    relative_errors: Dict[str, float]
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "base": self.base,
            "sigma0": self.sigma0,
            "relative_errors": dict(self.relative_errors),
            "tolerance": self.tolerance,
        }


def sigma0(shape: DomainSpec, E: Union[EnergyParams, float]) -> float:
    """
    Σ₀ = E^{(d-1)/2} |∂Λ| / (3·2^d π^{(d-1)/2} Γ((d+1)/2)).

    Args:
        shape: Basdomänen; skalan ignoreras
        E: Fermienergi

    Returns:
        Σ₀
    """
    energy = E.fermi_energy if isinstance(E, EnergyParams) else EnergyParams(float(E)).fermi_energy
    d = shape.dimension
    return (energy ** ((d - 1) / 2.0) * shape.surface_measure
            / (3.0 * 2.0 ** d * math.pi ** ((d - 1) / 2.0) * gamma((d + 1) / 2.0)))


def sigma_bounds(sigma0_value: float) -> Tuple[float, float]:
    """
    (Σ_l, Σ_u) = (3Σ₀/(2π²), 2508·Σ₀).

    Raises:
        DomainError: Om Σ₀ ≤ 0
    """
    if not sigma0_value > 0:
        raise DomainError("Σ₀ måste vara positiv")
    return 3.0 * sigma0_value / (2.0 * math.pi ** 2), UPPER_FACTOR * sigma0_value


def _basis(L: np.ndarray, d: int) -> np.ndarray:
    area = L ** (d - 1)
    if d == 1:
        return np.column_stack([np.log(L), np.ones_like(L)])
    return np.column_stack([area * np.log(L), area, np.ones_like(L)])


def fit_enhanced(series: ScalingSeries) -> FitResult:
    """
    Minstakvadratanpassning av S mot {L^{d-1} ln L, L^{d-1}, 1}.

    I d = 1 sammanfaller L^{d-1} med konstanten, så basen blir {ln L, 1}
    och area_coeff rapporteras som konstanttermen.

    Returns:
        FitResult med metoden "joint-regression"

    Raises:
        PreconditionError: Om serien har färre än fyra punkter
    """
    if len(series) < MIN_FIT_POINTS:
        raise PreconditionError(f"Anpassningen kräver minst {MIN_FIT_POINTS} punkter, fick {len(series)}")
    design = _basis(series.L, series.dimension)
    # Kolumnskalning håller systemet välkonditionerat
    norms = np.linalg.norm(design, axis=0)
    coeffs, _, _, _ = linalg.lstsq(design / norms, series.S)
    coeffs = coeffs / norms
    residual = series.S - design @ coeffs
    mean = float(np.mean(np.abs(series.S)))
    rms = float(np.sqrt(np.mean(residual ** 2))) / mean if mean > 0 else 0.0

    if series.dimension == 1:
        sigma_hat, constant = coeffs
        area = constant
    else:
        sigma_hat, area, constant = coeffs
    logger.debug("Anpassning över %d punkter: Σ̂=%.6g, relativt residual %.2e", len(series), sigma_hat, rms)
    return FitResult(
        sigma_hat=float(sigma_hat),
        area_coeff=float(area),
        constant=float(constant),
        residual_rms=rms,
        method="joint-regression",
        points=len(series),
    )


def dyadic_pairs(series: ScalingSeries) -> List[Tuple[int, int]]:
    """Indexpar (i, j) med L_j = 2 L_i."""
    pairs = []
    for i, L in enumerate(series.L):
        match = np.flatnonzero(np.isclose(series.L, 2.0 * L, rtol=1e-9, atol=0.0))
        if match.size:
            pairs.append((i, int(match[0])))
    return pairs


def dyadic_sigma(series: ScalingSeries) -> FitResult:
    """
    Σ̂ = (S(2L) - S(L)) / ((2L)^{d-1} ln(2L) - L^{d-1} ln L) för varje dyadiskt par.

    Med minst tre par returneras gränsvärdet av en linjär trend i parvärdena:
    mot 1/L i d = 1, och i d ≥ 2 mot x_L = (2^{d-1} - 1)/(2^{d-1} ln(2L) - ln L),
    vars lutning är ytkoefficienten. Med färre par returneras värdet vid
    största L. Alla parvärden finns i pair_estimates.

    Raises:
        PreconditionError: Om serien saknar dyadiska par
    """
    pairs = dyadic_pairs(series)
    if not pairs:
        raise PreconditionError("Serien innehåller inga dyadiska par (L, 2L)")
    d = series.dimension
    estimates = []
    trend_x = []
    for i, j in pairs:
        small, large = series.L[i], series.L[j]
        denominator = large ** (d - 1) * math.log(large) - small ** (d - 1) * math.log(small)
        estimates.append(float((series.S[j] - series.S[i]) / denominator))
        if d == 1:
            trend_x.append(1.0 / small)
        else:
            trend_x.append((2.0 ** (d - 1) - 1.0) / (2.0 ** (d - 1) * math.log(large) - math.log(small)))

    sigma_hat, area_coeff = estimates[-1], float("nan")
    if len(pairs) >= 3:
        trend = stats.linregress(trend_x, estimates)
        sigma_hat = float(trend.intercept)
        if d > 1:
            area_coeff = float(trend.slope)
    logger.debug("Dyadiska parvärden %s ger Σ̂ = %.6g", estimates, sigma_hat)
    return FitResult(
        sigma_hat=sigma_hat,
        area_coeff=area_coeff,
        residual_rms=float("nan"),
        method="dyadic-difference",
        points=len(pairs),
        pair_estimates=estimates,
    )


def methods_agree(first: FitResult, second: FitResult, tolerance: float = METHOD_AGREEMENT) -> bool:
    """True om två skattningar av Σ skiljer sig mindre än tolerance relativt."""
    reference = max(abs(first.sigma_hat), abs(second.sigma_hat))
    if reference == 0:
        return True
    agree = abs(first.sigma_hat - second.sigma_hat) <= tolerance * reference
    if not agree:
        logger.warning("Metoderna %s och %s skiljer sig: %.4g mot %.4g (underkonvergerad svep?)",
                       first.method, second.method, first.sigma_hat, second.sigma_hat)
    return agree


def bound_verdict(fit: FitResult, sigma_l: float, sigma_u: float) -> BoundVerdict:
    """PASS om Σ_l ≤ Σ̂ ≤ Σ_u; marginalerna är negativa vid brott."""
    lower = fit.sigma_hat - sigma_l
    upper = sigma_u - fit.sigma_hat
    return BoundVerdict(
        passed=bool(lower >= 0 and upper >= 0),
        sigma_hat=fit.sigma_hat,
        sigma_l=sigma_l,
        sigma_u=sigma_u,
        lower_margin=lower,
        upper_margin=upper,
    )


def resolve_log_base(fits_by_base: Mapping[str, FitResult], sigma0_value: float,
                     tolerance: float = LOG_BASE_TOLERANCE) -> LogBaseDecision:
    """
    Välj den logaritmbas vars Σ̂ ligger närmast Σ₀, om inom tolerance.

    Args:
        fits_by_base: Anpassning per bas, t.ex. {"2": ..., "e": ...}
        sigma0_value: Den teoretiska koefficienten
        tolerance: Största relativa avvikelse

    Returns:
        LogBaseDecision; base är None om ingen bas passar
    """
    if not sigma0_value > 0:
        raise DomainError("Σ₀ måste vara positiv")
    errors = {base: abs(fit.sigma_hat - sigma0_value) / sigma0_value for base, fit in fits_by_base.items()}
    best = min(errors, key=errors.get) if errors else None
    chosen = best if best is not None and errors[best] <= tolerance else None
    if chosen is None:
        logger.warning("Ingen logaritmbas ger Σ̂ inom %.0f %% av Σ₀ = %.4g: %s",
                       100 * tolerance, sigma0_value, errors)
    else:
        logger.info("Logaritmbas %s ger Σ̂ inom %.1f %% av Σ₀", chosen, 100 * errors[chosen])
    return LogBaseDecision(base=chosen, sigma0=sigma0_value, relative_errors=errors, tolerance=tolerance)


def trend_slope(x: Sequence[float], y: Sequence[float]) -> TrendResult:
    """
    Linjär regression y = slope·x + intercept med 95 %-konfidensintervall.

    Raises:
        PreconditionError: Om färre än tre punkter ges
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.size < 3:
        raise PreconditionError("Trendanalysen kräver minst tre punkter")
    fit = stats.linregress(xs, ys)
    half = stats.t.ppf(0.975, xs.size - 2) * fit.stderr
    return TrendResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=float(fit.stderr),
        ci_low=float(fit.slope - half),
        ci_high=float(fit.slope + half),
        rvalue=float(fit.rvalue),
        points=int(xs.size),
    )


def sigma_lower_from_purity(series: ScalingSeries) -> FitResult:
    """
    Koefficienten för L^{d-1} ln L i ½ Σ g(λ_n) för den fria projektionen.

    Args:
        series: Serie där S är renhetsdefekten Σ g(λ_n)

    Returns:
        FitResult med metoden "purity"
    """
    fit = fit_enhanced(series.scaled(0.5))
    fit.method = "purity"
    return fit
