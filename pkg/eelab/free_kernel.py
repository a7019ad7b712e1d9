"""
Fri Fermiprojektionskärna och fri Greenfunktion.

Denna modul innehåller den slutna formen för integralkärnan till 1_{<E}(H₀)
med H₀ = -Δ i d = 1, 2, 3, den fria resolventkärnan G₀(x, y; z) samt
numeriska kontroller av dess exponentiella avtagande.

Enheter: ħ²/2m = 1, så E har enheten inversa längden i kvadrat och
Fermimomentet är k = √E.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError, PreconditionError

logger = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (1, 2, 3)

# Under k·r < denna gräns används potensserien för Besselkvoten
SERIES_THRESHOLD = 1e-3

# Minsta antal avstånd och minsta spännvidd (kvot) för avtagandeanpassningen
MIN_DECAY_SAMPLES = 10
MIN_DECAY_SPAN = 10.0

# Gräns för "stora argument": |√z|·r ≥ denna konstant
ASYMPTOTIC_ARGUMENT = 1.0


@dataclass(frozen=True)
class EnergyParams:
    """Fermienergi E > 0."""

    fermi_energy: float

    def __post_init__(self):
        if not (np.isfinite(self.fermi_energy) and self.fermi_energy > 0):
            raise DomainError("fermi_energy måste vara positiv")

    @property
    def momentum(self) -> float:
        """Fermimomentet √E."""
        return math.sqrt(self.fermi_energy)

    @property
    def wavelength(self) -> float:
        """Fermivåglängden 2π/√E."""
        return 2.0 * math.pi / self.momentum


@dataclass
class DecayFitReport:
    """Resultat av anpassningen av |G₀| mot e^{-rate·r}/r^{(d-1)/2}."""

    dimension: int
    z: complex
    fitted_rate: float
    predicted_rate: float
    relative_rate_error: float
    sample_range: Tuple[float, float]
    samples: int
    fitted_power: float
    predicted_power: float

    def to_dict(self) -> dict:
        """Konvertera rapporten till en JSON-vänlig dictionary."""
        return {
            "dimension": self.dimension,
            "z_real": float(self.z.real),
            "z_imag": float(self.z.imag),
            "fitted_rate": self.fitted_rate,
            "predicted_rate": self.predicted_rate,
            "relative_rate_error": self.relative_rate_error,
            "sample_range": list(self.sample_range),
            "samples": self.samples,
            "fitted_power": self.fitted_power,
            "predicted_power": self.predicted_power,
        }


def _check_dimension(d: int) -> None:
    if d not in SUPPORTED_DIMENSIONS:
        raise DomainError(f"Dimension {d} stöds inte, bara {SUPPORTED_DIMENSIONS}")


def _energy_value(E: Union[EnergyParams, float]) -> float:
    if isinstance(E, EnergyParams):
        return E.fermi_energy
    return EnergyParams(float(E)).fermi_energy


def unit_ball_volume(d: int) -> float:
    """Volymen av enhetsklotet i R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def weyl_density(E: Union[EnergyParams, float], d: int) -> float:
    """
    Weyltätheten ω_d E^{d/2}/(2π)^d, dvs diagonalen i den fria kärnan.

    Args:
        E: Fermienergi
        d: Dimension

    Returns:
        Partikeltätheten
    """
    _check_dimension(d)
    energy = _energy_value(E)
    return unit_ball_volume(d) * energy ** (d / 2.0) / (2.0 * math.pi) ** d


def fermi_kernel_radial(r: Union[float, np.ndarray], E: Union[EnergyParams, float], d: int):
    """
    Kärnan till 1_{<E}(H₀) som funktion av avståndet r = |x - y|.

    K(r) = (k/(2πr))^{d/2} J_{d/2}(kr) med k = √E. För små k·r används
    potensserien så att diagonalen blir exakt Weyltätheten.

    Args:
        r: Avstånd (skalär eller array), r ≥ 0
        E: Fermienergi
        d: Dimension

    Returns:
        Kärnvärden med samma form som r
    """
    _check_dimension(d)
    k = math.sqrt(_energy_value(E))
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if r_arr.size and r_arr.min() < 0:
        raise DomainError("Avståndet måste vara icke-negativt")

    nu = d / 2.0
    kr = k * r_arr
    out = np.empty_like(kr)

    small = kr < SERIES_THRESHOLD
    if np.any(small):
        u = 0.25 * np.square(kr[small])
        # Σ_m (-u)^m / (m! Γ(m + ν + 1)), tre termer räcker under tröskeln
        series = (1.0 / math.gamma(nu + 1.0)
                  - u / math.gamma(nu + 2.0)
                  + u * u / (2.0 * math.gamma(nu + 3.0)))
        out[small] = (k * k / (4.0 * math.pi)) ** nu * series

    large = ~small
    if np.any(large):
        if d == 1:
            out[large] = np.sin(kr[large]) / (math.pi * r_arr[large])
        else:
            out[large] = (k / (2.0 * math.pi * r_arr[large])) ** nu * special.jv(nu, kr[large])

    return float(out[0]) if np.ndim(r) == 0 else out


def fermi_kernel_free(x, y, E: Union[EnergyParams, float], d: int) -> float:
    """
    Integralkärnan K(x, y) till den fria Fermiprojektionen 1_{<E}(-Δ).

    Args:
        x: Punkt i R^d
        y: Punkt i R^d
        E: Fermienergi
        d: Dimension

    Returns:
        K(x, y), symmetrisk i x och y
    """
    _check_dimension(d)
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.shape != (d,) or yv.shape != (d,):
        raise DomainError(f"Punkterna måste ha {d} koordinater")
    r = float(np.sqrt(np.sum(np.square(xv - yv))))
    return fermi_kernel_radial(r, E, d)


def _check_complex_energy(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0.0 or not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise DomainError("z måste vara icke-reell")
    return z


def principal_sqrt(z: complex) -> complex:
    """
    Kvadratroten √z med Im √z > 0.

    Raises:
        DomainError: Om z är reell
    """
    z = _check_complex_energy(z)
    k = np.sqrt(z)
    if k.imag < 0:
        k = -k
    return complex(k)


def green_radial(r: Union[float, np.ndarray], z: complex, d: int):
    """
    Fria resolventkärnan G₀ som funktion av r = |x - y|.

    d = 1: (i/(2√z)) e^{i√z r}
    d = 2: (i/4) H₀⁽¹⁾(√z r)
    d = 3: e^{i√z r}/(4π r)

    Args:
        r: Avstånd (skalär eller array)
        z: Icke-reell spektralparameter
        d: Dimension

    Returns:
        Komplexa värden

    Raises:
        DomainError: Om z är reell, eller r = 0 i d ≥ 2
    """
    _check_dimension(d)
    k = principal_sqrt(z)
    r_arr = np.asarray(r, dtype=float)
    if r_arr.size and r_arr.min() < 0:
        raise DomainError("Avståndet måste vara icke-negativt")
    if d >= 2 and r_arr.size and r_arr.min() == 0.0:
        raise DomainError("G₀ är singulär för sammanfallande punkter när d ≥ 2")

    if d == 1:
        value = 1j / (2.0 * k) * np.exp(1j * k * r_arr)
    elif d == 2:
        value = 0.25j * special.hankel1(0, k * r_arr)
    else:
        value = np.exp(1j * k * r_arr) / (4.0 * math.pi * r_arr)

    return complex(value) if np.ndim(r) == 0 else value


def green_free(x, y, z: complex, d: int) -> complex:
    """
    Fria Greenfunktionen G₀(x, y; z), kärnan till (-Δ - z)^{-1}.

    Args:
        x: Punkt i R^d
        y: Punkt i R^d
        z: Icke-reell spektralparameter
        d: Dimension

    Returns:
        G₀(x, y; z)
    """
    _check_dimension(d)
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.shape != (d,) or yv.shape != (d,):
        raise DomainError(f"Punkterna måste ha {d} koordinater")
    r = float(np.sqrt(np.sum(np.square(xv - yv))))
    return green_radial(r, z, d)


def resolvent_residual(z: complex, d: int, cutoff: float = 12.0) -> float:
    """
    Kontrollera resolventegenskapen mot en Gaussisk testfunktion.

    Med φ(y) = e^{-|y|²/2} gäller (-Δ - z)φ = (d - |y|² - z)φ, och
    ∫ G₀(0, y; z) [(-Δ - z)φ](y) dy ska vara φ(0) = 1. Integralen tas radiellt.

    Args:
        z: Icke-reell spektralparameter
        d: Dimension
        cutoff: Övre integrationsgräns i r

    Returns:
        |∫ G₀ (-Δ - z)φ - 1|
    """
    _check_dimension(d)
    k = principal_sqrt(z)
    surface = {1: lambda r: 2.0, 2: lambda r: 2.0 * math.pi * r, 3: lambda r: 4.0 * math.pi * r * r}[d]

    def integrand(r: float) -> complex:
        source = (d - r * r - z) * math.exp(-0.5 * r * r)
        if d == 3:
            # 4πr² · e^{ikr}/(4πr), utan singularitet i r = 0
            return r * np.exp(1j * k * r) * source
        if d == 2 and r == 0.0:
            return 0.0
        return surface(r) * green_radial(r, z, d) * source

    real_part, _ = integrate.quad(lambda r: integrand(r).real, 0.0, cutoff, limit=400)
    imag_part, _ = integrate.quad(lambda r: integrand(r).imag, 0.0, cutoff, limit=400)
    residual = abs(complex(real_part, imag_part) - 1.0)
    logger.debug("Resolventkontroll d=%d z=%s: residual %.3e", d, z, residual)
    return residual


def imag_sqrt_identity(E: float, eta: float) -> Tuple[float, float]:
    """
    Båda sidor av identiteten |Im √z| = (E² + η²)^{1/4} sin(½ arctan(|η|/E)).

    Args:
        E: Realdel, E > 0
        eta: Imaginärdel, η ≠ 0

    Returns:
        (|Im √(E + iη)|, högerledet)
    """
    if E <= 0:
        raise DomainError("E måste vara positiv")
    lhs = abs(principal_sqrt(complex(E, eta)).imag)
    rhs = (E * E + eta * eta) ** 0.25 * math.sin(0.5 * math.atan(abs(eta) / E))
    return lhs, rhs


def default_separations(z: complex, count: int = 16) -> np.ndarray:
    """Avstånd som spänner en dekad i det asymptotiska området för z."""
    rate = principal_sqrt(z).imag
    return np.geomspace(5.0 / rate, 50.0 / rate, count)


def verify_green_decay(z: complex, d: int,
                       separations: Optional[Sequence[float]] = None) -> DecayFitReport:
    """
    Anpassa den exponentiella avtagandehastigheten hos |G₀(x, y; z)|.

    log|G₀| + ((d-1)/2) log r anpassas linjärt mot r; lutningen jämförs med
    -|Im √z|. Dessutom anpassas potensexponenten fritt som kontroll.

    Args:
        z: Icke-reell spektralparameter
        d: Dimension
        separations: Avstånd; standard är en dekad i det asymptotiska området

    Returns:
        DecayFitReport

    Raises:
        DomainError: Om z är reell
        PreconditionError: Om för få avstånd ligger i det asymptotiska området
    """
    _check_dimension(d)
    k = principal_sqrt(z)
    if separations is None:
        separations = default_separations(z)
    r = np.sort(np.asarray(separations, dtype=float))
    r = r[r * abs(k) >= ASYMPTOTIC_ARGUMENT]
    if r.size < MIN_DECAY_SAMPLES or r[-1] / r[0] < MIN_DECAY_SPAN:
        raise PreconditionError(
            f"Minst {MIN_DECAY_SAMPLES} avstånd som spänner en dekad krävs i det asymptotiska området"
        )

    magnitude = np.abs(green_radial(r, z, d))
    power = (d - 1) / 2.0
    fit = stats.linregress(r, np.log(magnitude) + power * np.log(r))
    fitted_rate = -fit.slope
    predicted_rate = abs(k.imag)

    # Fri anpassning log|G| = c - rate·r - p·log r
    design = np.column_stack([np.ones_like(r), -r, -np.log(r)])
    coeffs, *_ = np.linalg.lstsq(design, np.log(magnitude), rcond=None)

    report = DecayFitReport(
        dimension=d,
        z=complex(z),
        fitted_rate=float(fitted_rate),
        predicted_rate=float(predicted_rate),
        relative_rate_error=float(abs(fitted_rate - predicted_rate) / predicted_rate),
        sample_range=(float(r[0]), float(r[-1])),
        samples=int(r.size),
        fitted_power=float(coeffs[2]),
        predicted_power=power,
    )
    logger.info("Greenavtagande d=%d z=%s: rate %.6f (förväntat %.6f)",
                d, z, report.fitted_rate, report.predicted_rate)
    return report
