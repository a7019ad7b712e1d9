"""
Skalära entropifunktioner och kontroller av de elementära olikheterna.

Denna modul innehåller entropifunktionen h, funktionen g(x) = x(1-x) och
funktionen f(x) = -x² log₂(x²) samt uttömmande kontroller av olikheterna
som kopplar ihop dem. Alla funktioner tar skalärer eller numpy-arrayer.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from scipy.special import xlogy

from .errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

# Absolut tolerans på slack i olikhetskontrollerna
SLACK_TOLERANCE = 1e-12

# f är växande på [0, e^{-1/2}]
F_MONOTONE_LIMIT = math.exp(-0.5)

LN2 = math.log(2.0)


@dataclass
class InequalityReport:
    """Resultat av en olikhetskontroll över ett nät av indata."""

    name: str
    samples: int
    max_violation: float  # minsta slack, negativ = brott
    worst_input: Any = None
    tolerance: float = SLACK_TOLERANCE
    slacks: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """True om ingen slack är mer negativ än toleransen."""
        return self.max_violation >= -self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        """Konvertera rapporten till en JSON-vänlig dictionary."""
        worst = self.worst_input
        if isinstance(worst, np.ndarray):
            worst = worst.tolist()
        elif isinstance(worst, tuple):
            worst = [float(w) for w in worst]
        elif worst is not None:
            worst = float(worst)
        return {
            "name": self.name,
            "samples": int(self.samples),
            "max_violation": float(self.max_violation),
            "worst_input": worst,
            "tolerance": self.tolerance,
            "slacks": {k: float(v) for k, v in self.slacks.items()},
            "passed": self.passed,
        }

    @classmethod
    def combine(cls, name: str, reports: Sequence["InequalityReport"]) -> "InequalityReport":
        """
        Slå ihop flera rapporter till en, med den sämsta slacken.

        Args:
            name: Namn på den sammanslagna rapporten
            reports: Rapporter att slå ihop

        Returns:
            En ny InequalityReport
        """
        if not reports:
            raise ValueError("Kan inte slå ihop en tom lista med rapporter")
        worst = min(reports, key=lambda r: r.max_violation)
        slacks = {}
        for report in reports:
            for key, value in report.slacks.items():
                slacks[key] = min(value, slacks.get(key, math.inf))
        return cls(
            name=name,
            samples=sum(r.samples for r in reports),
            max_violation=worst.max_violation,
            worst_input=worst.worst_input,
            tolerance=max(r.tolerance for r in reports),
            slacks=slacks,
        )


def _as_unit(x: ArrayLike, name: str = "x") -> np.ndarray:
    """Konvertera till float-array och kontrollera att alla värden ligger i [0,1]."""
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError(f"{name} måste ligga i [0,1]")
    return arr


def _scalar_or_array(arr: np.ndarray, like: ArrayLike):
    return float(arr) if np.ndim(like) == 0 else arr


def h(x: ArrayLike, base: float = 2.0):
    """
    Entanglemententropins funktion h(x) = -x log x - (1-x) log(1-x).

    Konventionen 0·log 0 = 0 hanteras av xlogy, som returnerar exakt 0 för x = 0.

    Args:
        x: Värde(n) i [0,1]
        base: Logaritmens bas, 2 som standard (math.e ger naturlig logaritm)

    Returns:
        h(x), i [0,1] för bas 2

    Raises:
        DomainError: Om något värde ligger utanför [0,1]
    """
    arr = _as_unit(x)
    if base <= 0 or base == 1:
        raise DomainError("Logaritmens bas måste vara positiv och skild från 1")
    value = -(xlogy(arr, arr) + xlogy(1.0 - arr, 1.0 - arr)) / math.log(base)
    # Avrundning kan ge -0.0 eller 1+ulp
    value = np.clip(value, 0.0, None)
    return _scalar_or_array(value, x)


def g(x: ArrayLike):
    """
    g(x) = x(1-x), symmetrisk kring 1/2 med maximum 1/4.

    Raises:
        DomainError: Om något värde ligger utanför [0,1]
    """
    arr = _as_unit(x)
    return _scalar_or_array(arr * (1.0 - arr), x)


def f(x: ArrayLike):
    """
    f(x) = -x² log₂(x²) för x i [0,1] och 0 för x > 1.

    Args:
        x: Icke-negativa värden

    Returns:
        f(x) i [0,1]

    Raises:
        DomainError: Om något värde är negativt
    """
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0):
        raise DomainError("f är bara definierad för x >= 0")
    sq = np.square(np.minimum(arr, 1.0))
    value = np.where(arr <= 1.0, -xlogy(sq, sq) / LN2, 0.0)
    return _scalar_or_array(value, x)


def neg_xlog2x(x: ArrayLike):
    """-x log₂ x med 0 log 0 = 0."""
    arr = np.asarray(x, dtype=float)
    return _scalar_or_array(-xlogy(arr, arr) / LN2, x)


def _report(name: str, inputs: np.ndarray, slacks: Dict[str, np.ndarray],
            tolerance: float) -> InequalityReport:
    """Bygg en rapport från slack-arrayer med samma form som inputs."""
    mins = {key: float(np.min(value)) for key, value in slacks.items()}
    worst_key = min(mins, key=mins.get)
    idx = int(np.argmin(slacks[worst_key]))
    worst = inputs[idx] if inputs.ndim == 1 else tuple(inputs[idx])
    report = InequalityReport(
        name=name,
        samples=int(inputs.shape[0]),
        max_violation=mins[worst_key],
        worst_input=worst,
        tolerance=tolerance,
        slacks=mins,
    )
    if not report.passed:
        logger.warning("Olikheten %s bryts: slack %.3e vid %s", name, report.max_violation, worst)
    return report


def check_sandwich(grid: ArrayLike, tolerance: float = SLACK_TOLERANCE) -> InequalityReport:
    """
    Kontrollera g ≤ h, -g log₂ g ≤ h och h ≤ -3 g log₂ g på ett nät.

    Args:
        grid: Punkter i [0,1]
        tolerance: Absolut tolerans på slack

    Returns:
        InequalityReport med minsta slack för varje kedja
    """
    x = np.atleast_1d(_as_unit(grid, "grid"))
    hx = np.atleast_1d(h(x))
    gx = np.atleast_1d(g(x))
    glog = np.atleast_1d(neg_xlog2x(gx))
    slacks = {
        "g_le_h": hx - gx,
        "lower": hx - glog,
        "upper": 3.0 * glog - hx,
    }
    return _report("sandwich", x, slacks, tolerance)


def check_power_bounds(grid: ArrayLike, s: float,
                       tolerance: float = SLACK_TOLERANCE) -> InequalityReport:
    """
    Kontrollera -x log₂ x ≤ x^s/(1-s) och g ≤ h ≤ 6 g^s/(1-s).

    Args:
        grid: Punkter i [0,1]
        s: Exponent i ]0,1[
        tolerance: Absolut tolerans på slack

    Returns:
        InequalityReport för båda kedjorna

    Raises:
        DomainError: Om s ligger utanför ]0,1[
    """
    if not 0.0 < s < 1.0:
        raise DomainError("s måste ligga i ]0,1[")
    x = np.atleast_1d(_as_unit(grid, "grid"))
    hx = np.atleast_1d(h(x))
    gx = np.atleast_1d(g(x))
    slacks = {
        "xlogx_power": np.power(x, s) / (1.0 - s) - np.atleast_1d(neg_xlog2x(x)),
        "g_le_h": hx - gx,
        "h_power": 6.0 / (1.0 - s) * np.power(gx, s) - hx,
    }
    return _report(f"power_bounds(s={s:g})", x, slacks, tolerance)


def check_f_monotone(grid: ArrayLike, tolerance: float = SLACK_TOLERANCE) -> InequalityReport:
    """
    Kontrollera att f är icke-avtagande på [0, e^{-1/2}].

    Punkter utanför intervallet ignoreras.
    """
    x = np.sort(np.asarray(grid, dtype=float).ravel())
    x = x[(x >= 0.0) & (x <= F_MONOTONE_LIMIT)]
    if x.size < 2:
        return InequalityReport(name="f_monotone", samples=int(x.size), max_violation=0.0,
                                tolerance=tolerance)
    fx = f(x)
    diffs = np.diff(fx)
    return _report("f_monotone", x[1:], {"increment": diffs}, tolerance)


def check_log_sum(grid: ArrayLike, tolerance: float = SLACK_TOLERANCE) -> InequalityReport:
    """
    Kontrollera f(x+y) ≤ -2(x²+y²) log₂((x+y)²) ≤ 2f(x) + 2f(y).

    Alla par (x, y) från nätet med x + y < 1 används.

    Args:
        grid: Icke-negativa punkter
        tolerance: Absolut tolerans på slack

    Returns:
        InequalityReport med slack för båda stegen
    """
    pts = np.asarray(grid, dtype=float).ravel()
    if pts.size and pts.min() < 0.0:
        raise DomainError("Nätet måste vara icke-negativt")
    xx, yy = np.meshgrid(pts, pts, indexing="ij")
    mask = (xx + yy) < 1.0
    x = xx[mask]
    y = yy[mask]
    if x.size == 0:
        return InequalityReport(name="log_sum", samples=0, max_violation=0.0, tolerance=tolerance)
    s2 = np.square(x + y)
    middle = -2.0 * (x * x + y * y) * np.where(s2 > 0.0, np.log2(np.where(s2 > 0.0, s2, 1.0)), 0.0)
    slacks = {
        "first": middle - f(x + y),
        "second": 2.0 * f(x) + 2.0 * f(y) - middle,
    }
    return _report("log_sum", np.column_stack([x, y]), slacks, tolerance)


def check_binomial(grid: ArrayLike, tolerance: float = SLACK_TOLERANCE) -> InequalityReport:
    """Kontrollera (a-b)² ≥ a²/2 - b² för alla par från nätet."""
    pts = np.asarray(grid, dtype=float).ravel()
    aa, bb = np.meshgrid(pts, pts, indexing="ij")
    a = aa.ravel()
    b = bb.ravel()
    slacks = {"binomial": np.square(a - b) - (0.5 * a * a - b * b)}
    return _report("binomial", np.column_stack([a, b]), slacks, tolerance)


def unit_grid(points: int = 100_000, include_endpoints: bool = True) -> np.ndarray:
    """
    Likformigt nät på [0,1].

    Args:
        points: Antal punkter
        include_endpoints: Om 0 och 1 ska ingå

    Returns:
        Array med punkter
    """
    if include_endpoints:
        return np.linspace(0.0, 1.0, points)
    return (np.arange(points) + 0.5) / points


def verify_scalar_suite(points: int = 100_000, s_values: Optional[Sequence[float]] = None,
                        pair_points: int = 1_000) -> Dict[str, InequalityReport]:
    """
    Kör alla skalära olikhetskontroller.

    Args:
        points: Antal punkter i de endimensionella skanningarna
        s_values: Exponenter för potensgränserna
        pair_points: Nätstorlek per axel i parskanningarna

    Returns:
        Dictionary med rapport per kontroll
    """
    if s_values is None:
        s_values = (0.1, 0.25, 0.5, 0.51, 0.75, 0.9, 0.99)
    grid = unit_grid(points)
    reports = {"sandwich": check_sandwich(grid)}
    for s in s_values:
        report = check_power_bounds(grid, s)
        reports[report.name] = report
    reports["f_monotone"] = check_f_monotone(np.linspace(0.0, F_MONOTONE_LIMIT, points))
    pair_grid = np.linspace(0.0, 1.0, pair_points)
    reports["log_sum"] = check_log_sum(pair_grid)
    reports["binomial"] = check_binomial(np.linspace(-2.0, 2.0, pair_points))
    logger.info("Skalära olikheter kontrollerade: %d rapporter, %d brott",
                len(reports), sum(not r.passed for r in reports.values()))
    return reports
