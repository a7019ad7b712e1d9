"""
Singulära värden, Schattennormer och matrisolikheter.

Denna modul innehåller singulärvärdesberäkning, Schatten p-normer (och
potenssummorna Σ a_n^{2s} för kvasinormexponenter) samt kontroller av
olikheterna som används för att uppskatta korstermerna: additivitet för
singulära värden, interpolationsolikheten och den logaritmiska
triangelolikheten för tr f(|A|).
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .entropy_functions import InequalityReport, f
from .errors import DomainError, PreconditionError, ShapeMismatchError
from .utils import make_rng

logger = logging.getLogger(__name__)

# Singulära värden under ZERO_CUT·a₁ räknas som noll
ZERO_CUT = 1e-14

MATRIX_TOLERANCE = 1e-10

# Normgräns i den logaritmiska triangelolikheten
LOG_TRIANGLE_NORM = math.exp(-0.5) / 3.0

DEFAULT_S_GRID = (0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)


@dataclass
class SingularSpectrum:
    """Singulära värden a₁ ≥ a₂ ≥ ... ≥ 0."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size and (values.min() < 0 or np.any(np.diff(values) > 0)):
            raise ValueError("Singulära värden måste vara icke-negativa och icke-växande")
        self.values = values

    def __len__(self) -> int:
        return int(self.values.size)

    def at(self, n: int) -> float:
        """a_n med 1-baserat index; a_n = 0 bortom matrisens rang."""
        if n < 1:
            raise DomainError("Index börjar på 1")
        return float(self.values[n - 1]) if n <= self.values.size else 0.0

    def padded(self, length: int) -> np.ndarray:
        """Värdena utfyllda med nollor till given längd."""
        out = np.zeros(max(length, self.values.size))
        out[:self.values.size] = self.values
        return out


def singular_values(A) -> SingularSpectrum:
    """
    Singulära värden i icke-växande ordning.

    Args:
        A: Godtycklig ändlig matris

    Returns:
        SingularSpectrum
    """
    arr = np.atleast_2d(np.asarray(A))
    if arr.size == 0:
        return SingularSpectrum(np.empty(0))
    values = linalg.svdvals(arr)
    return SingularSpectrum(np.sort(values)[::-1])


def _cut(values: np.ndarray) -> np.ndarray:
    if values.size == 0 or values[0] == 0.0:
        return values
    return np.where(values < ZERO_CUT * values[0], 0.0, values)


def power_sum(A, p: float) -> float:
    """
    Σ_n a_n(A)^p, för p = 2s är detta ‖A‖_{2s}^{2s}.

    Raises:
        DomainError: Om p ≤ 0
    """
    if not p > 0:
        raise DomainError("Exponenten p måste vara positiv")
    values = _cut(singular_values(A).values)
    return float(np.sum(np.power(values, p)))


def schatten_norm(A, p: float) -> float:
    """
    Schatten p-norm (Σ a_n^p)^{1/p}; för p < 1 en kvasinorm.

    Raises:
        DomainError: Om p ≤ 0
    """
    return power_sum(A, p) ** (1.0 / p)


def frobenius_norm(A) -> float:
    """‖A‖₂ beräknad direkt från matriselementen."""
    arr = np.asarray(A)
    return float(np.sqrt(np.sum(np.abs(arr) ** 2)))


def operator_norm(A) -> float:
    """Största singulära värdet."""
    singular = singular_values(A)
    return singular.at(1) if len(singular) else 0.0


def trace_f(A) -> float:
    """tr f(|A|) = Σ f(a_n(A))."""
    values = _cut(singular_values(A).values)
    return float(np.sum(f(values))) if values.size else 0.0


def _same_shape(A, B) -> Tuple[np.ndarray, np.ndarray]:
    a = np.atleast_2d(np.asarray(A))
    b = np.atleast_2d(np.asarray(B))
    if a.shape != b.shape:
        raise ShapeMismatchError(f"Formerna {a.shape} och {b.shape} skiljer sig")
    return a, b


def check_singular_additivity(A, B, pairs: Optional[Iterable[Tuple[int, int]]] = None,
                              tolerance: float = MATRIX_TOLERANCE) -> InequalityReport:
    """
    Kontrollera a_{n+m-1}(A) ≤ a_n(B) + a_m(A - B).

    Args:
        A: Matris
        B: Matris med samma form
        pairs: 1-baserade index (n, m); standard är alla par med n + m - 1 ≤ min(form)
        tolerance: Absolut tolerans

    Returns:
        InequalityReport

    Raises:
        ShapeMismatchError: Om formerna skiljer sig
    """
    a, b = _same_shape(A, B)
    k = min(a.shape)
    if pairs is None:
        nn, mm = np.meshgrid(np.arange(1, k + 1), np.arange(1, k + 1), indexing="ij")
        keep = nn + mm - 1 <= k
        idx = np.column_stack([nn[keep], mm[keep]])
    else:
        idx = np.asarray(list(pairs), dtype=int).reshape(-1, 2)
        if idx.size and idx.min() < 1:
            raise DomainError("Index börjar på 1")
    if idx.size == 0:
        return InequalityReport(name="singular_additivity", samples=0, max_violation=0.0,
                                tolerance=tolerance)
    length = int(idx.sum(axis=1).max())
    sa = singular_values(a).padded(length)
    sb = singular_values(b).padded(length)
    sd = singular_values(a - b).padded(length)
    n = idx[:, 0]
    m = idx[:, 1]
    slack = sb[n - 1] + sd[m - 1] - sa[n + m - 2]
    worst = int(np.argmin(slack))
    return InequalityReport(
        name="singular_additivity",
        samples=int(idx.shape[0]),
        max_violation=float(slack[worst]),
        worst_input=(float(n[worst]), float(m[worst])),
        tolerance=tolerance,
        slacks={"additivity": float(slack[worst])},
    )


def check_interpolation(A, s: float, tolerance: float = MATRIX_TOLERANCE) -> InequalityReport:
    """
    Kontrollera ‖A‖_{2s}^{2s} ≤ ‖A‖₁^{2(1-s)} ‖A‖₂^{2(2s-1)}.

    Args:
        A: Matris
        s: Exponent i ]1/2, 1[
        tolerance: Absolut tolerans

    Returns:
        InequalityReport

    Raises:
        DomainError: Om s ligger utanför ]1/2, 1[
    """
    if not 0.5 < s < 1.0:
        raise DomainError("s måste ligga i ]1/2, 1[")
    values = _cut(singular_values(A).values)
    lhs = float(np.sum(np.power(values, 2.0 * s)))
    trace_norm = float(np.sum(values))
    hs_norm = float(np.sqrt(np.sum(values * values)))
    rhs = trace_norm ** (2.0 * (1.0 - s)) * hs_norm ** (2.0 * (2.0 * s - 1.0))
    slack = rhs - lhs
    return InequalityReport(
        name=f"interpolation(s={s:g})",
        samples=1,
        max_violation=slack,
        worst_input=s,
        tolerance=tolerance,
        slacks={"interpolation": slack},
    )


def check_log_triangle(A, B, tolerance: float = MATRIX_TOLERANCE) -> InequalityReport:
    """
    Kontrollera tr f(|A|) ≤ 4 tr f(|B|) + 4 tr f(|A - B|).

    Args:
        A: Matris med ‖A‖ ≤ e^{-1/2}/3
        B: Matris med ‖B‖ ≤ e^{-1/2}/3
        tolerance: Absolut tolerans

    Returns:
        InequalityReport

    Raises:
        PreconditionError: Om någon av normerna är för stor
        ShapeMismatchError: Om formerna skiljer sig
    """
    a, b = _same_shape(A, B)
    limit = LOG_TRIANGLE_NORM * (1.0 + 1e-12)
    norm_a = operator_norm(a)
    norm_b = operator_norm(b)
    if norm_a > limit or norm_b > limit:
        raise PreconditionError(
            f"Normerna {norm_a:.4f}, {norm_b:.4f} överskrider e^(-1/2)/3 = {LOG_TRIANGLE_NORM:.4f}"
        )
    slack = 4.0 * trace_f(b) + 4.0 * trace_f(a - b) - trace_f(a)
    return InequalityReport(
        name="log_triangle",
        samples=1,
        max_violation=slack,
        worst_input=(norm_a, norm_b),
        tolerance=tolerance,
        slacks={"log_triangle": slack},
    )


def check_power_sum_comparison(A, s: float, tolerance: float = MATRIX_TOLERANCE) -> InequalityReport:
    """
    Kontrollera Σ a_n^{2s} ≥ (Σ a_n²)^s för ‖A‖ ≤ 1.

    Raises:
        PreconditionError: Om ‖A‖ > 1
    """
    if not 0.0 < s < 1.0:
        raise DomainError("s måste ligga i ]0,1[")
    values = _cut(singular_values(A).values)
    if values.size and values[0] > 1.0 + 1e-12:
        raise PreconditionError("Jämförelsen kräver ‖A‖ ≤ 1")
    slack = float(np.sum(np.power(values, 2.0 * s)) - np.sum(values * values) ** s)
    return InequalityReport(
        name=f"power_sum_comparison(s={s:g})",
        samples=1,
        max_violation=slack,
        worst_input=s,
        tolerance=tolerance,
        slacks={"power_sum": slack},
    )


def random_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """n×n-matris med oberoende likformiga element på [-1, 1]."""
    return rng.uniform(-1.0, 1.0, size=(n, n))


def rescale_to_norm(A: np.ndarray, target: float) -> np.ndarray:
    """Skala A så att operatornormen blir target."""
    norm = operator_norm(A)
    if norm == 0.0:
        return A.copy()
    return A * (target / norm)


def admissible_pair(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Slumpmässigt par (A, B) med ‖A‖, ‖B‖ ≤ e^{-1/2}/3.

    Hälften av paren är oberoende, hälften har B nära A så att A - B är litet.
    """
    a = rescale_to_norm(random_matrix(rng, n), LOG_TRIANGLE_NORM * rng.uniform(1e-3, 1.0))
    if rng.uniform() < 0.5:
        b = rescale_to_norm(random_matrix(rng, n), LOG_TRIANGLE_NORM * rng.uniform(1e-3, 1.0))
    else:
        b = a + rng.uniform(1e-4, 0.3) * rescale_to_norm(random_matrix(rng, n), LOG_TRIANGLE_NORM)
        if operator_norm(b) > LOG_TRIANGLE_NORM:
            b = rescale_to_norm(b, LOG_TRIANGLE_NORM)
    return a, b


def _corpus_sample(args: Tuple[int, int, int, Tuple[float, ...]]) -> Dict[str, InequalityReport]:
    """Alla matriskontroller för ett sampelindex."""
    seed, index, n, s_grid = args
    rng = make_rng(seed, index)
    a = random_matrix(rng, n)
    b = random_matrix(rng, n)
    reports = {"singular_additivity": check_singular_additivity(a, b)}
    interpolation = [check_interpolation(a, s) for s in s_grid]
    reports["interpolation"] = InequalityReport.combine("interpolation", interpolation)
    pa, pb = admissible_pair(rng, n)
    reports["log_triangle"] = check_log_triangle(pa, pb)
    clamped = rescale_to_norm(a, rng.uniform(1e-3, 1.0))
    comparison = [check_power_sum_comparison(clamped, s) for s in s_grid]
    reports["power_sum_comparison"] = InequalityReport.combine("power_sum_comparison", comparison)
    return reports


def verify_corpus(samples: int = 500, n: int = 20, seed: int = 1,
                  s_grid: Sequence[float] = DEFAULT_S_GRID,
                  workers: int = 1) -> Dict[str, InequalityReport]:
    """
    Kör alla matrisolikheter över en seedad slumpkorpus.

    Sampel i har sin egen generator (seed, i), så resultatet beror inte på
    antalet arbetare. Rapporterna slås ihop i indexordning.

    Args:
        samples: Antal slumpmatrispar
        n: Matrisstorlek
        seed: Grundseed
        s_grid: Exponenter för interpolations- och potenssummekontrollerna
        workers: Antal processer

    Returns:
        Dictionary med sammanslagen rapport per olikhet
    """
    tasks = [(seed, i, n, tuple(s_grid)) for i in range(samples)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results: List[Dict[str, InequalityReport]] = list(pool.map(_corpus_sample, tasks, chunksize=16))
    else:
        results = [_corpus_sample(task) for task in tasks]

    combined = {}
    for key in results[0]:
        combined[key] = InequalityReport.combine(key, [r[key] for r in results])
    violations = sum(not r.passed for r in combined.values())
    logger.info("Matriskorpus: %d sampel av storlek %d, %d brutna olikheter", samples, n, violations)
    return combined
