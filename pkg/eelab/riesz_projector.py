"""
Konturintegralberäkning av A₁ 1_{<E}(K) A₂.

Denna modul innehåller rektangelkonturen som skär reella axeln vid E,
kvadratur längs dess kanter med parvisa noder (z, z̄), adaptiv
panelförfining, ett spektralt orakel för validering samt den empiriska
konstanten för den viktade resolventen.

Med R(z) = A₁ (K - z)⁻¹ A₂ blir bidragen från konjugerade nodpar:

    horisontella kanter:  -(2πi)⁻¹ (R(x - is) - R(x + is)) dx
    högra kanten:         -(2π)⁻¹ (R(E + iη) + R(E - iη)) dη
    vänstra kanten:       +(2π)⁻¹ (R(l + iη) + R(l - iη)) dη

med η ∈ ]0, s], så ingen nod hamnar på reella axeln.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from .errors import DomainError, EnergyTieError, PreconditionError, ShapeMismatchError

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 8

# Egenvärden inom TIE_RELATIVE·‖K‖ från E avvisas
TIE_RELATIVE = 1e-8

HERMITIAN_TOLERANCE = 1e-12

MAX_SOLVES = 100_000

DEFAULT_TARGET = 1e-10


@dataclass(frozen=True)
class ContourSpec:
    """Rektangeln med hörn i (left, ±s) och (E, ±s)."""

    energy: float
    left: float
    half_height: float = 1.0
    nodes_per_edge: int = 64
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if not self.left < self.energy:
            raise DomainError("Konturens vänstra kant måste ligga till vänster om E")
        if not self.half_height > 0:
            raise DomainError("Konturens halva höjd måste vara positiv")
        if self.nodes_per_edge < 1 or self.order < 1:
            raise DomainError("Antalet noder måste vara positivt")

    @classmethod
    def for_operator(cls, eigenvalues: np.ndarray, energy: float, half_height: float = 1.0,
                     **kwargs) -> "ContourSpec":
        """Standardkonturen med vänster kant vid -1 + min σ(K)."""
        return cls(energy=energy, left=float(np.min(eigenvalues)) - 1.0,
                   half_height=half_height, **kwargs)

    def with_half_height(self, half_height: float) -> "ContourSpec":
        return ContourSpec(self.energy, self.left, half_height, self.nodes_per_edge, self.order)


@dataclass(frozen=True)
class Panel:
    """Ett parameterintervall [lower, upper] på en kant."""

    edge: str
    lower: float
    upper: float

    def halves(self) -> Tuple["Panel", "Panel"]:
        mid = 0.5 * (self.lower + self.upper)
        return Panel(self.edge, self.lower, mid), Panel(self.edge, mid, self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass
class WeightOperator:
    """Diagonal positiv vikt b(x), rollen som B i den viktade resolventen."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)) or w.min() <= 0:
            raise DomainError("Vikterna måste vara ändliga och strikt positiva")
        self.weights = w

    @classmethod
    def japanese_bracket(cls, sites: np.ndarray) -> "WeightOperator":
        """b(x) = ⟨x⟩⁻¹ = (1 + |x|²)^{-1/2}."""
        pts = np.asarray(sites, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls(1.0 / np.sqrt(1.0 + np.sum(pts * pts, axis=1)))

    @classmethod
    def identity(cls, n: int) -> "WeightOperator":
        return cls(np.ones(n))

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.weights)

    @property
    def inverse(self) -> np.ndarray:
        return np.diag(1.0 / self.weights)

    def __len__(self) -> int:
        return int(self.weights.size)


@dataclass
class ContourResult:
    """Resultatet av en konturintegration."""

    value: np.ndarray
    solves: int
    panels: int
    converged: bool
    estimated_error: float
    max_imag: float = 0.0
    layout: List[Panel] = field(default_factory=list)


@lru_cache(maxsize=None)
def _gauss(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _check_operator(K: np.ndarray) -> np.ndarray:
    matrix = np.asarray(K)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeMismatchError(f"K måste vara kvadratisk, fick {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if matrix.size and float(np.max(np.abs(matrix - matrix.conj().T))) > HERMITIAN_TOLERANCE * scale:
        raise DomainError("K måste vara hermitesk")
    return matrix


def _check_factors(K: np.ndarray, A1: np.ndarray, A2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a1 = np.atleast_2d(np.asarray(A1))
    a2 = np.atleast_2d(np.asarray(A2))
    n = K.shape[0]
    if a1.shape[1] != n or a2.shape[0] != n:
        raise ShapeMismatchError(f"A₁ {a1.shape} och A₂ {a2.shape} passar inte K {K.shape}")
    return a1, a2


def _check_tie(eigenvalues: np.ndarray, energy: float) -> float:
    """Avståndet från E till spektrum; avvisar sammanfallande egenvärden."""
    norm = max(1.0, float(np.max(np.abs(eigenvalues))))
    gap = float(np.min(np.abs(eigenvalues - energy)))
    if gap <= TIE_RELATIVE * norm:
        raise EnergyTieError(f"E = {energy:g} ligger {gap:.2e} från ett egenvärde hos K")
    return gap


def spectral_oracle(K, A1, A2, E: float) -> np.ndarray:
    """
    A₁ (Σ_{λ<E} v vᴴ) A₂ via egenvärdesuppdelning.

    Raises:
        EnergyTieError: Om E sammanfaller med ett egenvärde
    """
    matrix = _check_operator(K)
    a1, a2 = _check_factors(matrix, A1, A2)
    eigenvalues, vectors = linalg.eigh(matrix)
    _check_tie(eigenvalues, E)
    q = vectors[:, eigenvalues < E]
    value = (a1 @ q) @ (q.conj().T @ a2)
    if np.isrealobj(matrix) and np.isrealobj(a1) and np.isrealobj(a2):
        return np.real(value)
    return value


def contour_nodes(contour: ContourSpec, gap: float) -> List[Panel]:
    """
    Startlayout av paneler.

    Högra kanten får dyadiskt graderade paneler [s·2^{-j-1}, s·2^{-j}] ned mot
    η = 0, med J = ⌈log₂(s/gap)⌉ + 2 nivåer; de horisontella kanterna får
    likformiga paneler med bredd högst s; vänstra kanten ligger minst 1 från
    spektrum och får likformiga paneler med bredd högst 1.

    Args:
        contour: Konturen
        gap: Avståndet från E till närmaste egenvärde

    Returns:
        Paneler i fast ordning
    """
    if not gap > 0:
        raise DomainError("Avståndet till spektrum måste vara positivt")
    s = contour.half_height
    per_edge = max(1, math.ceil(contour.nodes_per_edge / contour.order))

    length = contour.energy - contour.left
    count = max(per_edge, math.ceil(length / s))
    edges = np.linspace(contour.left, contour.energy, count + 1)
    panels = [Panel("horizontal", float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]

    levels = max(1, math.ceil(math.log2(s / gap)) + 2) if gap < s else 2
    breaks = s * 2.0 ** -np.arange(levels + 1)
    breaks = np.append(breaks, 0.0)[::-1]
    panels += [Panel("right", float(a), float(b)) for a, b in zip(breaks[:-1], breaks[1:])]

    count = max(2, math.ceil(s))
    edges = np.linspace(0.0, s, count + 1)
    panels += [Panel("left", float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]
    return panels


class _ResolventEvaluator:
    """Räknar R(z) = A₁ (K - z)⁻¹ A₂ med en LU-faktorisering per nod."""

    def __init__(self, K: np.ndarray, A1: np.ndarray, A2: np.ndarray, contour: ContourSpec,
                 workers: int = 1):
        self.K = K
        self.A1 = A1
        self.A2 = A2
        self.contour = contour
        self.workers = workers
        self.solves = 0
        self._eye = np.eye(K.shape[0])

    def _solve(self, z: complex) -> np.ndarray:
        lu = linalg.lu_factor(self.K - z * self._eye)
        return self.A1 @ linalg.lu_solve(lu, self.A2.astype(complex))

    def _resolvents(self, points: Sequence[complex]) -> List[np.ndarray]:
        self.solves += len(points)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(self._solve, points))
        return [self._solve(z) for z in points]

    def panel_value(self, panel: Panel) -> np.ndarray:
        """Gaussregeln på en panel, summerad över konjugerade nodpar."""
        x, w = _gauss(self.contour.order)
        t = 0.5 * (panel.upper - panel.lower) * x + 0.5 * (panel.upper + panel.lower)
        w = 0.5 * panel.width * w
        s = self.contour.half_height
        if panel.edge == "horizontal":
            upper = t + 1j * s
            factor = -1.0 / (2j * math.pi)
        elif panel.edge == "right":
            upper = self.contour.energy + 1j * t
            factor = -1.0 / (2.0 * math.pi)
        else:
            upper = self.contour.left + 1j * t
            factor = 1.0 / (2.0 * math.pi)

        points = list(upper) + list(np.conj(upper))
        values = self._resolvents(points)
        n = len(upper)
        total = np.zeros((self.A1.shape[0], self.A2.shape[1]), dtype=complex)
        # Paren (z, z̄) summeras tillsammans i fast ordning
        for k in range(n):
            if panel.edge == "horizontal":
                pair = values[n + k] - values[k]
            else:
                pair = values[k] + values[n + k]
            total += w[k] * pair
        return factor * total


def integrate_contour(K, A1, A2, E: float, contour: Optional[ContourSpec] = None,
                      target: float = DEFAULT_TARGET, max_solves: int = MAX_SOLVES,
                      workers: int = 1) -> ContourResult:
    """
    Adaptiv kvadratur av -(2πi)⁻¹ ∮ A₁ (K - z)⁻¹ A₂ dz.

    Varje panel jämförs med summan av sina två halvor; paneler vars
    skillnad är störst halveras tills den skattade totala felet är under
    target·‖resultat‖ eller antalet lösningar når max_solves.

    Args:
        K: Hermitesk matris
        A1: Vänsterfaktor
        A2: Högerfaktor
        E: Fermienergi, konturens högra kant
        contour: Kontur; standard är vänster kant vid -1 + min σ(K) och s = 1
        target: Relativ noggrannhet
        max_solves: Största antal resolventlösningar
        workers: Trådar för nodlösningarna

    Returns:
        ContourResult

    Raises:
        DomainError: Om K inte är hermitesk
        EnergyTieError: Om E sammanfaller med ett egenvärde
    """
    matrix = _check_operator(K)
    a1, a2 = _check_factors(matrix, A1, A2)
    eigenvalues = linalg.eigvalsh(matrix)
    gap = _check_tie(eigenvalues, E)
    if contour is None:
        contour = ContourSpec.for_operator(eigenvalues, E)
    elif abs(contour.energy - E) > 0:
        raise DomainError("Konturens högra kant måste ligga vid E")
    if contour.left >= float(eigenvalues.min()):
        raise DomainError("Konturen omsluter inte alla egenvärden under E")

    evaluator = _ResolventEvaluator(matrix, a1, a2, contour, workers)
    panels = contour_nodes(contour, gap)

    # Varje post: (panel, värde på panelen, värden på halvorna)
    entries = []
    for panel in panels:
        left, right = panel.halves()
        entries.append((panel, evaluator.panel_value(panel),
                        (evaluator.panel_value(left), evaluator.panel_value(right))))

    converged = False
    while True:
        errors = np.array([linalg.norm(whole - (h[0] + h[1])) for _, whole, h in entries])
        total = sum(h[0] + h[1] for _, _, h in entries)
        scale = max(float(linalg.norm(total)), 1e-300)
        estimated = float(errors.sum())
        if estimated <= target * scale:
            converged = True
            break
        worst = np.flatnonzero(errors > 0.5 * target * scale / len(entries))
        cost = 4 * 2 * contour.order * worst.size
        if evaluator.solves + cost > max_solves:
            logger.warning("Konturintegralen nådde %d lösningar utan att konvergera (fel %.2e)",
                           evaluator.solves, estimated / scale)
            break
        refined = []
        selected = set(worst.tolist())
        for idx, (panel, whole, halves) in enumerate(entries):
            if idx not in selected:
                refined.append((panel, whole, halves))
                continue
            for child, value in zip(panel.halves(), halves):
                a, b = child.halves()
                refined.append((child, value, (evaluator.panel_value(a), evaluator.panel_value(b))))
        entries = refined

    value = total
    max_imag = float(np.max(np.abs(value.imag))) if value.size else 0.0
    if np.isrealobj(matrix) and np.isrealobj(a1) and np.isrealobj(a2):
        if max_imag > 1e-10 * max(1.0, scale):
            logger.warning("Imaginärdel %.2e kvar efter parvis summering", max_imag)
        value = value.real

    logger.debug("Konturintegral: %d paneler, %d lösningar, fel %.2e",
                 len(entries), evaluator.solves, estimated / scale)
    return ContourResult(
        value=value,
        solves=evaluator.solves,
        panels=len(entries),
        converged=converged,
        estimated_error=estimated / scale,
        max_imag=max_imag,
        layout=[panel for panel, _, _ in entries],
    )


def riesz_sandwich(K, A1, A2, E: float, contour: Optional[ContourSpec] = None,
                   target: float = DEFAULT_TARGET, workers: int = 1) -> np.ndarray:
    """
    A₁ 1_{<E}(K) A₂ som konturintegral.

    Returns:
        Matrisen; reell när K, A₁ och A₂ är reella
    """
    return integrate_contour(K, A1, A2, E, contour, target=target, workers=workers).value


def fixed_quadrature(K, A1, A2, E: float, nodes: int,
                     contour: Optional[ContourSpec] = None) -> Tuple[np.ndarray, int]:
    """
    Icke-adaptiv kvadratur på startlayouten med Gaussordning vald efter nodbudget.

    Returns:
        (värde, antal lösningar)
    """
    matrix = _check_operator(K)
    a1, a2 = _check_factors(matrix, A1, A2)
    eigenvalues = linalg.eigvalsh(matrix)
    gap = _check_tie(eigenvalues, E)
    base = contour if contour is not None else ContourSpec.for_operator(eigenvalues, E)
    panels = contour_nodes(base, gap)
    order = max(1, nodes // (2 * len(panels)))
    layout_contour = ContourSpec(base.energy, base.left, base.half_height, base.nodes_per_edge, order)
    evaluator = _ResolventEvaluator(matrix, a1, a2, layout_contour)
    value = sum(evaluator.panel_value(panel) for panel in panels)
    if np.isrealobj(matrix) and np.isrealobj(a1) and np.isrealobj(a2):
        value = value.real
    return value, evaluator.solves


def convergence_study(K, A1, A2, E: float, node_counts: Sequence[int],
                      contour: Optional[ContourSpec] = None) -> pd.DataFrame:
    """
    Relativt fel mot det spektrala oraklet per nodbudget.

    Args:
        K: Hermitesk matris
        A1: Vänsterfaktor
        A2: Högerfaktor
        E: Fermienergi
        node_counts: Minst tre nodbudgetar

    Returns:
        DataFrame med kolumnerna nodes, solves och relative_error

    Raises:
        PreconditionError: Om färre än tre nodbudgetar ges
    """
    if len(node_counts) < 3:
        raise PreconditionError("Konvergensstudien kräver minst tre nodbudgetar")
    oracle = spectral_oracle(K, A1, A2, E)
    scale = max(float(linalg.norm(oracle)), 1e-300)
    rows = []
    for nodes in sorted(node_counts):
        value, solves = fixed_quadrature(K, A1, A2, E, int(nodes), contour)
        rows.append({
            "nodes": int(nodes),
            "solves": solves,
            "relative_error": float(linalg.norm(value - oracle)) / scale,
        })
    df = pd.DataFrame(rows, columns=["nodes", "solves", "relative_error"])
    logger.info("Konvergensstudie: fel %.2e vid %d lösningar", df["relative_error"].iloc[-1],
                df["solves"].iloc[-1])
    return df


def weighted_resolvent_norms(K, B: WeightOperator, E: float, eta_grid: Sequence[float],
                             window: float = 0.0) -> np.ndarray:
    """
    ‖B (K - E - iη)⁻¹ Π_c B‖ för varje η i nätet.

    Π_c emuleras genom att egenvärden inom window från E utesluts.
    """
    matrix = _check_operator(K)
    if len(B) != matrix.shape[0]:
        raise ShapeMismatchError(f"Vikten har {len(B)} poster, K har {matrix.shape[0]}")
    etas = np.asarray(eta_grid, dtype=float)
    if etas.size == 0 or np.any(etas == 0.0):
        raise DomainError("η-nätet måste vara icke-tomt och sakna η = 0")
    eigenvalues, vectors = linalg.eigh(matrix)
    keep = np.abs(eigenvalues - E) >= window
    weighted = B.weights[:, None] * vectors[:, keep]
    shifted = eigenvalues[keep] - E
    norms = np.empty(etas.size)
    for i, eta in enumerate(etas):
        middle = weighted * (1.0 / (shifted - 1j * eta))[None, :]
        norms[i] = linalg.norm(middle @ weighted.conj().T, 2)
    return norms


def lap_constant(K, B: WeightOperator, E: float, eta_grid: Sequence[float],
                 window: float = 0.0) -> float:
    """
    Empiriskt supremum av den viktade resolventens norm över η-nätet.

    Args:
        K: Hermitesk matris
        B: Diagonal vikt
        E: Realdelen av z
        eta_grid: Nollskilda imaginärdelar
        window: Egenvärden inom detta avstånd från E räknas inte till Π_c

    Returns:
        sup_η ‖B (K - E - iη)⁻¹ Π_c B‖
    """
    norms = weighted_resolvent_norms(K, B, E, eta_grid, window)
    value = float(np.max(norms))
    logger.debug("Viktad resolvent: sup %.4g över %d värden på η", value, norms.size)
    return value
