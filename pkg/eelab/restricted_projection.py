"""
Nyström-diskretisering av den begränsade fria Fermiprojektionen.

Denna modul innehåller domänbeskrivningar, kvadraturnät, montering av
matrisen √(w_i w_j) K(x_i, x_j) för 1_{Λ_L} 1_{<E}(H₀) 1_{Λ_L}, extraktion
av dess spektrum i [0,1] och entropin S = Σ h(λ_n).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .entropy_functions import g, h, neg_xlog2x
from .errors import DomainError, PreconditionError, SamplingError, SpectrumExcursionError
from .free_kernel import EnergyParams, fermi_kernel_radial

logger = logging.getLogger(__name__)

SHAPES = ("interval", "box", "disc")

# Gauss-Legendre-noder per panel
GAUSS_ORDER = 8

# Minsta antal noder per Fermivåglängd 2π/√E
MIN_NODES_PER_WAVELENGTH = 4.0

# Tolerans för klämning av egenvärden in i [0,1]
DEFAULT_SPECTRUM_TOLERANCE = 1e-6

# Största matris som monteras tätt
MAX_NODES = 20_000

SYMMETRY_TOLERANCE = 1e-12

# Rader per block vid montering
BLOCK_ROWS = 1024


@dataclass(frozen=True)
class DomainSpec:
    """Basdomän Λ i R^d och skalan L; Λ_L = L·Λ."""

    dimension: int
    shape: str
    scale: float

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"Okänd domänform {self.shape!r}, välj bland {SHAPES}")
        if self.shape == "interval" and self.dimension != 1:
            raise DomainError("Intervallet kräver dimension 1")
        if self.shape == "disc" and self.dimension != 2:
            raise DomainError("Disken kräver dimension 2")
        if self.dimension not in (1, 2, 3):
            raise DomainError(f"Dimension {self.dimension} stöds inte")
        if not self.scale > 0:
            raise DomainError("Skalan L måste vara positiv")

    @property
    def base_volume(self) -> float:
        """|Λ| för basdomänen."""
        if self.shape == "disc":
            return math.pi
        return 2.0 ** self.dimension

    @property
    def volume(self) -> float:
        """|Λ_L| = L^d |Λ|."""
        return self.base_volume * self.scale ** self.dimension

    @property
    def surface_measure(self) -> float:
        """Randmåttet |∂Λ| för basdomänen."""
        if self.shape == "disc":
            return 2.0 * math.pi
        d = self.dimension
        return 2.0 * d * 2.0 ** (d - 1)

    def contains(self, points: np.ndarray, slack: float = 1e-12) -> np.ndarray:
        """Vilka punkter (n, d) ligger i det slutna Λ_L."""
        pts = np.atleast_2d(points)
        limit = self.scale * (1.0 + slack)
        if self.shape == "disc":
            return np.sqrt(np.sum(pts * pts, axis=1)) <= limit
        return np.all(np.abs(pts) <= limit, axis=1)

    def with_scale(self, scale: float) -> "DomainSpec":
        """Samma form med en ny skala."""
        return DomainSpec(self.dimension, self.shape, scale)


@dataclass(frozen=True)
class QuadratureGrid:
    """Kvadraturnoder i Λ_L med positiva vikter."""

    nodes: np.ndarray  # (n, d)
    weights: np.ndarray  # (n,)

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True)
class KernelOperator:
    """Tät symmetrisk matris med nät- och ursprungsinformation."""

    matrix: np.ndarray
    provenance: str  # "free-continuum" eller "lattice"
    grid: Optional[QuadratureGrid] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        # Skrivskyddad vy; anroparens array behåller sina flaggor.
        view = np.asarray(self.matrix).view()
        view.setflags(write=False)
        object.__setattr__(self, "matrix", view)

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])


@dataclass
class SpectrumReport:
    """Egenvärden i icke-växande ordning, klämda in i [0,1]."""

    eigenvalues: np.ndarray
    clipped_count: int = 0
    max_excursion: float = 0.0

    @classmethod
    def from_values(cls, values, tolerance: float = DEFAULT_SPECTRUM_TOLERANCE) -> "SpectrumReport":
        """
        Validera och kläm egenvärden.

        Args:
            values: Egenvärden i godtycklig ordning
            tolerance: Största tillåtna avvikelse utanför [0,1]

        Returns:
            En SpectrumReport

        Raises:
            SpectrumExcursionError: Om något värde ligger utanför [-tol, 1+tol]
        """
        lam = np.asarray(values, dtype=float).ravel()
        if lam.size == 0:
            return cls(eigenvalues=lam)
        excursion = float(max(0.0, -lam.min(), lam.max() - 1.0))
        if excursion > tolerance:
            raise SpectrumExcursionError(
                f"Egenvärde utanför [0,1] med {excursion:.3e} > tolerans {tolerance:.1e}"
            )
        outside = (lam < 0.0) | (lam > 1.0)
        clipped = int(np.count_nonzero(outside))
        if clipped:
            logger.debug("Klämmer %d egenvärden (största avvikelse %.3e)", clipped, excursion)
        lam = np.sort(np.clip(lam, 0.0, 1.0))[::-1]
        return cls(eigenvalues=lam, clipped_count=clipped, max_excursion=excursion)


def gauss_legendre_panels(a: float, b: float, panels: int, order: int = GAUSS_ORDER):
    """
    Sammansatt Gauss-Legendre-regel på [a, b].

    Args:
        a: Vänster ändpunkt
        b: Höger ändpunkt
        panels: Antal lika långa paneler
        order: Noder per panel

    Returns:
        (noder, vikter)
    """
    ref_x, ref_w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    weights = (half[:, None] * ref_w[None, :]).ravel()
    return nodes, weights


def build_grid(domain: DomainSpec, resolution: float) -> QuadratureGrid:
    """
    Bygg kvadraturnätet för Λ_L.

    Intervall och lådor får tensorprodukter av sammansatta Gauss-Legendre-regler,
    disken en polär regel (Gauss-Legendre i r, trapetsregel i vinkeln).

    Args:
        domain: Domänbeskrivning
        resolution: Noder per längdenhet

    Returns:
        QuadratureGrid

    Raises:
        PreconditionError: Om nätet blir större än MAX_NODES
    """
    if not resolution > 0:
        raise DomainError("resolution måste vara positiv")
    L = domain.scale
    d = domain.dimension

    if domain.shape == "disc":
        panels = max(1, math.ceil(L * resolution / GAUSS_ORDER))
        r, wr = gauss_legendre_panels(0.0, L, panels)
        n_theta = max(2 * GAUSS_ORDER, math.ceil(2.0 * math.pi * L * resolution))
        size = r.size * n_theta
        if size > MAX_NODES:
            raise PreconditionError(f"Nätet får {size} noder, max är {MAX_NODES}")
        theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        nodes = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
        weights = (wr[:, None] * r[:, None] * np.full(n_theta, 2.0 * math.pi / n_theta)[None, :]).ravel()
        return QuadratureGrid(nodes=nodes, weights=weights)

    panels = max(1, math.ceil(2.0 * L * resolution / GAUSS_ORDER))
    x, w = gauss_legendre_panels(-L, L, panels)
    size = x.size ** d
    if size > MAX_NODES:
        raise PreconditionError(f"Nätet får {size} noder, max är {MAX_NODES}")
    axes = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.column_stack([axis.ravel() for axis in axes])
    weight_axes = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([axis.ravel() for axis in weight_axes]), axis=0)
    return QuadratureGrid(nodes=nodes, weights=weights)


def check_sampling(E: EnergyParams, resolution: float) -> None:
    """
    Kontrollera att nätet har minst fyra noder per Fermivåglängd.

    Raises:
        SamplingError: Om upplösningen är för låg
    """
    per_wavelength = resolution * E.wavelength
    if per_wavelength < MIN_NODES_PER_WAVELENGTH:
        raise SamplingError(
            f"{per_wavelength:.2f} noder per Fermivåglängd, minst {MIN_NODES_PER_WAVELENGTH:g} krävs"
        )


def assemble_free_restriction(domain: DomainSpec, E: Union[EnergyParams, float],
                              resolution: float, workers: int = 1) -> KernelOperator:
    """
    Montera Nyström-matrisen M_ij = √(w_i w_j) K(x_i, x_j; E).

    Args:
        domain: Domänbeskrivning
        E: Fermienergi
        resolution: Noder per längdenhet
        workers: Antal trådar för radblocken

    Returns:
        KernelOperator med ursprung "free-continuum"

    Raises:
        SamplingError: Om upplösningen är för låg
    """
    if not isinstance(E, EnergyParams):
        E = EnergyParams(float(E))
    check_sampling(E, resolution)
    grid = build_grid(domain, resolution)
    n = grid.size
    sqrt_w = np.sqrt(grid.weights)
    matrix = np.empty((n, n))

    def fill(start: int) -> None:
        stop = min(start + BLOCK_ROWS, n)
        r = cdist(grid.nodes[start:stop], grid.nodes)
        matrix[start:stop] = sqrt_w[start:stop, None] * fermi_kernel_radial(r, E, domain.dimension) * sqrt_w[None, :]

    starts = range(0, n, BLOCK_ROWS)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)

    matrix = 0.5 * (matrix + matrix.T)
    logger.debug("Monterade fri begränsning: d=%d L=%g E=%g n=%d",
                 domain.dimension, domain.scale, E.fermi_energy, n)
    return KernelOperator(
        matrix=matrix,
        provenance="free-continuum",
        grid=grid,
        metadata={
            "dimension": domain.dimension,
            "shape": domain.shape,
            "scale": domain.scale,
            "fermi_energy": E.fermi_energy,
            "resolution": resolution,
        },
    )


def check_symmetric(matrix: np.ndarray, tolerance: float = SYMMETRY_TOLERANCE) -> None:
    """
    Kontrollera att en matris är symmetrisk (hermitesk) relativt sin största post.

    Raises:
        DomainError: Om matrisen inte är kvadratisk eller symmetrisk
    """
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError("Matrisen måste vara kvadratisk")
    if matrix.size == 0:
        return
    scale = max(float(np.max(np.abs(matrix))), 1e-300)
    asym = float(np.max(np.abs(matrix - matrix.conj().T)))
    if asym > tolerance * scale:
        raise DomainError(f"Matrisen är inte symmetrisk (avvikelse {asym:.3e})")


def spectrum01(op: Union[KernelOperator, np.ndarray],
               tolerance: float = DEFAULT_SPECTRUM_TOLERANCE) -> SpectrumReport:
    """
    Fullständig symmetrisk egenvärdesberäkning med validering mot [0,1].

    Args:
        op: KernelOperator eller tät symmetrisk matris
        tolerance: Största tillåtna avvikelse utanför [0,1]

    Returns:
        SpectrumReport

    Raises:
        SpectrumExcursionError: Om diskretiseringen ger egenvärden utanför toleransen
    """
    matrix = op.matrix if isinstance(op, KernelOperator) else np.asarray(op, dtype=float)
    check_symmetric(matrix)
    if matrix.shape[0] == 0:
        return SpectrumReport(eigenvalues=np.empty(0))
    values = linalg.eigvalsh(matrix)
    return SpectrumReport.from_values(values, tolerance)


def entanglement_entropy(spectrum: SpectrumReport, base: float = 2.0) -> float:
    """
    S = Σ_n h(λ_n).

    Args:
        spectrum: Validerat spektrum
        base: Logaritmens bas

    Returns:
        Entropin, ≥ 0
    """
    if spectrum.eigenvalues.size == 0:
        return 0.0
    return float(np.sum(h(spectrum.eigenvalues, base=base)))


def purity_defect(spectrum: SpectrumReport) -> float:
    """
    Σ_n g(λ_n), lika med ‖1_{Λ^c} P 1_Λ‖₂² för en projektion P.
    """
    if spectrum.eigenvalues.size == 0:
        return 0.0
    return float(np.sum(g(spectrum.eigenvalues)))


def sandwich_upper(spectrum: SpectrumReport) -> float:
    """Σ_n -3 g(λ_n) log₂ g(λ_n), övre skranken för entropin."""
    if spectrum.eigenvalues.size == 0:
        return 0.0
    return float(3.0 * np.sum(neg_xlog2x(g(spectrum.eigenvalues))))


def run_free_point(domain: DomainSpec, E: Union[EnergyParams, float], resolution: float,
                   tolerance: float = DEFAULT_SPECTRUM_TOLERANCE, workers: int = 1) -> Dict[str, Any]:
    """
    En fullständig beräkning för en skala L: montering, spektrum och entropier.

    Returns:
        Dictionary med L, E, d, n_nodes, S, S_nat, purity_defect och clipped_count
    """
    op = assemble_free_restriction(domain, E, resolution, workers=workers)
    spectrum = spectrum01(op, tolerance)
    energy = op.metadata["fermi_energy"]
    record = {
        "L": domain.scale,
        "E": energy,
        "d": domain.dimension,
        "shape": domain.shape,
        "n_nodes": op.size,
        "S": entanglement_entropy(spectrum),
        "S_nat": entanglement_entropy(spectrum, base=math.e),
        "purity_defect": purity_defect(spectrum),
        "sandwich_upper": sandwich_upper(spectrum),
        "trace": float(np.trace(op.matrix)),
        "clipped_count": spectrum.clipped_count,
        "max_excursion": spectrum.max_excursion,
    }
    logger.info("Fri punkt L=%g: S=%.6f (n=%d)", domain.scale, record["S"], op.size)
    return record
