"""
Gittermodell för H = -Δ + V med kompakt stödd potential.

Denna modul innehåller finita differens-Hamiltonianen på en låda med
Dirichletrand, Fermiprojektioner via fullständig egenvärdesuppdelning,
begränsade entropier samt korstermerna mellan den störda och den fria
projektionen som används i skrankorna för entropins tillväxt.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy import linalg, sparse
from scipy.interpolate import RegularGridInterpolator

from .errors import (DomainError, EnergyTieError, PreconditionError, RegionBufferError,
                     SamplingError, ShapeMismatchError, SpectrumExcursionError)
from .free_kernel import EnergyParams
from .restricted_projection import (DomainSpec, KernelOperator, SpectrumReport,
                                    entanglement_entropy, purity_defect)
from .schatten import frobenius_norm, power_sum, trace_f

logger = logging.getLogger(__name__)

LATTICE_DIMENSIONS = (1, 2)

PROFILES = ("square_well", "bump", "sampled")

# Största tillåtna a·√E
MAX_SPACING_MOMENTUM = 0.25

# Minsta kvot W/L
MIN_BUFFER_RATIO = 2.0

# Egenvärden närmare E än så räknas som sammanfallande
TIE_TOLERANCE = 1e-8

IDEMPOTENCY_TOLERANCE = 1e-8

RESTRICTED_SPECTRUM_TOLERANCE = 1e-10

MAX_SITES = 12_000

DEFAULT_SPACING = 0.25


def _energy(E: Union[EnergyParams, float]) -> float:
    if isinstance(E, EnergyParams):
        return E.fermi_energy
    return EnergyParams(float(E)).fermi_energy


@dataclass(frozen=True)
class PotentialSpec:
    """
    Begränsad potential med stöd i kuben [-R_V, R_V]^d.

    Profiler:
        square_well: konstant amplitud på hela kuben
        bump: amplitud·Π cos²(πx_i/(2R_V)), kontinuerlig ned till noll vid randen
        sampled: värden på ett likformigt nät över kuben, interpolerade linjärt
    """

    support_radius: float
    amplitude: float = 1.0
    profile: str = "square_well"
    samples: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not self.support_radius > 0:
            raise DomainError("Potentialens stödradie måste vara positiv")
        if self.profile not in PROFILES:
            raise DomainError(f"Okänd potentialprofil {self.profile!r}, välj bland {PROFILES}")
        if self.profile == "sampled":
            if not self.samples or len(self.samples) < 2:
                raise DomainError("En samplad potential behöver minst två värden")
            if not np.all(np.isfinite(self.samples)):
                raise DomainError("Potentialens värden måste vara ändliga")
        if not math.isfinite(self.amplitude):
            raise DomainError("Potentialens amplitud måste vara ändlig")

    @property
    def sup_norm(self) -> float:
        """‖V‖_∞."""
        if self.profile == "sampled":
            return abs(self.amplitude) * float(np.max(np.abs(self.samples)))
        return abs(self.amplitude)

    @property
    def descriptor(self) -> str:
        """Kort textbeskrivning för resultatrader."""
        return f"{self.profile}(R={self.support_radius:g},c={self.amplitude:g})"

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """
        V i punkterna (n, d); noll utanför stödet.

        Samplade profiler i d dimensioner tolkas som en tensor med samma
        antal värden per axel, så len(samples) måste vara m^d.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = pts.shape[1]
        R = self.support_radius
        inside = np.all(np.abs(pts) <= R, axis=1)
        values = np.zeros(pts.shape[0])
        if not inside.any():
            return values
        local = pts[inside]
        if self.profile == "square_well":
            values[inside] = self.amplitude
        elif self.profile == "bump":
            values[inside] = self.amplitude * np.prod(np.cos(0.5 * math.pi * local / R) ** 2, axis=1)
        else:
            data = np.asarray(self.samples, dtype=float)
            m = int(round(data.size ** (1.0 / d)))
            if m ** d != data.size:
                raise ShapeMismatchError(f"{data.size} värden bildar inget nät i {d} dimensioner")
            axis = np.linspace(-R, R, m)
            interpolator = RegularGridInterpolator((axis,) * d, data.reshape((m,) * d))
            values[inside] = self.amplitude * interpolator(local)
        return values


@dataclass(frozen=True)
class LatticeBox:
    """Lådan [-W, W]^d med gitteravstånd a och Dirichletrand."""

    dimension: int
    half_width: float
    spacing: float = DEFAULT_SPACING

    def __post_init__(self):
        if self.dimension not in LATTICE_DIMENSIONS:
            raise DomainError(f"Gittret stöder dimension {LATTICE_DIMENSIONS}, inte {self.dimension}")
        if not self.spacing > 0:
            raise DomainError("Gitteravståndet måste vara positivt")
        if not self.half_width >= self.spacing:
            raise DomainError("Lådans halvbredd måste vara minst ett gitteravstånd")
        if self.n_sites > MAX_SITES:
            raise PreconditionError(f"{self.n_sites} gitterpunkter överskrider gränsen {MAX_SITES}")

    @property
    def sites_per_axis(self) -> int:
        """N = 2W/a."""
        return int(round(2.0 * self.half_width / self.spacing))

    @property
    def n_sites(self) -> int:
        return self.sites_per_axis ** self.dimension

    def axis(self) -> np.ndarray:
        """Symmetriska koordinater längs en axel; väggarna ligger ett steg utanför."""
        N = self.sites_per_axis
        return (np.arange(N) - 0.5 * (N - 1)) * self.spacing

    def sites(self) -> np.ndarray:
        """Alla gitterpunkter (n, d) i samma ordning som Hamiltonianens rader."""
        grids = np.meshgrid(*([self.axis()] * self.dimension), indexing="ij")
        return np.column_stack([grid.ravel() for grid in grids])

    def boundary_sites(self) -> np.ndarray:
        """Mask för punkter närmast en vägg."""
        N = self.sites_per_axis
        idx = np.meshgrid(*([np.arange(N)] * self.dimension), indexing="ij")
        mask = np.zeros(self.n_sites, dtype=bool)
        for grid in idx:
            flat = grid.ravel()
            mask |= (flat == 0) | (flat == N - 1)
        return mask

    def check_resolution(self, E: Union[EnergyParams, float]) -> None:
        """
        Raises:
            SamplingError: Om a·√E > 1/4
        """
        k = math.sqrt(_energy(E))
        if self.spacing * k > MAX_SPACING_MOMENTUM * (1.0 + 1e-12):
            raise SamplingError(
                f"a·√E = {self.spacing * k:.3f} överskrider {MAX_SPACING_MOMENTUM}; minska gitteravståndet"
            )

    def check_buffer(self, L: float) -> None:
        """
        Raises:
            RegionBufferError: Om W/L < 2
        """
        if self.half_width < MIN_BUFFER_RATIO * L * (1.0 - 1e-12):
            raise RegionBufferError(
                f"W = {self.half_width:g} ger buffertkvot {self.half_width / L:.2f} < {MIN_BUFFER_RATIO} för L = {L:g}"
            )

    def doubled(self) -> "LatticeBox":
        """Samma gitter med dubbel halvbredd."""
        return LatticeBox(self.dimension, 2.0 * self.half_width, self.spacing)


@dataclass(frozen=True)
class ProjectionMatrix:
    """Fermiprojektionen 1_{<E}(H) som tät matris."""

    matrix: np.ndarray
    energy: float
    descriptor: str
    box: Optional[LatticeBox] = None
    occupied: int = 0
    idempotency_defect: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        # Skrivskyddad vy; anroparens array behåller sina flaggor.
        view = np.asarray(self.matrix).view()
        view.setflags(write=False)
        object.__setattr__(self, "matrix", view)

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])


def build_hamiltonian(box: LatticeBox, V: Optional[PotentialSpec] = None) -> KernelOperator:
    """
    Bygg den täta matrisen för -Δ + V.

    Laplacianen är (2d+1)-punktsstencilen skalad med a⁻² och Dirichletrand
    utanför lådan; V samplas i gitterpunkterna och läggs på diagonalen.

    Args:
        box: Lådan
        V: Potential, eller None för den fria Hamiltonianen

    Returns:
        KernelOperator med provenance "lattice"

    Raises:
        DomainError: Om potentialens stöd inte ryms i lådan
    """
    N = box.sites_per_axis
    a2 = box.spacing ** 2
    one_d = sparse.diags([-np.ones(N - 1), 2.0 * np.ones(N), -np.ones(N - 1)], [-1, 0, 1]) / a2
    laplacian = one_d
    if box.dimension == 2:
        eye = sparse.identity(N)
        laplacian = sparse.kron(one_d, eye) + sparse.kron(eye, one_d)

    matrix = laplacian.toarray()
    sites = box.sites()
    descriptor = "free"
    if V is not None:
        if V.support_radius >= box.half_width:
            raise DomainError(
                f"Potentialens stöd R_V = {V.support_radius:g} ryms inte i lådan W = {box.half_width:g}"
            )
        matrix[np.diag_indices_from(matrix)] += V.evaluate(sites)
        descriptor = V.descriptor

    logger.debug("Hamiltonian med %d punkter (%s)", box.n_sites, descriptor)
    return KernelOperator(
        matrix=matrix,
        provenance="lattice",
        metadata={"box": box, "potential": descriptor, "sites": sites},
    )


def dirichlet_eigenvalues(box: LatticeBox) -> np.ndarray:
    """Slutna formen (2/a²)(1 - cos(kπ/(N+1))), k = 1..N, för d = 1."""
    N = box.sites_per_axis
    k = np.arange(1, N + 1)
    return 2.0 / box.spacing ** 2 * (1.0 - np.cos(k * math.pi / (N + 1)))


def fermi_projection(H: KernelOperator, E: Union[EnergyParams, float]) -> ProjectionMatrix:
    """
    P = Σ_{λ_k < E} v_k v_kᵀ via fullständig symmetrisk egenvärdesuppdelning.

    Idempotensen kontrolleras genom de ockuperade egenvektorernas
    ortogonalitet: med Q = [v_k] är P² - P = Q(QᵀQ - I)Qᵀ, så
    ‖P² - P‖ ≤ (1 + δ)δ med δ = ‖QᵀQ - I‖.

    Args:
        H: Symmetrisk Hamiltonian
        E: Fermienergi

    Returns:
        ProjectionMatrix

    Raises:
        EnergyTieError: Om E ligger inom 1e-8 från ett egenvärde
        SpectrumExcursionError: Om idempotensen bryts
    """
    energy = _energy(E)
    eigenvalues, vectors = linalg.eigh(H.matrix)
    distance = float(np.min(np.abs(eigenvalues - energy)))
    if distance < TIE_TOLERANCE:
        raise EnergyTieError(f"E = {energy:g} ligger {distance:.2e} från ett egenvärde")

    occupied = eigenvalues < energy
    q = vectors[:, occupied]
    P = q @ q.T
    P = 0.5 * (P + P.T)

    defect = 0.0
    if q.shape[1]:
        gram = q.T @ q
        gram[np.diag_indices_from(gram)] -= 1.0
        delta = float(linalg.norm(gram, 2))
        defect = (1.0 + delta) * delta
    if defect > IDEMPOTENCY_TOLERANCE:
        raise SpectrumExcursionError(f"‖P² - P‖ ≤ {defect:.2e} överskrider {IDEMPOTENCY_TOLERANCE}")

    logger.debug("Fermiprojektion: %d av %d tillstånd under E = %g", int(occupied.sum()), H.size, energy)
    return ProjectionMatrix(
        matrix=P,
        energy=energy,
        descriptor=H.metadata.get("potential", "unknown"),
        box=H.metadata.get("box"),
        occupied=int(occupied.sum()),
        idempotency_defect=defect,
        metadata={"gap": distance, "sites": H.metadata.get("sites")},
    )


def idempotency_error(P: Union[ProjectionMatrix, np.ndarray]) -> float:
    """‖P² - P‖ i operatornorm, beräknad direkt."""
    matrix = P.matrix if isinstance(P, ProjectionMatrix) else np.asarray(P)
    return float(linalg.norm(matrix @ matrix - matrix, 2))


def region_mask(box: LatticeBox, L: float, shape: Optional[str] = None) -> np.ndarray:
    """
    Mask för gitterpunkterna i Λ_L.

    Args:
        box: Lådan
        L: Skalan
        shape: "interval", "box" eller "disc"; standard är interval i d = 1 och box annars

    Returns:
        Boolesk array med en post per gitterpunkt
    """
    if shape is None:
        shape = "interval" if box.dimension == 1 else "box"
    return DomainSpec(box.dimension, shape, L).contains(box.sites())


def _check_region(P: ProjectionMatrix, region: np.ndarray, buffer: bool = True) -> np.ndarray:
    mask = np.asarray(region, dtype=bool).ravel()
    if mask.size != P.size:
        raise ShapeMismatchError(f"Områdesmasken har {mask.size} poster, matrisen {P.size}")
    # Hela lådan har ingen inre rand och kräver ingen buffert
    if buffer and P.box is not None and mask.any() and not mask.all():
        if np.any(mask & P.box.boundary_sites()):
            raise RegionBufferError("Området når lådans rand")
    return mask


def restricted_spectrum(P: ProjectionMatrix, region: np.ndarray) -> SpectrumReport:
    """
    Egenvärden för huvudundermatrisen P[region, region].

    Raises:
        RegionBufferError: Om området når lådans rand
        SpectrumExcursionError: Om ett egenvärde ligger mer än 1e-10 utanför [0,1]
    """
    mask = _check_region(P, region)
    if not mask.any():
        return SpectrumReport(eigenvalues=np.empty(0))
    sub = P.matrix[np.ix_(mask, mask)]
    values = linalg.eigvalsh(sub)
    return SpectrumReport.from_values(values, RESTRICTED_SPECTRUM_TOLERANCE)


def restricted_entropy(P: ProjectionMatrix, region: np.ndarray, base: float = 2.0) -> float:
    """
    S = Σ h(λ) över spektrumet av P[region, region].

    Args:
        P: Fermiprojektion
        region: Mask för Λ_L
        base: Logaritmens bas

    Returns:
        Entropin
    """
    return entanglement_entropy(restricted_spectrum(P, region), base=base)


def off_block(P: Union[ProjectionMatrix, np.ndarray], region: np.ndarray) -> np.ndarray:
    """Blocket 1_{Λ^c} P 1_Λ: rader utanför området, kolumner i området."""
    matrix = P.matrix if isinstance(P, ProjectionMatrix) else np.asarray(P)
    mask = np.asarray(region, dtype=bool).ravel()
    if mask.size != matrix.shape[0]:
        raise ShapeMismatchError(f"Områdesmasken har {mask.size} poster, matrisen {matrix.shape[0]}")
    return matrix[np.ix_(~mask, mask)]


def _check_pair(P: ProjectionMatrix, P0: ProjectionMatrix) -> None:
    if P.matrix.shape != P0.matrix.shape:
        raise ShapeMismatchError(f"Projektionerna har formerna {P.matrix.shape} och {P0.matrix.shape}")
    if P.box is not None and P0.box is not None and P.box != P0.box:
        raise ShapeMismatchError("Projektionerna kommer från olika lådor")
    if abs(P.energy - P0.energy) > 1e-12 * max(1.0, abs(P.energy)):
        raise ShapeMismatchError(f"Projektionerna har olika energier {P.energy:g} och {P0.energy:g}")


def cross_term_hs(P: ProjectionMatrix, P0: ProjectionMatrix, region: np.ndarray) -> float:
    """
    ‖1_{Λ^c}(P0 - P)1_Λ‖₂.

    Raises:
        ShapeMismatchError: Om P och P0 inte kommer från samma låda och energi
    """
    _check_pair(P, P0)
    return frobenius_norm(off_block(P0, region) - off_block(P, region))


def schatten_difference(P: ProjectionMatrix, P0: ProjectionMatrix, region: np.ndarray,
                        s: float) -> float:
    """
    Σ_n a_n(A_L)^{2s} för A_L = 1_{Λ^c}(P - P0)1_Λ.

    Args:
        P: Störd projektion
        P0: Fri projektion
        region: Mask för Λ_L
        s: Exponent i ]1/2, 1[

    Returns:
        ‖A_L‖_{2s}^{2s}

    Raises:
        DomainError: Om s ligger utanför ]1/2, 1[
    """
    if not 0.5 < s < 1.0:
        raise DomainError("s måste ligga i ]1/2, 1[")
    _check_pair(P, P0)
    return power_sum(off_block(P, region) - off_block(P0, region), 2.0 * s)


def purity_identity_error(P: ProjectionMatrix, region: np.ndarray) -> float:
    """Relativ skillnad mellan Σ g(λ_n(P[region,region])) och ‖1_{Λ^c} P 1_Λ‖₂²."""
    spectrum = restricted_spectrum(P, region)
    lhs = purity_defect(spectrum)
    rhs = frobenius_norm(off_block(P, region)) ** 2
    return abs(lhs - rhs) / max(rhs, 1e-300) if rhs > 0 else abs(lhs)


def lower_bound_gap(P: ProjectionMatrix, P0: ProjectionMatrix, region: np.ndarray,
                    base: float = 2.0) -> float:
    """S - (½‖1_{Λ^c} P0 1_Λ‖₂² - ‖1_{Λ^c}(P0 - P)1_Λ‖₂²); icke-negativ."""
    entropy = restricted_entropy(P, region, base=base)
    free_part = 0.5 * frobenius_norm(off_block(P0, region)) ** 2
    return entropy - (free_part - cross_term_hs(P, P0, region) ** 2)


def upper_bound_f(P: ProjectionMatrix, region: np.ndarray) -> float:
    """3 Σ f(a_n(1_{Λ^c} P 1_Λ)), en övre skranke för S i bas 2."""
    _check_region(P, region)
    return 3.0 * trace_f(off_block(P, region))


def power_sum_bound(P: ProjectionMatrix, region: np.ndarray, s: float) -> float:
    """
    (6/(1-s))‖1_{Λ^c} P 1_Λ‖_{2s}^{2s}, en övre skranke för S i bas 2.

    Raises:
        DomainError: Om s ligger utanför ]0,1[
    """
    if not 0.0 < s < 1.0:
        raise DomainError("s måste ligga i ]0,1[")
    _check_region(P, region)
    return 6.0 / (1.0 - s) * power_sum(off_block(P, region), 2.0 * s)


def adaptive_exponent(L: float) -> float:
    """s(L) = 1 - 1/ln L, definierad för L ≥ 8."""
    if not L >= 8:
        raise DomainError("Den L-beroende exponenten kräver L ≥ 8")
    return 1.0 - 1.0 / math.log(L)


def exponent_for_growth(d: int, eps: float) -> float:
    """s = 1 - ε/(2d), exponenten som gör Schattentermen O(L^ε)."""
    if d < 1:
        raise DomainError("Dimensionen måste vara positiv")
    if not 0.0 < eps <= 1.0:
        raise DomainError("ε måste ligga i ]0,1]")
    return 1.0 - eps / (2.0 * d)


def projection_pair(box: LatticeBox, E: Union[EnergyParams, float],
                    V: Optional[PotentialSpec] = None) -> Tuple[ProjectionMatrix, ProjectionMatrix]:
    """
    Störd och fri projektion på samma låda.

    Returns:
        (P, P0); P är P0 när V är None
    """
    box.check_resolution(E)
    P0 = fermi_projection(build_hamiltonian(box), E)
    if V is None:
        return P0, P0
    return fermi_projection(build_hamiltonian(box, V), E), P0


def boundary_effect(box: LatticeBox, E: Union[EnergyParams, float], L: float,
                    V: Optional[PotentialSpec] = None, shape: Optional[str] = None) -> float:
    """
    Relativ ändring av S när lådans halvbredd dubblas.

    Returns:
        |S(2W) - S(W)| / S(W)
    """
    values = []
    for candidate in (box, box.doubled()):
        P, _ = projection_pair(candidate, E, V)
        values.append(restricted_entropy(P, region_mask(candidate, L, shape)))
    change = abs(values[1] - values[0]) / values[0] if values[0] > 0 else abs(values[1])
    logger.info("Randeffekt vid L=%g: S=%.6f mot %.6f (relativ ändring %.2e)", L, values[0], values[1], change)
    return change


def lattice_fermi_momentum(E: Union[EnergyParams, float], a: float) -> float:
    """k_F·a = arccos(1 - E a²/2) för gitterdispersionen (2/a²)(1 - cos ka)."""
    energy = _energy(E)
    arg = 1.0 - 0.5 * energy * a * a
    if arg < -1.0:
        raise DomainError("E ligger ovanför gitterbandet 4/a²")
    return math.acos(arg)


def free_lattice_entropy(E: Union[EnergyParams, float], L: float, a: float = DEFAULT_SPACING,
                         base: float = 2.0, sites: Optional[int] = None) -> float:
    """
    Entropin för ett intervall på det oändliga endimensionella gittret.

    Korrelationsmatrisen är Toeplitz med C_mn = sin(k_F a (m-n))/(π(m-n))
    och diagonal k_F a/π, så ingen lådtrunkering förekommer.

    Args:
        E: Fermienergi
        L: Halva intervallängden
        a: Gitteravstånd
        base: Logaritmens bas
        sites: Antal punkter; standard är antalet gitterpunkter m·a i [-L, L]

    Returns:
        Entropin
    """
    kfa = lattice_fermi_momentum(E, a)
    n = int(math.floor(2.0 * L / a + 1e-9)) + 1 if sites is None else int(sites)
    if n <= 0:
        return 0.0
    m = np.arange(1, n)
    column = np.empty(n)
    column[0] = kfa / math.pi
    column[1:] = np.sin(kfa * m) / (math.pi * m)
    values = linalg.eigvalsh(linalg.toeplitz(column))
    return entanglement_entropy(SpectrumReport.from_values(values, RESTRICTED_SPECTRUM_TOLERANCE), base=base)


def run_point(box: LatticeBox, E: Union[EnergyParams, float], L: float,
              V: Optional[PotentialSpec] = None, shape: Optional[str] = None,
              s: float = 0.75,
              projections: Optional[Tuple[ProjectionMatrix, ProjectionMatrix]] = None) -> Dict[str, Any]:
    """
    En fullständig gitterberäkning för en skala L.

    Args:
        box: Lådan, med W ≥ 2L
        E: Fermienergi
        L: Skalan
        V: Potential eller None
        shape: Områdets form
        s: Exponent för Schattentermen och potenssummeskranken
        projections: Förberäknat par (P, P0) för samma låda och energi

    Returns:
        Dictionary med entropier i båda baserna, renhetsdefekter, korstermer och skrankor
    """
    box.check_buffer(L)
    P, P0 = projections if projections is not None else projection_pair(box, E, V)
    region = region_mask(box, L, shape)

    spectrum = restricted_spectrum(P, region)
    spectrum_free = spectrum if P is P0 else restricted_spectrum(P0, region)
    entropy = entanglement_entropy(spectrum)
    cross = cross_term_hs(P, P0, region)
    off_free = frobenius_norm(off_block(P0, region)) ** 2

    oracle = float("nan")
    if box.dimension == 1 and V is None:
        oracle = free_lattice_entropy(P.energy, L, box.spacing, sites=int(region.sum()))

    record = {
        "L": L,
        "E": P.energy,
        "d": box.dimension,
        "a": box.spacing,
        "W": box.half_width,
        "shape": shape or ("interval" if box.dimension == 1 else "box"),
        "potential": P.descriptor,
        "n_sites": box.n_sites,
        "n_region": int(region.sum()),
        "S": entropy,
        "S_nat": entanglement_entropy(spectrum, base=math.e),
        "S_free": entanglement_entropy(spectrum_free),
        "S_free_nat": entanglement_entropy(spectrum_free, base=math.e),
        "S_lattice_oracle": oracle,
        "purity_defect": purity_defect(spectrum),
        "purity_defect_free": purity_defect(spectrum_free),
        "purity_identity_error": purity_identity_error(P, region),
        "cross_term_hs": cross,
        "s": s,
        "schatten_difference": 0.0 if P is P0 else schatten_difference(P, P0, region, s),
        "lower_bound_gap": entropy - (0.5 * off_free - cross ** 2),
        "upper_bound_f": upper_bound_f(P, region),
        "power_sum_bound": power_sum_bound(P, region, s),
        "clipped_count": spectrum.clipped_count,
        "max_excursion": spectrum.max_excursion,
    }
    logger.info("Gitterpunkt L=%g (%s): S=%.6f, korsterm %.3e", L, P.descriptor, entropy, cross)
    return record
