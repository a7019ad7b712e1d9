"""
Modul för att definiera resultatrader och deras kolumnschema.

Varje rad är självbeskrivande: indata ekas tillsammans med beräknade
värden, så att en resultatfil kan tolkas utan konfigurationen som
skapade den.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

STATUS_COLUMNS = ["mode", "status", "error"]

MODE_COLUMNS: Dict[str, List[str]] = {
    "sweep-free": [
        "L", "E", "d", "shape", "resolution", "n_nodes", "S", "S_nat",
        "S_oracle", "S_oracle_nat", "oracle_spacing", "purity_defect",
        "sandwich_upper", "trace", "clipped_count", "max_excursion",
    ],
    "sweep-perturbed": [
        "L", "E", "d", "a", "W", "shape", "potential", "n_sites", "n_region",
        "S", "S_nat", "S_free", "S_free_nat", "S_lattice_oracle",
        "purity_defect", "purity_defect_free", "purity_identity_error",
        "cross_term_hs", "s", "schatten_difference", "lower_bound_gap",
        "upper_bound_f", "power_sum_bound", "clipped_count", "max_excursion",
    ],
    "verify-inequalities": ["name", "samples", "max_violation", "worst_input", "tolerance", "passed"],
    "riesz-check": [
        "case", "n", "energy", "gap", "relative_error", "solves", "panels",
        "converged", "max_imag", "height_change",
    ],
    "green-decay": [
        "dimension", "z_real", "z_imag", "fitted_rate", "predicted_rate",
        "relative_rate_error", "samples", "r_min", "r_max", "fitted_power",
        "predicted_power",
    ],
    "fit": [
        "column", "base", "method", "sigma_hat", "area_coeff", "constant",
        "residual_rms", "points",
    ],
    "compare": [
        "L", "S_a", "S_b", "delta_S", "delta_S_nat", "cross_term_hs_a",
        "cross_term_hs_b", "delta_cross_term_hs", "delta_purity_defect",
    ],
}


def columns_for(mode: str) -> List[str]:
    """
    Fast kolumnordning för ett läge.

    Raises:
        KeyError: Om läget saknar schema
    """
    return STATUS_COLUMNS + MODE_COLUMNS[mode]


@dataclass
class ResultRow:
    """En rad i results.csv."""

    mode: str
    values: Dict[str, Any] = field(default_factory=dict)
    status: str = "ok"
    error: Optional[str] = None

    @classmethod
    def success(cls, mode: str, values: Dict[str, Any]) -> 'ResultRow':
        """
        Skapa en lyckad rad.

        Args:
            mode: Körläge
            values: Ekade indata och beräknade värden

        Returns:
            Ett ResultRow-objekt
        """
        return cls(mode=mode, values=dict(values))

    @classmethod
    def failure(cls, mode: str, inputs: Dict[str, Any], exc: BaseException) -> 'ResultRow':
        """
        Skapa en felrad som behåller indata och felets typ och meddelande.

        Args:
            mode: Körläge
            inputs: Indata som ledde till felet
            exc: Undantaget

        Returns:
            Ett ResultRow-objekt med status "error"
        """
        return cls(mode=mode, values=dict(inputs), status="error",
                   error=f"{type(exc).__name__}: {exc}")

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_record(self) -> Dict[str, Any]:
        """Platt dictionary med statuskolumnerna först."""
        record = {"mode": self.mode, "status": self.status, "error": self.error or ""}
        record.update(self.values)
        return record


def convert_to_rows(rows: List[ResultRow]) -> List[Dict[str, Any]]:
    """
    Konvertera resultatrader till platta dictionaries för CSV.

    Args:
        rows: Lista med ResultRow-objekt

    Returns:
        Lista med dictionaries
    """
    return [row.to_record() for row in rows]
