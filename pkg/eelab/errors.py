"""
Undantag för eelab.

Alla undantag ärver från ValueError så att anropare som bara fångar
ValueError (som resten av kodbasen gör för felaktig indata) fortsätter att fungera.
"""

from typing import Optional


class EelabError(ValueError):
    """Basklass för alla fel som eelab kastar."""


class DomainError(EelabError):
    """Ett argument ligger utanför funktionens definitionsmängd."""


class SamplingError(EelabError):
    """Kvadraturnätet löser inte upp Fermivåglängden."""


class SpectrumExcursionError(EelabError):
    """Ett egenvärde ligger utanför [-tol, 1 + tol]; diskretiseringen är trasig."""


class EnergyTieError(EelabError):
    """Fermienergin sammanfaller med ett egenvärde hos den ändliga matrisen."""


class RegionBufferError(EelabError):
    """Området ligger för nära lådans rand."""


class ShapeMismatchError(EelabError):
    """Matriser eller nät har inkompatibla former."""


class PreconditionError(EelabError):
    """En förutsättning (norm, antal sampel, ...) är inte uppfylld."""


class ConfigError(EelabError):
    """Ogiltig körkonfiguration."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field
