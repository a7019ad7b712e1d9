"""
Körkonfiguration för eelab.

Experimentfiler är nyckel/värde-filer i dotenv-format. Sektioner skrivs
med dubbelt understreck (LATTICE__SPACING=0.25) och miljövariabler med
prefixet EELAB_ skriver över filens värden. Den tolkade konfigurationen
valideras av pydantic-modellen RunConfig.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Extra, ValidationError, validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

MODES = ("sweep-free", "sweep-perturbed", "fit", "verify-inequalities", "riesz-check", "green-decay")

SWEEP_MODES = ("sweep-free", "sweep-perturbed")

ENV_PREFIX = "EELAB_"

SECTION_SEPARATOR = "__"


def _split_list(value: Any) -> Any:
    """"25, 50,100" -> ["25", "50", "100"]; tomma strängar blir tomma listor."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def _empty_to_none(value: Any) -> Any:
    return None if value == "" else value


class Section(BaseModel):
    """Gemensam bas för alla sektioner: okända nycklar är fel."""

    class Config:
        extra = Extra.forbid
        validate_assignment = True


class LatticeConfig(Section):
    spacing: float = 0.25
    buffer_ratio: float = 2.0
    schatten_s: float = 0.75
    oracle_spacing: float = 0.1

    @validator("spacing", "oracle_spacing")
    def positive_spacing(cls, value):
        if value <= 0:
            raise ValueError("gitteravståndet måste vara positivt")
        return value

    @validator("buffer_ratio")
    def buffer_at_least_two(cls, value):
        if value < 2.0:
            raise ValueError("buffertkvoten W/L måste vara minst 2")
        return value

    @validator("schatten_s")
    def schatten_range(cls, value):
        if not 0.5 < value < 1.0:
            raise ValueError("s måste ligga i ]1/2, 1[")
        return value


class PotentialConfig(Section):
    profile: str = "square_well"
    radius: float = 2.0
    amplitude: float = 1.0
    file: Optional[str] = None

    @validator("profile")
    def known_profile(cls, value):
        if value not in ("none", "square_well", "bump", "sampled"):
            raise ValueError(f"okänd profil {value!r}")
        return value

    @validator("radius")
    def positive_radius(cls, value):
        if value <= 0:
            raise ValueError("stödradien måste vara positiv")
        return value

    _empty_file = validator("file", pre=True, allow_reuse=True)(_empty_to_none)


class InequalityConfig(Section):
    points: int = 100_000
    pair_points: int = 1_000
    samples: int = 500
    matrix_size: int = 20
    s_values: List[float] = [0.1, 0.25, 0.5, 0.51, 0.75, 0.9, 0.99]

    _split_s = validator("s_values", pre=True, allow_reuse=True)(_split_list)

    @validator("points", "pair_points", "samples", "matrix_size")
    def positive_count(cls, value):
        if value < 1:
            raise ValueError("antalet måste vara positivt")
        return value


class RieszConfig(Section):
    half_height: float = 1.0
    target: float = 1e-10
    max_solves: int = 100_000
    lattice_sites: int = 400
    random_size: int = 8
    random_cases: int = 5
    node_counts: List[int] = [64, 128, 256, 512, 1024]

    _split_nodes = validator("node_counts", pre=True, allow_reuse=True)(_split_list)

    @validator("half_height", "target")
    def positive_value(cls, value):
        if value <= 0:
            raise ValueError("värdet måste vara positivt")
        return value

    @validator("random_size")
    def interior_gap(cls, value):
        if value < 4:
            raise ValueError("random_size måste vara minst 4 för att ha ett inre spektralgap")
        return value

    @validator("lattice_sites")
    def energy_off_spectrum(cls, value):
        # E = 2 ligger i spektrumet 2 - 2cos(kπ/(N+1)) exakt när N är udda
        if value < 2 or value % 2:
            raise ValueError("lattice_sites måste vara ett jämnt tal ≥ 2 så att E = 2 inte är ett egenvärde")
        return value


class GreenConfig(Section):
    z_values: List[str] = ["1+1j", "1j", "4+0.5j"]
    dimensions: List[int] = [1, 3]
    eta_values: List[float] = [1e-6, 1e-4, 1e-2, 1.0, 10.0]

    _split_lists = validator("z_values", "dimensions", "eta_values", pre=True, allow_reuse=True)(_split_list)

    @validator("z_values", each_item=True)
    def upper_half_plane(cls, value):
        try:
            z = complex(value.replace(" ", ""))
        except ValueError:
            raise ValueError(f"{value!r} är inget komplext tal")
        if z.imag <= 0:
            raise ValueError("z måste ha positiv imaginärdel")
        return value.replace(" ", "")

    @validator("eta_values", each_item=True)
    def nonzero_eta(cls, value):
        if value == 0:
            raise ValueError("η måste vara nollskild")
        return value

    @validator("dimensions", each_item=True)
    def supported_dimension(cls, value):
        if value not in (1, 2, 3):
            raise ValueError("dimensionen måste vara 1, 2 eller 3")
        return value

    @property
    def points(self) -> List[complex]:
        return [complex(z) for z in self.z_values]


class FitConfig(Section):
    input: Optional[str] = None
    column: str = "S"

    _empty_input = validator("input", pre=True, allow_reuse=True)(_empty_to_none)


class RunConfig(Section):
    """En fullständigt validerad körning."""

    mode: str
    dimension: int = 1
    fermi_energy: Optional[float] = None
    l_values: List[float] = []
    shape: Optional[str] = None
    resolution: float = 4.0
    output: str = "results"
    seed: int = 1
    threads: int = 1
    lattice: LatticeConfig = LatticeConfig()
    potential: PotentialConfig = PotentialConfig()
    inequalities: InequalityConfig = InequalityConfig()
    riesz: RieszConfig = RieszConfig()
    green: GreenConfig = GreenConfig()
    fit: FitConfig = FitConfig()

    _split_l = validator("l_values", pre=True, allow_reuse=True)(_split_list)
    _empty_optional = validator("fermi_energy", "shape", pre=True, allow_reuse=True)(_empty_to_none)

    @validator("mode")
    def known_mode(cls, value):
        if value not in MODES:
            raise ValueError(f"okänt läge {value!r}, välj bland {', '.join(MODES)}")
        return value

    @validator("dimension")
    def supported_dimension(cls, value):
        if value not in (1, 2, 3):
            raise ValueError("dimensionen måste vara 1, 2 eller 3")
        return value

    @validator("fermi_energy")
    def positive_energy(cls, value):
        if value is not None and not value > 0:
            raise ValueError("Fermienergin måste vara positiv")
        return value

    @validator("l_values")
    def increasing_scales(cls, value):
        if any(L <= 0 for L in value):
            raise ValueError("alla L måste vara positiva")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("L-värdena måste vara strikt växande")
        return value

    @validator("resolution")
    def positive_resolution(cls, value):
        if value <= 0:
            raise ValueError("upplösningen måste vara positiv")
        return value

    @validator("threads")
    def positive_threads(cls, value):
        if value < 1:
            raise ValueError("antalet trådar måste vara minst 1")
        return value

    @property
    def domain_shape(self) -> str:
        """Områdets form, med standard interval i d = 1 och box annars."""
        if self.shape:
            return self.shape
        return "interval" if self.dimension == 1 else "box"


def _nest(flat: Mapping[str, Any]) -> Dict[str, Any]:
    """{"LATTICE__SPACING": "0.25"} -> {"lattice": {"spacing": "0.25"}}."""
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        if value is None:
            continue
        parts = key.lower().split(SECTION_SEPARATOR)
        target = nested
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"{key} krockar med en skalär nyckel", field=key.lower())
        target[parts[-1]] = value
    return nested


def _known_keys() -> set:
    keys = set()
    for name, model_field in RunConfig.__fields__.items():
        if isinstance(model_field.type_, type) and issubclass(model_field.type_, Section):
            keys.update(f"{name}{SECTION_SEPARATOR}{sub}".upper() for sub in model_field.type_.__fields__)
        else:
            keys.add(name.upper())
    return keys


def environment_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """EELAB_-variabler som motsvarar kända konfigurationsnycklar."""
    environ = os.environ if environ is None else environ
    known = _known_keys()
    overrides = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):]
            if name in known:
                overrides[name] = value
    return overrides


def _field_name(error: Dict[str, Any]) -> str:
    loc = [str(part) for part in error.get("loc", ()) if not isinstance(part, int)]
    return ".".join(loc) if loc else "config"


def check_required(config: RunConfig) -> RunConfig:
    """
    Lägesspecifika obligatoriska fält.

    Raises:
        ConfigError: Med namnet på det saknade fältet
    """
    if config.mode in SWEEP_MODES:
        if config.fermi_energy is None:
            raise ConfigError(f"fermi_energy krävs i läget {config.mode}", field="fermi_energy")
        if not config.l_values:
            raise ConfigError(f"l_values krävs i läget {config.mode}", field="l_values")
    if config.mode == "sweep-perturbed" and config.dimension == 3:
        raise ConfigError("Gittret stöder bara dimension 1 och 2", field="dimension")
    if config.mode == "fit" and not config.fit.input:
        raise ConfigError("fit.input krävs i läget fit", field="fit.input")
    if config.shape and config.shape not in ("interval", "box", "disc"):
        raise ConfigError(f"okänd form {config.shape!r}", field="shape")
    return config


def build_config(values: Mapping[str, Any]) -> RunConfig:
    """
    Validera en platt nyckel/värde-mappning.

    Raises:
        ConfigError: Med namnet på det första ogiltiga fältet
    """
    try:
        config = RunConfig(**_nest(values))
    except ValidationError as exc:
        first = exc.errors()[0]
        field = _field_name(first)
        raise ConfigError(f"Ogiltig konfiguration för {field}: {first['msg']}", field=field) from exc
    return check_required(config)


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None,
                environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Läs en experimentfil, lägg på miljövariabler och explicita värden, och validera.

    Prioritetsordning: explicita overrides > EELAB_-variabler > filen.

    Args:
        path: Sökväg till experimentfilen, eller None
        overrides: Värden från kommandoraden
        environ: Miljö att läsa EELAB_-variabler från

    Returns:
        RunConfig

    Raises:
        ConfigError: Om filen saknas eller något fält är ogiltigt
    """
    values: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Konfigurationsfilen {path} finns inte", field="config")
        values.update({k.upper(): v for k, v in dotenv_values(path).items()})
        logger.debug("Läste %d nycklar från %s", len(values), path)
    values.update(environment_overrides(environ))
    if overrides:
        values.update({k.upper(): v for k, v in overrides.items() if v is not None})
    return build_config(values)


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, complex):
        return f"{value.real:g}{value.imag:+g}j"
    if value is None:
        return ""
    return str(value)


def config_lines(config: RunConfig) -> List[str]:
    """Fullständig nyckel/värde-dump med alla standardvärden utskrivna."""
    lines = []
    sections = []
    for name, value in config.dict().items():
        if isinstance(value, dict):
            sections.append((name, value))
        else:
            lines.append(f"{name.upper()}={_format_value(value)}")
    for name, section in sections:
        for key, value in section.items():
            lines.append(f"{name.upper()}{SECTION_SEPARATOR}{key.upper()}={_format_value(value)}")
    return lines
