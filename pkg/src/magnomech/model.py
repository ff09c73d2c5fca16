"""Physical parameter sets, unit handling, and bath occupations.

All frequencies, rates, detunings, and drive amplitudes are angular (rad/s).
Temperatures are in kelvin. Mode occupations are dimensionless.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR
from scipy.constants import k as K_BOLTZMANN

from .errors import SchemaError, UnphysicalInput

TWO_PI = 2.0 * math.pi

__all__ = [
    "SPEED_OF_LIGHT",
    "HBAR",
    "K_BOLTZMANN",
    "TWO_PI",
    "SpinningCavitySpec",
    "ThermalOccupations",
    "SystemParams",
    "thermal_occupation",
    "sagnac_shift",
    "drive_amplitude_from_power",
    "load_config",
    "params_to_dict",
]


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose occupation of a bath mode at angular frequency omega and temperature T."""
    if not math.isfinite(omega) or omega <= 0.0:
        raise UnphysicalInput(f"mode frequency must be finite and positive, got {omega!r}")
    if not math.isfinite(temperature) or temperature < 0.0:
        raise UnphysicalInput(f"temperature must be finite and nonnegative, got {temperature!r}")
    if temperature == 0.0:
        return 0.0
    x = HBAR * omega / (K_BOLTZMANN * temperature)
    if x > 700.0:
        # expm1 would overflow; occupation is zero to double precision
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class SpinningCavitySpec:
    """Geometry and rotation state of the spinning resonator.

    ``dispersion`` is dn/dlambda in 1/m. ``direction`` selects the drive
    propagation sense relative to the rotation: "cw" gives a positive
    frequency shift, "ccw" a negative one.
    """

    angular_velocity: float
    refractive_index: float
    radius: float
    wavelength: float
    dispersion: float = 0.0
    direction: str = "cw"

    def __post_init__(self) -> None:
        if self.direction not in ("cw", "ccw"):
            raise UnphysicalInput(f"direction must be 'cw' or 'ccw', got {self.direction!r}")
        for name in ("angular_velocity", "refractive_index", "radius", "wavelength"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise UnphysicalInput(f"{name} must be finite and positive, got {value!r}")
        if not math.isfinite(self.dispersion):
            raise UnphysicalInput("dispersion must be finite")


def sagnac_shift(spec: SpinningCavitySpec, omega_cavity: float) -> float:
    """Rotation-induced cavity frequency shift, signed by drive direction."""
    if not math.isfinite(omega_cavity) or omega_cavity <= 0.0:
        raise UnphysicalInput("cavity frequency must be finite and positive")
    n = spec.refractive_index
    drag = 1.0 - 1.0 / n**2 - (spec.wavelength / n) * spec.dispersion
    magnitude = spec.angular_velocity * (n * spec.radius * omega_cavity / SPEED_OF_LIGHT) * drag
    return magnitude if spec.direction == "cw" else -magnitude


def drive_amplitude_from_power(power: float, kappa_a: float, omega_drive: float) -> float:
    """Coherent drive amplitude (rad/s) delivered by a source of given power (W)."""
    if not math.isfinite(power) or power < 0.0:
        raise UnphysicalInput(f"power must be finite and nonnegative, got {power!r}")
    if kappa_a <= 0.0 or omega_drive <= 0.0:
        raise UnphysicalInput("kappa_a and omega_drive must be positive")
    return math.sqrt(2.0 * kappa_a * power / (HBAR * omega_drive))


@dataclass(frozen=True)
class ThermalOccupations:
    """Bath occupations of the cavity, magnon, and mechanical modes."""

    n_a: float
    n_m: float
    n_b: float

    def __post_init__(self) -> None:
        for name in ("n_a", "n_m", "n_b"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise UnphysicalInput(f"{name} must be finite and nonnegative, got {value!r}")

    @classmethod
    def from_temperature(
        cls, omega_a: float, omega_m: float, omega_b: float, temperature: float
    ) -> "ThermalOccupations":
        return cls(
            n_a=thermal_occupation(omega_a, temperature),
            n_m=thermal_occupation(omega_m, temperature),
            n_b=thermal_occupation(omega_b, temperature),
        )


@dataclass(frozen=True)
class SystemParams:
    """Full parameter set of the driven three-mode system.

    ``kappa_*`` are half linewidths: each mode amplitude decays as
    exp(-kappa t). ``kerr_k0`` is the self-interaction coefficient of the
    magnon mode, ``delta_f`` the rotation-induced shift added to the cavity
    resonance, and ``epsilon_d`` the coherent drive amplitude.
    """

    omega_a: float
    omega_m: float
    omega_b: float
    omega_d: float
    kappa_a: float
    kappa_m: float
    kappa_b: float
    g_ma: float
    g_mb: float
    kerr_k0: float = 0.0
    delta_f: float = 0.0
    epsilon_d: float = 0.0
    temperature: float = 0.0

    def __post_init__(self) -> None:
        for name in ("omega_a", "omega_m", "omega_b", "omega_d", "kappa_a", "kappa_m", "kappa_b"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise UnphysicalInput(f"{name} must be finite and positive, got {value!r}")
        for name in ("g_ma", "g_mb", "epsilon_d"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise UnphysicalInput(f"{name} must be finite and nonnegative, got {value!r}")
        for name in ("kerr_k0", "delta_f"):
            if not math.isfinite(getattr(self, name)):
                raise UnphysicalInput(f"{name} must be finite")
        if not math.isfinite(self.temperature) or self.temperature < 0.0:
            raise UnphysicalInput(f"temperature must be finite and nonnegative, got {self.temperature!r}")

    @property
    def delta_a(self) -> float:
        """Bare cavity-drive detuning, before the rotation shift."""
        return self.omega_a - self.omega_d

    @property
    def delta_m(self) -> float:
        """Bare magnon-drive detuning, before Kerr and mechanical shifts."""
        return self.omega_m - self.omega_d

    def occupations(self) -> ThermalOccupations:
        return ThermalOccupations.from_temperature(
            self.omega_a, self.omega_m, self.omega_b, self.temperature
        )

    def replace(self, **changes: float) -> "SystemParams":
        return replace(self, **changes)

    @classmethod
    def defaults(cls, **overrides: float) -> "SystemParams":
        """Microwave-band benchmark parameter set.

        Mechanical mode at 2pi x 10 MHz, cavity at 2pi x 10 GHz, drive detuned
        one mechanical frequency below the cavity, magnon detuned one
        mechanical frequency above the drive. When ``kerr_k0`` is not
        overridden it is set to eta_b * omega_b, the value at which the
        mechanically induced and intrinsic cubic shifts cancel.
        """
        omega_b = float(overrides.pop("omega_b", TWO_PI * 1.0e7))
        omega_a = float(overrides.pop("omega_a", TWO_PI * 1.0e10))
        omega_d = float(overrides.pop("omega_d", omega_a + omega_b))
        base = dict(
            omega_a=omega_a,
            omega_m=omega_d + omega_b,
            omega_b=omega_b,
            omega_d=omega_d,
            kappa_a=0.1 * omega_b,
            kappa_m=0.1 * omega_b,
            kappa_b=TWO_PI * 100.0,
            g_ma=0.2 * omega_b,
            g_mb=1.0e-3 * omega_b,
            delta_f=0.2 * omega_b,
            epsilon_d=450.0 * omega_b,
            temperature=0.010,
        )
        base.update(overrides)
        if "kerr_k0" not in base:
            eta_b = base["g_mb"] ** 2 / (base["kappa_b"] ** 2 + omega_b**2)
            base["kerr_k0"] = eta_b * omega_b
        return cls(**base)


_FIELD_NAMES = (
    "omega_a",
    "omega_m",
    "omega_b",
    "omega_d",
    "kappa_a",
    "kappa_m",
    "kappa_b",
    "g_ma",
    "g_mb",
    "kerr_k0",
    "delta_f",
    "epsilon_d",
    "temperature",
)

# keys resolved against base fields rather than stored directly
_DERIVED_KEYS = ("delta_a", "delta_m", "drive_power_w", "spin")

_SPIN_KEYS = {
    "angular_velocity",
    "angular_velocity_hz",
    "refractive_index",
    "radius",
    "wavelength",
    "dispersion",
    "direction",
}


def _spelled(key: str) -> tuple[str, str]:
    """Split a config key into its base name and unit spelling."""
    if key.endswith("_over_omega_b"):
        return key[: -len("_over_omega_b")], "ratio"
    if key.endswith("_hz"):
        return key[: -len("_hz")], "hz"
    return key, "plain"


def load_config(source: dict | str | Path) -> SystemParams:
    """Build a ``SystemParams`` from a JSON file or an already parsed mapping.

    Every field of ``SystemParams`` may be given directly in rad/s, as
    ``<name>_hz`` in ordinary hertz, or as ``<name>_over_omega_b`` in
    multiples of the mechanical frequency. ``delta_a`` fixes ``omega_d``
    relative to the cavity, ``delta_m`` then fixes ``omega_m`` relative to
    the drive. ``drive_power_w`` converts a source power to ``epsilon_d``.
    A ``spin`` table is converted through ``sagnac_shift`` into ``delta_f``.
    Unknown keys and conflicting spellings are rejected.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config is not valid JSON: {exc}") from exc
    else:
        raw = source
    if not isinstance(raw, dict):
        raise SchemaError("config root must be a JSON object")

    values: dict[str, tuple[str, float]] = {}
    spin_table = None
    for key, value in raw.items():
        if key == "spin":
            if not isinstance(value, dict):
                raise SchemaError("spin must be a JSON object")
            unknown = sorted(set(value) - _SPIN_KEYS)
            if unknown:
                raise SchemaError(f"unknown spin keys: {unknown}")
            spin_table = value
            continue
        base, spelling = _spelled(key)
        if base not in _FIELD_NAMES and base not in _DERIVED_KEYS:
            raise SchemaError(f"unknown config key: {key!r}")
        if base in ("temperature", "drive_power_w") and spelling != "plain":
            raise SchemaError(f"{base} takes no unit suffix, got {key!r}")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"config value for {key!r} must be a number")
        if base in values:
            raise SchemaError(f"{base} given in more than one spelling")
        values[base] = (spelling, float(value))

    if "omega_d" in values and "delta_a" in values:
        raise SchemaError("omega_d and delta_a are mutually exclusive")
    if "omega_m" in values and "delta_m" in values:
        raise SchemaError("omega_m and delta_m are mutually exclusive")
    if "epsilon_d" in values and "drive_power_w" in values:
        raise SchemaError("epsilon_d and drive_power_w are mutually exclusive")
    if spin_table is not None and "delta_f" in values:
        raise SchemaError("spin and delta_f are mutually exclusive")

    def resolve(base: str, omega_b: float) -> float:
        spelling, value = values[base]
        if spelling == "hz":
            return TWO_PI * value
        if spelling == "ratio":
            return value * omega_b
        return value

    if "omega_b" in values:
        spelling, value = values["omega_b"]
        if spelling == "ratio":
            raise SchemaError("omega_b cannot be given relative to itself")
        omega_b = TWO_PI * value if spelling == "hz" else value
    else:
        omega_b = TWO_PI * 1.0e7

    overrides: dict[str, float] = {"omega_b": omega_b}
    for base in _FIELD_NAMES:
        if base in values and base != "omega_b":
            overrides[base] = resolve(base, omega_b)

    omega_a = overrides.get("omega_a", TWO_PI * 1.0e10)
    if "delta_a" in values:
        overrides["omega_d"] = omega_a - resolve("delta_a", omega_b)
    omega_d = overrides.get("omega_d", omega_a + omega_b)
    if "delta_m" in values:
        overrides["omega_m"] = omega_d + resolve("delta_m", omega_b)
    if "drive_power_w" in values:
        kappa_a = overrides.get("kappa_a", 0.1 * omega_b)
        overrides["epsilon_d"] = drive_amplitude_from_power(
            values["drive_power_w"][1], kappa_a, omega_d
        )
    if spin_table is not None:
        table = dict(spin_table)
        if "angular_velocity_hz" in table:
            if "angular_velocity" in table:
                raise SchemaError("angular_velocity given in more than one spelling")
            table["angular_velocity"] = TWO_PI * table.pop("angular_velocity_hz")
        spec = SpinningCavitySpec(**table)
        overrides["delta_f"] = sagnac_shift(spec, omega_a)

    return SystemParams.defaults(**overrides)


def params_to_dict(params: SystemParams) -> dict[str, float]:
    """JSON-ready view of a parameter set, all rates in rad/s."""
    return asdict(params)
