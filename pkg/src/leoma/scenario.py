"""
JSON scenario documents.

A scenario is a flat JSON object. Field units:

* angles (``beta``, ``theta_u``, ``phi_u0``) in degrees;
* ``region_side``, ``d_min``, ``r_ap`` in wavelengths;
* ``R``, ``H`` in metres, or a string with ``m``/``km``;
* ``fc`` in Hz, or a string with ``Hz``/``kHz``/``MHz``/``GHz``;
* ``sigma2`` and ``P_s`` as strings with ``W``, ``mW``, ``dBW`` or ``dBm``.
  Bare numbers are rejected for powers.

Only ``K`` and ``J`` are required.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .channel import SPEED_OF_LIGHT, StationConfig
from .exceptions import InvalidConfigError
from .orbit import EARTH_RADIUS, MU_EARTH, ShellConfig
from .solver import SCHEMES, SolverConfig, init_layout

SWEEP_AXES = ("N", "P_s", "theta_u", "KJ")


class ScenarioError(ValueError):
    """A scenario document that cannot be turned into a valid configuration."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


_POWER_UNITS = {"w": 0.0, "mw": -30.0}
_DB_UNITS = {"dbw": 0.0, "dbm": -30.0}
_LENGTH_UNITS = {"m": 1.0, "km": 1e3}
_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_QUANTITY = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z]+)\s*$")


def parse_power(key: str, value) -> float:
    """Power string to watts, e.g. ``"-120 dBm"`` -> ``1e-15``."""
    if not isinstance(value, str):
        raise ScenarioError(key, f"power needs a unit (W, mW, dBW, dBm), got {value!r}")
    match = _QUANTITY.match(value)
    if not match:
        raise ScenarioError(key, f"cannot parse power {value!r}")
    number, unit = float(match.group(1)), match.group(2).lower()
    if unit in _DB_UNITS:
        return 10 ** ((number + _DB_UNITS[unit]) / 10)
    if unit in _POWER_UNITS:
        return number * 10 ** (_POWER_UNITS[unit] / 10)
    raise ScenarioError(key, f"unknown power unit {match.group(2)!r}")


def _parse_scaled(key: str, value, units: dict) -> float:
    if isinstance(value, bool):
        raise ScenarioError(key, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _QUANTITY.match(value)
        if match and match.group(2).lower() in units:
            return float(match.group(1)) * units[match.group(2).lower()]
    raise ScenarioError(key, f"cannot parse {value!r}; units: {', '.join(units)}")


def _number(key: str, value, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(key, f"expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ScenarioError(key, f"expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ScenarioError(key, f"expected a finite number, got {value!r}")
    return float(value)


def power_dbw(watts: float) -> float:
    return 10 * math.log10(watts)


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario in document units; see the module docstring."""

    K: int
    J: int
    R: float = EARTH_RADIUS
    H: float = 550e3
    beta: float = 65.0
    mu: float = MU_EARTH
    earth_period: float | None = None
    theta_u: float = 20.0
    phi_u0: float = 0.0
    M: int = 500
    N: int = 16
    fc: float = 14e9
    region_side: float = 3.0
    d_min: float = 0.5
    r_ap: float = 3.0
    eta: float = 0.5
    gamma_pl: float = 2.0
    rho0: float | None = None
    sigma2: float = 1e-15
    P_s: float = 1000.0
    gain_form: str = "printed"
    schemes: tuple[str, ...] = SCHEMES
    epsilon: float = 1e-4
    i_max: int = 100
    sca_steps: int = 20
    curvature: str = "antenna"
    adaptive_curvature: bool = True
    ma_init: str = "sparse"
    sweep: dict = field(default_factory=dict)
    elev_step: float = 1.0
    azim_step: float = 2.0

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.fc

    def shell(self) -> ShellConfig:
        return ShellConfig(
            J=self.J, K=self.K, R=self.R, H=self.H, beta=math.radians(self.beta), mu=self.mu,
            earth_period=self.earth_period,
        )

    def station(self) -> StationConfig:
        lam = self.wavelength
        return StationConfig(
            N=self.N,
            wavelength=lam,
            region_side=self.region_side * lam,
            d_min=self.d_min * lam,
            sigma2=self.sigma2,
            P_s=self.P_s,
            r_ap=self.r_ap * lam,
            eta=self.eta,
            gamma_pl=self.gamma_pl,
            rho0=self.rho0,
            gain_form=self.gain_form,
        )

    def solver(self, scheme: str) -> SolverConfig:
        return SolverConfig(
            epsilon=self.epsilon, i_max=self.i_max, scheme=scheme, sca_steps=self.sca_steps,
            curvature=self.curvature, adaptive_curvature=self.adaptive_curvature, ma_init=self.ma_init,
        )

    @property
    def theta_u_rad(self) -> float:
        return math.radians(self.theta_u)

    @property
    def phi_u0_rad(self) -> float:
        return math.radians(self.phi_u0)

    def validate(self) -> "ScenarioSpec":
        """Build every runtime object once; re-raise failures as `ScenarioError`."""
        if not 0 < self.beta < 180:
            raise ScenarioError("beta", f"must lie in (0, 180) degrees, got {self.beta}")
        if not -90 <= self.theta_u <= 90:
            raise ScenarioError("theta_u", f"must lie in [-90, 90] degrees, got {self.theta_u}")
        if not self.fc > 0:
            raise ScenarioError("fc", f"must be positive, got {self.fc}")
        if not self.elev_step > 0 or not self.azim_step > 0:
            raise ScenarioError("pattern", "grid steps must be positive")
        for name in self.schemes:
            if name not in SCHEMES:
                raise ScenarioError("schemes", f"unknown scheme {name!r}")
        if not self.schemes:
            raise ScenarioError("schemes", "at least one scheme is required")
        if int(self.M) != self.M or self.M < 1:
            raise ScenarioError("M", f"must be a positive integer, got {self.M}")
        try:
            self.shell()
            station = self.station()
            for scheme in self.schemes:
                cfg = self.solver(scheme)
                init_layout("DFPA" if scheme == "MA" and cfg.ma_init == "dense" else scheme, station)
        except InvalidConfigError as exc:
            # messages start with the offending field name
            raise ScenarioError(str(exc).split(" ")[0], str(exc)) from exc
        for axis, values in self.sweep.items():
            if axis not in SWEEP_AXES:
                raise ScenarioError(f"sweep.{axis}", f"unknown axis; expected one of {SWEEP_AXES}")
            if not values:
                raise ScenarioError(f"sweep.{axis}", "axis must not be empty")
        return self

    def variant(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)


_FIELD_NAMES = {f.name for f in fields(ScenarioSpec)}
_DOC_ONLY = {"pattern"}


def from_dict(doc: dict) -> ScenarioSpec:
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    for key in doc:
        if key not in _FIELD_NAMES | _DOC_ONLY or key in ("elev_step", "azim_step"):
            raise ScenarioError(key, "unknown key")
    for key in ("K", "J"):
        if key not in doc:
            raise ScenarioError(key, "required (no default constellation size)")

    kw: dict = {}
    for key in ("K", "J", "M", "N", "i_max", "sca_steps"):
        if key in doc:
            kw[key] = _number(key, doc[key], integer=True)
    for key in ("beta", "theta_u", "phi_u0", "mu", "region_side", "d_min", "r_ap", "eta", "gamma_pl", "epsilon"):
        if key in doc:
            kw[key] = _number(key, doc[key])
    for key in ("earth_period", "rho0"):
        if key in doc and doc[key] is not None:
            kw[key] = _number(key, doc[key])
    for key in ("R", "H"):
        if key in doc:
            kw[key] = _parse_scaled(key, doc[key], _LENGTH_UNITS)
    if "fc" in doc:
        kw["fc"] = _parse_scaled("fc", doc["fc"], _FREQ_UNITS)
    for key in ("sigma2", "P_s"):
        if key in doc:
            kw[key] = parse_power(key, doc[key])
    for key in ("gain_form", "curvature", "ma_init"):
        if key in doc:
            if not isinstance(doc[key], str):
                raise ScenarioError(key, f"expected a string, got {doc[key]!r}")
            kw[key] = doc[key]
    if "adaptive_curvature" in doc:
        if not isinstance(doc["adaptive_curvature"], bool):
            raise ScenarioError("adaptive_curvature", "expected true or false")
        kw["adaptive_curvature"] = doc["adaptive_curvature"]
    if "schemes" in doc:
        if not isinstance(doc["schemes"], list) or not all(isinstance(s, str) for s in doc["schemes"]):
            raise ScenarioError("schemes", "expected a list of scheme names")
        kw["schemes"] = tuple(doc["schemes"])
    if "pattern" in doc:
        pattern = doc["pattern"]
        if not isinstance(pattern, dict) or set(pattern) - {"elev_step", "azim_step"}:
            raise ScenarioError("pattern", "expected {'elev_step': deg, 'azim_step': deg}")
        for key in pattern:
            kw[key] = _number(f"pattern.{key}", pattern[key])
    if "sweep" in doc:
        kw["sweep"] = _parse_sweep(doc["sweep"])
    return ScenarioSpec(**kw).validate()


def _parse_sweep(sweep) -> dict:
    if not isinstance(sweep, dict):
        raise ScenarioError("sweep", "expected an object of axis -> list")
    out = {}
    for axis, values in sweep.items():
        key = f"sweep.{axis}"
        if axis not in SWEEP_AXES:
            raise ScenarioError(key, f"unknown axis; expected one of {SWEEP_AXES}")
        if not isinstance(values, list) or not values:
            raise ScenarioError(key, "axis must be a non-empty list")
        if axis == "N":
            out[axis] = [_number(key, v, integer=True) for v in values]
        elif axis == "P_s":
            out[axis] = [parse_power(key, v) for v in values]
        elif axis == "theta_u":
            out[axis] = [_number(key, v) for v in values]
        else:
            pairs = []
            for v in values:
                if not isinstance(v, list) or len(v) != 2:
                    raise ScenarioError(key, f"expected [K, J] pairs, got {v!r}")
                pairs.append((_number(key, v[0], integer=True), _number(key, v[1], integer=True)))
            out[axis] = pairs
    return out


def parse_scenario(path) -> ScenarioSpec:
    """Read and validate a JSON scenario file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON: {exc}") from exc
    return from_dict(doc)


def to_dict(spec: ScenarioSpec) -> dict:
    """Document form of `spec`; ``from_dict(to_dict(spec)) == spec``."""
    doc = asdict(spec)
    doc["schemes"] = list(spec.schemes)
    doc["sigma2"] = f"{spec.sigma2!r} W"
    doc["P_s"] = f"{spec.P_s!r} W"
    doc["pattern"] = {"elev_step": doc.pop("elev_step"), "azim_step": doc.pop("azim_step")}
    sweep = {}
    for axis, values in spec.sweep.items():
        if axis == "P_s":
            sweep[axis] = [f"{v!r} W" for v in values]
        elif axis == "KJ":
            sweep[axis] = [list(v) for v in values]
        else:
            sweep[axis] = list(values)
    doc["sweep"] = sweep
    return doc


def spec_hash(spec: ScenarioSpec) -> str:
    payload = json.dumps(to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
