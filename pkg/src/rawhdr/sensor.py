"""CMOS photoelectric response and heteroscedastic noise synthesis.

Random numbers come from numpy's PCG64 bit generator. Plane ``c`` of a packed
raw draws from ``PCG64(SeedSequence([seed, c]))`` with ``standard_normal``
(ziggurat), so each plane is reproducible on its own and independently of how
many planes are generated.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .raw import PackedRaw


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SensorParams:
    """Constants of the linear sensor response.

    ``charge_coeff`` folds the spectral integral: the per-pixel scene value is
    the already-integrated irradiance, scaled by this many electrons.
    """

    analog_gain: float = 1.0
    digital_gain: float = 1.0
    exposure_time: float = 1.0  # s
    spatial_response: float = 1.0
    area: float = 1.0  # m^2
    charge_coeff: float = 1.0  # e- per (W s m^-2)
    offset_voltage: float = 0.0  # V
    quant_step: float = 1.0  # V per DN

    def __post_init__(self):
        for name in ("analog_gain", "digital_gain", "exposure_time", "spatial_response",
                     "area", "charge_coeff", "quant_step"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive")
        if self.offset_voltage < 0:
            raise ParameterError("offset_voltage must be non-negative")


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian noise with variance ``shot_coeff * x + read_sigma**2``.

    Both coefficients are in normalized-signal units ([0, 1] full scale).
    ``source`` says where the numbers came from ("surrogate" for the built-in
    defaults, which are not a measured sensor calibration).
    """

    shot_coeff: float
    read_sigma: float
    label: str = "long"
    source: str = "config"

    def __post_init__(self):
        if self.shot_coeff < 0 or self.read_sigma < 0:
            raise ParameterError("noise coefficients must be non-negative")
        if self.label not in ("long", "short"):
            raise ParameterError(f"label must be 'long' or 'short', got {self.label!r}")

    def variance(self, x):
        return self.shot_coeff * np.asarray(x) + self.read_sigma**2


# Surrogate coefficients; the reference sensor calibration was never published.
DEFAULT_LONG_NOISE = NoiseModel(shot_coeff=0.003, read_sigma=0.01, label="long", source="surrogate")
DEFAULT_SHORT_NOISE = NoiseModel(shot_coeff=0.012, read_sigma=0.04, label="short", source="surrogate")


def sensor_response(scene_irradiance, params: SensorParams):
    """Digital number produced by the amplifier/ADC chain.

    ``D = (K_a * T * S * A * q * E + V_offset) / eta * K_d``
    """
    e = np.asarray(scene_irradiance, dtype=np.float64)
    if not np.all(np.isfinite(e)) or np.any(e < 0):
        raise ParameterError("scene irradiance must be finite and non-negative")
    p = params
    charge = p.exposure_time * p.spatial_response * p.area * p.charge_coeff * e
    return (p.analog_gain * charge + p.offset_voltage) / p.quant_step * p.digital_gain


def plane_rng(seed: int, plane: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, plane])))


def add_noise(clean, model: NoiseModel, seed: int) -> PackedRaw:
    """Add signal-dependent Gaussian noise and clamp the result below at 0."""
    if model.shot_coeff < 0 or model.read_sigma < 0:
        raise ParameterError("noise coefficients must be non-negative")
    scale = clean.exposure_scale if isinstance(clean, PackedRaw) else 1.0
    x = np.asarray(clean, dtype=np.float64)
    if np.any(x < 0):
        raise ParameterError("clean signal must be non-negative")
    if model.shot_coeff == 0 and model.read_sigma == 0:
        return PackedRaw(x.copy(), exposure_scale=scale)
    sigma = np.sqrt(model.variance(x))
    out = np.empty_like(x)
    for c in range(x.shape[0]):
        n = plane_rng(seed, c).standard_normal(x.shape[1:])
        out[c] = x[c] + sigma[c] * n
    return PackedRaw(np.maximum(out, 0.0), exposure_scale=scale)


def load_noise_config(path) -> dict[str, NoiseModel]:
    """Read ``{"long": {...}, "short": {...}}`` noise coefficients from JSON.

    Keys per model: ``shot_coeff`` (variance per unit normalized signal) and
    ``read_sigma`` (std. dev., normalized units). Missing models keep defaults.
    """
    cfg = json.loads(Path(path).read_text())
    models = {"long": DEFAULT_LONG_NOISE, "short": DEFAULT_SHORT_NOISE}
    for label in models:
        if label in cfg:
            entry = cfg[label]
            models[label] = NoiseModel(float(entry["shot_coeff"]), float(entry["read_sigma"]), label)
    return models


def load_sensor_params(path) -> SensorParams:
    return SensorParams(**json.loads(Path(path).read_text()))


def noise_to_dict(model: NoiseModel) -> dict:
    return asdict(model)
