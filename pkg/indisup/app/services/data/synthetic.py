"""
Synthetic layered-stratum well logs.

Each well is a Markov chain over four facies with geometric layer thickness
(mean ≈ 30 samples). A layer draws its base density, gamma and resistivity from
facies ranges; smooth AR(1) variation rides on top inside the layer. The sonic
response is built from those smooth "true" properties:

  Δt_p = (1.45 − 0.32·ρ_true) · compaction(depth) + small noise
  Δt_s = r · Δt_p,   r = facies Vp/Vs ratio shifted by gamma, clipped to [1.6, 1.9]

while the input logs carry extra white measurement noise. Inputs therefore
determine the sonic response up to noise, context along the well helps to see
through that noise, and every sample satisfies Δt_s ≥ 1.6·Δt_p > (2/√3)·Δt_p.

Units: density g/cm³, resistivity ohm·m, gamma API, depth m, slowness in
100 µs/ft (so c = 1 yields moduli of order 1–10).
"""

from dataclasses import dataclass

import numpy as np
import structlog
from scipy.signal import lfilter

from indisup.app.services.data.records import Dataset, WellRecord

log = structlog.get_logger(__name__)

MIN_WELLS = 2
MIN_SAMPLES = 200
MEAN_LAYER_THICKNESS = 30
SAMPLE_INTERVAL = 0.5
VPVS_MIN = 1.6
VPVS_MAX = 1.9


@dataclass(frozen=True)
class Facies:
    name: str
    density: tuple[float, float]
    gamma: tuple[float, float]
    resistivity: tuple[float, float]
    vpvs: tuple[float, float]

    @property
    def gamma_mid(self) -> float:
        return 0.5 * (self.gamma[0] + self.gamma[1])


FACIES = (
    Facies("sandstone", density=(2.20, 2.45), gamma=(25.0, 55.0), resistivity=(8.0, 40.0), vpvs=(1.60, 1.70)),
    Facies("shale", density=(2.35, 2.60), gamma=(95.0, 150.0), resistivity=(1.5, 6.0), vpvs=(1.80, 1.90)),
    Facies("limestone", density=(2.55, 2.72), gamma=(10.0, 35.0), resistivity=(30.0, 120.0), vpvs=(1.80, 1.90)),
    Facies("dolomite", density=(2.70, 2.85), gamma=(15.0, 45.0), resistivity=(20.0, 90.0), vpvs=(1.72, 1.82)),
)

# Row = current facies, column = next facies (no self-transition at a layer boundary)
TRANSITIONS = np.array([
    [0.00, 0.60, 0.25, 0.15],
    [0.55, 0.00, 0.30, 0.15],
    [0.30, 0.40, 0.00, 0.30],
    [0.25, 0.35, 0.40, 0.00],
])

# Smooth in-layer variation (AR(1), stationary std) and white measurement noise
AR_PHI = 0.95
SMOOTH_STD = {"density": 0.03, "gamma": 6.0, "log_resistivity": 0.08}
MEASUREMENT_STD = {"density": 0.04, "gamma": 12.0, "log_resistivity": 0.10}
DTP_NOISE_STD = 0.004
VPVS_GAMMA_SLOPE = 0.0015
COMPACTION_PER_KM = 0.03


def _ar1(rng: np.random.Generator, n: int, std: float) -> np.ndarray:
    innovations = rng.normal(0.0, std * np.sqrt(1.0 - AR_PHI ** 2), size=n)
    return lfilter([1.0], [1.0, -AR_PHI], innovations)


def _facies_sequence(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample facies index and per-sample layer index."""
    facies = np.empty(n, dtype=np.int64)
    layer = np.empty(n, dtype=np.int64)
    current = int(rng.integers(len(FACIES)))
    pos = 0
    k = 0
    while pos < n:
        thickness = int(rng.geometric(1.0 / MEAN_LAYER_THICKNESS))
        end = min(n, pos + thickness)
        facies[pos:end] = current
        layer[pos:end] = k
        pos = end
        k += 1
        current = int(rng.choice(len(FACIES), p=TRANSITIONS[current]))
    return facies, layer


def _generate_well(rng: np.random.Generator, well_id: str, n: int) -> WellRecord:
    facies, layer = _facies_sequence(rng, n)
    # Layer-level base properties
    _, first_sample = np.unique(layer, return_index=True)
    layer_facies = facies[first_sample]
    base_density = np.array([rng.uniform(*FACIES[f].density) for f in layer_facies])
    base_gamma = np.array([rng.uniform(*FACIES[f].gamma) for f in layer_facies])
    base_log_res = np.array([rng.uniform(*np.log10(FACIES[f].resistivity)) for f in layer_facies])
    base_vpvs = np.array([rng.uniform(*FACIES[f].vpvs) for f in layer_facies])

    rho_true = base_density[layer] + _ar1(rng, n, SMOOTH_STD["density"])
    gamma_true = base_gamma[layer] + _ar1(rng, n, SMOOTH_STD["gamma"])
    log_res_true = base_log_res[layer] + _ar1(rng, n, SMOOTH_STD["log_resistivity"])

    start_depth = rng.uniform(1500.0, 3000.0)
    depth = start_depth + SAMPLE_INTERVAL * np.arange(n)

    gamma_mid = np.array([f.gamma_mid for f in FACIES])[facies]
    vpvs = np.clip(base_vpvs[layer] + VPVS_GAMMA_SLOPE * (gamma_true - gamma_mid), VPVS_MIN, VPVS_MAX)
    compaction = 1.0 - COMPACTION_PER_KM * (depth - 2000.0) / 1000.0
    dtp = (1.45 - 0.32 * rho_true) * compaction + rng.normal(0.0, DTP_NOISE_STD, size=n)
    dts = vpvs * dtp

    density = rho_true + rng.normal(0.0, MEASUREMENT_STD["density"], size=n)
    gamma = np.maximum(gamma_true + rng.normal(0.0, MEASUREMENT_STD["gamma"], size=n), 0.0)
    resistivity = 10.0 ** (log_res_true + rng.normal(0.0, MEASUREMENT_STD["log_resistivity"], size=n))

    return WellRecord(
        well_id=well_id,
        depth=depth,
        density=density,
        resistivity=resistivity,
        gamma=gamma,
        dts=dts,
        dtp=dtp,
    )


def generate_synthetic_field(seed: int, n_wells: int, samples_per_well: int) -> Dataset:
    """Deterministic synthetic field of `n_wells` wells named W001, W002, ..."""
    if n_wells < MIN_WELLS:
        raise ValueError(f"need at least {MIN_WELLS} wells, got {n_wells}")
    if samples_per_well < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples per well, got {samples_per_well}")

    rng = np.random.default_rng(seed)
    width = max(3, len(str(n_wells)))
    wells = tuple(
        _generate_well(rng, f"W{i + 1:0{width}d}", samples_per_well)
        for i in range(n_wells)
    )
    log.info("synthetic_field_generated", seed=seed, wells=n_wells, samples_per_well=samples_per_well)
    return Dataset(wells=wells)
