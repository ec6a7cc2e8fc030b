"""Geometric multi-user channel generation.

Distance-based path loss, Rician/Rayleigh small-scale fading and
random-waypoint device mobility, matched to the case-study defaults:
-30 dB reference loss at 1 m, exponents 3.5 / 2.2 / 2.0 for the
device-BS / device-RIS / BS-RIS links, -80 dBm noise, 18 dB transmit SNR,
4 BS antennas, a 100 m BS-RIS backbone and a 25 x 25 m movement area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BelowReferenceDistance, InvalidInput


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss, one exponent per link type."""

    reference_loss_db: float = -30.0
    reference_distance_m: float = 1.0
    exponent_device_bs: float = 3.5
    exponent_device_ris: float = 2.2
    exponent_bs_ris: float = 2.0

    def __post_init__(self):
        if self.reference_distance_m <= 0:
            raise InvalidInput("reference distance must be positive")
        for exp in (self.exponent_device_bs, self.exponent_device_ris, self.exponent_bs_ris):
            if exp < 1.0:
                raise InvalidInput("path loss exponents must be >= 1")


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle in the ground plane, meters."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise InvalidInput("rectangle must have positive side lengths")

    def contains(self, point: np.ndarray) -> bool:
        x, y = float(point[0]), float(point[1])
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.array(
            [rng.uniform(self.x_min, self.x_max), rng.uniform(self.y_min, self.y_max)]
        )


def _default_area() -> Rectangle:
    # 25 x 25 m movement area; near edge 7.5 m from the RIS so that every
    # device stays beyond the 1 m path-loss reference distance.
    return Rectangle(107.5, 132.5, -12.5, 12.5)


@dataclass(frozen=True)
class NetworkGeometry:
    """Placement of BS, RIS and the device movement area."""

    bs_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ris_position: np.ndarray = field(default_factory=lambda: np.array([100.0, 0.0, 0.0]))
    device_area: Rectangle = field(default_factory=_default_area)
    bs_ris_distance_m: float = 100.0
    carrier_hz: float = 2.4e9

    def __post_init__(self):
        bs = np.asarray(self.bs_position, dtype=float)
        ris = np.asarray(self.ris_position, dtype=float)
        object.__setattr__(self, "bs_position", bs)
        object.__setattr__(self, "ris_position", ris)
        actual = float(np.linalg.norm(bs - ris))
        if abs(actual - self.bs_ris_distance_m) > 1e-6:
            raise InvalidInput(
                f"BS-RIS distance {actual:.6f} m != declared {self.bs_ris_distance_m:.6f} m"
            )


@dataclass(frozen=True)
class FadingModel:
    """Small-scale fading mix.

    Device links are drawn line-of-sight with probability ``los_probability``
    (Rician with ``device_links_rician_k_db``), otherwise Rayleigh.  The
    BS-RIS backbone is always Rician with ``bs_ris_rician_k_db``.  A K of
    -inf dB degenerates to pure Rayleigh.
    """

    bs_ris_rician_k_db: float = 10.0
    device_links_rician_k_db: float = -math.inf
    los_probability: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.los_probability <= 1.0:
            raise InvalidInput("los_probability must be in [0, 1]")


@dataclass(frozen=True)
class Device:
    """A mobile device: current position, current waypoint, current speed."""

    position: np.ndarray
    waypoint: np.ndarray
    speed_mps: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "waypoint", np.asarray(self.waypoint, dtype=float))


@dataclass(frozen=True)
class ChannelRealization:
    """One snapshot of all links: direct (L x M), ris_device (L x N), bs_ris (N x M)."""

    direct: np.ndarray
    ris_device: np.ndarray
    bs_ris: np.ndarray
    noise_power_dbm: float = -80.0
    tx_snr_db: float = 18.0

    def __post_init__(self):
        a = np.asarray(self.direct, dtype=complex)
        b = np.asarray(self.ris_device, dtype=complex)
        c = np.asarray(self.bs_ris, dtype=complex)
        for name, arr in (("direct", a), ("ris_device", b), ("bs_ris", c)):
            if arr.ndim != 2:
                raise InvalidInput(f"{name} must be a 2-D array")
            if not np.all(np.isfinite(arr.view(float))):
                raise InvalidInput(f"{name} contains non-finite entries")
        if a.shape[0] != b.shape[0]:
            raise InvalidInput("direct and ris_device disagree on the device count")
        if a.shape[0] < 1 or a.shape[1] < 1 or b.shape[1] < 1:
            raise InvalidInput("need at least one device, one BS antenna and one element")
        if c.shape != (b.shape[1], a.shape[1]):
            raise InvalidInput(
                f"bs_ris shape {c.shape} != (elements, antennas) = ({b.shape[1]}, {a.shape[1]})"
            )
        object.__setattr__(self, "direct", a)
        object.__setattr__(self, "ris_device", b)
        object.__setattr__(self, "bs_ris", c)

    @property
    def num_devices(self) -> int:
        return self.direct.shape[0]

    @property
    def num_bs_antennas(self) -> int:
        return self.direct.shape[1]

    @property
    def num_elements(self) -> int:
        return self.ris_device.shape[1]


def path_loss_db(distance_m: float, exponent: float, model: PathLossModel = PathLossModel()) -> float:
    """Log-distance path loss in dB (a negative gain)."""
    if distance_m < model.reference_distance_m:
        raise BelowReferenceDistance(
            f"distance {distance_m:.3f} m < reference {model.reference_distance_m:.3f} m"
        )
    return model.reference_loss_db - 10.0 * exponent * math.log10(
        distance_m / model.reference_distance_m
    )


def path_loss_linear(distance_m: float, exponent: float, model: PathLossModel = PathLossModel()) -> float:
    return 10.0 ** (path_loss_db(distance_m, exponent, model) / 10.0)


def sample_fading(rows: int, cols: int, rician_k_db: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-average-power fading block.

    sqrt(K/(K+1)) * LoS phase + sqrt(1/(K+1)) * CN(0,1); K = -inf dB is pure
    Rayleigh, K = +inf dB is a deterministic-magnitude LoS draw.
    """
    if rows < 1 or cols < 1:
        raise InvalidInput("fading block must have positive shape")
    if rician_k_db == -math.inf:
        return (
            rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        ) / np.sqrt(2.0)
    los = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (rows, cols)))
    if rician_k_db == math.inf:
        return los
    k = 10.0 ** (rician_k_db / 10.0)
    nlos = (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    ) / np.sqrt(2.0)
    return np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos


def _device_point(device: Device) -> np.ndarray:
    return np.array([device.position[0], device.position[1], 0.0])


def generate_realization(
    geometry: NetworkGeometry,
    devices: list[Device],
    pathloss: PathLossModel,
    fading: FadingModel,
    num_elements: int,
    rng: np.random.Generator,
    num_bs_antennas: int = 4,
    noise_power_dbm: float = -80.0,
    tx_snr_db: float = 18.0,
) -> ChannelRealization:
    """Draw one channel snapshot for the given device positions.

    Each link is sqrt(linear path loss) times a unit-power fading draw; the
    per-device links flip an independent LoS coin per link.  Draw order is
    fixed (per device: BS coin, BS fading, RIS coin, RIS fading; then the
    backbone), so a given generator state maps to exactly one realization.
    """
    if num_elements < 1:
        raise InvalidInput("need at least one reflecting element")
    if not devices:
        raise InvalidInput("need at least one device")
    m, n = num_bs_antennas, num_elements
    direct = np.zeros((len(devices), m), dtype=complex)
    ris_device = np.zeros((len(devices), n), dtype=complex)
    for idx, device in enumerate(devices):
        if not geometry.device_area.contains(device.position):
            raise InvalidInput(f"device {idx} is outside the movement area")
        point = _device_point(device)
        d_bs = float(np.linalg.norm(point - geometry.bs_position))
        d_ris = float(np.linalg.norm(point - geometry.ris_position))
        for target, dist, exponent, cols in (
            (direct, d_bs, pathloss.exponent_device_bs, m),
            (ris_device, d_ris, pathloss.exponent_device_ris, n),
        ):
            gain = path_loss_linear(dist, exponent, pathloss)
            k_db = (
                fading.device_links_rician_k_db
                if rng.uniform() < fading.los_probability
                else -math.inf
            )
            target[idx] = np.sqrt(gain) * sample_fading(1, cols, k_db, rng)[0]
    backbone_gain = path_loss_linear(geometry.bs_ris_distance_m, pathloss.exponent_bs_ris, pathloss)
    bs_ris = np.sqrt(backbone_gain) * sample_fading(n, m, fading.bs_ris_rician_k_db, rng)
    return ChannelRealization(direct, ris_device, bs_ris, noise_power_dbm, tx_snr_db)


def random_waypoint_step(
    device: Device,
    dt_s: float,
    area: Rectangle,
    speed_range: tuple[float, float],
    rng: np.random.Generator,
) -> Device:
    """Advance one time step of the random-waypoint model (zero pause time).

    The device heads straight for its waypoint; on arrival within one step it
    lands there and draws a fresh uniform waypoint and speed.
    """
    if dt_s <= 0:
        raise InvalidInput("dt must be positive")
    to_target = device.waypoint - device.position
    dist = float(np.linalg.norm(to_target))
    travel = device.speed_mps * dt_s
    if travel >= dist:
        new_waypoint = area.sample(rng)
        new_speed = float(rng.uniform(speed_range[0], speed_range[1]))
        return Device(device.waypoint.copy(), new_waypoint, new_speed)
    new_pos = device.position + (travel / dist) * to_target
    new_pos[0] = min(max(new_pos[0], area.x_min), area.x_max)
    new_pos[1] = min(max(new_pos[1], area.y_min), area.y_max)
    return replace(device, position=new_pos)


def initial_devices(
    count: int,
    area: Rectangle,
    speed_range: tuple[float, float],
    rng: np.random.Generator,
) -> list[Device]:
    """Uniform starting positions, waypoints and speeds."""
    if count < 1:
        raise InvalidInput("need at least one device")
    return [
        Device(area.sample(rng), area.sample(rng), float(rng.uniform(*speed_range)))
        for _ in range(count)
    ]


def mobility_snapshots(
    devices: list[Device],
    area: Rectangle,
    speed_range: tuple[float, float],
    dt_s: float,
    steps_per_snapshot: int,
    num_snapshots: int,
    rng: np.random.Generator,
) -> list[list[Device]]:
    """Device positions sampled along a shared random-waypoint run.

    The first snapshot is the initial state; each further snapshot is taken
    after ``steps_per_snapshot`` steps of ``dt_s`` seconds.
    """
    snapshots = [list(devices)]
    current = list(devices)
    for _ in range(num_snapshots - 1):
        for _ in range(steps_per_snapshot):
            current = [
                random_waypoint_step(d, dt_s, area, speed_range, rng) for d in current
            ]
        snapshots.append(current)
    return snapshots


@dataclass(frozen=True)
class ScenarioConfig:
    """Case-study bundle: geometry, propagation, mobility and system scalars.

    The fading default switches the device links to Rician K = 10 dB when
    the LoS coin lands heads, the mix used throughout the experiments;
    ``FadingModel()`` on its own defaults to pure Rayleigh device links.
    """

    geometry: NetworkGeometry = field(default_factory=NetworkGeometry)
    pathloss: PathLossModel = field(default_factory=PathLossModel)
    fading: FadingModel = field(
        default_factory=lambda: FadingModel(device_links_rician_k_db=10.0)
    )
    num_devices: int = 4
    num_bs_antennas: int = 4
    noise_power_dbm: float = -80.0
    tx_snr_db: float = 18.0
    speed_min_mps: float = 0.5
    speed_max_mps: float = 2.0
    dt_s: float = 0.1
    snapshots: int = 10
    steps_per_snapshot: int = 10

    def __post_init__(self):
        if self.num_devices < 1 or self.num_bs_antennas < 1:
            raise InvalidInput("need at least one device and one BS antenna")
        if self.snapshots < 1 or self.steps_per_snapshot < 1:
            raise InvalidInput("snapshot counts must be positive")
        if not 0.0 <= self.speed_min_mps <= self.speed_max_mps:
            raise InvalidInput("speed range must satisfy 0 <= min <= max")


def scenario_realizations(
    scenario: ScenarioConfig, num_elements: int, rng: np.random.Generator
) -> list[ChannelRealization]:
    """One mobility trial: a channel realization per location snapshot."""
    speed_range = (scenario.speed_min_mps, scenario.speed_max_mps)
    devices = initial_devices(scenario.num_devices, scenario.geometry.device_area, speed_range, rng)
    snapshots = mobility_snapshots(
        devices,
        scenario.geometry.device_area,
        speed_range,
        scenario.dt_s,
        scenario.steps_per_snapshot,
        scenario.snapshots,
        rng,
    )
    return [
        generate_realization(
            scenario.geometry,
            snapshot,
            scenario.pathloss,
            scenario.fading,
            num_elements,
            rng,
            num_bs_antennas=scenario.num_bs_antennas,
            noise_power_dbm=scenario.noise_power_dbm,
            tx_snr_db=scenario.tx_snr_db,
        )
        for snapshot in snapshots
    ]


CSV_HEADER = "link_type,device,row,col,re,im"


def realization_csv_rows(realization: ChannelRealization) -> list[str]:
    """Flatten a realization to CSV rows, one per complex entry.

    Vector links use col = 0 and row = the antenna/element index; the
    backbone matrix uses device = -1.  Floats carry 17 significant digits.
    """
    rows = [CSV_HEADER]

    def fmt(value: float) -> str:
        return f"{value:.17g}"

    for link, arr, device_of in (
        ("direct", realization.direct, lambda i: i),
        ("ris_device", realization.ris_device, lambda i: i),
    ):
        for dev in range(arr.shape[0]):
            for i, entry in enumerate(arr[dev]):
                rows.append(f"{link},{device_of(dev)},{i},0,{fmt(entry.real)},{fmt(entry.imag)}")
    for r in range(realization.bs_ris.shape[0]):
        for c in range(realization.bs_ris.shape[1]):
            entry = realization.bs_ris[r, c]
            rows.append(f"bs_ris,-1,{r},{c},{fmt(entry.real)},{fmt(entry.imag)}")
    return rows


def write_realization_csv(realization: ChannelRealization, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(realization_csv_rows(realization)) + "\n")
