"""
Scenario library and the direct positioning pipeline.

A scenario moves a human and a robot along waypoint paths inside the
anchor arena. Every tick the true positions are turned into noisy RSSI per
anchor, inverted to distances, trilaterated and compared with the truth.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

import locator
import pathloss
from agent_helper.enums import AgentId
from data.models.frames import DatasetRow, EstimatedFrame, GroundTruthFrame
from data.models.location import AnchorLayout, DistanceVector, Position
from data.models.radio import NoiseConfig, PathLossParams
from data.models.wire import ChannelConfig
from errors import IpsError, ScenarioError, ValidationError
from rng import make_generator

logger = logging.getLogger("ips.scenario")

DEFAULT_SAMPLE_PERIOD = 0.1
DEFAULT_STALENESS_HORIZON = 5
STATIONARY_DURATION = 90.0
MOBILE_DURATION = 5.0

HUMAN_START = (1.0, 0.0)
ROBOT_START = (2.0, 2.0)

Waypoint = tuple[float, float]

# Guards floor(duration / period) against 90 / 0.1 landing a hair under 900.
_TICK_EPS = 1e-9


def _as_path(points: Sequence[Sequence[float]]) -> tuple[Waypoint, ...]:
    return tuple((float(p[0]), float(p[1])) for p in points)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    human_path: tuple[Waypoint, ...]
    robot_path: tuple[Waypoint, ...]
    duration: float
    sample_period: float = DEFAULT_SAMPLE_PERIOD
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    layout: AnchorLayout = field(default_factory=AnchorLayout)
    params: tuple[PathLossParams, ...] = pathloss.DEFAULT_PARAMS
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    staleness_horizon: int = DEFAULT_STALENESS_HORIZON

    def __post_init__(self):
        object.__setattr__(self, "human_path", _as_path(self.human_path))
        object.__setattr__(self, "robot_path", _as_path(self.robot_path))
        object.__setattr__(self, "params", tuple(self.params))

        if not self.duration > 0:
            raise ValidationError(f"{self.name}: duration must be > 0")
        if not self.sample_period > 0:
            raise ValidationError(f"{self.name}: sample_period must be > 0")
        if frame_count(self.duration, self.sample_period) < 2:
            raise ValidationError(f"{self.name}: duration/sample_period must give at least 2 samples")
        if not self.human_path or not self.robot_path:
            raise ValidationError(f"{self.name}: paths need at least one waypoint")
        for x, y in self.human_path + self.robot_path:
            if not self.layout.contains(x, y):
                raise ValidationError(f"{self.name}: waypoint ({x}, {y}) outside the arena")
        if sorted(p.ap_id for p in self.params) != [1, 2, 3]:
            raise ValidationError(f"{self.name}: need path-loss params for anchors 1, 2 and 3")
        if self.staleness_horizon < 0:
            raise ValidationError(f"{self.name}: staleness_horizon must be >= 0")

    @property
    def n_frames(self) -> int:
        return frame_count(self.duration, self.sample_period)

    def params_for(self, ap_id: int) -> PathLossParams:
        return next(p for p in self.params if p.ap_id == ap_id)

    def with_noise(self, sigma_db: Optional[float] = None, seed: Optional[int] = None) -> 'ScenarioSpec':
        noise = dataclasses.replace(
            self.noise,
            sigma_db=self.noise.sigma_db if sigma_db is None else sigma_db,
            seed=self.noise.seed if seed is None else seed,
        )
        return dataclasses.replace(self, noise=noise)

    @classmethod
    def from_dict(cls, data: dict) -> 'ScenarioSpec':
        params = data.get('params')
        return cls(
            name=data['name'],
            human_path=data['human_path'],
            robot_path=data['robot_path'],
            duration=float(data['duration']),
            sample_period=float(data.get('sample_period', DEFAULT_SAMPLE_PERIOD)),
            noise=NoiseConfig.from_dict(data.get('noise', {})),
            layout=AnchorLayout.from_dict(data.get('layout', {})),
            params=tuple(PathLossParams.from_dict(p) for p in params) if params else pathloss.DEFAULT_PARAMS,
            channel=ChannelConfig.from_dict(data.get('channel', {})),
            staleness_horizon=int(data.get('staleness_horizon', DEFAULT_STALENESS_HORIZON)),
        )

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'human_path': [list(p) for p in self.human_path],
            'robot_path': [list(p) for p in self.robot_path],
            'duration': self.duration,
            'sample_period': self.sample_period,
            'noise': self.noise.to_dict(),
            'layout': self.layout.to_dict(),
            'params': [p.to_dict() for p in self.params],
            'channel': self.channel.to_dict(),
            'staleness_horizon': self.staleness_horizon,
        }


@dataclass(frozen=True)
class Measurement:
    tick: int
    truth: GroundTruthFrame
    human: DistanceVector
    robot: DistanceVector


@dataclass
class ScenarioRun:
    spec: ScenarioSpec
    truth: list[GroundTruthFrame]
    vectors: list[tuple[DistanceVector, DistanceVector]]
    estimates: list[EstimatedFrame]

    @property
    def rows(self) -> list[DatasetRow]:
        return [
            DatasetRow(truth=g, human=h, robot=r, estimate=e)
            for g, (h, r), e in zip(self.truth, self.vectors, self.estimates)
        ]


def frame_count(duration: float, period: float) -> int:
    return int(math.floor(duration / period + _TICK_EPS)) + 1


def builtin_scenarios(noise: Optional[NoiseConfig] = None) -> list[ScenarioSpec]:
    """The stationary case and the three mobile cases.

    Mobile agents start from the stationary placements and walk to their
    targets at constant speed over five seconds.
    """
    noise = noise or NoiseConfig()
    return [
        ScenarioSpec("stationary", [HUMAN_START], [ROBOT_START], STATIONARY_DURATION, noise=noise),
        ScenarioSpec("scenario1", [HUMAN_START, (2.0, 0.5)], [ROBOT_START, (2.0, 1.0)], MOBILE_DURATION, noise=noise),
        ScenarioSpec("scenario2", [HUMAN_START, (1.0, 1.5)], [ROBOT_START, (1.0, 2.0)], MOBILE_DURATION, noise=noise),
        ScenarioSpec("scenario3", [HUMAN_START, (2.0, 1.0)], [ROBOT_START, (2.0, 1.0)], MOBILE_DURATION, noise=noise),
    ]


def get_builtin(name: str, noise: Optional[NoiseConfig] = None) -> ScenarioSpec:
    for spec in builtin_scenarios(noise):
        if spec.name == name:
            return spec
    raise ValidationError(f"unknown scenario: {name}")


def true_position(path: Sequence[Waypoint], duration: float, t: float) -> Position:
    """Constant-speed position along ``path`` at time ``t``."""
    if not path:
        raise ScenarioError("empty path")
    if not 0.0 <= t <= duration:
        raise ScenarioError(f"t={t} outside [0, {duration}]")
    points = np.asarray(path, dtype=float)
    if len(points) == 1:
        return Position(float(points[0][0]), float(points[0][1]))
    if t == duration:
        return Position(float(points[-1][0]), float(points[-1][1]))

    legs = np.linalg.norm(np.diff(points, axis=0), axis=1)
    total = float(legs.sum())
    if total == 0.0:
        return Position(float(points[0][0]), float(points[0][1]))

    travelled = total * t / duration
    for i, leg in enumerate(legs):
        if travelled <= leg or i == len(legs) - 1:
            frac = travelled / leg if leg > 0 else 0.0
            frac = min(frac, 1.0)
            x = points[i][0] + frac * (points[i + 1][0] - points[i][0])
            y = points[i][1] + frac * (points[i + 1][1] - points[i][1])
            return Position(float(x), float(y))
        travelled -= leg
    raise AssertionError("unreachable")


class AgentSensor:
    """Receiver carried by one agent: RSSI per anchor -> distance estimate.

    Holds the last distance per anchor so a lost RSSI sample repeats it.
    """

    def __init__(self, agent_id: AgentId, spec: ScenarioSpec, rng: np.random.Generator):
        self.agent_id = agent_id
        self._spec = spec
        self._rng = rng
        self._last: list[Optional[float]] = [None, None, None]

    def measure(self, t: float, position: Position) -> DistanceVector:
        spec = self._spec
        noise = spec.noise
        anchors = spec.layout.anchors
        estimates = []
        held = []
        for i in range(3):
            lost = noise.loss_probability > 0 and self._rng.random() < noise.loss_probability
            if lost and self._last[i] is not None:
                estimates.append(self._last[i])
                held.append(True)
                continue
            params = spec.params_for(i + 1)
            true_d = math.hypot(position.x - anchors[i][0], position.y - anchors[i][1])
            rssi = pathloss.distance_to_rssi(true_d, params, noise, self._rng)
            d = pathloss.rssi_to_distance(rssi, params)
            self._last[i] = d
            estimates.append(d)
            held.append(False)
        vector = DistanceVector(self.agent_id, t, *estimates, held=tuple(held))
        return vector.quantized()


def tick_time(spec: ScenarioSpec, tick: int) -> float:
    return min(tick * spec.sample_period, spec.duration)


def iter_measurements(spec: ScenarioSpec) -> Iterator[Measurement]:
    """Ground truth and both agents' distance vectors, tick by tick.

    One generator serves both agents, human first, so the draw order and
    therefore every value is fixed by the seed.
    """
    rng = make_generator(spec.noise.seed)
    human = AgentSensor(AgentId.HUMAN, spec, rng)
    robot = AgentSensor(AgentId.ROBOT, spec, rng)
    for tick in range(spec.n_frames):
        t = tick_time(spec, tick)
        try:
            truth = GroundTruthFrame(
                timestamp=t,
                human_true=true_position(spec.human_path, spec.duration, t),
                robot_true=true_position(spec.robot_path, spec.duration, t),
            )
            yield Measurement(tick, truth, human.measure(t, truth.human_true), robot.measure(t, truth.robot_true))
        except ScenarioError:
            raise
        except IpsError as e:
            raise ScenarioError(str(e), tick=tick, timestamp=t) from e


def estimate_frame(t: float, human: DistanceVector, robot: DistanceVector, layout: AnchorLayout) -> EstimatedFrame:
    h = locator.trilaterate(human, layout)
    r = locator.trilaterate(robot, layout)
    return EstimatedFrame(
        timestamp=t,
        human_est=h,
        robot_est=r,
        sep_est=locator.separation(h, r),
        residual_human=locator.residual(human, layout, h),
        residual_robot=locator.residual(robot, layout, r),
    )


def run_scenario(spec: ScenarioSpec) -> ScenarioRun:
    truth, vectors, estimates = [], [], []
    for m in iter_measurements(spec):
        try:
            frame = estimate_frame(m.truth.timestamp, m.human, m.robot, spec.layout)
        except IpsError as e:
            raise ScenarioError(str(e), tick=m.tick, timestamp=m.truth.timestamp) from e
        truth.append(m.truth)
        vectors.append((m.human, m.robot))
        estimates.append(frame)

    out_of_bounds = sum(e.human_est.out_of_bounds or e.robot_est.out_of_bounds for e in estimates)
    logger.info("Scenario %s: %d frames, %d with out-of-arena fixes",
                spec.name, len(estimates), out_of_bounds)
    return ScenarioRun(spec=spec, truth=truth, vectors=vectors, estimates=estimates)
