"""
Three-node network simulation: two agent nodes report distance vectors
over a lossy datagram channel to a server that trilaterates both agents,
checks proximity and emits navigation signals.

The loop is a deterministic discrete-tick simulation; observable output is
a pure function of the scenario spec and its seeds.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import proximity_ml
from evalkit import DeviationAccumulator, PositioningReport
from agent_helper.core import StateMachine
from agent_helper.enums import AgentId, LinkEvent, LinkState
from agent_helper.transition import Transition
from data.models.frames import DatasetRow, EstimatedFrame, GroundTruthFrame
from data.models.location import AnchorLayout, DistanceVector, Position
from data.models.ml import LinearModel
from data.models.wire import ChannelConfig, DistanceReport, NavSignal
from data.signal_listener import SignalListener
from errors import CorruptFrameError, FramingError, ValidationError
from protocol import decode_report, encode_report
from rng import make_generator
from scenario import DEFAULT_STALENESS_HORIZON, ScenarioRun, ScenarioSpec, estimate_frame, iter_measurements

logger = logging.getLogger("ips.netsim")


# ==========================================================
# CHANNEL
# ==========================================================

class Channel:
    """In-order datagram channel with loss, fixed latency and bit flips.

    Every frame consumes exactly one drop draw (and one corruption draw when
    corruption is enabled), so the loss pattern depends only on the seed.
    """

    def __init__(self, config: ChannelConfig):
        self.config = config
        self._rng = make_generator(config.seed)
        self._queue: deque[tuple[int, bytes]] = deque()
        self.sent = 0
        self.dropped = 0
        self.corrupted = 0

    def send(self, frame: bytes, tick: int) -> None:
        self.sent += 1
        if self._rng.random() < self.config.drop_probability:
            self.dropped += 1
            return
        if self.config.corrupt_probability > 0 and self._rng.random() < self.config.corrupt_probability:
            frame = self._flip_bit(frame)
            self.corrupted += 1
        self._queue.append((tick + self.config.latency_ticks, frame))

    def _flip_bit(self, frame: bytes) -> bytes:
        bit = int(self._rng.integers(len(frame) * 8))
        corrupted = bytearray(frame)
        corrupted[bit // 8] ^= 1 << (bit % 8)
        return bytes(corrupted)

    def deliver(self, tick: int) -> list[bytes]:
        out = []
        while self._queue and self._queue[0][0] <= tick:
            out.append(self._queue.popleft()[1])
        return out


# ==========================================================
# AGENT NODE
# ==========================================================

class AgentNode:
    def __init__(self, agent: AgentId):
        self.agent = agent
        self.seq = 0

    def report(self, vector: DistanceVector, timestamp_ms: int) -> bytes:
        flags = sum(1 << i for i, held in enumerate(vector.held) if held)
        frame = encode_report(DistanceReport(
            node_id=int(self.agent), seq=self.seq, timestamp_ms=timestamp_ms,
            d1=vector.d1, d2=vector.d2, d3=vector.d3, flags=flags,
        ))
        self.seq = (self.seq + 1) & 0xFFFFFFFF
        return frame


# ==========================================================
# LINK TRACKING (per node, on the server)
# ==========================================================

@dataclass
class LinkContext:
    agent: AgentId
    horizon: int
    vector: Optional[DistanceVector] = None
    age: int = 0
    last_seq: int = -1


class LinkActions:
    @staticmethod
    def store(ctx: dict):
        link: LinkContext = ctx["link"]
        report: DistanceReport = ctx["report"]
        link.vector = DistanceVector(
            link.agent, report.timestamp_ms / 1000.0, report.d1, report.d2, report.d3,
            held=tuple(bool(report.flags >> i & 1) for i in range(3)),
        )
        link.last_seq = report.seq
        link.age = 0

    @staticmethod
    def age(ctx: dict):
        ctx["link"].age += 1


class LinkGuards:
    @staticmethod
    def within_horizon(ctx: dict) -> bool:
        link: LinkContext = ctx["link"]
        return link.age + 1 <= link.horizon


def build_link_transitions() -> list[Transition]:
    actions = LinkActions()
    guards = LinkGuards()

    transitions = [
        Transition(source, LinkEvent.REPORT, LinkState.FRESH, action=actions.store)
        for source in LinkState
    ]
    transitions += [
        Transition(LinkState.WAITING, LinkEvent.SILENT_TICK, LinkState.WAITING),

        Transition(LinkState.FRESH, LinkEvent.SILENT_TICK, LinkState.STALE,
                   guard=guards.within_horizon, action=actions.age),
        Transition(LinkState.FRESH, LinkEvent.SILENT_TICK, LinkState.EXPIRED, action=actions.age),

        Transition(LinkState.STALE, LinkEvent.SILENT_TICK, LinkState.STALE,
                   guard=guards.within_horizon, action=actions.age),
        Transition(LinkState.STALE, LinkEvent.SILENT_TICK, LinkState.EXPIRED, action=actions.age),

        Transition(LinkState.EXPIRED, LinkEvent.SILENT_TICK, LinkState.EXPIRED, action=actions.age),
    ]
    return transitions


def _log_expired(ctx: dict):
    link: LinkContext = ctx["link"]
    logger.debug("%s link expired after %d silent ticks", link.agent.label, link.age)


class LinkTracker:
    """Latest-wins cache of one node's distance vector with a staleness horizon."""

    def __init__(self, agent: AgentId, horizon: int = DEFAULT_STALENESS_HORIZON):
        self.link = LinkContext(agent=agent, horizon=horizon)
        self.fsm = StateMachine(
            name=f"link.{agent.label}",
            initial_state=LinkState.WAITING,
            transitions=build_link_transitions(),
            on_enter={LinkState.EXPIRED: _log_expired},
            strict=True,
        )

    @property
    def state(self) -> LinkState:
        return self.fsm.state

    def on_tick(self, reports: Sequence[DistanceReport]) -> None:
        newest = max((r for r in reports if r.seq > self.link.last_seq),
                     key=lambda r: r.seq, default=None)
        if newest is None:
            self.fsm.handle_event(LinkEvent.SILENT_TICK, {"link": self.link})
        else:
            self.fsm.handle_event(LinkEvent.REPORT, {"link": self.link, "report": newest},
                                  event_id=(self.link.agent, newest.seq))

    def usable_vector(self) -> Optional[DistanceVector]:
        if self.state in (LinkState.FRESH, LinkState.STALE):
            return self.link.vector
        return None


# ==========================================================
# SERVER
# ==========================================================

@dataclass
class ServerOutput:
    human: Optional[Position] = None
    robot: Optional[Position] = None
    estimate: Optional[EstimatedFrame] = None
    signal: Optional[NavSignal] = None
    vectors: Optional[tuple[DistanceVector, DistanceVector]] = None


@dataclass
class ServerStats:
    ticks: int = 0
    frames: int = 0
    framing_errors: int = 0
    corrupt_frames: int = 0
    invalid_reports: int = 0
    signals: int = 0

    @property
    def emission_rate(self) -> float:
        return self.signals / self.ticks if self.ticks else 0.0


class ServerNode:
    """Central node: decodes reports, trilaterates, flags proximity."""

    def __init__(
        self,
        layout: AnchorLayout,
        *,
        staleness_horizon: int = DEFAULT_STALENESS_HORIZON,
        classifier: Optional[LinearModel] = None,
        listener: Optional[SignalListener] = None,
    ):
        self.layout = layout
        self.classifier = classifier
        self.listener = listener or SignalListener()
        self.links = {agent: LinkTracker(agent, staleness_horizon) for agent in AgentId}
        self.stats = ServerStats()

    def _decode(self, pending: Sequence[bytes]) -> list[DistanceReport]:
        reports = []
        for frame in pending:
            self.stats.frames += 1
            try:
                reports.append(decode_report(frame))
            except FramingError as e:
                self.stats.framing_errors += 1
                logger.warning("Dropped frame: %s", e)
            except CorruptFrameError as e:
                self.stats.corrupt_frames += 1
                logger.warning("Dropped frame: %s", e)
            except ValidationError as e:
                self.stats.invalid_reports += 1
                logger.warning("Dropped report with invalid fields: %s", e)
        return reports

    def step(self, pending: Sequence[bytes], timestamp_ms: int) -> ServerOutput:
        self.stats.ticks += 1
        reports = self._decode(pending)
        for agent, tracker in self.links.items():
            tracker.on_tick([r for r in reports if r.node_id == agent])

        human = self.links[AgentId.HUMAN].usable_vector()
        robot = self.links[AgentId.ROBOT].usable_vector()
        if human is None or robot is None:
            return ServerOutput()

        frame = estimate_frame(timestamp_ms / 1000.0, human, robot, self.layout)
        signal = NavSignal(timestamp_ms=timestamp_ms, separation_est=frame.sep_est,
                           ml_close=_ml_close(self.classifier, human, robot, frame))
        self.stats.signals += 1
        self.listener.publish(signal)
        return ServerOutput(human=frame.human_est, robot=frame.robot_est, estimate=frame,
                            signal=signal, vectors=(human, robot))


def _ml_close(classifier: Optional[LinearModel], human: DistanceVector, robot: DistanceVector,
              frame: EstimatedFrame) -> Optional[bool]:
    if classifier is None:
        return None
    return proximity_ml.predict(classifier, proximity_ml.feature_vector(human, robot, frame)).label == 1


def server_step(pending: Sequence[bytes], server: ServerNode, timestamp_ms: int) -> ServerOutput:
    return server.step(pending, timestamp_ms)


# ==========================================================
# SIMULATION LOOP
# ==========================================================

@dataclass
class NetworkRun:
    spec: ScenarioSpec
    truth: list[GroundTruthFrame] = field(default_factory=list)
    vectors: list[tuple[DistanceVector, DistanceVector]] = field(default_factory=list)
    estimates: list[Optional[EstimatedFrame]] = field(default_factory=list)
    used_vectors: list[Optional[tuple[DistanceVector, DistanceVector]]] = field(default_factory=list)
    signals: list[NavSignal] = field(default_factory=list)
    server: Optional[ServerStats] = None
    positioning: Optional[PositioningReport] = None
    sent: int = 0
    dropped: int = 0
    corrupted: int = 0

    @property
    def emission_rate(self) -> float:
        return self.server.emission_rate if self.server else 0.0

    @property
    def rows(self) -> list[DatasetRow]:
        """Dataset rows for the ticks the server signalled, built from the vectors it used."""
        return [
            DatasetRow(truth=g, human=used[0], robot=used[1], estimate=e)
            for g, used, e in zip(self.truth, self.used_vectors, self.estimates)
            if e is not None
        ]


def timestamp_ms(t: float) -> int:
    return int(round(t * 1000.0))


def run_network(
    spec: ScenarioSpec,
    *,
    channel: Optional[ChannelConfig] = None,
    staleness_horizon: Optional[int] = None,
    classifier: Optional[LinearModel] = None,
    listener: Optional[SignalListener] = None,
) -> NetworkRun:
    channel_config = channel or spec.channel
    link = Channel(channel_config)
    nodes = {agent: AgentNode(agent) for agent in AgentId}
    server = ServerNode(
        spec.layout,
        staleness_horizon=spec.staleness_horizon if staleness_horizon is None else staleness_horizon,
        classifier=classifier,
        listener=listener,
    )
    run = NetworkRun(spec=spec, server=server.stats)
    deviations = DeviationAccumulator(scenario=spec.name)

    for m in iter_measurements(spec):
        t_ms = timestamp_ms(m.truth.timestamp)
        link.send(nodes[AgentId.HUMAN].report(m.human, t_ms), m.tick)
        link.send(nodes[AgentId.ROBOT].report(m.robot, t_ms), m.tick)

        out = server.step(link.deliver(m.tick), t_ms)
        run.truth.append(m.truth)
        run.vectors.append((m.human, m.robot))
        run.estimates.append(out.estimate)
        run.used_vectors.append(out.vectors)
        if out.signal is not None:
            run.signals.append(out.signal)
            deviations.add(out.estimate.sep_est, m.truth.true_separation)

    run.sent, run.dropped, run.corrupted = link.sent, link.dropped, link.corrupted
    if deviations.n:
        run.positioning = deviations.report()
    logger.info(
        "Network run %s: %d/%d ticks signalled, %d/%d frames dropped, %d corrupt rejected",
        spec.name, server.stats.signals, server.stats.ticks, link.dropped, link.sent,
        server.stats.corrupt_frames,
        extra={"scenario": spec.name, "emission_rate": server.stats.emission_rate},
    )
    return run


def direct_signals(
    run: ScenarioRun,
    *,
    classifier: Optional[LinearModel] = None,
    listener: Optional[SignalListener] = None,
) -> list[NavSignal]:
    """NavSignals for a direct run, one per tick, as a lossless network emits them."""
    listener = listener or SignalListener()
    signals = []
    for row in run.rows:
        signal = NavSignal(timestamp_ms=timestamp_ms(row.estimate.timestamp), separation_est=row.estimate.sep_est,
                           ml_close=_ml_close(classifier, row.human, row.robot, row.estimate))
        listener.publish(signal)
        signals.append(signal)
    return signals
