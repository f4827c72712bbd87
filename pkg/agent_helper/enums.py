from enum import Enum, IntEnum, auto


class AgentId(IntEnum):
    """Tracked agents; the value doubles as the wire node id."""
    HUMAN = 1
    ROBOT = 2

    @property
    def label(self) -> str:
        return self.name.lower()


class LinkState(Enum):
    WAITING = auto()    # nothing received yet
    FRESH = auto()      # report received this tick
    STALE = auto()      # cached vector still within the staleness horizon
    EXPIRED = auto()


class LinkEvent(Enum):
    REPORT = auto()
    SILENT_TICK = auto()


class ProximityFlag(Enum):
    SAFE = "SAFE"
    CLOSE = "CLOSE"


class ModelKind(Enum):
    LR = "LR"
    SGD_HINGE = "SGD_HINGE"
    LINEAR_SVC = "LINEAR_SVC"

    @classmethod
    def from_string(cls, value: str) -> 'ModelKind':
        aliases = {"lr": cls.LR, "sgd": cls.SGD_HINGE, "svc": cls.LINEAR_SVC}
        key = value.strip()
        if key.lower() in aliases:
            return aliases[key.lower()]
        for kind in cls:
            if kind.value == key.upper():
                return kind
        raise ValueError(f"Invalid model kind: {value}")
