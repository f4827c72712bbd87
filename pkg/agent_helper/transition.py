from dataclasses import dataclass
from typing import Any, Callable, Optional

Guard = Callable[[dict], bool]
Action = Callable[[dict], None]


@dataclass(frozen=True)
class Transition:
    """One row of a state table: ``source --event--> target``.

    The guard sees the event payload; the action runs before the state changes.
    """
    source: Any
    event: Any
    target: Any
    guard: Optional[Guard] = None
    action: Optional[Action] = None

    def accepts(self, payload: dict) -> bool:
        return self.guard is None or self.guard(payload)

    def fire(self, payload: dict) -> Any:
        if self.action:
            self.action(payload)
        return self.target
