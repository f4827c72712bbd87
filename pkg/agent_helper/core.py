import logging
from typing import Any, Callable, Dict, Hashable, Iterable, Optional, Set

from agent_helper.transition import Transition
from errors import InvalidTransition

logger = logging.getLogger("ips.state_machine")


class StateMachine:
    """Table-driven state machine stepped synchronously by the tick loop.

    Transitions are keyed by (source, event); when several share a key the
    first whose guard accepts the payload wins. Event ids make delivery
    idempotent: an id seen before is ignored.
    """

    def __init__(
        self,
        *,
        initial_state: Any,
        transitions: Iterable[Transition],
        name: str = "FSM",
        on_enter: Optional[dict[Any, Callable[[dict], None]]] = None,
        strict: bool = False,
    ):
        self._initial_state = initial_state
        self._state = initial_state
        self._name = name
        self._on_enter = on_enter or {}
        self._strict = strict

        self._transitions: Dict[tuple, list[Transition]] = {}
        self._processed_events: Set[Hashable] = set()

        for t in transitions:
            key = (t.source, t.event)
            self._transitions.setdefault(key, []).append(t)

        logger.debug("[%s] Initialized in state %s", self._name, self._state)

    @property
    def state(self) -> Any:
        return self._state

    @property
    def name(self) -> str:
        return self._name

    def handle_event(
        self,
        event: Any,
        payload: Dict | None = None,
        *,
        event_id: Hashable | None = None,
    ) -> bool:
        """Apply ``event``; returns True when a transition fired."""
        if event_id is not None:
            if event_id in self._processed_events:
                logger.debug("[%s] Duplicate event ignored: %s", self._name, event_id)
                return False
            self._processed_events.add(event_id)

        payload = payload if payload is not None else {}
        payload["state"] = self._state
        payload["event"] = event

        candidates = self._transitions.get((self._state, event))
        if not candidates:
            return self._reject(f"no transition for {event} in state {self._state}")

        transition = self._select_transition(candidates, payload)
        if not transition:
            return self._reject(f"guards rejected {event} in state {self._state}")

        logger.debug("[%s] %s --(%s)--> %s", self._name, self._state, event, transition.target)

        target = transition.fire(payload)
        entered = target != self._state
        self._state = target

        on_enter = self._on_enter.get(self._state)
        if on_enter and entered:
            on_enter(payload)
        return True

    def _reject(self, reason: str) -> bool:
        if self._strict:
            raise InvalidTransition(f"[{self._name}] {reason}")
        logger.warning("[%s] Ignored: %s", self._name, reason)
        return False

    def _select_transition(self, transitions: list[Transition], payload: Dict) -> Optional[Transition]:
        return next((t for t in transitions if t.accepts(payload)), None)

    def reset(self, state: Any | None = None):
        self._state = state if state is not None else self._initial_state
        self._processed_events.clear()
        logger.debug("[%s] Reset to state %s", self._name, self._state)
