import logging
from typing import Callable

from data.models.wire import NavSignal

logger = logging.getLogger("ips.signal-listener")


class SignalListener:
    """Fans NavSignals out to registered callbacks."""

    def __init__(self):
        self.callbacks: list[Callable[[NavSignal], None]] = []

    def on_signal(self, callback: Callable[[NavSignal], None]) -> None:
        self.callbacks.append(callback)
        logger.debug("Callback registered (%d total)", len(self.callbacks))

    def publish(self, signal: NavSignal) -> None:
        for callback in self.callbacks:
            try:
                callback(signal)
            except Exception:
                logger.error("Signal callback failed at t_ms=%s", signal.timestamp_ms, exc_info=True)
