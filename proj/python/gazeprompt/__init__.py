"""Python access to the gazeprompt engine.

Structured values are plain dicts; the extension exchanges JSON text.
"""

import json

from . import _core
from ._core import DEFAULT_PORT, Error, random_passage

__all__ = [
    "DEFAULT_PORT",
    "Error",
    "Session",
    "default_engine_config",
    "default_reader_profile",
    "degrees_to_px",
    "detect_fixations",
    "emit_gaze_log",
    "identify_line",
    "parse_gaze_log",
    "px_to_degrees",
    "random_passage",
    "replay_session_log",
    "run_gaze_log",
    "simulate",
    "typeset",
]


def _dump(value):
    if value is None:
        return ""
    return value if isinstance(value, str) else json.dumps(value)


def default_engine_config():
    return json.loads(_core.default_engine_config())


def default_reader_profile():
    return json.loads(_core.default_reader_profile())


def degrees_to_px(degrees, vertical=False, geometry=None):
    return _core.degrees_to_px(degrees, vertical, _dump(geometry))


def px_to_degrees(px, vertical=False, geometry=None):
    return _core.px_to_degrees(px, vertical, _dump(geometry))


def typeset(text, font_px=48.0, layout_version=0):
    return json.loads(_core.typeset(text, font_px, layout_version))


def parse_gaze_log(text):
    return json.loads(_core.parse_gaze_log(text))


def emit_gaze_log(samples, sample_rate_hz=120.0):
    return _core.emit_gaze_log(_dump(samples), sample_rate_hz)


def detect_fixations(samples, config=None, geometry=None):
    return json.loads(_core.detect_fixations(_dump(samples), _dump(config), _dump(geometry)))


def identify_line(fixations, layout):
    out = json.loads(_core.identify_line(_dump(fixations), _dump(layout)))
    out["totals"] = {int(k): v for k, v in out["totals"].items()}
    return out


def simulate(layout, profile=None):
    """Returns (gaze log text, ground truth dict)."""
    log, truth = _core.simulate(_dump(layout), _dump(profile))
    return log, json.loads(truth)


def run_gaze_log(gaze_log, layout, truth=None, settings=None):
    """Runs a gaze log through a session. Returns (session log text, metrics dict)."""
    log, metrics = _core.run_gaze_log(gaze_log, _dump(layout), _dump(truth), _dump(settings))
    return log, json.loads(metrics)


def replay_session_log(text):
    """Returns (identical, replayed log text)."""
    return _core.replay_session_log(text)


class Session:
    """One protocol session fed line by line."""

    def __init__(self, session_id="py", settings=None):
        self._s = _core.Session(session_id, _dump(settings))

    def send(self, message, wall_us):
        line = message if isinstance(message, str) else json.dumps(message)
        return [json.loads(m) for m in self._s.handle_line(line, wall_us)]

    def tick(self, wall_us):
        return [json.loads(m) for m in self._s.tick(wall_us)]

    @property
    def phase(self):
        return self._s.phase

    @property
    def ended(self):
        return self._s.ended

    def log_text(self):
        return self._s.log_text()
