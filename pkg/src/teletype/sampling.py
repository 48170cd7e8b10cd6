"""Two-level uniform sampling and pseudonymous session ids.

Streams come from a single ``numpy.random.SeedSequence`` split three ways
(session ids, enrollment coins, event coins) so that changing one
probability never shifts the draws of another stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SESSION_ID_SPACE = 10**15

DEFAULT_P_SESSION = 0.01
DEFAULT_P_EVENT = 0.005


@dataclass(frozen=True)
class SamplerConfig:
    p_session: float = DEFAULT_P_SESSION
    p_event: float = DEFAULT_P_EVENT
    seed: int = 0

    def __post_init__(self):
        for name in ("p_session", "p_event"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned value")


@dataclass(frozen=True)
class Enrollment:
    enrolled: bool
    session_id: str


def format_session_id(value: int) -> str:
    return f"{value:015d}"


class Sampler:
    """Seeded decision source for one client.

    ``enroll_session`` may be called repeatedly to model many sessions;
    ``sample_event`` is the per-analysis coin for the enrolled session.
    """

    def __init__(self, cfg: SamplerConfig | None = None):
        self.cfg = cfg or SamplerConfig()
        ids, enroll, events = np.random.SeedSequence(self.cfg.seed).spawn(3)
        self._id_rng = np.random.Generator(np.random.PCG64(ids))
        self._enroll_rng = np.random.Generator(np.random.PCG64(enroll))
        self._event_rng = np.random.Generator(np.random.PCG64(events))

    def enroll_session(self) -> Enrollment:
        # id first, independent of the coin
        sid = int(self._id_rng.integers(0, SESSION_ID_SPACE))
        enrolled = bool(self._enroll_rng.random() < self.cfg.p_session)
        return Enrollment(enrolled, format_session_id(sid))

    def sample_event(self) -> bool:
        return bool(self._event_rng.random() < self.cfg.p_event)


def enroll_session(cfg: SamplerConfig) -> Enrollment:
    return Sampler(cfg).enroll_session()
