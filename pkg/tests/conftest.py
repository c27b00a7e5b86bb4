"""Shared fixtures and hypothesis strategies."""

from __future__ import annotations

import math

from hypothesis import strategies as st

from fatiguekit import CHANNELS, SignalFrame

finite_floats = st.floats(allow_nan=False, allow_infinity=False,
                          min_value=-1e6, max_value=1e6)


def _frame_at(t: float, channels: dict) -> SignalFrame:
    return SignalFrame(t=t, **channels)


@st.composite
def traces(draw, min_frames=2, max_frames=24):
    """Random valid traces: strictly increasing t, random channel support."""
    n = draw(st.integers(min_value=min_frames, max_value=max_frames))
    gaps = draw(st.lists(st.floats(min_value=0.01, max_value=5.0,
                                   allow_nan=False),
                         min_size=n, max_size=n))
    channels = draw(st.lists(st.sampled_from(CHANNELS), min_size=1,
                             max_size=4, unique=True))
    t = 0.0
    frames = []
    for gap in gaps:
        values = {}
        for c in channels:
            if draw(st.booleans()):
                if c == "eye_closure":
                    values[c] = draw(st.floats(min_value=0.0, max_value=1.0,
                                               allow_nan=False))
                elif c == "heart_bpm":
                    values[c] = draw(st.floats(min_value=30.0, max_value=200.0,
                                               allow_nan=False))
                elif c == "mouth_open":
                    values[c] = draw(st.floats(min_value=0.0, max_value=3.0,
                                               allow_nan=False))
                else:
                    values[c] = draw(finite_floats)
        frames.append(_frame_at(t, values))
        t = math.nextafter(t + gap, math.inf)
    return frames
