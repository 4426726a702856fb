"""Asynchronous tactile events and their discretization into spike tensors.

The on-disk event format is line-oriented text::

    # comment
    taxels 39
    channels 2
    duration 5.0
    0.01312 17 0
    ...

Header lines declare the taxel/channel counts and the recording duration
in seconds; every following line is one event ``timestamp taxel_id
channel``. Parsing is bit-exact: floats round-trip through repr.

Binning maps events onto a fixed grid of ``ceil(duration / bin_width)``
timesteps; a cell is 1 iff at least one event falls in its window
(multiple events clamp to a single spike). Events stamped exactly at the
duration land in the last bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError

# forgives float round-off when a timestamp sits on a bin boundary
_BIN_EPS = 1e-9


@dataclass(frozen=True)
class EventStream:
    """Timestamped (taxel, channel) events for one recorded sample."""

    times: np.ndarray      # seconds, sorted nondecreasing
    taxels: np.ndarray
    channels: np.ndarray
    duration: float
    num_taxels: int
    num_channels: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        taxels = np.asarray(self.taxels, dtype=np.int64)
        channels = np.asarray(self.channels, dtype=np.int64)
        if not (times.shape == taxels.shape == channels.shape) or times.ndim != 1:
            raise ValueError("times/taxels/channels must be equal-length 1-D arrays")
        if self.duration < 0 or not math.isfinite(self.duration):
            raise ValueError("duration must be finite and >= 0")
        order = np.argsort(times, kind="stable")
        times, taxels, channels = times[order], taxels[order], channels[order]
        if times.size:
            if times[0] < 0 or times[-1] > self.duration:
                raise ValueError("event timestamps must lie in [0, duration]")
            if taxels.min() < 0 or taxels.max() >= self.num_taxels:
                raise ValueError(f"taxel ids must lie in 0..{self.num_taxels - 1}")
            if channels.min() < 0 or channels.max() >= self.num_channels:
                raise ValueError(f"channel ids must lie in 0..{self.num_channels - 1}")
        for arr in (times, taxels, channels):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "taxels", taxels)
        object.__setattr__(self, "channels", channels)

    @property
    def num_events(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class SpikeTensor:
    """Binary spikes on the (timestep, taxel, channel) grid."""

    data: np.ndarray  # (T, N, C), values in {0, 1}
    bin_width: float

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise ValueError(f"spike data must be (T, N, C), got shape {data.shape}")
        if data.size and not np.isin(np.unique(data), (0, 1)).all():
            raise ValueError("spike data must be binary")
        data = data.astype(np.uint8)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def num_steps(self) -> int:
        return self.data.shape[0]

    @property
    def num_taxels(self) -> int:
        return self.data.shape[1]

    @property
    def num_channels(self) -> int:
        return self.data.shape[2]


def num_bins(duration: float, bin_width: float) -> int:
    return int(math.ceil(duration / bin_width - _BIN_EPS))


def bin_events(stream: EventStream, bin_width: float) -> SpikeTensor:
    """Discretize a stream onto ceil(duration / bin_width) timesteps."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    t_steps = num_bins(stream.duration, bin_width)
    data = np.zeros((t_steps, stream.num_taxels, stream.num_channels), dtype=np.uint8)
    if stream.num_events:
        idx = np.floor(stream.times / bin_width + _BIN_EPS).astype(np.int64)
        idx = np.minimum(idx, t_steps - 1)  # events at exactly `duration`
        data[idx, stream.taxels, stream.channels] = 1
    return SpikeTensor(data, bin_width)


def bin_centers_stream(tensor: SpikeTensor, num_taxels=None, num_channels=None) -> EventStream:
    """Reconstruct a stream with one event at the center of each set cell."""
    t_idx, n_idx, c_idx = np.nonzero(tensor.data)
    times = (t_idx + 0.5) * tensor.bin_width
    return EventStream(times, n_idx, c_idx,
                       duration=tensor.num_steps * tensor.bin_width,
                       num_taxels=tensor.num_taxels,
                       num_channels=tensor.num_channels)


def load_event_file(path) -> EventStream:
    """Parse the event wire format; errors carry the offending line number."""
    path = Path(path)
    try:
        raw_lines = path.read_text().splitlines()
    except FileNotFoundError:
        raise DataFormatError(f"file not found: {path}") from None
    header: dict[str, float] = {}
    times, taxels, channels = [], [], []
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] in ("taxels", "channels", "duration"):
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: malformed header line {raw!r}")
            try:
                header[parts[0]] = float(parts[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad header value {parts[1]!r}") from None
            continue
        if len(parts) != 3:
            raise DataFormatError(f"{path}:{lineno}: expected 'timestamp taxel channel', got {raw!r}")
        try:
            times.append(float(parts[0]))
            taxels.append(int(parts[1]))
            channels.append(int(parts[2]))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from None
        n, c = int(header.get("taxels", 0)), int(header.get("channels", 0))
        if not header.keys() >= {"taxels", "channels", "duration"}:
            raise DataFormatError(f"{path}:{lineno}: event before complete header")
        if not 0 <= taxels[-1] < n:
            raise DataFormatError(f"{path}:{lineno}: taxel id {taxels[-1]} outside 0..{n - 1}")
        if not 0 <= channels[-1] < c:
            raise DataFormatError(f"{path}:{lineno}: channel {channels[-1]} outside 0..{c - 1}")
        if not 0 <= times[-1] <= header["duration"]:
            raise DataFormatError(f"{path}:{lineno}: timestamp {times[-1]} outside [0, duration]")
    missing = {"taxels", "channels", "duration"} - header.keys()
    if missing:
        raise DataFormatError(f"{path}: missing header line(s): {', '.join(sorted(missing))}")
    return EventStream(np.array(times), np.array(taxels), np.array(channels),
                       duration=header["duration"],
                       num_taxels=int(header["taxels"]),
                       num_channels=int(header["channels"]))


def write_event_file(stream: EventStream, path) -> None:
    """Serialize a stream; reading it back reproduces the stream exactly."""
    lines = [
        f"taxels {stream.num_taxels}",
        f"channels {stream.num_channels}",
        f"duration {stream.duration!r}",
    ]
    for t, n, c in zip(stream.times, stream.taxels, stream.channels):
        lines.append(f"{float(t)!r} {int(n)} {int(c)}")
    Path(path).write_text("\n".join(lines) + "\n")
