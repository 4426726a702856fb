"""Dataset manifests and a synthetic event generator for desk-scale runs.

A manifest is a small text file binding sample files to class labels::

    taxels 10
    channels 2
    bin_width 0.02
    classes ring tap swipe press
    samples/ring_000.events 0
    ...

Paths are resolved relative to the manifest's directory. Labels must be
dense 0..num_classes-1 and every referenced file must exist.

The synthetic generator stands in for real sensor recordings: each class
owns a spatially clustered subset of taxels (disjoint across classes) with
class-specific firing rates and onset phases, and every sample is a fresh
Poisson draw from its class template plus optional uniform background
noise. Generation is byte-reproducible under a seed.

Converting an external event-based tactile recording is a matter of
mapping it onto ``EventStream`` (per-event seconds, taxel id, polarity
channel) and calling ``write_event_file``; see the README recipe.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .events import EventStream, SpikeTensor, bin_events, load_event_file, write_event_file
from .layout import TaxelLayout


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[tuple[Path, int], ...]  # (absolute sample path, label)
    class_names: tuple[str, ...]
    num_taxels: int
    num_channels: int
    bin_width: float

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.entries], dtype=np.int64)


def load_manifest(path) -> DatasetManifest:
    """Parse and fully validate a manifest (files exist, labels dense)."""
    path = Path(path)
    try:
        raw_lines = path.read_text().splitlines()
    except FileNotFoundError:
        raise DataFormatError(f"file not found: {path}") from None
    header: dict[str, str] = {}
    entries: list[tuple[Path, int]] = []
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] in ("taxels", "channels", "bin_width"):
            header[parts[0]] = parts[1]
            continue
        if parts[0] == "classes":
            header["classes"] = " ".join(parts[1:])
            continue
        if len(parts) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 'path label', got {raw!r}")
        try:
            label = int(parts[1])
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: bad label {parts[1]!r}") from None
        entries.append((path.parent / parts[0], label))
    missing = {"taxels", "channels", "bin_width", "classes"} - header.keys()
    if missing:
        raise DataFormatError(f"{path}: missing header line(s): {', '.join(sorted(missing))}")
    class_names = tuple(header["classes"].split())
    labels = sorted({label for _, label in entries})
    if labels != list(range(len(class_names))):
        raise DataFormatError(
            f"{path}: labels must be dense 0..{len(class_names) - 1}, found {labels}")
    for sample_path, _ in entries:
        if not sample_path.exists():
            raise DataFormatError(f"{path}: referenced sample file missing: {sample_path}")
    return DatasetManifest(
        entries=tuple(entries),
        class_names=class_names,
        num_taxels=int(header["taxels"]),
        num_channels=int(header["channels"]),
        bin_width=float(header["bin_width"]),
    )


def write_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    lines = [
        f"taxels {manifest.num_taxels}",
        f"channels {manifest.num_channels}",
        f"bin_width {manifest.bin_width!r}",
        "classes " + " ".join(manifest.class_names),
    ]
    for sample_path, label in manifest.entries:
        rel = Path(sample_path).relative_to(path.parent) if Path(sample_path).is_absolute() else sample_path
        lines.append(f"{rel.as_posix()} {label}")
    path.write_text("\n".join(lines) + "\n")


def load_samples(manifest: DatasetManifest):
    """Bin every referenced event file; returns list of (SpikeTensor, label).

    Streams shorter than the longest one are padded to a common timestep
    count so the averaging window is identical across samples.
    """
    streams = []
    for sample_path, label in manifest.entries:
        stream = load_event_file(sample_path)
        if stream.num_taxels != manifest.num_taxels or stream.num_channels != manifest.num_channels:
            raise DataFormatError(
                f"{sample_path}: sample declares {stream.num_taxels} taxels / "
                f"{stream.num_channels} channels, manifest says "
                f"{manifest.num_taxels} / {manifest.num_channels}")
        streams.append((stream, label))
    if not streams:
        return []
    t_max = max(bin_events(s, manifest.bin_width).num_steps for s, _ in streams)
    dataset = []
    for stream, label in streams:
        tensor = bin_events(stream, manifest.bin_width)
        if tensor.num_steps < t_max:
            pad = np.zeros((t_max - tensor.num_steps, tensor.num_taxels,
                            tensor.num_channels), dtype=tensor.data.dtype)
            tensor = SpikeTensor(np.concatenate([tensor.data, pad]), manifest.bin_width)
        dataset.append((tensor, label))
    return dataset


@dataclass(frozen=True)
class ClassTemplate:
    taxels: tuple[int, ...]
    rates: np.ndarray   # events/s per (owned taxel, channel)
    onset: float        # seconds into the recording when activity starts


def _assign_taxel_clusters(layout: TaxelLayout, num_classes: int, rng) -> list[list[int]]:
    """Disjoint, spatially clustered taxel subsets, one per class."""
    n = layout.num_taxels
    base, extra = divmod(n, num_classes)
    sizes = [base + (1 if c < extra else 0) for c in range(num_classes)]
    dist = layout.distances()
    unclaimed = set(range(n))
    clusters = []
    for size in sizes:
        center = int(rng.choice(sorted(unclaimed)))
        nearest = sorted(unclaimed, key=lambda j: (dist[center, j], j))
        chosen = nearest[:size]
        unclaimed -= set(chosen)
        clusters.append(sorted(chosen))
    return clusters


def generate_synthetic(out_dir, layout: TaxelLayout, num_classes: int = 4,
                       samples_per_class: int = 40, duration: float = 1.0,
                       bin_width: float = 0.02, num_channels: int = 2,
                       noise_rate: float = 0.0, seed: int = 0,
                       rate_range: tuple[float, float] = (20.0, 40.0)) -> DatasetManifest:
    """Write a labeled synthetic event dataset; returns its manifest.

    noise_rate is background Poisson activity in events per taxel-channel
    per second; zero keeps the class templates perfectly disjoint.
    rate_range bounds the per-(taxel, channel) template firing rates.
    """
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    if num_classes > layout.num_taxels:
        raise ValueError("need at least one taxel per class")
    out_dir = Path(out_dir)
    (out_dir / "samples").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    clusters = _assign_taxel_clusters(layout, num_classes, rng)
    templates = []
    for taxels in clusters:
        rates = rng.uniform(*rate_range, size=(len(taxels), num_channels))
        onset = float(rng.uniform(0.0, 0.2 * duration))
        templates.append(ClassTemplate(tuple(taxels), rates, onset))

    entries = []
    for cls, template in enumerate(templates):
        for s in range(samples_per_class):
            times, taxels, channels = [], [], []
            onset = float(np.clip(template.onset + rng.normal(0.0, 0.02 * duration),
                                  0.0, 0.5 * duration))
            window = duration - onset
            for ti, taxel in enumerate(template.taxels):
                for ch in range(num_channels):
                    count = rng.poisson(template.rates[ti, ch] * window)
                    ts = rng.uniform(onset, duration, size=count)
                    times.extend(ts)
                    taxels.extend([taxel] * count)
                    channels.extend([ch] * count)
            if noise_rate > 0:
                for taxel in range(layout.num_taxels):
                    for ch in range(num_channels):
                        count = rng.poisson(noise_rate * duration)
                        ts = rng.uniform(0.0, duration, size=count)
                        times.extend(ts)
                        taxels.extend([taxel] * count)
                        channels.extend([ch] * count)
            stream = EventStream(np.array(times), np.array(taxels), np.array(channels),
                                 duration=duration, num_taxels=layout.num_taxels,
                                 num_channels=num_channels)
            rel = Path("samples") / f"class{cls}_{s:03d}.events"
            write_event_file(stream, out_dir / rel)
            entries.append((out_dir / rel, cls))

    manifest = DatasetManifest(
        entries=tuple(entries),
        class_names=tuple(f"class{c}" for c in range(num_classes)),
        num_taxels=layout.num_taxels,
        num_channels=num_channels,
        bin_width=bin_width,
    )
    write_manifest(manifest, out_dir / "manifest.txt")
    return manifest
