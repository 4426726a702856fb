from pathlib import Path

import numpy as np
import pytest

from taxelsnn import DataFormatError, generate_synthetic, load_manifest, load_samples, write_manifest
from taxelsnn.datasets import DatasetManifest, _assign_taxel_clusters


def read_tree_bytes(root):
    """Relative path -> content for every file under root."""
    root = Path(root)
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def count_oracle_accuracy(dataset, train_frac=0.5):
    """Nearest-mean classifier on per-(taxel, channel) spike counts."""
    by_class = {}
    for tensor, label in dataset:
        by_class.setdefault(label, []).append(tensor.data.sum(axis=0).ravel())
    means = {}
    tests = []
    for label, feats in by_class.items():
        cut = max(1, int(len(feats) * train_frac))
        means[label] = np.mean(feats[:cut], axis=0)
        tests.extend((f, label) for f in feats[cut:])
    correct = 0
    for feat, label in tests:
        pred = min(means, key=lambda c: float(np.sum((feat - means[c]) ** 2)))
        correct += pred == label
    return correct / len(tests)


def test_generate_counts_and_manifest(tmp_path, layout10):
    manifest = generate_synthetic(tmp_path, layout10, num_classes=4,
                                  samples_per_class=5, duration=0.5, seed=0)
    assert len(manifest.entries) == 20
    assert manifest.num_classes == 4
    assert manifest.num_taxels == 10
    reloaded = load_manifest(tmp_path / "manifest.txt")
    assert len(reloaded.entries) == 20
    assert reloaded.class_names == manifest.class_names


def test_generate_deterministic_bytes(tmp_path, layout10):
    a = tmp_path / "a"
    b = tmp_path / "b"
    generate_synthetic(a, layout10, num_classes=3, samples_per_class=4,
                       duration=0.5, seed=9)
    generate_synthetic(b, layout10, num_classes=3, samples_per_class=4,
                       duration=0.5, seed=9)
    assert read_tree_bytes(a) == read_tree_bytes(b)
    c = tmp_path / "c"
    generate_synthetic(c, layout10, num_classes=3, samples_per_class=4,
                       duration=0.5, seed=10)
    assert read_tree_bytes(a) != read_tree_bytes(c)


def test_zero_noise_templates_are_disjoint_and_separable(tmp_path, layout10):
    manifest = generate_synthetic(tmp_path, layout10, num_classes=4,
                                  samples_per_class=10, duration=1.0,
                                  noise_rate=0.0, seed=3)
    dataset = load_samples(manifest)
    # per-class active taxel sets never overlap
    active = {}
    for tensor, label in dataset:
        active.setdefault(label, set()).update(np.nonzero(tensor.data.sum(axis=(0, 2)))[0])
    for a in active:
        for b in active:
            if a != b:
                assert not (active[a] & active[b])
    # count-based nearest-template oracle is perfect on disjoint templates
    assert count_oracle_accuracy(dataset) == 1.0
    # per-class mean count vectors pairwise distinct
    means = {label: np.mean([t.data.sum(axis=0).ravel()
                             for t, lbl in dataset if lbl == label], axis=0)
             for label in active}
    for a in means:
        for b in means:
            if a != b:
                assert not np.allclose(means[a], means[b])


def test_cluster_assignment_partitions_taxels(layout10):
    rng = np.random.default_rng(0)
    clusters = _assign_taxel_clusters(layout10, 3, rng)
    flat = [t for cluster in clusters for t in cluster]
    assert sorted(flat) == list(range(10))
    assert [len(c) for c in clusters] == [4, 3, 3]


def test_generate_validation(tmp_path, layout10):
    with pytest.raises(ValueError, match="num_classes"):
        generate_synthetic(tmp_path, layout10, num_classes=1)
    with pytest.raises(ValueError, match="taxel"):
        generate_synthetic(tmp_path, layout10, num_classes=11)


def test_load_samples_pads_to_common_length(tmp_path, layout10):
    manifest = generate_synthetic(tmp_path, layout10, num_classes=2,
                                  samples_per_class=3, duration=0.3, seed=1)
    dataset = load_samples(manifest)
    lengths = {tensor.num_steps for tensor, _ in dataset}
    assert len(lengths) == 1
    assert lengths.pop() == 15  # ceil(0.3 / 0.02)


def test_manifest_missing_sample_file(tmp_path):
    (tmp_path / "manifest.txt").write_text(
        "taxels 2\nchannels 1\nbin_width 0.02\nclasses a b\n"
        "nope.events 0\nnope.events 1\n")
    with pytest.raises(DataFormatError, match="nope.events"):
        load_manifest(tmp_path / "manifest.txt")


def test_manifest_rejects_sparse_labels(tmp_path):
    sample = tmp_path / "s.events"
    sample.write_text("taxels 2\nchannels 1\nduration 0.1\n")
    (tmp_path / "manifest.txt").write_text(
        "taxels 2\nchannels 1\nbin_width 0.02\nclasses a b c\n"
        "s.events 0\ns.events 2\n")
    with pytest.raises(DataFormatError, match="dense"):
        load_manifest(tmp_path / "manifest.txt")


def test_manifest_missing_header(tmp_path):
    (tmp_path / "manifest.txt").write_text("taxels 2\nclasses a b\n")
    with pytest.raises(DataFormatError, match="missing header"):
        load_manifest(tmp_path / "manifest.txt")


def test_manifest_round_trip(tmp_path):
    sample = tmp_path / "s0.events"
    sample.write_text("taxels 2\nchannels 1\nduration 0.1\n0.05 0 0\n")
    manifest = DatasetManifest(entries=((sample, 0), (sample, 1)),
                               class_names=("a", "b"), num_taxels=2,
                               num_channels=1, bin_width=0.02)
    write_manifest(manifest, tmp_path / "m.txt")
    back = load_manifest(tmp_path / "m.txt")
    assert back.class_names == ("a", "b")
    assert [lbl for _, lbl in back.entries] == [0, 1]
    assert back.bin_width == 0.02


def test_sample_header_must_match_manifest(tmp_path):
    sample = tmp_path / "s0.events"
    sample.write_text("taxels 3\nchannels 1\nduration 0.1\n")
    (tmp_path / "m.txt").write_text(
        "taxels 2\nchannels 1\nbin_width 0.02\nclasses a b\n"
        "s0.events 0\ns0.events 1\n")
    manifest = load_manifest(tmp_path / "m.txt")
    with pytest.raises(DataFormatError, match="declares 3 taxels"):
        load_samples(manifest)
