"""Spiking network assembly: graph convolution, FC stack, voting decoder.

The architecture is a feature layer (polynomial graph convolution over the
tactile graph, or a plain dense layer for the structure-free baseline)
followed by a chain of fully connected layers, every one of them driving
leaky integrate-and-fire units. Membrane state persists across the
timesteps of one sample and is zeroed at sample start. A fixed, untrained
voting matrix maps the last layer's spike counts to class scores.

The forward pass records everything the backward pass needs (membranes,
firing indicators, emitted outputs, propagated inputs), so training can
unroll gradients through the full time window.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .graphs import TactileGraph, adjacency_powers, normalize_adjacency
from .lif import LifConfig, membrane_update, relaxed_spike

FEATURE_KINDS = ("tagconv", "mlp")


@dataclass(frozen=True)
class NetworkConfig:
    graph: TactileGraph
    num_classes: int
    num_channels: int = 2
    feature: str = "tagconv"      # feature layer kind: tagconv | mlp
    tagconv_hops: int = 2
    feature_width: int = 64       # tagconv: features per node; mlp: units
    fc_sizes: tuple[int, ...] = (128, 256)
    lif: LifConfig = LifConfig()

    def __post_init__(self):
        if self.feature not in FEATURE_KINDS:
            raise ValueError(f"feature must be one of {FEATURE_KINDS}, got {self.feature!r}")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if len(self.fc_sizes) == 0:
            raise ValueError("fc_sizes must be nonempty")
        object.__setattr__(self, "fc_sizes", tuple(int(s) for s in self.fc_sizes))
        if self.fc_sizes[-1] < self.num_classes:
            raise ValueError("last layer needs at least one neuron per class")
        if self.feature == "tagconv" and self.graph.hops < self.tagconv_hops:
            raise ValueError(
                f"graph carries powers up to A^{self.graph.hops}, "
                f"need {self.tagconv_hops}; rebuild the graph with more hops"
            )

    @property
    def num_output_neurons(self) -> int:
        return self.fc_sizes[-1]

    def feature_output_size(self) -> int:
        """Flattened size of the feature layer's spike output."""
        if self.feature == "tagconv":
            return self.graph.num_nodes * self.feature_width
        return self.feature_width


def voting_matrix(num_classes: int, num_neurons: int) -> np.ndarray:
    """Fixed class-assignment matrix U, shape (num_classes, num_neurons).

    Output neurons are dealt to classes in contiguous blocks; when the
    split is uneven the earlier classes receive the extra neuron. Each row
    is normalized to total weight 1, so U @ spikes is the per-class mean
    spike count of that class's population.
    """
    if num_neurons < num_classes:
        raise ValueError("need at least one output neuron per class")
    u = np.zeros((num_classes, num_neurons), dtype=np.float64)
    base, extra = divmod(num_neurons, num_classes)
    start = 0
    for c in range(num_classes):
        size = base + (1 if c < extra else 0)
        u[c, start:start + size] = 1.0 / size
        start += size
    return u


def param_shapes(cfg: NetworkConfig) -> dict[str, tuple[int, ...]]:
    n, c = cfg.graph.num_nodes, cfg.num_channels
    if cfg.feature == "tagconv":
        shapes = {
            "feature.g": (c, cfg.feature_width, cfg.tagconv_hops + 1),
            "feature.b": (cfg.feature_width,),
        }
    else:
        shapes = {
            "feature.w": (cfg.feature_width, n * c),
            "feature.b": (cfg.feature_width,),
        }
    prev = cfg.feature_output_size()
    for i, size in enumerate(cfg.fc_sizes, start=1):
        shapes[f"fc{i}.w"] = (size, prev)
        shapes[f"fc{i}.b"] = (size,)
        prev = size
    return shapes


@dataclass
class Model:
    config: NetworkConfig
    params: dict[str, np.ndarray]
    voting: np.ndarray

    def num_params(self) -> int:
        return sum(p.size for p in self.params.values())


def init_model(cfg: NetworkConfig, seed: int) -> Model:
    """Uniform fan-in initialization, deterministic under the seed."""
    rng = np.random.default_rng(seed)
    n, c = cfg.graph.num_nodes, cfg.num_channels
    fan_in = {"feature": c * (cfg.tagconv_hops + 1) if cfg.feature == "tagconv" else n * c}
    prev = cfg.feature_output_size()
    for i, size in enumerate(cfg.fc_sizes, start=1):
        fan_in[f"fc{i}"] = prev
        prev = size
    params = {}
    for name, shape in param_shapes(cfg).items():
        bound = 1.0 / np.sqrt(fan_in[name.split(".")[0]])
        params[name] = rng.uniform(-bound, bound, size=shape)
    return Model(cfg, params, voting_matrix(cfg.num_classes, cfg.num_output_neurons))


def tagconv_forward(x: np.ndarray, g: np.ndarray, b: np.ndarray,
                    powers) -> np.ndarray:
    """Polynomial graph filter: z[:, f] = sum_c sum_k g[c,f,k] A^k x[:, c] + b[f].

    x is the (N, C) spike matrix of one timestep; output is the (N, F)
    real-valued synaptic current (the spiking nonlinearity is the caller's).
    """
    x = np.asarray(x, dtype=np.float64)
    n, c = x.shape
    if g.shape[0] != c or g.shape[2] != len(powers):
        raise ValueError(f"filter shape {g.shape} inconsistent with input {x.shape} "
                         f"and {len(powers)} adjacency powers")
    px = np.stack([p @ x for p in powers])          # (K+1, N, C)
    return np.einsum("knc,cfk->nf", px, g) + b


def fc_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if w.shape[1] != x.shape[-1]:
        raise ValueError(f"weight expects input size {w.shape[1]}, got {x.shape[-1]}")
    return x @ w.T + b


@dataclass
class LayerTrace:
    u: np.ndarray       # (T, ...) membrane potentials
    fired: np.ndarray   # (T, ...) binary threshold crossings (drive the reset)
    out: np.ndarray     # (T, ...) emitted signal; == fired unless relaxed


@dataclass
class ForwardTrace:
    """Everything the backward pass needs, recorded over the time window."""

    x: np.ndarray                   # (T, N, C)
    propagated: np.ndarray          # tagconv: (T, K+1, N, C); mlp: (T, N*C)
    layers: list[LayerTrace] = field(default_factory=list)
    relaxed: bool = False

    @property
    def outputs(self) -> np.ndarray:
        return self.layers[-1].out


def model_forward(model: Model, sample, relaxed: bool = False):
    """Run one sample through the network.

    Returns (outputs, trace) where outputs is the (T, num_output_neurons)
    record of last-layer emissions. In the default spiking mode they are
    binary; in relaxed mode each spike output is replaced by the ramp
    relaxation while the membrane reset still triggers on the hard
    threshold (kept binary so the recurrence stays piecewise constant and
    finite-difference checks see exactly what the backward pass computes).
    """
    cfg = model.config
    x = np.asarray(getattr(sample, "data", sample), dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"sample must be (T, N, C), got shape {x.shape}")
    t_steps, n, c = x.shape
    if t_steps < 1:
        raise ValueError("sample must span at least one timestep")
    if n != cfg.graph.num_nodes or c != cfg.num_channels:
        raise ValueError(f"sample shape {x.shape[1:]} does not match "
                         f"(nodes={cfg.graph.num_nodes}, channels={cfg.num_channels})")
    lif = cfg.lif

    # Feature-layer currents depend only on the inputs, so compute all
    # timesteps in one shot before the sequential membrane loop.
    if cfg.feature == "tagconv":
        g = model.params["feature.g"]
        powers = np.stack(cfg.graph.adjacency_powers[: cfg.tagconv_hops + 1])
        propagated = np.einsum("knm,tmc->tknc", powers, x)
        z_feat = np.einsum("tknc,cfk->tnf", propagated, g) + model.params["feature.b"]
        feat_shape = (n, cfg.feature_width)
    else:
        propagated = x.reshape(t_steps, n * c)
        z_feat = propagated @ model.params["feature.w"].T + model.params["feature.b"]
        feat_shape = (cfg.feature_width,)

    sizes = [feat_shape] + [(s,) for s in cfg.fc_sizes]
    traces = [LayerTrace(u=np.empty((t_steps, *shape)),
                         fired=np.empty((t_steps, *shape)),
                         out=np.empty((t_steps, *shape)))
              for shape in sizes]
    u = [np.zeros(shape) for shape in sizes]
    fired = [np.zeros(shape) for shape in sizes]

    fc_w = [model.params[f"fc{i}.w"] for i in range(1, len(cfg.fc_sizes) + 1)]
    fc_b = [model.params[f"fc{i}.b"] for i in range(1, len(cfg.fc_sizes) + 1)]

    for t in range(t_steps):
        u[0], fired[0] = membrane_update(u[0], fired[0], z_feat[t], lif)
        out = relaxed_spike(u[0], lif) if relaxed else fired[0]
        traces[0].u[t], traces[0].fired[t], traces[0].out[t] = u[0], fired[0], out
        signal = out.ravel()
        for li, (w, b) in enumerate(zip(fc_w, fc_b), start=1):
            z = w @ signal + b
            u[li], fired[li] = membrane_update(u[li], fired[li], z, lif)
            out = relaxed_spike(u[li], lif) if relaxed else fired[li]
            traces[li].u[t], traces[li].fired[t], traces[li].out[t] = u[li], fired[li], out
            signal = out
    trace = ForwardTrace(x=x, propagated=propagated, layers=traces, relaxed=relaxed)
    return trace.outputs, trace


def vote(outputs: np.ndarray, voting: np.ndarray):
    """Time-averaged class scores and the argmax prediction.

    Ties break toward the lowest class index.
    """
    outputs = np.asarray(outputs, dtype=np.float64)
    if outputs.ndim != 2 or outputs.shape[0] < 1:
        raise ValueError("outputs must be (T, num_neurons) with T >= 1")
    scores = voting @ outputs.mean(axis=0)
    return scores, int(np.argmax(scores))


def predict(model: Model, sample) -> int:
    outputs, _ = model_forward(model, sample)
    return vote(outputs, model.voting)[1]


def _config_to_dict(cfg: NetworkConfig) -> dict:
    return {
        "num_classes": cfg.num_classes,
        "num_channels": cfg.num_channels,
        "feature": cfg.feature,
        "tagconv_hops": cfg.tagconv_hops,
        "feature_width": cfg.feature_width,
        "fc_sizes": list(cfg.fc_sizes),
        "lif": {
            "beta": cfg.lif.beta,
            "u_threshold": cfg.lif.u_threshold,
            "u_reset": cfg.lif.u_reset,
            "surrogate_width": cfg.lif.surrogate_width,
        },
        "graph": {
            "num_nodes": cfg.graph.num_nodes,
            "edges": [list(e) for e in cfg.graph.edges],
            "hops": cfg.graph.hops,
        },
        "graph_hash": cfg.graph.hash(),
    }


def _config_from_dict(doc: dict) -> NetworkConfig:
    gdoc = doc["graph"]
    edges = tuple(tuple(e) for e in gdoc["edges"])
    a = normalize_adjacency(edges, gdoc["num_nodes"])
    graph = TactileGraph(gdoc["num_nodes"], edges, a, adjacency_powers(a, gdoc["hops"]))
    if graph.hash() != doc["graph_hash"]:
        raise DataFormatError(f"graph hash mismatch: checkpoint says {doc['graph_hash']}, "
                              f"rebuilt graph hashes to {graph.hash()}")
    return NetworkConfig(
        graph=graph,
        num_classes=doc["num_classes"],
        num_channels=doc["num_channels"],
        feature=doc["feature"],
        tagconv_hops=doc["tagconv_hops"],
        feature_width=doc["feature_width"],
        fc_sizes=tuple(doc["fc_sizes"]),
        lif=LifConfig(**doc["lif"]),
    )


def save_model(model: Model, path, extra: dict | None = None) -> None:
    """Self-describing .npz checkpoint: config, graph hash, named tensors."""
    arrays = {f"param/{name}": arr for name, arr in model.params.items()}
    arrays["voting"] = model.voting
    arrays["config_json"] = np.array(json.dumps(_config_to_dict(model.config)))
    if extra:
        arrays["extra_json"] = np.array(json.dumps(extra))
    np.savez(path, **arrays)


def load_model(path):
    """Load a checkpoint; validates graph hash and every tensor shape.

    Returns (model, extra_dict).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as zf:
        doc = json.loads(str(zf["config_json"]))
        cfg = _config_from_dict(doc)
        expected = param_shapes(cfg)
        params = {}
        for name, shape in expected.items():
            key = f"param/{name}"
            if key not in zf:
                raise DataFormatError(f"checkpoint is missing tensor {name!r}")
            arr = np.asarray(zf[key], dtype=np.float64)
            if arr.shape != shape:
                raise DataFormatError(f"tensor {name!r} has shape {arr.shape}, expected {shape}")
            params[name] = arr
        voting = np.asarray(zf["voting"], dtype=np.float64)
        if voting.shape != (cfg.num_classes, cfg.num_output_neurons):
            raise DataFormatError(f"voting matrix shape {voting.shape} does not match config")
        extra = json.loads(str(zf["extra_json"])) if "extra_json" in zf else {}
    return Model(cfg, params, voting), extra
