"""Declarative DualUNet graphs, TCB-to-conv fusion and cost accounting.

Default topology (three scales, concatenation fusion), per scale ``k``::

    S path:  [unshuffle] -> conv -> relu                 (input: fused f_{k-1})
    L path:  [unshuffle] -> conv -> relu -> conv -> relu (input: own L features)
    fusion:  concat(S, L) -> conv -> relu = f_k

The packed 4-channel inputs are pixel-unshuffled once (to 16 channels at half
resolution) before scale 0. The decoder walks back up with
conv -> relu -> pixel shuffle, concatenates the skip ``f_k`` and mixes with
conv -> relu. A final plain conv produces 16 channels that one pixel shuffle
turns into the 4-channel output at input resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .tcb import TcbParams

NODE_KINDS = ("input", "conv3x3", "tcb", "relu", "pixel_unshuffle2", "pixel_shuffle2",
              "concat", "add", "output")
CONV_KINDS = ("conv3x3", "tcb")


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class ArchConfig:
    widths: tuple[int, ...] = (16, 32, 64)
    in_channels: int = 4
    fusion: str = "concat"  # or "add"
    expansion: int = 2

    def __post_init__(self):
        if self.fusion not in ("concat", "add"):
            raise GraphError(f"fusion must be 'concat' or 'add', got {self.fusion!r}")
        if not self.widths or min(self.widths) < 1:
            raise GraphError("widths must be positive")
        if self.expansion < 1:
            raise GraphError("expansion must be >= 1")

    def as_dict(self) -> dict:
        return {"widths": list(self.widths), "in_channels": self.in_channels,
                "fusion": self.fusion, "expansion": self.expansion}

    @classmethod
    def from_dict(cls, d: dict) -> "ArchConfig":
        return cls(widths=tuple(d.get("widths", (16, 32, 64))), in_channels=d.get("in_channels", 4),
                   fusion=d.get("fusion", "concat"), expansion=d.get("expansion", 2))


@dataclass(frozen=True)
class Node:
    name: str
    kind: str
    inputs: tuple[str, ...] = ()
    attrs: dict = field(default_factory=dict)

    @property
    def c_in(self) -> int:
        return self.attrs["c_in"]

    @property
    def c_out(self) -> int:
        return self.attrs["c_out"]


@dataclass(frozen=True)
class ModelGraph:
    nodes: tuple[Node, ...]
    inputs: tuple[str, ...] = ("short", "long")
    output: str = "output"
    arch: ArchConfig | None = None

    def __post_init__(self):
        self.validate()

    def node(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def by_kind(self, *kinds: str) -> list[Node]:
        return [n for n in self.nodes if n.kind in kinds]

    @property
    def edge_count(self) -> int:
        return sum(len(n.inputs) for n in self.nodes)

    @property
    def stride(self) -> int:
        """Input side lengths must be multiples of this."""
        return 2 ** max(s for _, s in self.validate().values())

    @property
    def is_fused(self) -> bool:
        return not self.by_kind("tcb")

    def validate(self) -> dict[str, tuple[int, int]]:
        """Check topology and channel/scale consistency.

        Returns ``{node: (channels, log2 downscale)}``.
        """
        shapes: dict[str, tuple[int, int]] = {}
        outputs = [n for n in self.nodes if n.kind == "output"]
        if len(outputs) != 1 or outputs[0].name != self.output:
            raise GraphError("graph needs exactly one output node")
        for n in self.nodes:
            if n.kind not in NODE_KINDS:
                raise GraphError(f"{n.name}: unknown node kind {n.kind!r}")
            if n.name in shapes:
                raise GraphError(f"duplicate node name {n.name}")
            missing = [i for i in n.inputs if i not in shapes]
            if missing:
                raise GraphError(f"{n.name}: inputs {missing} are not defined earlier")
            ins = [shapes[i] for i in n.inputs]
            if n.kind == "input":
                shapes[n.name] = (n.attrs["channels"], 0)
            elif n.kind in CONV_KINDS:
                (c, s), = ins
                if c != n.c_in:
                    raise GraphError(f"{n.name}: expects {n.c_in} channels, receives {c}")
                shapes[n.name] = (n.c_out, s)
            elif n.kind in ("relu", "output"):
                shapes[n.name] = ins[0]
            elif n.kind == "pixel_unshuffle2":
                (c, s), = ins
                shapes[n.name] = (4 * c, s + 1)
            elif n.kind == "pixel_shuffle2":
                (c, s), = ins
                if c % 4:
                    raise GraphError(f"{n.name}: {c} channels cannot be pixel-shuffled")
                shapes[n.name] = (c // 4, s - 1)
            elif n.kind == "concat":
                if len({s for _, s in ins}) != 1:
                    raise GraphError(f"{n.name}: concatenating different resolutions")
                shapes[n.name] = (sum(c for c, _ in ins), ins[0][1])
            elif n.kind == "add":
                if len(set(ins)) != 1:
                    raise GraphError(f"{n.name}: adding mismatched tensors {ins}")
                shapes[n.name] = ins[0]
        convs = self.by_kind(*CONV_KINDS)
        last = convs[-1] if convs else None
        if last is None or last.kind != "conv3x3":
            raise GraphError("the last convolution must be a plain conv3x3")
        return shapes


def build_dualunet(cfg: ArchConfig = ArchConfig(), *, tcb: bool = False) -> ModelGraph:
    """DualUNet; with ``tcb`` every conv except the last becomes a TCB."""
    nodes: list[Node] = []

    def add(name, kind, *inputs, **attrs):
        nodes.append(Node(name, kind, tuple(inputs), attrs))
        return name

    def conv(name, src, c_in, c_out, variant):
        if tcb:
            return add(name, "tcb", src, c_in=c_in, c_out=c_out, variant=variant,
                       c_mid=cfg.expansion * c_out, use_identity=c_in == c_out)
        return add(name, "conv3x3", src, c_in=c_in, c_out=c_out)

    w = cfg.widths
    add("short", "input", channels=cfg.in_channels)
    add("long", "input", channels=cfg.in_channels)
    s_src = add("s_down0", "pixel_unshuffle2", "short")
    l_src = add("l_down0", "pixel_unshuffle2", "long")
    s_ch = l_ch = 4 * cfg.in_channels
    fused = []
    for k, width in enumerate(w):
        if k > 0:
            s_src = add(f"s_down{k}", "pixel_unshuffle2", fused[-1])
            l_src = add(f"l_down{k}", "pixel_unshuffle2", l_src)
            s_ch, l_ch = 4 * w[k - 1], 4 * w[k - 1]
        s = add(f"s_relu{k}", "relu", conv(f"s_conv{k}", s_src, s_ch, width, "encoder"))
        l_mid = add(f"l_relu{k}a", "relu", conv(f"l_conv{k}a", l_src, l_ch, width, "encoder"))
        l_src = add(f"l_relu{k}b", "relu", conv(f"l_conv{k}b", l_mid, width, width, "encoder"))
        if cfg.fusion == "concat":
            cat = add(f"fuse_cat{k}", "concat", s, l_src)
            f = add(f"fuse_relu{k}", "relu", conv(f"fuse_conv{k}", cat, 2 * width, width, "encoder"))
        else:
            f = add(f"fuse_add{k}", "add", s, l_src)
        fused.append(f)

    d = fused[-1]
    for k in range(len(w) - 2, -1, -1):
        up = add(f"up_relu{k}", "relu", conv(f"up_conv{k}", d, w[k + 1], 4 * w[k], "decoder"))
        up = add(f"up_shuffle{k}", "pixel_shuffle2", up)
        cat = add(f"dec_cat{k}", "concat", up, fused[k])
        d = add(f"dec_relu{k}", "relu", conv(f"dec_conv{k}", cat, 2 * w[k], w[k], "decoder"))

    out = add("final_conv", "conv3x3", d, c_in=w[0], c_out=4 * cfg.in_channels)
    out = add("out_shuffle", "pixel_shuffle2", out)
    add("output", "output", out)
    return ModelGraph(tuple(nodes), arch=cfg)


def fuse_model(g: ModelGraph) -> ModelGraph:
    """Replace every TCB node by a plain conv3x3 node; topology is unchanged."""
    nodes = tuple(replace(n, kind="conv3x3", attrs={"c_in": n.c_in, "c_out": n.c_out})
                  if n.kind == "tcb" else n for n in g.nodes)
    return replace(g, nodes=nodes)


# --- parameters -------------------------------------------------------------


def tcb_param_shapes(n: Node) -> dict[str, tuple[int, ...]]:
    ci, co, cm = n.c_in, n.c_out, n.attrs["c_mid"]
    shapes = {
        "main_weight": (co, ci, 3, 3), "main_bias": (co,),
        "expand_weight": (cm, ci), "expand_bias": (cm,),
        "squeeze_weight": (co, cm, 3, 3), "squeeze_bias": (co,),
        "sobel_pre_weight": (co, ci), "sobel_pre_bias": (co,),
        "sobel_scale_x": (co,), "sobel_scale_y": (co,),
        "conv1x1_weight": (co, ci), "conv1x1_bias": (co,),
    }
    if n.attrs["variant"] == "decoder":
        shapes.update(laplacian_pre_weight=(co, ci), laplacian_pre_bias=(co,), laplacian_scale=(co,))
    return shapes


def param_shapes(g: ModelGraph) -> dict[str, tuple[int, ...]]:
    """Flat tensor names and shapes in graph order."""
    out: dict[str, tuple[int, ...]] = {}
    for n in g.by_kind(*CONV_KINDS):
        if n.kind == "conv3x3":
            out[f"{n.name}.weight"] = (n.c_out, n.c_in, 3, 3)
            out[f"{n.name}.bias"] = (n.c_out,)
        else:
            for key, shape in tcb_param_shapes(n).items():
                out[f"{n.name}.{key}"] = shape
    return out


def tcb_from_weights(n: Node, weights: dict) -> TcbParams:
    arrays = {key: weights[f"{n.name}.{key}"] for key in tcb_param_shapes(n)}
    return TcbParams(use_identity=n.attrs["use_identity"], **arrays)


def count_params_flops(g: ModelGraph, height: int, width: int) -> dict:
    """Exact parameter count and convolution FLOPs (one MAC = 2 FLOPs).

    ``height`` and ``width`` are the spatial dims of the packed inputs.
    Element-wise adds, ReLUs and shuffles are not counted.
    """
    shapes = g.validate()
    per_node = []
    total_params = total_flops = 0
    for n in g.by_kind(*CONV_KINDS):
        scale = shapes[n.inputs[0]][1]
        h, w = height >> scale, width >> scale
        hw, hw_pad = h * w, (h + 2) * (w + 2)
        ci, co = n.c_in, n.c_out
        if n.kind == "conv3x3":
            params = co * ci * 9 + co
            flops = 2 * 9 * ci * co * hw
        else:
            params = sum(_prod(s) for s in tcb_param_shapes(n).values())
            cm = n.attrs["c_mid"]
            flops = 2 * 9 * ci * co * hw  # main
            flops += 2 * ci * cm * hw_pad + 2 * 9 * cm * co * hw  # expand-squeeze
            flops += 2 * ci * co * hw_pad + 2 * 2 * 9 * co * hw  # sobel x/y
            if n.attrs["variant"] == "decoder":
                flops += 2 * ci * co * hw_pad + 2 * 9 * co * hw
            flops += 2 * ci * co * hw  # 1x1
        per_node.append({"name": n.name, "kind": n.kind, "params": params, "flops": flops})
        total_params += params
        total_flops += flops
    return {"params": total_params, "flops": total_flops, "nodes": per_node}


def _prod(shape) -> int:
    out = 1
    for s in shape:
        out *= s
    return out
