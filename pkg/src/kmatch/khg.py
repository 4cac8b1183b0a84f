"""Text format for hypergraph instances.

Layout (whitespace separated, `#` comments):

    khg 1
    k 3
    parts 2
    part A 5: a1 a2 a3 a4 a5
    part B 3: b1 b2 b3
    edge a1 a2 b1
    edge@2 a1 a2          # optional explicit lower-level edges

Vertex tokens are opaque names mapped to dense integer ids in part order.
Plain `edge` lines are top-level k-edges.
"""

from __future__ import annotations

from .core import KSystem, VertexUniverse, build_complex
from .errors import BadVertex


def _tokens(line: str) -> list:
    line = line.split("#", 1)[0].strip()
    return line.split() if line else []


def parse_khg(text: str):
    """Parse khg text into (universe, k, leveled edges, vertex name list)."""
    lines = [_tokens(l) for l in text.splitlines()]
    lines = [t for t in lines if t]
    if not lines or lines[0][:2] != ["khg", "1"]:
        raise BadVertex("missing 'khg 1' header")
    it = iter(lines[1:])
    k = None
    r = None
    labels, sizes, names = [], [], []
    leveled = {}
    seen_parts = 0
    for toks in it:
        key = toks[0]
        if key == "k":
            k = int(toks[1])
        elif key == "parts":
            r = int(toks[1])
        elif key == "part":
            label = toks[1]
            rest = toks[2:]
            if rest and rest[0].endswith(":"):
                size = int(rest[0][:-1])
                verts = rest[1:]
            elif len(rest) >= 2 and rest[1] == ":":
                size = int(rest[0])
                verts = rest[2:]
            else:
                raise BadVertex(f"malformed part line for {label!r}")
            if len(verts) != size:
                raise BadVertex(f"part {label} declares {size} vertices, lists {len(verts)}")
            labels.append(label)
            sizes.append(size)
            names.extend(verts)
            seen_parts += 1
        elif key.startswith("edge"):
            if k is None:
                raise BadVertex("edge before k declaration")
            level = int(key[5:]) if key.startswith("edge@") else k
            leveled.setdefault(level, []).append(toks[1:])
        else:
            raise BadVertex(f"unknown khg directive {key!r}")
    if k is None or r is None or seen_parts != r:
        raise BadVertex("incomplete khg header (k/parts/part lines)")
    if len(set(names)) != len(names):
        raise BadVertex("duplicate vertex name")
    uni = VertexUniverse(tuple(labels), tuple(sizes))
    ids = {name: i for i, name in enumerate(names)}
    edges = {}
    for level, raw in leveled.items():
        lv = []
        for e in raw:
            try:
                lv.append(tuple(ids[v] for v in e))
            except KeyError as exc:
                raise BadVertex(f"unknown vertex {exc.args[0]!r}") from None
        edges[level] = lv
    return uni, k, edges, names


def load_khg(path, close=True):
    """Load a KComplex (close=True) or validated-closed complex from a file."""
    with open(path, "r", encoding="utf-8") as fh:
        uni, k, edges, _ = parse_khg(fh.read())
    return build_complex(edges, uni, k=k, close=close)


def load_khg_system(path) -> KSystem:
    """Load the file as a bare k-system (no closure computed or required)."""
    with open(path, "r", encoding="utf-8") as fh:
        uni, k, edges, _ = parse_khg(fh.read())
    return KSystem(uni, k, edges)


def dump_khg(system, include_lower=False) -> str:
    """Serialize a system to khg text. Only J_k is written unless asked."""
    uni = system.universe
    out = ["khg 1", f"k {system.k}", f"parts {uni.r}"]
    for j in range(uni.r):
        verts = " ".join(f"v{v}" for v in uni.part_vertices(j))
        out.append(f"part {uni.part_labels[j]} {uni.part_sizes[j]}: {verts}")
    if include_lower:
        for i in range(1, system.k):
            for e in sorted(system.level(i)):
                out.append(f"edge@{i} " + " ".join(f"v{v}" for v in e))
    for e in sorted(system.level(system.k)):
        out.append("edge " + " ".join(f"v{v}" for v in e))
    return "\n".join(out) + "\n"


def save_khg(system, path, include_lower=False):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_khg(system, include_lower=include_lower))
