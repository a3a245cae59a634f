"""Seeded instance generation from TSPLIB coordinate samples.

The four generation stages (repetition counts, node pairing, coverage-aware
pair sorting, request synthesis) are deterministic functions of a 64-bit
seed, so equal seeds give byte-identical instances.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from .core import Instance, InstanceMeta, LocationGraph, Request, Truck


class ParseError(ValueError):
    pass


class InfeasibleRepetition(ValueError):
    pass


class PairingStalled(RuntimeError):
    pass


# Truck classes cycle in this order until the fleet is full.
TRUCK_CLASSES = ((25, 1.2), (20, 1.0), (15, 0.8))

DEFAULT_AVG_VOLUME = 5
DEFAULT_RESHUFFLE_CAP = 10**6


@dataclass(frozen=True)
class TsplibSample:
    name: str
    coords: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.coords) < 3:
            raise ParseError("TooFewNodes: need at least 3 coordinate rows")


@dataclass(frozen=True)
class GenerationParams:
    k: float
    m: int
    seed: int
    avg_volume: int = DEFAULT_AVG_VOLUME

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("repetition rate k must be >= 1")
        if self.m < 1:
            raise ValueError("truck count m must be >= 1")


@dataclass(frozen=True)
class PairFamily:
    sorted_pairs: tuple[tuple[int, int], ...]
    repetition_counts: tuple[int, ...]


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def num_requests(num_nodes: int, k: float) -> int:
    """n = round(k * (|V|-1) / 2), half-up."""
    return round_half_up(k * (num_nodes - 1) / 2)


class GenRng:
    """Seeded Mersenne Twister with the pinned draw conventions:
    continuous uniform + half-up rounding, and a Fisher-Yates shuffle
    consuming indexes high-to-low."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self._rng.random()

    def uniform_index(self, a: int, b: int) -> int:
        return round_half_up(self.uniform(a, b))

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = min(int(self._rng.random() * (i + 1)), i)
            items[i], items[j] = items[j], items[i]


def parse_tsplib(text: str, name: str = "") -> TsplibSample:
    """Read the NODE_COORD_SECTION subset of TSPLIB (index x y rows)."""
    lines = text.splitlines()
    header_name = name
    dimension = None
    coord_rows: list[tuple[int, float, float]] = []
    in_section = False
    seen_indexes: set[int] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if not in_section:
            key, _, value = line.partition(":")
            key = key.strip().upper()
            if key == "NAME":
                header_name = value.strip()
            elif key == "DIMENSION":
                try:
                    dimension = int(value.strip())
                except ValueError:
                    raise ParseError(f"line {lineno}: bad DIMENSION value")
            elif key == "NODE_COORD_SECTION":
                in_section = True
            continue
        if line.upper() in ("EOF", "DISPLAY_DATA_SECTION", "EDGE_WEIGHT_SECTION"):
            break
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'index x y' row")
        try:
            idx = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric coordinate row")
        if idx in seen_indexes:
            raise ParseError(f"line {lineno}: duplicate node index {idx}")
        seen_indexes.add(idx)
        coord_rows.append((idx, x, y))
    if not in_section:
        raise ParseError("missing NODE_COORD_SECTION")
    if dimension is not None and dimension != len(coord_rows):
        raise ParseError(f"DIMENSION {dimension} disagrees with {len(coord_rows)} rows")
    coords = tuple((x, y) for _, x, y in coord_rows)
    if len(coords) < 3:
        raise ParseError("TooFewNodes: need at least 3 coordinate rows")
    return TsplibSample(name=header_name or "unnamed", coords=coords)


def repetition_counts(num_nondepot: int, n: int, rng: GenRng) -> list[int]:
    """Per-node selection counts: all >= 1, summing to exactly 2n."""
    if 2 * n < num_nondepot:
        raise InfeasibleRepetition(f"2n={2 * n} < {num_nondepot} non-depot nodes")
    counts = [1] * num_nondepot
    total = num_nondepot
    while total < 2 * n:
        i = rng.uniform_index(0, num_nondepot - 1)
        counts[i] += 1
        total += 1
    return counts


def pair_nodes(repetition: list[int], n: int, rng: GenRng,
               reshuffle_cap: int = DEFAULT_RESHUFFLE_CAP) -> list[tuple[int, int]]:
    """Shuffle the count-expanded node list and split it into n ordered
    pickup/dropoff pairs; any degenerate or duplicate pair restarts the
    whole shuffle."""
    if sum(repetition) != 2 * n:
        raise ValueError("repetition counts must sum to 2n")
    shuff_list: list[int] = []
    for node, count in enumerate(repetition):
        shuff_list.extend([node] * count)
    for _ in range(reshuffle_cap):
        rng.shuffle(shuff_list)
        pair_list: list[tuple[int, int]] = []
        for i in range(n):
            pair = (shuff_list[2 * i], shuff_list[2 * i + 1])
            if pair[0] == pair[1] or pair in pair_list:
                break
            pair_list.append(pair)
        else:
            return pair_list
    raise PairingStalled(f"no valid pairing after {reshuffle_cap} reshuffles")


def sort_pairs(repetition: list[int], pair_list: list[tuple[int, int]],
               verbatim_decrement: bool = False) -> PairFamily:
    """Order pairs so that truncating from the tail keeps every node covered.

    Pairs whose endpoints are both down to their last occurrence go to the
    front of the head; pairs with one last-occurrence endpoint append to the
    head; the rest repeatedly move to the front of the tail by maximum
    current count-sum.

    verbatim_decrement reproduces the published pseudocode's line that
    overwrites the second endpoint's count from the first endpoint's
    (it corrupts counts when the endpoints' counts differ; off by default).
    """
    counts = list(repetition)
    pairs = list(pair_list)
    head: list[tuple[int, int]] = []
    tail: list[tuple[int, int]] = []
    while pairs:
        i = 0
        while i < len(pairs):
            a, b = pairs[i]
            if counts[a] == 1 and counts[b] == 1:
                counts[a] -= 1
                counts[b] -= 1
                head.insert(0, pairs.pop(i))
            elif counts[a] == 1 or counts[b] == 1:
                counts[a] -= 1
                counts[b] -= 1
                head.append(pairs.pop(i))
            else:
                i += 1
        best = 0
        best_index = -1
        for j, (a, b) in enumerate(pairs):
            if counts[a] + counts[b] > best:
                best = counts[a] + counts[b]
                best_index = j
        if best_index == -1 and pairs:
            # corrupted counts (possible under verbatim_decrement) can leave
            # every remaining pair at a nonpositive count sum; drain in order
            # instead of spinning
            best_index = 0
        if best_index != -1:
            a, b = pairs[best_index]
            if verbatim_decrement:
                counts[a] -= 1
                counts[b] = counts[a] - 1
            else:
                counts[a] -= 1
                counts[b] -= 1
            tail.insert(0, pairs.pop(best_index))
    return PairFamily(sorted_pairs=tuple(head + tail),
                      repetition_counts=tuple(repetition))


def average_distance(graph: LocationGraph) -> float:
    """Mean Euclidean distance over all ordered distinct node pairs."""
    nv = graph.num_nodes
    total = 0.0
    for o in range(nv):
        for d in range(nv):
            if o != d:
                total += graph.distance(o, d)
    return total / (nv * (nv - 1))


def make_requests(graph: LocationGraph, sorted_pairs: tuple[tuple[int, int], ...],
                  n: int, avg_volume: int, rng: GenRng) -> list[Request]:
    if n > len(sorted_pairs):
        raise ValueError("not enough sorted pairs for n requests")
    avg_dist = average_distance(graph)
    requests = []
    for r in range(n):
        q = round_half_up(rng.uniform(1, 2 * avg_volume - 1))
        w = round_half_up(2 * avg_dist * q / avg_volume)
        pickup, dropoff = sorted_pairs[r]
        # pair lists index non-depot nodes from 0; graph ids start after the depot
        requests.append(Request(id=r, w=float(w), q=q,
                                pickup=pickup + 1, dropoff=dropoff + 1))
    return requests


def make_fleet(m: int) -> list[Truck]:
    if m < 1:
        raise ValueError("m must be >= 1")
    trucks = []
    for t in range(m):
        capacity, coefficient = TRUCK_CLASSES[t % len(TRUCK_CLASSES)]
        trucks.append(Truck(id=t, capacity=capacity, cost_coefficient=coefficient))
    return trucks


def generate_instance(sample: TsplibSample, params: GenerationParams) -> Instance:
    return generate_family(sample, [params.k], params.m, params.seed,
                           params.avg_volume)[params.k]


def generate_family(sample: TsplibSample, k_list: list[float], m: int, seed: int,
                    avg_volume: int = DEFAULT_AVG_VOLUME) -> dict[float, Instance]:
    """Build one pair family at max(k) and carve each smaller k out of its
    prefix, so the k-instances of one family nest."""
    if not k_list:
        raise ValueError("k_list is empty")
    ks = sorted(k_list)
    graph = LocationGraph(coords=sample.coords)
    num_nondepot = graph.num_nodes - 1
    k_max = ks[-1]
    n_max = num_requests(graph.num_nodes, k_max)
    if n_max < 1:
        raise ValueError("n must be >= 1")

    rng = GenRng(seed)
    counts = repetition_counts(num_nondepot, n_max, rng)
    pairs = pair_nodes(counts, n_max, rng)
    family = sort_pairs(counts, pairs)

    out: dict[float, Instance] = {}
    for k in ks:
        n = num_requests(graph.num_nodes, k)
        requests = make_requests(graph, family.sorted_pairs, n, avg_volume, rng)
        trucks = make_fleet(m)
        meta = InstanceMeta(sample=sample.name, k=k, m=m, n=n, seed=seed)
        out[k] = Instance(graph=graph, requests=tuple(requests),
                          trucks=tuple(trucks), meta=meta)
    return out


# --- canonical instance text form ---------------------------------------

def _fmt_float(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return f"{x:.1f}"
    return format(x, ".17g")


def _emit_json(value, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        out.append("{\n")
        items = list(value.items())
        for i, (key, v) in enumerate(items):
            out.append(f'{pad}  "{key}": ')
            _emit_json(v, out, indent + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, v in enumerate(value):
            _emit_json(v, out, indent)
            if i < len(value) - 1:
                out.append(", ")
        out.append("]")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_fmt_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    else:
        raise TypeError(f"unsupported value {value!r}")


def serialize_instance(instance: Instance) -> str:
    doc = {
        "meta": {
            "sample": instance.meta.sample,
            "k": float(instance.meta.k),
            "m": instance.meta.m,
            "n": instance.meta.n,
            "seed": instance.meta.seed,
        },
        "locations": [
            {"id": i, "x": float(x), "y": float(y)}
            for i, (x, y) in enumerate(instance.graph.coords)
        ],
        "requests": [
            {"id": r.id, "w": float(r.w), "q": r.q,
             "pickup": r.pickup, "dropoff": r.dropoff}
            for r in instance.requests
        ],
        "trucks": [
            _truck_doc(t) for t in instance.trucks
        ],
    }
    out: list[str] = []
    _emit_json(doc, out, 0)
    out.append("\n")
    return "".join(out)


def _truck_doc(t: Truck) -> dict:
    doc = {"id": t.id, "capacity": t.capacity, "coefficient": float(t.cost_coefficient)}
    if t.cost_matrix is not None:
        doc["costs"] = [[float(c) for c in row] for row in t.cost_matrix]
    return doc


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ParseError(f"{path}: missing field '{key}'")
    return doc[key]


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"instance text is not valid JSON: {exc}") from exc
    meta_doc = _require(doc, "meta", "$")
    meta = InstanceMeta(sample=_require(meta_doc, "sample", "$.meta"),
                        k=float(_require(meta_doc, "k", "$.meta")),
                        m=int(_require(meta_doc, "m", "$.meta")),
                        n=int(_require(meta_doc, "n", "$.meta")),
                        seed=int(_require(meta_doc, "seed", "$.meta")))
    locations = _require(doc, "locations", "$")
    coords = []
    for i, loc in enumerate(locations):
        if _require(loc, "id", f"$.locations[{i}]") != i:
            raise ParseError(f"$.locations[{i}]: ids must be 0..|V|-1 in order")
        coords.append((float(loc["x"]), float(loc["y"])))
    graph = LocationGraph(coords=tuple(coords))
    requests = []
    for i, rd in enumerate(_require(doc, "requests", "$")):
        path = f"$.requests[{i}]"
        try:
            requests.append(Request(id=int(_require(rd, "id", path)),
                                    w=float(_require(rd, "w", path)),
                                    q=int(_require(rd, "q", path)),
                                    pickup=int(_require(rd, "pickup", path)),
                                    dropoff=int(_require(rd, "dropoff", path))))
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    trucks = []
    for i, td in enumerate(_require(doc, "trucks", "$")):
        path = f"$.trucks[{i}]"
        matrix = None
        if "costs" in td:
            matrix = tuple(tuple(float(c) for c in row) for row in td["costs"])
        try:
            trucks.append(Truck(id=int(_require(td, "id", path)),
                                capacity=int(_require(td, "capacity", path)),
                                cost_coefficient=float(_require(td, "coefficient", path)),
                                cost_matrix=matrix))
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    try:
        return Instance(graph=graph, requests=tuple(requests),
                        trucks=tuple(trucks), meta=meta)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
