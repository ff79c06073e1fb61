"""Coupling maps and the named topology registry.

Edge lists are stored directed (both directions present), matching the
format the heavy-hex and device maps are published in. Small named
shapes (lines, rings, T/Y/H/F trees) are generated; the 27/33/65-qubit
heavy-hex maps and ibm_torino are verbatim edge lists.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CouplingMap:
    """Connectivity graph with all-pairs shortest-path distances."""

    n_qubits: int
    edges: frozenset[tuple[int, int]]
    # undirected edges in registration order; fixes action orderings
    edge_list: tuple[tuple[int, int], ...]
    dist: np.ndarray

    @classmethod
    def from_edges(cls, n_qubits: int, pairs) -> "CouplingMap":
        undirected: list[tuple[int, int]] = []
        seen = set()
        directed = set()
        for a, b in pairs:
            if a == b or not (0 <= a < n_qubits and 0 <= b < n_qubits):
                raise ValueError(f"bad edge ({a}, {b}) for {n_qubits} qubits")
            directed.add((a, b))
            directed.add((b, a))
            key = (min(a, b), max(a, b))
            if key not in seen:
                seen.add(key)
                undirected.append(key)
        dist = _bfs_all_pairs(n_qubits, directed)
        if np.any(dist < 0):
            raise ValueError("coupling map is not connected")
        dist.setflags(write=False)
        return cls(n_qubits, frozenset(directed), tuple(undirected), dist)

    def connected(self, a: int, b: int) -> bool:
        return (a, b) in self.edges

    @property
    def diameter(self) -> int:
        return int(self.dist.max())


def _bfs_all_pairs(n: int, directed: set[tuple[int, int]]) -> np.ndarray:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in directed:
        adj[a].append(b)
    dist = np.full((n, n), -1, dtype=np.int64)
    for src in range(n):
        dist[src, src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[src, v] < 0:
                    dist[src, v] = dist[src, u] + 1
                    queue.append(v)
    return dist


def _line(n: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n - 1)]


def _ring(n: int) -> list[tuple[int, int]]:
    return _line(n) + [(n - 1, 0)]


# Named tree shapes on 4-9 qubits. The published material shows these
# only as drawings, so the edge lists below are canonical reconstructions
# (a line with a stem for T, three arms from a hub for Y, two uprights
# joined through a crossbar for H, a spine with two arms for F).
_SHAPES: dict[str, tuple[int, list[tuple[int, int]]]] = {
    "4-Y": (4, [(0, 1), (1, 2), (1, 3)]),
    "5-T": (5, [(0, 1), (1, 2), (1, 3), (3, 4)]),
    "6-T": (6, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)]),
    "6-Y": (6, [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5)]),
    "7-F": (7, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (2, 6)]),
    "7-H": (7, [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)]),
    "7-T": (7, [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6)]),
    "7-Y": (7, [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]),
    "8-F": (8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 6), (2, 7)]),
    "8-H": (8, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 6), (5, 6), (6, 7)]),
    "8-T1": (8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6), (6, 7)]),
    "8-T2": (8, [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6), (6, 7)]),
    "8-Y": (8, [(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (0, 6), (6, 7)]),
    "9-F1": (9, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 6), (6, 7), (2, 8)]),
    "9-F2": (9, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (0, 7), (2, 8)]),
    "9-H1": (9, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5), (5, 7), (6, 7), (7, 8)]),
    "9-H2": (9, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5), (4, 7), (6, 7), (7, 8)]),
    "9-H3": (9, [(0, 1), (1, 2), (2, 3), (2, 4), (4, 5), (5, 6), (6, 7), (5, 8)]),
    "9-H4": (9, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5), (5, 6), (5, 7), (7, 8)]),
    "9-T1": (9, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 7), (7, 8)]),
    "9-T2": (9, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6), (6, 7), (7, 8)]),
    "9-Y": (9, [(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 6), (0, 7), (7, 8)]),
}

_HH_27 = [
    [0, 1], [1, 0], [1, 2], [1, 4], [2, 1], [2, 3], [3, 2], [3, 5], [4, 1],
    [4, 7], [5, 3], [5, 8], [6, 7], [7, 4], [7, 6], [7, 10], [8, 5], [8, 9],
    [8, 11], [9, 8], [10, 7], [10, 12], [11, 8], [11, 14], [12, 10], [12, 13],
    [12, 15], [13, 12], [13, 14], [14, 11], [14, 13], [14, 16], [15, 12],
    [15, 18], [16, 14], [16, 19], [17, 18], [18, 15], [18, 17], [18, 21],
    [19, 16], [19, 20], [19, 22], [20, 19], [21, 18], [21, 23], [22, 19],
    [22, 25], [23, 21], [23, 24], [24, 23], [24, 25], [25, 22], [25, 24],
    [25, 26], [26, 25],
]

_HH_33 = [
    [0, 1], [1, 0], [1, 2], [1, 4], [2, 1], [2, 3], [3, 2], [3, 5], [3, 30],
    [4, 1], [4, 7], [5, 3], [5, 8], [6, 7], [7, 4], [7, 6], [7, 10], [8, 5],
    [8, 9], [8, 11], [9, 8], [10, 7], [10, 12], [11, 8], [11, 14], [12, 10],
    [12, 13], [12, 15], [13, 12], [13, 14], [14, 11], [14, 13], [14, 16],
    [15, 12], [15, 18], [16, 14], [16, 19], [17, 18], [18, 15], [18, 17],
    [18, 21], [19, 16], [19, 20], [19, 22], [20, 19], [21, 18], [21, 23],
    [22, 19], [22, 25], [23, 21], [23, 24], [23, 27], [24, 23], [24, 25],
    [25, 22], [25, 24], [25, 26], [26, 25], [27, 23], [27, 28], [28, 27],
    [28, 29], [29, 28], [30, 3], [30, 31], [31, 30], [31, 32], [32, 31],
]

_HH_65 = [
    [0, 1], [0, 10], [1, 0], [1, 2], [2, 1], [2, 3], [3, 2], [3, 4], [4, 3],
    [4, 5], [4, 11], [5, 4], [5, 6], [6, 5], [6, 7], [7, 6], [7, 8], [8, 7],
    [8, 9], [8, 12], [9, 8], [10, 0], [10, 13], [11, 4], [11, 17], [12, 8],
    [12, 21], [13, 10], [13, 14], [14, 13], [14, 15], [15, 14], [15, 16],
    [15, 24], [16, 15], [16, 17], [17, 11], [17, 16], [17, 18], [18, 17],
    [18, 19], [19, 18], [19, 20], [19, 25], [20, 19], [20, 21], [21, 12],
    [21, 20], [21, 22], [22, 21], [22, 23], [23, 22], [23, 26], [24, 15],
    [24, 29], [25, 19], [25, 33], [26, 23], [26, 37], [27, 28], [27, 38],
    [28, 27], [28, 29], [29, 24], [29, 28], [29, 30], [30, 29], [30, 31],
    [31, 30], [31, 32], [31, 39], [32, 31], [32, 33], [33, 25], [33, 32],
    [33, 34], [34, 33], [34, 35], [35, 34], [35, 36], [35, 40], [36, 35],
    [36, 37], [37, 26], [37, 36], [38, 27], [38, 41], [39, 31], [39, 45],
    [40, 35], [40, 49], [41, 38], [41, 42], [42, 41], [42, 43], [43, 42],
    [43, 44], [43, 52], [44, 43], [44, 45], [45, 39], [45, 44], [45, 46],
    [46, 45], [46, 47], [47, 46], [47, 48], [47, 53], [48, 47], [48, 49],
    [49, 40], [49, 48], [49, 50], [50, 49], [50, 51], [51, 50], [51, 54],
    [52, 43], [52, 56], [53, 47], [53, 60], [54, 51], [54, 64], [55, 56],
    [56, 52], [56, 55], [56, 57], [57, 56], [57, 58], [58, 57], [58, 59],
    [59, 58], [59, 60], [60, 53], [60, 59], [60, 61], [61, 60], [61, 62],
    [62, 61], [62, 63], [63, 62], [63, 64], [64, 54], [64, 63],
]

_TORINO = [
    [0, 1], [0, 15], [1, 0], [1, 2], [2, 1], [2, 3], [3, 2], [3, 4], [4, 3],
    [4, 5], [4, 16], [5, 4], [5, 6], [6, 5], [6, 7], [7, 6], [7, 8], [8, 7],
    [8, 9], [8, 17], [9, 8], [9, 10], [10, 9], [10, 11], [11, 10], [11, 12],
    [12, 11], [12, 13], [12, 18], [13, 12], [13, 14], [14, 13], [15, 0],
    [15, 19], [16, 4], [16, 23], [17, 8], [17, 27], [18, 12], [18, 31],
    [19, 15], [19, 20], [20, 19], [20, 21], [21, 20], [21, 22], [21, 34],
    [22, 21], [22, 23], [23, 16], [23, 22], [23, 24], [24, 23], [24, 25],
    [25, 24], [25, 26], [25, 35], [26, 25], [26, 27], [27, 17], [27, 26],
    [27, 28], [28, 27], [28, 29], [29, 28], [29, 30], [29, 36], [30, 29],
    [30, 31], [31, 18], [31, 30], [31, 32], [32, 31], [32, 33], [33, 32],
    [33, 37], [34, 21], [34, 40], [35, 25], [35, 44], [36, 29], [36, 48],
    [37, 33], [37, 52], [38, 39], [38, 53], [39, 38], [39, 40], [40, 34],
    [40, 39], [40, 41], [41, 40], [41, 42], [42, 41], [42, 43], [42, 54],
    [43, 42], [43, 44], [44, 35], [44, 43], [44, 45], [45, 44], [45, 46],
    [46, 45], [46, 47], [46, 55], [47, 46], [47, 48], [48, 36], [48, 47],
    [48, 49], [49, 48], [49, 50], [50, 49], [50, 51], [50, 56], [51, 50],
    [51, 52], [52, 37], [52, 51], [53, 38], [53, 57], [54, 42], [54, 61],
    [55, 46], [55, 65], [56, 50], [56, 69], [57, 53], [57, 58], [58, 57],
    [58, 59], [59, 58], [59, 60], [59, 72], [60, 59], [60, 61], [61, 54],
    [61, 60], [61, 62], [62, 61], [62, 63], [63, 62], [63, 64], [63, 73],
    [64, 63], [64, 65], [65, 55], [65, 64], [65, 66], [66, 65], [66, 67],
    [67, 66], [67, 68], [67, 74], [68, 67], [68, 69], [69, 56], [69, 68],
    [69, 70], [70, 69], [70, 71], [71, 70], [71, 75], [72, 59], [72, 78],
    [73, 63], [73, 82], [74, 67], [74, 86], [75, 71], [75, 90], [76, 77],
    [76, 91], [77, 76], [77, 78], [78, 72], [78, 77], [78, 79], [79, 78],
    [79, 80], [80, 79], [80, 81], [80, 92], [81, 80], [81, 82], [82, 73],
    [82, 81], [82, 83], [83, 82], [83, 84], [84, 83], [84, 85], [84, 93],
    [85, 84], [85, 86], [86, 74], [86, 85], [86, 87], [87, 86], [87, 88],
    [88, 87], [88, 89], [88, 94], [89, 88], [89, 90], [90, 75], [90, 89],
    [91, 76], [91, 95], [92, 80], [92, 99], [93, 84], [93, 103], [94, 88],
    [94, 107], [95, 91], [95, 96], [96, 95], [96, 97], [97, 96], [97, 98],
    [97, 110], [98, 97], [98, 99], [99, 92], [99, 98], [99, 100], [100, 99],
    [100, 101], [101, 100], [101, 102], [101, 111], [102, 101], [102, 103],
    [103, 93], [103, 102], [103, 104], [104, 103], [104, 105], [105, 104],
    [105, 106], [105, 112], [106, 105], [106, 107], [107, 94], [107, 106],
    [107, 108], [108, 107], [108, 109], [109, 108], [109, 113], [110, 97],
    [110, 116], [111, 101], [111, 120], [112, 105], [112, 124], [113, 109],
    [113, 128], [114, 115], [114, 129], [115, 114], [115, 116], [116, 110],
    [116, 115], [116, 117], [117, 116], [117, 118], [118, 117], [118, 119],
    [118, 130], [119, 118], [119, 120], [120, 111], [120, 119], [120, 121],
    [121, 120], [121, 122], [122, 121], [122, 123], [122, 131], [123, 122],
    [123, 124], [124, 112], [124, 123], [124, 125], [125, 124], [125, 126],
    [126, 125], [126, 127], [126, 132], [127, 126], [127, 128], [128, 113],
    [128, 127], [129, 114], [130, 118], [131, 122], [132, 126],
]


def _build_registry() -> dict[str, CouplingMap]:
    specs: dict[str, tuple[int, list]] = {}
    for n in (3, 4, 5, 6, 7, 8, 9, 10, 11):
        specs[f"{n}-L"] = (n, _line(n))
    specs["12-O"] = (12, _ring(12))
    specs.update(_SHAPES)
    specs["27-HH"] = (27, _HH_27)
    specs["33-HH"] = (33, _HH_33)
    specs["65-HH"] = (65, _HH_65)
    specs["ibm_torino"] = (133, _TORINO)
    return {name: CouplingMap.from_edges(n, pairs) for name, (n, pairs) in specs.items()}


_REGISTRY = _build_registry()


def topology_names() -> list[str]:
    return list(_REGISTRY)


def topology(name: str) -> CouplingMap:
    """Look up a registered coupling map by its topology id."""
    try:
        return _REGISTRY[name]
    except KeyError:
        valid = ", ".join(_REGISTRY)
        raise KeyError(f"unknown topology {name!r}; valid names: {valid}") from None
