"""Growable node storage with linear-scan nearest neighbor."""

import numpy as np


class Tree:
    def __init__(self, root, distance, capacity: int = 256):
        root = np.asarray(root, dtype=float)
        self._nodes = np.empty((capacity, root.size))
        self._nodes[0] = root
        self.parents = [-1]
        self.costs = [0.0]
        self.distance = distance

    def __len__(self):
        return len(self.parents)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes[: len(self)]

    def __getitem__(self, i) -> np.ndarray:
        return self._nodes[i]

    def add(self, q, parent: int, cost: float = 0.0) -> int:
        n = len(self)
        if n == len(self._nodes):
            grown = np.empty((2 * n, self._nodes.shape[1]))
            grown[:n] = self._nodes
            self._nodes = grown
        self._nodes[n] = q
        self.parents.append(parent)
        self.costs.append(cost)
        return n

    def nearest(self, q) -> int:
        return int(np.argmin(self.distance(q, self.nodes)))

    def branch(self, i: int) -> list:
        """Configurations from the root down to node ``i``."""
        out = []
        while i >= 0:
            out.append(self._nodes[i].copy())
            i = self.parents[i]
        return out[::-1]
