"""Finite-atom matrix measures on the real line (or on angles of the circle)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionError, StructureError
from .matcore import as_matrix, is_positive_semidefinite


@dataclass(frozen=True)
class DiscreteMeasure:
    """``tau = sum_j w_j delta_{t_j}`` with PSD weights ``w_j``."""

    nodes: np.ndarray
    weights: np.ndarray  # (m, p, p)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1)
        weights = np.asarray(self.weights, dtype=complex)
        if weights.ndim != 3 or weights.shape[0] != nodes.size or weights.shape[1] != weights.shape[2]:
            raise DimensionError(f"weights shape {weights.shape} does not match {nodes.size} nodes")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_atoms(cls, atoms: Iterable, p: int | None = None) -> "DiscreteMeasure":
        atoms = list(atoms)
        if not atoms:
            if p is None:
                raise DimensionError("empty measure needs an explicit block size p")
            return cls(np.zeros(0), np.zeros((0, p, p), complex))
        nodes = [float(t) for t, _ in atoms]
        weights = np.stack([as_matrix(w) for _, w in atoms])
        return cls(np.array(nodes), weights)

    @classmethod
    def empty(cls, p: int) -> "DiscreteMeasure":
        return cls(np.zeros(0), np.zeros((0, p, p), complex))

    @property
    def p(self) -> int:
        return self.weights.shape[1]

    def __len__(self):
        return self.nodes.size

    def atoms(self):
        return list(zip(self.nodes.tolist(), self.weights))

    def validate(self, rtol: float = 1e-10) -> None:
        if np.unique(self.nodes).size != self.nodes.size:
            raise StructureError("measure nodes must be distinct")
        for t, w in self.atoms():
            if not is_positive_semidefinite(w, rtol=rtol):
                raise StructureError(f"weight at node {t:g} is not positive semidefinite")

    def moment(self, k: int) -> np.ndarray:
        """``int t^k dtau = sum_j t_j^k w_j``."""
        if len(self) == 0:
            return np.zeros((self.p, self.p), complex)
        return np.einsum("j,jab->ab", self.nodes.astype(complex) ** k, self.weights)

    def moments(self, count: int) -> list[np.ndarray]:
        return [self.moment(k) for k in range(count)]

    def stieltjes(self, z: complex) -> np.ndarray:
        """``int dtau(t) / (t - z)``."""
        z = complex(z)
        if len(self) == 0:
            return np.zeros((self.p, self.p), complex)
        return np.einsum("j,jab->ab", 1.0 / (self.nodes - z), self.weights)

    def trig_moment(self, k: int) -> np.ndarray:
        """``(1/2 pi) sum_j e^{i k t_j} w_j`` for atoms placed at angles ``t_j``."""
        if len(self) == 0:
            return np.zeros((self.p, self.p), complex)
        return np.einsum("j,jab->ab", np.exp(1j * k * self.nodes), self.weights) / (2 * np.pi)

    def integrate(self, g, poles=()) -> np.ndarray:
        """``int g(t) dtau(t)`` for a scalar function `g` (``poles`` is accepted for API parity)."""
        if len(self) == 0:
            return np.zeros((self.p, self.p), complex)
        vals = np.array([complex(g(t)) for t in self.nodes])
        return np.einsum("j,jab->ab", vals, self.weights)
