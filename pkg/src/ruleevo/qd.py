"""MAP-Elites style archive over (rule count, mean |threshold|)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .errors import ArchiveError
from .policy import Descriptor, Policy, PolicyValidationError, complexity, descriptor


@dataclass(frozen=True)
class GridSpec:
    max_rules: int
    threshold_bins: int = 16
    threshold_max: float = 1.0

    def __post_init__(self):
        if self.max_rules < 1 or self.threshold_bins < 1:
            raise ArchiveError("max_rules and threshold_bins must be >= 1")
        if not (self.threshold_max > 0 and math.isfinite(self.threshold_max)):
            raise ArchiveError("threshold_max must be positive and finite")

    @property
    def n_cells(self) -> int:
        return self.max_rules * self.threshold_bins


def bin_descriptor(d: Descriptor, spec: GridSpec) -> tuple[int, int]:
    if not 1 <= d.rule_count <= spec.max_rules:
        raise ArchiveError(f"rule count {d.rule_count} outside [1, {spec.max_rules}]")
    b = spec.threshold_bins
    th_bin = min(b - 1, math.floor(d.mean_abs_threshold / spec.threshold_max * b))
    return d.rule_count - 1, th_bin


@dataclass
class ArchiveCell:
    policy: Policy
    fitness: float
    descriptor: Descriptor
    inserted_at: int
    seq: int
    performance: float | None = None


@dataclass
class Archive:
    spec: GridSpec
    cells: dict[tuple[int, int], ArchiveCell] = field(default_factory=dict)
    inserts: int = 0

    def __len__(self) -> int:
        return len(self.cells)

    def insert(self, policy: Policy, fitness: float, generation: int = 0,
               performance: float | None = None) -> bool:
        """Store ``policy`` if its cell is empty or it strictly beats the incumbent."""
        d = descriptor(policy)
        coords = bin_descriptor(d, self.spec)
        current = self.cells.get(coords)
        if current is not None and not fitness > current.fitness:
            return False
        self.cells[coords] = ArchiveCell(policy, float(fitness), d, generation, self.inserts, performance)
        self.inserts += 1
        return True

    def best(self) -> ArchiveCell:
        if not self.cells:
            raise ArchiveError("archive is empty")
        return min(self.cells.values(), key=lambda c: (-c.fitness, complexity(c.policy), c.seq))

    def to_dict(self) -> dict:
        return {
            "spec": {
                "max_rules": self.spec.max_rules,
                "threshold_bins": self.spec.threshold_bins,
                "threshold_max": self.spec.threshold_max,
            },
            "inserts": self.inserts,
            "cells": [
                {
                    "coords": list(coords),
                    "fitness": cell.fitness,
                    "performance": cell.performance,
                    "generation": cell.inserted_at,
                    "seq": cell.seq,
                    "policy": cell.policy.to_dict(),
                }
                for coords, cell in sorted(self.cells.items())
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Archive":
        try:
            spec = GridSpec(int(doc["spec"]["max_rules"]), int(doc["spec"]["threshold_bins"]),
                            float(doc["spec"]["threshold_max"]))
            archive = cls(spec)
            cells = doc["cells"]
            for i, c in enumerate(cells):
                policy = Policy.from_dict(c["policy"])
                d = descriptor(policy)
                coords = tuple(int(v) for v in c["coords"])
                if bin_descriptor(d, spec) != coords:
                    raise ArchiveError(f"cell {coords}: stored policy does not bin to its coordinates")
                if coords in archive.cells:
                    raise ArchiveError(f"duplicate cell {coords}")
                perf = c.get("performance")
                archive.cells[coords] = ArchiveCell(policy, float(c["fitness"]), d, int(c["generation"]),
                                                    int(c.get("seq", i)), None if perf is None else float(perf))
            archive.inserts = int(doc.get("inserts", len(cells)))
        except (KeyError, TypeError, ValueError, PolicyValidationError) as exc:
            if isinstance(exc, ArchiveError):
                raise
            raise ArchiveError(f"malformed archive document: {exc}") from exc
        return archive


def archive_insert(archive: Archive, policy: Policy, fitness: float, generation: int = 0,
                   performance: float | None = None) -> bool:
    return archive.insert(policy, fitness, generation, performance)


def archive_best(archive: Archive) -> ArchiveCell:
    return archive.best()


def archive_dump(archive: Archive) -> str:
    return json.dumps(archive.to_dict(), indent=2)


def archive_load(document: str) -> Archive:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"archive is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArchiveError("archive document must be a JSON object")
    return Archive.from_dict(doc)


def archive_csv(archive: Archive) -> str:
    """Heatmap projection: one row per occupied cell."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rule_bin", "th_bin", "fitness", "complexity"])
    for (rb, tb), cell in sorted(archive.cells.items()):
        w.writerow([rb, tb, repr(cell.fitness), complexity(cell.policy)])
    return buf.getvalue()
