"""File formats: single-column series CSV, surface CSV, region JSON,
coverage-study CSV and iso-level contour JSON."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from arcd.ar import InvalidParameterError, SeriesSample
from arcd.experiments import CoverageRow
from arcd.grids import ConfidenceSurface, RegionResult

__all__ = [
    "read_series_csv",
    "write_series_csv",
    "surface_to_csv",
    "region_to_json",
    "coverage_rows_to_csv",
    "contours_to_json",
    "write_json",
]


def read_series_csv(path, header: bool = False) -> SeriesSample:
    """Single-column CSV of decimal floats; ``header`` skips the first row."""
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if i == 0 and header:
                continue
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError as exc:
                raise InvalidParameterError(f"{path}: line {i + 1} is not a float: {row[0]!r}") from exc
    if not values:
        raise InvalidParameterError(f"{path}: no data rows")
    return SeriesSample(np.array(values))


def write_series_csv(path, series: SeriesSample, header: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([header])
        for v in series.values:
            writer.writerow([repr(float(v))])


def surface_to_csv(path, surface: ConfidenceSurface) -> None:
    """Columns phi1, phi2, value, in_region over all window nodes."""
    grid = surface.grid
    p1, p2 = grid.mesh()
    mask = grid.in_region
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phi1", "phi2", "value", "in_region"])
        for i in range(grid.m + 1):
            for j in range(grid.m + 1):
                writer.writerow(
                    [
                        repr(float(p1[i, j])),
                        repr(float(p2[i, j])),
                        repr(float(surface.values[i, j])),
                        int(mask[i, j]),
                    ]
                )


def region_to_json(path, region: RegionResult) -> None:
    payload = {
        "level": region.level,
        "threshold": region.threshold,
        "area": region.area,
        "cells": [[int(i), int(j)] for i, j in region.member_nodes],
    }
    write_json(path, payload)


def write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


COVERAGE_COLUMNS = ["n", "method", "level", "coverage", "mc_se", "mean_area", "replicates", "failures"]


def coverage_rows_to_csv(path, rows: list[CoverageRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COVERAGE_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.n,
                    row.method,
                    repr(row.level),
                    repr(row.coverage),
                    repr(row.mc_se),
                    repr(row.mean_area),
                    row.replicates,
                    row.failures,
                ]
            )


def contours_to_json(path, surface: ConfidenceSurface, levels) -> None:
    """Iso-level polylines of a surface, for external plotting.

    JSON shape: {"levels": [{"level": v, "polylines": [[[x, y], ...], ...]}]}.
    """
    import contourpy

    grid = surface.grid
    values = np.where(np.isfinite(surface.values), surface.values, np.nan)
    gen = contourpy.contour_generator(
        x=grid.phi1_axis, y=grid.phi2_axis, z=values.T, name="serial"
    )
    payload = {"levels": []}
    for level in levels:
        lines = gen.lines(float(level))
        polylines = [np.asarray(line).tolist() for line in lines]
        payload["levels"].append({"level": float(level), "polylines": polylines})
    write_json(Path(path), payload)
