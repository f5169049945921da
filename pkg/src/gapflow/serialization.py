"""Flat-file formats: SD documents (JSON), custom SD tables and trajectories (CSV)."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import SpectralDensityError
from .sd_model import (
    EdgeProfile,
    GappedSpectralDensity,
    make_figure_sd,
    make_lorentzian_gap_sd,
    make_power_law_gap_sd,
    make_tabulated_sd,
    rescaled,
)

TRAJECTORY_COLUMNS = ("omega_s_t", "gamma0_over_omega_s", "Xi0", "phi_c", "phi_s", "phase")


def fmt(x: float) -> str:
    """17 significant digits: enough for a bit-exact round trip of any double."""
    return format(float(x), ".17g")


def read_table(path) -> tuple[list[float], list[float]]:
    """Two-column CSV of ``(omega/omega_s, J/omega_s)``; header and ``#`` lines skipped."""
    xs, ys = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                x, y = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if xs:
                    raise SpectralDensityError(f"malformed table row {row!r} in {path}", "table")
                continue  # header
            xs.append(x)
            ys.append(y)
    return xs, ys


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise SpectralDensityError(f"missing field {where}.{key}", f"{where}.{key}")
    return d[key]


def sd_from_dict(doc: dict, base_dir=None) -> GappedSpectralDensity:
    """Build an SD from its JSON document.

    Built-in families are rebuilt from their parameters (any ``edge_profile``
    in the document is ignored for them); ``custom`` needs ``params.table``
    (a CSV path, relative to ``base_dir``) or ``params.points`` plus an
    ``edge_profile``.
    """
    family = _require(doc, "family", "sd")
    params = dict(doc.get("params", {}))
    scale = float(params.pop("rescaled_by", 1.0))
    omega_g = float(_require(doc, "omega_g", "sd")) / scale
    omega_s = float(_require(doc, "omega_s", "sd")) / scale
    if family == "figure_ohmic_gap":
        sd = make_figure_sd(float(_require(params, "alpha", "sd.params")), omega_g, omega_s)
    elif family == "power_law_exp":
        sd = make_power_law_gap_sd(
            float(_require(params, "q1", "sd.params")), float(_require(params, "alpha", "sd.params")),
            float(_require(params, "lambda1", "sd.params")), omega_g, omega_s,
        )
    elif family == "lorentzian_gap":
        sd = make_lorentzian_gap_sd(
            float(_require(params, "q2", "sd.params")), float(_require(params, "lambda2", "sd.params")),
            omega_g, omega_s,
        )
    elif family == "custom":
        profile = EdgeProfile.from_dict(_require(doc, "edge_profile", "sd"))
        if "table" in params:
            path = Path(params["table"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            xs, ys = read_table(path)
            source = str(params["table"])
        elif "points" in params:
            xs = [float(p[0]) for p in params["points"]]
            ys = [float(p[1]) for p in params["points"]]
            source = None
        else:
            raise SpectralDensityError("custom SD needs sd.params.table or sd.params.points", "sd.params")
        sd = make_tabulated_sd(xs, ys, omega_g, omega_s, profile, source=source)
    else:
        raise SpectralDensityError(f"unknown family {family!r}", "sd.family")
    return sd if scale == 1.0 else rescaled(sd, scale)


def load_sd(path) -> GappedSpectralDensity:
    with open(path) as fh:
        doc = json.load(fh)
    return sd_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def save_sd(sd: GappedSpectralDensity, path) -> None:
    with open(path, "w") as fh:
        json.dump(sd.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class TrajectoryRow:
    """One sample; rates in units of ``omega_s``, time as ``omega_s t``."""

    omega_s_t: float
    gamma0_over_omega_s: float
    Xi0: float
    phi_c: float
    phi_s: float
    phase: float

    def cells(self) -> list[str]:
        return [fmt(getattr(self, c)) for c in TRAJECTORY_COLUMNS]


def write_trajectory(rows: Sequence[TrajectoryRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in rows:
            writer.writerow(row.cells())


def read_trajectory(path) -> list[TrajectoryRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_COLUMNS:
            raise ValueError(f"unexpected trajectory header {header}")
        return [TrajectoryRow(*(float(v) for v in row)) for row in reader if row]


def nan_if_none(x) -> float:
    return math.nan if x is None else float(x)
