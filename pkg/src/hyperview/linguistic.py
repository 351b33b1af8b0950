"""Plain-language summaries of where data concentrates along each
coordinate, split into lower, middle, and upper thirds of the unit range."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THIRDS = ("lower", "middle", "upper")


@dataclass
class ThirdsProfile:
    """Per coordinate, the fraction of points in [0,1/3), [1/3,2/3), [2/3,1]
    and the winning third when it holds at least the cutoff fraction."""

    fractions: np.ndarray            # (n_coords, 3), rows sum to 1
    concentration: list              # per coordinate: "lower"|"middle"|"upper"|None

    def to_json_dict(self, coordinate_names) -> dict:
        return {
            name: {
                "lower": float(self.fractions[j, 0]),
                "middle": float(self.fractions[j, 1]),
                "upper": float(self.fractions[j, 2]),
                "concentration": self.concentration[j],
            }
            for j, name in enumerate(coordinate_names)
        }


def profile(values: np.ndarray, cutoff: float = 0.5) -> ThirdsProfile:
    """Count normalized points per third. The middle boundaries are
    half-open and the top third is closed at 1 so the partition is exact."""
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    n, d = vals.shape
    if n < 1:
        raise ValueError("profile requires at least one point")
    lower = (vals < 1 / 3).sum(axis=0)
    middle = ((vals >= 1 / 3) & (vals < 2 / 3)).sum(axis=0)
    upper = (vals >= 2 / 3).sum(axis=0)
    frac = np.column_stack([lower, middle, upper]) / n
    conc = []
    for j in range(d):
        w = int(np.argmax(frac[j]))
        conc.append(THIRDS[w] if frac[j, w] >= cutoff else None)
    return ThirdsProfile(fractions=frac, concentration=conc)


def _group_sentence(names: list[str], third: str) -> str:
    if not names:
        return f"No dimensions have their data concentrated in the {third} third."
    if len(names) == 1:
        return (f"The data in dimension {names[0]} is concentrated "
                f"in the {third} third.")
    listed = ", ".join(names[:-1]) + f", and {names[-1]}"
    return (f"The data in dimensions {listed} are concentrated "
            f"in the {third} third.")


def describe(profiles: dict[str, ThirdsProfile], coordinate_names: list[str],
             style: str = "structured") -> str:
    """Render group descriptions per class or block.

    The structured style lists the three thirds per profile, including the
    explicit no-dimensions line for empty groups; the sentence style emits
    only the non-empty groups. Dimension lists follow coordinate order.
    """
    out = []
    for key, prof in profiles.items():
        out.append(f"Class {key}")
        for t_index, third in enumerate(THIRDS):
            names = [coordinate_names[j] for j in range(len(coordinate_names))
                     if prof.concentration[j] == third]
            line = _group_sentence(names, third)
            if style == "sentence" and not names:
                continue
            out.append(line)
    return "\n".join(out)
