#!/usr/bin/env python3
"""Render every view of the bundled dataset to SVG files under out/."""
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from hyperview import (
    MergeConfig, compile_polylines, frequency_widths, heat_scene,
    matrix_from_normalized, merge_pure, normalize, parse_table, render_svg,
    side_by_side,
)

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data" / "wbc" / "breast-cancer-wisconsin.data"


def main():
    out = ROOT / "out"
    out.mkdir(exist_ok=True)
    ds = parse_table(DATA.read_text(), class_column=-1, id_column=0)
    nd = normalize(ds)
    tm = matrix_from_normalized(nd, tie_class="4")
    hbs = merge_pure(tm, MergeConfig(), half_length=0.0)

    views = {
        "polylines": compile_polylines(nd),
        "heat": heat_scene(nd, hbs.pure_blocks()),
        "sidebyside": side_by_side(nd, hbs.blocks, tm),
    }
    freq = compile_polylines(nd)
    freq.segments = frequency_widths(nd)
    freq.visible[:] = False
    views["frequency"] = freq

    for name, scene in views.items():
        path = out / f"wbc_{name}.svg"
        path.write_bytes(render_svg(scene))
        print(f"wrote {path} ({path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
