"""Render node, expansion and polynomial diagrams for a few representative methods.

    python3 scripts/diagrams.py --out results/diagrams
"""
import argparse
from pathlib import Path

from polyblock.builder import make_spec
from polyblock.diagrams import expansion_diagram, node_diagram, polynomial_diagram

SPECS = {
    "bbdf_q2": make_spec("bdf", "pmfc", 2, 0.5, ordering="classical"),
    "bam_q2": make_spec("adams", "pmfc", 2, 0.5, ordering="classical", endpoint="vi"),
    "bdf_smfc_q4": make_spec("bdf", "smfc", 4, 0.5),
    "adams_pmfcmj_fi3_q5": make_spec("adams", "pmfcmj", 5, 0.5, ordering="classical", endpoint="fi3"),
    "adams_smvc_sweeping_q4": make_spec("adams", "smvc", 4, 0.5, endpoint="sweeping"),
    "gbdf_smvc_explicit_q3": make_spec("gbdf", "smvc", 3, 0.5, implicitness="explicit"),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/diagrams")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in SPECS.items():
        (out / f"{name}_nodes.svg").write_text(node_diagram(spec))
        if spec.family.value == "adams":
            (out / f"{name}_expansion.svg").write_text(expansion_diagram(spec))
        for i, svg in enumerate(polynomial_diagram(spec)):
            (out / f"{name}_polynomial{i}.svg").write_text(svg)
    print(f"wrote {len(list(out.glob('*.svg')))} SVG files to {out}")


if __name__ == "__main__":
    main()
