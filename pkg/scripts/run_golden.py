"""Build the five-encounter golden journey and print its structure and metrics."""
import argparse
import json

from pjkg import golden
from pjkg.export import export
from pjkg.metrics import structural_report, structural_table
from pjkg.ontology import load_default_schema
from pjkg.pipeline import build_pjkg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", help="write the PJKG json here")
    args = ap.parse_args()

    schema = load_default_schema()
    outcome = build_pjkg(golden.golden_bundle(), golden.golden_backend(), schema)
    g = outcome.pjkg
    print(f"patient {outcome.patient_id}: {g.node_count} nodes, {g.edge_count} edges")
    for node, edge_type in g.journey(outcome.patient_id):
        dx = [n.properties["Name"] + " (" + n.properties["ICD-10"] + ")"
              for _, n in g.neighbors(node.id, "out", "HAS_DIAGNOSIS")]
        print(f"  --{edge_type}--> {node.id} {node.properties['Date']} {node.properties['Time']}  {', '.join(dx)}")
    print()
    rep = structural_report(g, schema)
    print(structural_table({"golden": rep}))
    print(json.dumps(rep.per_relationship_counts, indent=2))
    if args.out:
        export(g, "json", args.out)


if __name__ == "__main__":
    main()
