"""Serializers for PropertyGraph: canonical json, GraphML and a MERGE script."""
from __future__ import annotations

import io
import json
from pathlib import Path
from typing import IO
from xml.etree import ElementTree as ET

from .errors import IoFailure, ParseFailure
from .graph import Edge, Node, PropertyGraph, Subgraph
from .ontology import OntologySchema

FORMATS = ("json", "graphml", "cypher-script")


def graph_to_dict(graph: PropertyGraph) -> dict:
    return {
        "schema_version": graph.schema.version,
        "nodes": [
            {"id": n.id, "label": n.label, "properties": dict(sorted(n.properties.items()))}
            for n in graph.nodes()
        ],
        "edges": [
            {"source": e.source, "target": e.target, "type": e.type,
             "properties": dict(sorted(e.properties.items()))}
            for e in graph.edges()
        ],
    }


def to_json(graph: PropertyGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def to_graphml(graph: PropertyGraph) -> str:
    nodes, edges = graph.nodes(), graph.edges()
    node_props = sorted({k for n in nodes for k in n.properties})
    edge_props = sorted({k for e in edges for k in e.properties})

    root = ET.Element("graphml", {"xmlns": "http://graphml.graphdrawing.org/xmlns"})
    key_ids: dict[tuple[str, str], str] = {}

    def add_key(domain: str, name: str) -> None:
        kid = f"{domain[0]}{len(key_ids)}"
        key_ids[(domain, name)] = kid
        ET.SubElement(root, "key", {"id": kid, "for": domain, "attr.name": name, "attr.type": "string"})

    add_key("node", "label")
    for name in node_props:
        add_key("node", name)
    add_key("edge", "type")
    for name in edge_props:
        add_key("edge", name)

    g = ET.SubElement(root, "graph", {"id": "pjkg", "edgedefault": "directed"})
    for n in nodes:
        el = ET.SubElement(g, "node", {"id": n.id})
        ET.SubElement(el, "data", {"key": key_ids[("node", "label")]}).text = n.label
        for name in sorted(n.properties):
            ET.SubElement(el, "data", {"key": key_ids[("node", name)]}).text = n.properties[name]
    for i, e in enumerate(edges):
        el = ET.SubElement(g, "edge", {"id": f"e{i}", "source": e.source, "target": e.target})
        ET.SubElement(el, "data", {"key": key_ids[("edge", "type")]}).text = e.type
        for name in sorted(e.properties):
            ET.SubElement(el, "data", {"key": key_ids[("edge", name)]}).text = e.properties[name]

    ET.indent(root)
    buf = io.StringIO()
    ET.ElementTree(root).write(buf, encoding="unicode", xml_declaration=False)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + buf.getvalue() + "\n"


def _cypher_str(value: str) -> str:
    return "'" + value.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n") + "'"


def _cypher_map(props: dict[str, str]) -> str:
    items = ", ".join(f"`{k}`: {_cypher_str(v)}" for k, v in sorted(props.items()))
    return "{" + items + "}"


def to_cypher_script(graph: PropertyGraph) -> str:
    lines = []
    for n in graph.nodes():
        stmt = f"MERGE (n:`{n.label}` {{id: {_cypher_str(n.id)}}})"
        if n.properties:
            stmt += f" SET n += {_cypher_map(n.properties)}"
        lines.append(stmt + ";")
    for e in graph.edges():
        stmt = (
            f"MATCH (a {{id: {_cypher_str(e.source)}}}), (b {{id: {_cypher_str(e.target)}}}) "
            f"MERGE (a)-[r:`{e.type}`]->(b)"
        )
        if e.properties:
            stmt += f" SET r += {_cypher_map(e.properties)}"
        lines.append(stmt + ";")
    return "".join(line + "\n" for line in lines)


_RENDERERS = {"json": to_json, "graphml": to_graphml, "cypher-script": to_cypher_script}


def render(graph: PropertyGraph, fmt: str) -> str:
    try:
        return _RENDERERS[fmt](graph)
    except KeyError:
        raise ValueError(f"unknown export format {fmt!r}; expected one of {FORMATS}") from None


def export(graph: PropertyGraph, fmt: str, sink: str | Path | IO[str]) -> None:
    text = render(graph, fmt)
    if hasattr(sink, "write"):
        sink.write(text)
        return
    try:
        # newline="" keeps LF endings on every platform
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {sink}: {exc}") from exc


def graph_from_dict(doc: dict, schema: OntologySchema | None = None) -> PropertyGraph:
    try:
        nodes = [Node(str(n["id"]), str(n["label"]), dict(n.get("properties", {}))) for n in doc["nodes"]]
        edges = [
            Edge(str(e["source"]), str(e["target"]), str(e["type"]), dict(e.get("properties", {})))
            for e in doc["edges"]
        ]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseFailure(f"malformed graph document: missing or bad field {exc}") from exc
    graph = PropertyGraph(schema)
    graph.merge_subgraph(Subgraph(nodes, edges))
    return graph


def import_graph(source: str | Path | IO[str], fmt: str = "json",
                 schema: OntologySchema | None = None) -> PropertyGraph:
    """Load a canonical json graph document.  ``source`` is a path or open file."""
    if fmt != "json":
        raise ValueError(f"import supports only json, got {fmt!r}")
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read {source}: {exc}") from exc
    return loads(text, schema)


def loads(text: str, schema: OntologySchema | None = None) -> PropertyGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"invalid json: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(doc, dict):
        raise ParseFailure("graph document must be a json object")
    return graph_from_dict(doc, schema)
