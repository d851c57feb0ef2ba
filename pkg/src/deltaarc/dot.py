"""Graphviz DOT rendering of decomposed components."""

from __future__ import annotations

from typing import Sequence

from .errors import UnknownComponentType
from .model import ArchitectureLibrary, ComponentDefinition, Direction, Origin, PortDecl, iter_definitions, resolve

_SHAPE = {Direction.IN: "invtriangle", Direction.OUT: "triangle"}


def _node(node_id: str, port: PortDecl, indent: str) -> str:
    label = port.name if port.name == port.data_type else f"{port.name} : {port.data_type}"
    return f'{indent}"{node_id}" [label="{label}", shape={_SHAPE[port.direction]}];'


def component_to_dot(
    lib: ArchitectureLibrary, d: ComponentDefinition, enclosing: Sequence[ComponentDefinition] = (), name: str | None = None
) -> str:
    name = name or d.qualified_name
    lines = [f'digraph "{name}" {{', "    rankdir=LR;", "    node [fontsize=10];"]
    lines.append(f'    subgraph "cluster_{d.name}" {{')
    lines.append(f'        label="{d.name}";')
    port_types = {}
    for direction, rank in ((Direction.IN, "source"), (Direction.OUT, "sink")):
        ports = [p for p in d.ports if p.direction is direction]
        if not ports:
            continue
        lines.append(f"        {{ rank={rank};")
        for p in ports:
            lines.append(_node(p.name, p, "            "))
            port_types[p.name] = p.data_type
        lines.append("        }")
    for s in d.subcomponents:
        lines.append(f'        subgraph "cluster_{d.name}_{s.instance_name}" {{')
        lines.append(f'            label="{s.instance_name} : {s.component_type}";')
        try:
            sub_def = resolve(lib, d, s, enclosing)
        except UnknownComponentType:
            sub_def = None
        if sub_def is None or not sub_def.ports:
            lines.append(f'            "{s.instance_name}" [shape=point, style=invis];')
        else:
            for p in sub_def.ports:
                node_id = f"{s.instance_name}.{p.name}"
                lines.append(_node(node_id, p, "            "))
                port_types[node_id] = p.data_type
        lines.append("        }")
    lines.append("    }")
    for c in d.normalized_connectors():
        src, tgt = str(c.source), str(c.target)
        attrs = []
        if src in port_types:
            attrs.append(f'label="{port_types[src]}"')
        if c.origin is Origin.IMPLICIT:
            attrs.append("style=dashed")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f'    "{src}" -> "{tgt}"{suffix};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(lib: ArchitectureLibrary) -> dict[str, str]:
    """One digraph per decomposed component, keyed by its (possibly nested) qualified name."""
    return {
        name: component_to_dot(lib, d, enclosing, name)
        for name, d, enclosing in iter_definitions(lib)
        if d.subcomponents
    }
