"""Parser and pretty-printer for ``.arc`` component files."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ParseError
from .model import (
    ArchitectureLibrary,
    AutoconnectMode,
    ComponentDefinition,
    Connector,
    Direction,
    Origin,
    PortDecl,
    PortRef,
    QualifiedName,
    SubcomponentDecl,
)
from .syntax import ParseDiagnostic, Parser, Severity, Token, with_path

INDENT = "    "


@dataclass(frozen=True)
class SourceUnit:
    path: Optional[str]
    package: QualifiedName
    definition: ComponentDefinition
    line: int = 1
    column: int = 1


class ComponentParser(Parser):
    def source_unit(self) -> SourceUnit:
        self.expect("package")
        pkg_text, _ = self.qualified_name("package name")
        self.expect(";")
        package = QualifiedName.parse(pkg_text)
        start = self.tok
        definition = self.component_definition(package)
        if self.tok.kind != "eof":
            self.fail(f"expected end of input after component, found {self.describe(self.tok)}")
        return SourceUnit(None, package, definition, start.line, start.column)

    def component_definition(self, package: QualifiedName, name_token: Optional[Token] = None) -> ComponentDefinition:
        """``component Name { body }``; the keyword and name may already have been consumed."""
        if name_token is None:
            self.expect("component")
            name_token = self.expect_ident("component name")
        self.expect("{")
        body = self.component_body(package)
        self.expect("}")
        return ComponentDefinition(package, name_token.text, **body)

    def component_body(self, package: QualifiedName) -> dict:
        mode = AutoconnectMode.OFF
        ports: list[PortDecl] = []
        subs: list[SubcomponentDecl] = []
        connectors: list[Connector] = []
        inner: list[ComponentDefinition] = []
        port_names: dict[str, Token] = {}
        member_names: dict[str, Token] = {}
        seen_element = seen_autoconnect = False

        while not self.at("}") and self.tok.kind != "eof":
            t = self.tok
            if self.accept("autoconnect"):
                if seen_element or seen_autoconnect:
                    self.report(t, "autoconnect must be the first statement of a component body", "AUTOCONNECT-POSITION")
                seen_autoconnect = True
                if self.accept("port"):
                    mode = AutoconnectMode.PORT
                elif self.tok.kind == "ident" and self.tok.text == "type":
                    self.advance()
                    mode = AutoconnectMode.TYPE
                else:
                    self.fail(f"expected 'port' or 'type' after autoconnect, found {self.describe(self.tok)}")
                self.expect(";")
                continue
            seen_element = True
            if self.accept("port"):
                for decl, tok in self.port_list():
                    if decl.name in port_names:
                        self.report(tok, f"duplicate port name {decl.name!r}", "DUP-NAME")
                    port_names[decl.name] = tok
                    ports.append(decl)
                self.expect(";")
            elif self.at("component"):
                element, tok = self.component_element(package)
                if isinstance(element, ComponentDefinition):
                    if element.name in member_names:
                        self.report(tok, f"duplicate component name {element.name!r}", "DUP-NAME")
                    member_names[element.name] = tok
                    inner.append(element)
                else:
                    if element.instance_name in member_names:
                        self.report(tok, f"duplicate subcomponent name {element.instance_name!r}", "DUP-NAME")
                    member_names[element.instance_name] = tok
                    subs.append(element)
            elif self.at("connect"):
                connectors.append(self.connect_statement())
                self.expect(";")
            else:
                self.fail(f"expected 'port', 'component' or 'connect', found {self.describe(t)}")
        return dict(
            autoconnect=mode,
            ports=tuple(ports),
            subcomponents=tuple(subs),
            connectors=tuple(connectors),
            inner_definitions=tuple(inner),
        )

    def port_list(self) -> list[tuple[PortDecl, Token]]:
        out = [self.port_decl()]
        while self.accept(","):
            out.append(self.port_decl())
        return out

    def direction(self) -> Direction:
        if self.accept("in"):
            return Direction.IN
        if self.accept("out"):
            return Direction.OUT
        self.fail(f"expected 'in' or 'out', found {self.describe(self.tok)}")

    def port_decl(self) -> tuple[PortDecl, Token]:
        direction = self.direction()
        type_tok = self.expect_ident("port type")
        if self.at_ident():
            name_tok = self.advance()
            return PortDecl(direction, type_tok.text, name_tok.text), name_tok
        return PortDecl.implicit(direction, type_tok.text), type_tok

    def component_element(self, package: QualifiedName):
        """Subcomponent declaration or inner definition, after seeing ``component``."""
        self.expect("component")
        type_text, type_tok = self.qualified_name("component type")
        if self.at("{"):
            if "." in type_text:
                self.fail("inner component definitions need a simple name", type_tok)
            inner = self.component_definition(package, type_tok)
            if self.at_ident():
                self.fail(
                    "instantiating an inner definition inline is not supported; declare a separate subcomponent",
                    code="INNER-INSTANCE",
                )
            self.accept(";")
            return inner, type_tok
        qn = QualifiedName.parse(type_text)
        if self.at_ident():
            name_tok = self.advance()
            sub = SubcomponentDecl(qn, name_tok.text)
            tok = name_tok
        else:
            sub = SubcomponentDecl.implicit(qn)
            tok = type_tok
        self.expect(";")
        return sub, tok

    def port_ref(self) -> PortRef:
        first = self.expect_ident("port reference")
        if self.accept("."):
            second = self.expect_ident("port name")
            return PortRef(first.text, second.text)
        return PortRef(None, first.text)

    def connect_statement(self) -> Connector:
        start = self.expect("connect")
        source = self.port_ref()
        self.expect("->")
        targets = [self.port_ref()]
        while self.accept(","):
            targets.append(self.port_ref())
        try:
            return Connector(source, tuple(targets), Origin.EXPLICIT)
        except ValueError as exc:
            self.fail(str(exc), start, code="BAD-CONNECTOR")


def parse_component(text: str) -> SourceUnit:
    """Parse one ``.arc`` file. Raises ParseError with diagnostics on failure."""
    parser = ComponentParser(text)
    return parser.run(parser.source_unit)


# -- printing ---------------------------------------------------------------


def _port_text(p: PortDecl) -> str:
    if p.implicitly_named:
        return f"{p.direction.value} {p.data_type}"
    return f"{p.direction.value} {p.data_type} {p.name}"


def _sub_text(s: SubcomponentDecl) -> str:
    if s.implicitly_named:
        return f"component {s.component_type};"
    return f"component {s.component_type} {s.instance_name};"


def grouped_connectors(connectors: Iterable[Connector]) -> list[tuple[PortRef, list[PortRef]]]:
    """Regroup single-target connectors by source, keeping first-appearance order."""
    groups: dict[PortRef, list[PortRef]] = {}
    for c in connectors:
        for single in c.split():
            targets = groups.setdefault(single.source, [])
            if single.target not in targets:
                targets.append(single.target)
    return list(groups.items())


def definition_lines(d: ComponentDefinition, indent: str = "", include_implicit: bool = False) -> list[str]:
    inner_indent = indent + INDENT
    lines = [f"{indent}component {d.name} {{"]
    sections: list[list[str]] = []
    if d.autoconnect is not AutoconnectMode.OFF:
        sections.append([f"{inner_indent}autoconnect {d.autoconnect.value};"])
    if d.ports:
        port_lines = [f"{inner_indent}port"]
        for i, p in enumerate(d.ports):
            end = ";" if i == len(d.ports) - 1 else ","
            port_lines.append(f"{inner_indent}{INDENT}{_port_text(p)}{end}")
        sections.append(port_lines)
    for inner in d.inner_definitions:
        sections.append(definition_lines(inner, inner_indent, include_implicit))
    if d.subcomponents:
        sections.append([f"{inner_indent}{_sub_text(s)}" for s in d.subcomponents])
    shown = [c for c in d.connectors if include_implicit or c.origin is Origin.EXPLICIT]
    if shown:
        sections.append(
            [
                f"{inner_indent}connect {src} -> {', '.join(str(t) for t in targets)};"
                for src, targets in grouped_connectors(shown)
            ]
        )
    for i, section in enumerate(sections):
        if i:
            lines.append("")
        lines.extend(section)
    lines.append(f"{indent}}}")
    return lines


def print_definition(d: ComponentDefinition, include_implicit: bool = False) -> str:
    lines = [f"package {d.package};", ""]
    lines.extend(definition_lines(d, "", include_implicit))
    return "\n".join(lines) + "\n"


def print_component(unit: SourceUnit | ComponentDefinition, include_implicit: bool = False) -> str:
    """Concrete syntax for a unit; implicit names and implicit connectors are omitted by default."""
    d = unit.definition if isinstance(unit, SourceUnit) else unit
    return print_definition(d, include_implicit)


# -- libraries ----------------------------------------------------------------


def parse_component_file(path: str) -> SourceUnit:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        unit = parse_component(text)
    except ParseError as err:
        raise with_path(err, path) from None
    base = os.path.splitext(os.path.basename(path))[0]
    if base != unit.definition.name:
        raise ParseError(
            [
                ParseDiagnostic(
                    Severity.ERROR, unit.line, unit.column,
                    f"file name {base!r} does not match component {unit.definition.name!r}",
                    "NAME-MISMATCH", path,
                )
            ]
        )
    return SourceUnit(path, unit.package, unit.definition, unit.line, unit.column)


def load_library(paths: Iterable[str]) -> ArchitectureLibrary:
    """Parse every ``.arc`` file and index the definitions by qualified name.

    Subcomponent types are not resolved here; deltas may supply missing definitions.
    """
    diagnostics: list[ParseDiagnostic] = []
    units: dict[str, SourceUnit] = {}
    for path in sorted(paths):
        try:
            unit = parse_component_file(path)
        except ParseError as err:
            diagnostics.extend(err.diagnostics)
            continue
        key = unit.definition.qualified_name
        if key in units:
            diagnostics.append(
                ParseDiagnostic(
                    Severity.ERROR, unit.line, unit.column,
                    f"{key} already defined in {units[key].path}",
                    "DUPLICATE-DEFINITION", path,
                )
            )
            continue
        units[key] = unit
    if any(d.severity is Severity.ERROR for d in diagnostics):
        raise ParseError(sorted(diagnostics, key=ParseDiagnostic.sort_key))
    return ArchitectureLibrary({k: u.definition for k, u in units.items()})
