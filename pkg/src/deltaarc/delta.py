"""Parser and printer for ``.delta`` files."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .adl import INDENT, ComponentParser, definition_lines
from .constraints import Constraint, ConstraintParser, print_constraint
from .errors import ParseError
from .model import ComponentDefinition, Connector, Direction, Origin, PortDecl, PortRef, QualifiedName
from .syntax import ParseDiagnostic, Severity, with_path

DEFAULT_PACKAGE = QualifiedName(("default",))


@dataclass(frozen=True)
class ComponentReference:
    component_type: QualifiedName
    instance_name: Optional[str] = None

    @property
    def element_name(self) -> str:
        return self.instance_name or self.component_type.last

    def __str__(self) -> str:
        if self.instance_name is None:
            return f"component {self.component_type}"
        return f"component {self.component_type} {self.instance_name}"


@dataclass(frozen=True)
class PortReference:
    data_type: str
    direction: Optional[Direction] = None
    name: Optional[str] = None

    def __str__(self) -> str:
        parts = ["port"]
        if self.direction is not None:
            parts.append(self.direction.value)
        parts.append(self.data_type)
        if self.name is not None:
            parts.append(self.name)
        return " ".join(parts)

    def to_decl(self) -> PortDecl:
        assert self.direction is not None
        if self.name is None:
            return PortDecl.implicit(self.direction, self.data_type)
        return PortDecl(self.direction, self.data_type, self.name)


@dataclass(frozen=True)
class ConnectorReference:
    source: PortRef
    targets: tuple[PortRef, ...]

    def __str__(self) -> str:
        return f"connect {self.source} -> {', '.join(map(str, self.targets))}"

    def to_connector(self) -> Connector:
        return Connector(self.source, self.targets, Origin.EXPLICIT)


ArcReference = Union[ComponentReference, PortReference, ConnectorReference]


@dataclass(frozen=True)
class Add:
    element: Union[ArcReference, ComponentDefinition]
    # False when a definition was written with a simple name; the engine picks its package
    package_given: bool = True


@dataclass(frozen=True)
class Remove:
    element: ArcReference


@dataclass(frozen=True)
class Modify:
    target: QualifiedName
    statements: tuple["DeltaStatement", ...] = ()
    expand_autoconnect: bool = False


@dataclass(frozen=True)
class Replace:
    old: ComponentReference
    new: ComponentReference


DeltaStatement = Union[Add, Remove, Modify, Replace]


@dataclass(frozen=True)
class Delta:
    name: str
    when: Constraint
    predecessors: tuple[QualifiedName, ...] = ()
    expand_autoconnect: bool = False
    statements: tuple[DeltaStatement, ...] = ()
    path: Optional[str] = field(default=None, compare=False)

    @property
    def predecessor_names(self) -> tuple[str, ...]:
        return tuple(p.last for p in self.predecessors)


class DeltaParser(ComponentParser, ConstraintParser):
    def delta(self) -> Delta:
        self.expect("delta")
        name = self.expect_ident("delta name").text
        preds: list[QualifiedName] = []
        if self.accept("after"):
            preds.append(QualifiedName.parse(self.qualified_name("delta name")[0]))
            while self.accept(","):
                preds.append(QualifiedName.parse(self.qualified_name("delta name")[0]))
        self.expect("when")
        when = self.constraint()
        expand, statements = self.delta_body(top_level=True)
        if self.tok.kind != "eof":
            self.fail(f"expected end of input after delta, found {self.describe(self.tok)}")
        return Delta(name, when, tuple(preds), expand, tuple(statements))

    def delta_body(self, top_level: bool) -> tuple[bool, list[DeltaStatement]]:
        self.expect("{")
        expand = False
        if self.at("expand"):
            self.advance()
            self.expect("autoconnect")
            self.expect(";")
            expand = True
        statements = []
        while not self.at("}") and self.tok.kind != "eof":
            statements.append(self.statement(top_level))
        self.expect("}")
        return expand, statements

    def statement(self, top_level: bool) -> DeltaStatement:
        t = self.tok
        if self.accept("modify"):
            self.expect("component")
            target, _ = self.qualified_name("component name")
            expand, body = self.delta_body(top_level=False)
            self.accept(";")
            return Modify(QualifiedName.parse(target), tuple(body), expand)
        if self.accept("add"):
            if self.at("component"):
                self.advance()
                type_text, type_tok = self.qualified_name("component type")
                if self.at("{"):
                    qn = QualifiedName.parse(type_text)
                    package = QualifiedName(qn.segments[:-1]) if not qn.is_simple else DEFAULT_PACKAGE
                    if not top_level and not qn.is_simple:
                        self.fail("inner component definitions need a simple name", type_tok)
                    definition = self.component_definition(package, _renamed(type_tok, qn.last))
                    self.accept(";")
                    return Add(definition, package_given=not qn.is_simple)
                ref = self._component_ref_tail(type_text)
                if top_level:
                    self.report(t, "adding a subcomponent requires an enclosing modify", "STATEMENT-CONTEXT")
                self.expect(";")
                return Add(ref)
            element = self.arc_reference(require_direction=True)
            if top_level:
                self.report(t, "ports and connectors can only be added inside a modify", "STATEMENT-CONTEXT")
            self.expect(";")
            return Add(element)
        if self.accept("remove"):
            element = self.arc_reference(require_direction=False)
            if top_level and not isinstance(element, ComponentReference):
                self.report(t, "ports and connectors can only be removed inside a modify", "STATEMENT-CONTEXT")
            if top_level and isinstance(element, ComponentReference) and element.instance_name is not None:
                self.report(t, "removing a definition takes no instance name", "STATEMENT-CONTEXT")
            self.expect(";")
            return Remove(element)
        if self.accept("replace"):
            old = self.component_ref()
            self.expect("with")
            new = self.component_ref()
            self.expect(";")
            return Replace(old, new)
        self.fail(f"expected a delta statement, found {self.describe(t)}")

    def component_ref(self) -> ComponentReference:
        self.expect("component")
        type_text, _ = self.qualified_name("component type")
        return self._component_ref_tail(type_text)

    def _component_ref_tail(self, type_text: str) -> ComponentReference:
        name = self.advance().text if self.at_ident() else None
        return ComponentReference(QualifiedName.parse(type_text), name)

    def arc_reference(self, require_direction: bool) -> ArcReference:
        if self.at("component"):
            return self.component_ref()
        if self.accept("port"):
            direction = None
            if self.at("in") or self.at("out") or require_direction:
                direction = self.direction()
            data_type = self.expect_ident("port type").text
            name = self.advance().text if self.at_ident() else None
            return PortReference(data_type, direction, name)
        if self.at("connect"):
            c = self.connect_statement()
            return ConnectorReference(c.source, c.targets)
        self.fail(f"expected 'component', 'port' or 'connect', found {self.describe(self.tok)}")


def _renamed(tok, text):
    from dataclasses import replace

    return replace(tok, text=text)


def parse_delta(text: str) -> Delta:
    parser = DeltaParser(text)
    return parser.run(parser.delta)


def parse_delta_file(path: str) -> Delta:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        d = parse_delta(text)
    except ParseError as err:
        raise with_path(err, path) from None
    base = os.path.splitext(os.path.basename(path))[0]
    if base != d.name:
        raise ParseError(
            [ParseDiagnostic(Severity.ERROR, 1, 1, f"file name {base!r} does not match delta {d.name!r}", "NAME-MISMATCH", path)]
        )
    return Delta(d.name, d.when, d.predecessors, d.expand_autoconnect, d.statements, path)


def load_deltas(paths: Iterable[str]) -> list[Delta]:
    diagnostics: list[ParseDiagnostic] = []
    deltas: dict[str, Delta] = {}
    for path in sorted(paths):
        try:
            d = parse_delta_file(path)
        except ParseError as err:
            diagnostics.extend(err.diagnostics)
            continue
        if d.name in deltas:
            diagnostics.append(
                ParseDiagnostic(Severity.ERROR, 1, 1, f"delta {d.name} already defined in {deltas[d.name].path}", "DUPLICATE-DEFINITION", path)
            )
            continue
        deltas[d.name] = d
    if diagnostics:
        raise ParseError(sorted(diagnostics, key=ParseDiagnostic.sort_key))
    return list(deltas.values())


# -- printing ---------------------------------------------------------------


def _statement_lines(s: DeltaStatement, indent: str) -> list[str]:
    if isinstance(s, Modify):
        lines = [f"{indent}modify component {s.target} {{"]
        if s.expand_autoconnect:
            lines.append(f"{indent}{INDENT}expand autoconnect;")
        for inner in s.statements:
            lines.extend(_statement_lines(inner, indent + INDENT))
        lines.append(f"{indent}}};")
        return lines
    if isinstance(s, Replace):
        return [f"{indent}replace {s.old} with {s.new};"]
    if isinstance(s, Add) and isinstance(s.element, ComponentDefinition):
        d = s.element
        body = definition_lines(d, indent)
        if s.package_given:
            body[0] = body[0].replace(f"component {d.name} ", f"component {d.qualified_name} ", 1)
        body[0] = body[0].replace(f"{indent}component", f"{indent}add component", 1)
        body[-1] += ";"
        return body
    keyword = "add" if isinstance(s, Add) else "remove"
    return [f"{indent}{keyword} {s.element};"]


def print_delta(d: Delta) -> str:
    header = f"delta {d.name}"
    if d.predecessors:
        header += " after " + ", ".join(str(p) for p in d.predecessors)
    header += f" when {print_constraint(d.when)} {{"
    lines = [header]
    if d.expand_autoconnect:
        lines.append(f"{INDENT}expand autoconnect;")
    for s in d.statements:
        lines.extend(_statement_lines(s, INDENT))
    lines.append("}")
    return "\n".join(lines) + "\n"
