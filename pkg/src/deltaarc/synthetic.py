"""Generated product lines for scale experiments.

The core is a ``System`` with one processing subcomponent. Feature ``F<i>``
adds a sensor port and an extension subcomponent feeding the processor;
the combination deltas add one extra input each. All wiring is left to
autoconnect.
"""

from __future__ import annotations

import os

from .adl import parse_component, print_component
from .constraints import And, Feature
from .delta import Add, ComponentReference, Delta, Modify, PortReference, print_delta
from .features import FeatureModel, print_feature_model
from .model import ArchitectureLibrary, Direction, QualifiedName
from .productline import ProductLine

PACKAGE = "syn"


def _core(n_ext: int) -> ArchitectureLibrary:
    sources = [
        f"package {PACKAGE};\ncomponent System {{\n autoconnect port;\n port in Data Input, out Data Output;\n component Proc proc;\n}}",
        f"package {PACKAGE};\ncomponent Proc {{\n port in Data Input, out Data Output;\n}}",
    ]
    for k in range(n_ext):
        sources.append(f"package {PACKAGE};\ncomponent Ext{k} {{\n port in Sig{k}, out Res{k};\n}}")
    return ArchitectureLibrary.of(parse_component(s).definition for s in sources)


def synthetic_product_line(n_features: int = 10, n_deltas: int = 12) -> ProductLine:
    """``n_features`` optional features and ``n_deltas`` deltas (``n_deltas >= n_features``).

    Each delta is ordered after all lower-numbered ones, except that the last
    two are left incomparable so that confluence checking has work to do.
    """
    if n_deltas < n_features:
        raise ValueError("need at least one delta per feature")
    features = [f"F{i}" for i in range(n_features)]
    fm = FeatureModel("Synth", (("Base", False),) + tuple((f, True) for f in features))
    deltas = []
    names = [f"D{k:02d}" for k in range(n_deltas)]
    for k, name in enumerate(names):
        if k < n_features:
            when = Feature(features[k])
            system_stmts = (Add(PortReference(f"Sig{k}", Direction.IN)), Add(ComponentReference(QualifiedName((f"Ext{k}",)))))
            proc_stmts = (Add(PortReference(f"Res{k}", Direction.IN)),)
        else:
            i = (k - n_features) % n_features
            when = And(Feature(features[i]), Feature(features[(i + 1) % n_features]))
            system_stmts = (Add(PortReference(f"Combo{k}", Direction.IN)),)
            proc_stmts = (Add(PortReference(f"Combo{k}", Direction.IN)),)
        preds = names[:k] if k < n_deltas - 1 else names[: k - 1]
        deltas.append(
            Delta(
                name,
                when,
                tuple(QualifiedName((p,)) for p in preds),
                True,
                (Modify(QualifiedName(("System",)), system_stmts), Modify(QualifiedName(("Proc",)), proc_stmts)),
            )
        )
    return ProductLine(_core(n_features), tuple(deltas), fm)


def write_product_line(pl: ProductLine, directory: str) -> None:
    os.makedirs(os.path.join(directory, PACKAGE), exist_ok=True)
    os.makedirs(os.path.join(directory, "deltas"), exist_ok=True)
    for d in pl.library:
        with open(os.path.join(directory, PACKAGE, f"{d.name}.arc"), "w", encoding="utf-8") as fh:
            fh.write(print_component(d))
    for delta in pl.deltas:
        with open(os.path.join(directory, "deltas", f"{delta.name}.delta"), "w", encoding="utf-8") as fh:
            fh.write(print_delta(delta))
    with open(os.path.join(directory, f"{pl.feature_model.root_name}.fm"), "w", encoding="utf-8") as fh:
        fh.write(print_feature_model(pl.feature_model))
