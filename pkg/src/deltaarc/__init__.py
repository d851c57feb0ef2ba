"""Delta-oriented variability for component/connector architectures.

A product line is a core architecture (``.arc`` files), a set of deltas
(``.delta`` files) and a feature model (``.fm``). :func:`derive_variant`
turns a feature configuration into a flat, checked architecture.
"""

from .adl import SourceUnit, load_library, parse_component, print_component
from .analysis import FindingCode, WellFormednessFinding, check_product_line, check_wellformed
from .constraints import And, Feature, Not, Or, evaluate, parse_constraint, print_constraint
from .delta import Delta, load_deltas, parse_delta, print_delta
from .engine import (
    ApplicabilityError,
    Condition,
    DeltaNotApplicable,
    DerivationReport,
    apply_delta,
    check_confluence,
    derive_variant,
    expand_autoconnect,
    expand_library,
    order_deltas,
    select_deltas,
)
from .errors import (
    CyclicDeltaOrder,
    DeltaArcError,
    EnumerationCapExceeded,
    FactorialCapExceeded,
    ParseError,
    UnknownComponentType,
    UnknownFeature,
)
from .features import (
    Configuration,
    FeatureModel,
    enumerate_configurations,
    parse_feature_model,
    validate_configuration,
)
from .model import (
    ArchitectureLibrary,
    AutoconnectMode,
    ComponentDefinition,
    Connector,
    Direction,
    Interface,
    Origin,
    PortDecl,
    PortRef,
    QualifiedName,
    SubcomponentDecl,
    interface_of,
    resolve,
    structurally_equal,
)
from .productline import ProductLine, load_product_line
from .syntax import ParseDiagnostic

__version__ = "0.1.0"
