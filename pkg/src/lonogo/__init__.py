"""Infeasibility certificates for heralded linear-optical state preparation."""

from .algebra import GaussianRational, MultiPoly, Variable, VariableSpace
from .compiler import PolynomialSystem, build_multi_system, compile_task, parse_system
from .errors import (
    ContractError,
    InternalConsistencyError,
    LonogoError,
    ParseError,
    ResourceLimitError,
    ValidationError,
)
from .fock import MultiTaskSpec, PureState, TaskSpec, canonicalize, haar_random_target
from .nulla import (
    Certificate,
    CertificateSearchOptions,
    NullaReport,
    certify,
    find_certificate,
    verify_certificate,
)

__version__ = "0.1.0"
