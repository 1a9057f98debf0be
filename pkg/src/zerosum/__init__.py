"""Exact values, bounds and constructions for zero-sum block constants
of finite abelian groups.

The headline API: build a group with :func:`make_group` or
:func:`parse_group`, then ask :func:`davenport_k` for a certificate of
the k-block constant, or :func:`stabilization` for the onset of linear
growth across a whole table.
"""

from .arith import INFINITE, is_finite
from .bounds import BoundConsistencyError, BoundError, BoundReport, KnownValues, collect_bounds
from .constructions import elb_witness, maxfull_factorization, paige_bijection
from .factorizations import (
    Factorization,
    LengthSet,
    length_set,
    max_disjoint_zero_sums,
    max_length,
    minimal_divisors,
)
from .groups import Group, GroupError, format_group, make_group, parse_group, profile
from .invariants import (
    Certificate,
    CertificateError,
    ChainStep,
    CheckResult,
    SearchError,
    StabilizationReport,
    certify_dk,
    davenport,
    davenport_k,
    eta,
    s_le,
    stabilization,
    verify_certificate,
)
from .sequences import Sequence, format_sequence, parse_sequence

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "is_finite",
    "BoundConsistencyError",
    "BoundError",
    "BoundReport",
    "KnownValues",
    "collect_bounds",
    "elb_witness",
    "maxfull_factorization",
    "paige_bijection",
    "Factorization",
    "LengthSet",
    "length_set",
    "max_disjoint_zero_sums",
    "max_length",
    "minimal_divisors",
    "Group",
    "GroupError",
    "format_group",
    "make_group",
    "parse_group",
    "profile",
    "Certificate",
    "CertificateError",
    "ChainStep",
    "CheckResult",
    "SearchError",
    "StabilizationReport",
    "certify_dk",
    "davenport",
    "davenport_k",
    "eta",
    "s_le",
    "stabilization",
    "verify_certificate",
    "Sequence",
    "format_sequence",
    "parse_sequence",
    "__version__",
]
