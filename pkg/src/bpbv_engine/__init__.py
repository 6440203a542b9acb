"""Exact computations with p-typical formal group laws and BP<m,n>*BV_k."""

from .bvring import BVRing, alpha_degree, filtration_truncation  # noqa: F401
from .configuration import RunConfig  # noqa: F401
from .errors import (  # noqa: F401
    BpbvError,
    ConfigurationError,
    InvariantViolation,
    NonIntegralError,
    PreconditionError,
)
from .fgl import FormalGroupLaw, build_fgl, default_truncation  # noqa: F401
from .models import FAIL, PASS, UNDECIDED, CheckOutcome, CheckRecord, Report  # noqa: F401
from .slices import MembershipCertificate, NotFound, ideal_member, recheck_certificate  # noqa: F401
