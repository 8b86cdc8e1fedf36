"""Arbitrary-base low-precision logarithmic number systems."""

__version__ = "0.1.0"

from .arith import (  # noqa: E402
    FORCED_ZERO,
    PhiKind,
    PhiTable,
    build_addsub_tables,
    build_phi_table,
    lns_add_sub,
    lns_div,
    lns_mul,
    lns_sqrt,
    phi_exact,
    phi_selector,
)
from .core import (  # noqa: E402
    Convention,
    LnsFormat,
    LnsValue,
    Outcome,
    RoundingDomain,
    Status,
    alias_format,
    decode,
    encode,
    format_bounds,
    make_format,
    parse_format,
    requantize,
    round_log_domain,
    round_real_domain,
    value_set,
)
from .exceptions import (  # noqa: E402
    CapacityError,
    DivideByZero,
    DomainError,
    LnsError,
    ParseError,
    RangeError,
    UnknownDecoder,
)
from .minifloat import MiniFloatFormat  # noqa: E402
