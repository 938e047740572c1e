"""Conservation-law verification and numerical validation for the
peakon equation class m_t + f(u,ux)*m + (g(u,ux)*m)_x = 0, m = u - u_xx."""

from .expr import (
    Expr,
    JetVar,
    ParseError,
    SamplingPolicy,
    ZeroVerdict,
    d_t,
    d_x,
    euler_u,
    euler_ut,
    is_zero,
    parse,
    to_m_jet,
    to_source,
    to_u_jet,
)

__version__ = "0.1.0"
