"""Numerical laboratory for nearly isospectral 1D Schrodinger pairs."""

from .dd import ExtendedReal, ext_add, ext_div, ext_exp, ext_log, ext_mul, ext_sqrt, ext_sub

__all__ = [
    "ExtendedReal",
    "ext_add",
    "ext_sub",
    "ext_mul",
    "ext_div",
    "ext_sqrt",
    "ext_exp",
    "ext_log",
]

__version__ = "0.1.0"
