"""Symmetry analysis toolkit for generalized Burgers equations
u_t + u*u_x + f(t,x)*u_xx = 0."""

__version__ = "0.1.0"
