//! Fixed-point drivers for the nonlinear problem.
