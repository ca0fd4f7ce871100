//! Lagrangian flow map and nonlinear right-hand sides.
