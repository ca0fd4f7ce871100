//! Configuration, reports, and the verification suite.
