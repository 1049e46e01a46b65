//! Holds the acceptance harness in `tests/acceptance.rs`; no library code.
