//! Holds the workspace acceptance target; see `tests/acceptance.rs`.
