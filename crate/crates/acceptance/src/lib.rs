//! Acceptance suite for the workspace. Everything lives in
//! `tests/acceptance.rs`, which prints one PASS/FAIL line per criterion.
