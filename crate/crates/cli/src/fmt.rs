//! Deterministic numeric formatting for command output.

/// Formats with 17 significant digits (16 after the point in scientific
/// notation), enough to reproduce any f64 exactly.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}
