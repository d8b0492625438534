//! Helpers for the line-oriented text formats used by datasets and models.

/// Shortest representation that round-trips through f64 parsing, so rewriting
/// a file reproduces it bit for bit.
pub(crate) fn fmt_f64(v: f64) -> String {
    let s = format!("{v}");
    if s.parse::<f64>() == Ok(v) {
        s
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn parse_f64(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}
