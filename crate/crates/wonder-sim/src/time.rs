//! Simulation time base.
//!
//! All arithmetic runs on integer microseconds so that results are exact and
//! platform-independent. Config files and reports use milliseconds; the
//! conversion happens only at the boundary.

/// Microseconds since the start of the run (or a duration, by context).
pub type Micros = u64;

/// Converts a millisecond value from a config file to integer microseconds,
/// rounding to the nearest microsecond.
pub fn ms_to_us(ms: f64) -> Micros {
    (ms * 1000.0).round() as Micros
}

/// Renders microseconds as milliseconds with three decimals, e.g. `7.100`.
pub fn fmt_ms(us: Micros) -> String {
    format!("{}.{:03}", us / 1000, us % 1000)
}

/// Microseconds as a millisecond float for JSON output. The division is the
/// same operation everywhere, so the shortest round-trip printing is stable.
pub fn us_to_ms_f64(us: Micros) -> f64 {
    us as f64 / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ms_round_trip() {
        assert_eq!(ms_to_us(2.0), 2000);
        assert_eq!(ms_to_us(0.05), 50);
        assert_eq!(ms_to_us(7.1), 7100);
        assert_eq!(fmt_ms(7100), "7.100");
        assert_eq!(fmt_ms(50), "0.050");
        assert_eq!(fmt_ms(0), "0.000");
        assert_eq!(fmt_ms(12345), "12.345");
    }
}
