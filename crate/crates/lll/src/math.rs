//! Small numeric helpers shared across modules.

use std::sync::OnceLock;

const LN_FACT_LEN: usize = 2048;

/// ln(n!) from a precomputed table. Accumulated rounding stays below
/// ~1e-13 relative over the table range, which is what the closed-form
/// matrix elements need.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_LEN];
        for k in 2..LN_FACT_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    assert!(n < LN_FACT_LEN, "ln_factorial: argument {n} out of table range");
    table[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials_exact() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        assert!((ln_factorial(10) - 3628800f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn stirling_consistency_at_large_argument() {
        // ln(n!) vs Stirling series with two correction terms.
        let n: f64 = 1000.0;
        let stirling =
            n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln() + 1.0 / (12.0 * n);
        assert!((ln_factorial(1000) - stirling).abs() < 1e-8);
    }
}
