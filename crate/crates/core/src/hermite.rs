//! Normalized Hermite functions `h_n(q) = (2^n n! sqrt(pi))^{-1/2} H_n(q) e^{-q^2/2}`,
//! the position-space wavefunctions of the Fock states.
//!
//! Raw Hermite polynomials overflow long before n = 600, so the values are
//! generated by the orthonormal three-term recurrence
//! `h_n = sqrt(2/n) q h_{n-1} - sqrt((n-1)/n) h_{n-2}` on a mantissa that is
//! rescaled whenever it grows, with the accumulated exponent carried in log
//! form. This keeps far-tail points (where `e^{-q^2/2}` alone underflows)
//! accurate for high n.

use ndarray::Array2;

const RESCALE_ABOVE: f64 = 1e150;

/// `out[(n, j)] = h_n(grid[j])` for `n < count`.
pub fn hermite_functions(count: usize, grid: &[f64]) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((count, grid.len()));
    if count == 0 {
        return out;
    }
    let norm0 = std::f64::consts::PI.powf(-0.25);
    for (j, &q) in grid.iter().enumerate() {
        // Represent h_n = mantissa * exp(log_scale).
        let mut log_scale = -0.5 * q * q;
        let mut prev = 0.0f64;
        let mut cur = norm0;
        out[(0, j)] = cur * log_scale.exp();
        for n in 1..count {
            let nf = n as f64;
            let next = (2.0 / nf).sqrt() * q * cur - ((nf - 1.0) / nf).sqrt() * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_ABOVE {
                prev /= RESCALE_ABOVE;
                cur /= RESCALE_ABOVE;
                log_scale += RESCALE_ABOVE.ln();
            }
            out[(n, j)] = cur * log_scale.exp();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_match_closed_form() {
        let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.25).collect();
        let h = hermite_functions(4, &grid);
        let c = std::f64::consts::PI.powf(-0.25);
        for (j, &q) in grid.iter().enumerate() {
            let g = (-q * q / 2.0).exp();
            assert!((h[(0, j)] - c * g).abs() < 1e-15);
            assert!((h[(1, j)] - c * 2f64.sqrt() * q * g).abs() < 1e-14);
            let h2 = c / 2f64.sqrt() * (2.0 * q * q - 1.0) * g;
            assert!((h[(2, j)] - h2).abs() < 1e-14);
            let h3 = c / 3f64.sqrt() * (2.0 * q * q * q - 3.0 * q) * g;
            assert!((h[(3, j)] - h3).abs() < 1e-13);
        }
    }

    #[test]
    fn orthonormal_by_quadrature() {
        let n = 120;
        let step = 0.01;
        let grid: Vec<f64> = (-2400..=2400).map(|k| k as f64 * step).collect();
        let h = hermite_functions(n, &grid);
        for a in [0, 1, 37, 119] {
            for b in [0, 2, 37, 118, 119] {
                let dot: f64 = h.row(a).iter().zip(h.row(b).iter()).map(|(x, y)| x * y).sum::<f64>() * step;
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-10, "<{a}|{b}> = {dot}");
            }
        }
    }

    #[test]
    fn far_tail_is_finite_for_high_order() {
        let h = hermite_functions(600, &[36.0, -37.5]);
        assert!(h.iter().all(|x| x.is_finite()));
        assert!(h[(599, 0)].abs() > 0.0);
    }
}
