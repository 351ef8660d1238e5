/// Least-squares slope of `ln y` against `t` over the points with
/// `t in [lo, hi]` and `y > 0`. `None` with fewer than two usable points.
pub fn log_slope(points: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t >= lo && *t <= hi && *y > 0.0 && y.is_finite())
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    if used.len() < 2 {
        return None;
    }
    let n = used.len() as f64;
    let mt = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_rate() {
        let pts: Vec<(f64, f64)> = (0..50).map(|k| {
            let t = k as f64 * 0.1;
            (t, 3.0 * (-1.7 * t).exp())
        }).collect();
        let s = log_slope(&pts, 0.5, 5.0).unwrap();
        assert!((s + 1.7).abs() < 1e-12);
    }

    #[test]
    fn skips_non_positive_and_out_of_window() {
        let pts = [(0.0, 1.0), (1.0, -1.0), (2.0, 0.0), (3.0, 1.0)];
        assert!(log_slope(&pts, 0.5, 10.0).is_none());
        assert_eq!(log_slope(&pts, 0.0, 3.0), Some(0.0));
    }
}
