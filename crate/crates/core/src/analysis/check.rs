use std::fmt;

use serde::{Deserialize, Serialize};

/// Scalar measurement compared against an interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, measured: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = measured.is_finite()
            && lower.is_none_or(|l| measured >= l)
            && upper.is_none_or(|u| measured <= u);
        Self {
            name: name.into(),
            measured,
            lower,
            upper,
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::within(name, measured, None, Some(bound))
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::within(name, measured, Some(bound), None)
    }

    pub fn failed(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measured: f64::NAN,
            lower: None,
            upper: None,
            passed: false,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let range = match (self.lower, self.upper) {
            (Some(l), Some(u)) => format!("in [{l:.3e}, {u:.3e}]"),
            (Some(l), None) => format!(">= {l:.3e}"),
            (None, Some(u)) => format!("<= {u:.3e}"),
            (None, None) => String::new(),
        };
        write!(f, "{status} {}: {:.6e} {range}", self.name, self.measured)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_most("a", 1.1, 1.0).passed);
        assert!(!Check::at_least("a", f64::NAN, 0.0).passed);
        assert!(Check::within("a", 5.0, Some(3.5), Some(14.0)).passed);
        assert!(Check::at_most("x", 0.5, 1.0).to_string().starts_with("PASS x"));
    }
}
