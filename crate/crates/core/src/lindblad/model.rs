use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::code::GkpCode;
use crate::error::{Error, Result};
use crate::fock::{make_ladder, make_quadratures, TruncatedOperator};

/// One dissipation channel `rate * D_L`.
#[derive(Clone, Debug)]
pub struct Channel {
    pub label: String,
    pub operator: TruncatedOperator,
    pub rate: f64,
}

/// Generator `d rho/dt = sum_c rate_c D_{L_c}(rho)` with no Hamiltonian part.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    dim: usize,
    channels: Vec<Channel>,
    /// `G = (1/2) sum_c rate_c L_c^dagger L_c`
    generator: TruncatedOperator,
}

/// Local phase-space error channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// `a`
    PhotonLoss,
    /// `a^dagger`
    PhotonGain,
    /// `Q`
    Position,
    /// `P`
    Momentum,
}

impl NoiseKind {
    pub fn operator(self, dim: usize) -> Result<TruncatedOperator> {
        Ok(match self {
            NoiseKind::PhotonLoss => make_ladder(dim)?,
            NoiseKind::PhotonGain => make_ladder(dim)?.adjoint(),
            NoiseKind::Position => make_quadratures(dim)?.0,
            NoiseKind::Momentum => make_quadratures(dim)?.1,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::PhotonLoss => "a",
            NoiseKind::PhotonGain => "a_dag",
            NoiseKind::Position => "Q",
            NoiseKind::Momentum => "P",
        }
    }
}

impl LindbladModel {
    pub fn new(dim: usize) -> Result<Self> {
        Ok(Self {
            dim,
            channels: Vec::new(),
            generator: TruncatedOperator::zeros(dim)?,
        })
    }

    /// The four stabilizing dissipators at unit rate.
    pub fn gkp(code: &GkpCode) -> Result<Self> {
        let mut model = Self::new(code.dim())?;
        for (k, v) in code.dissipators.iter().enumerate() {
            model.push(format!("V{}", k + 1), v.clone(), 1.0)?;
        }
        Ok(model)
    }

    pub fn with_channel(
        mut self,
        label: impl Into<String>,
        operator: TruncatedOperator,
        rate: f64,
    ) -> Result<Self> {
        self.push(label.into(), operator, rate)?;
        Ok(self)
    }

    pub fn with_noise(self, kind: NoiseKind, rate: f64) -> Result<Self> {
        let op = kind.operator(self.dim)?;
        self.with_channel(kind.label(), op, rate)
    }

    pub fn push(&mut self, label: String, operator: TruncatedOperator, rate: f64) -> Result<()> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "channel '{label}' has invalid rate {rate}"
            )));
        }
        if operator.dim() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                found: operator.dim(),
            });
        }
        let ll = operator.adjoint().matmul(&operator);
        self.generator = (&self.generator + &ll.scale_real(0.5 * rate)).hermitian_part();
        self.channels.push(Channel {
            label,
            operator,
            rate,
        });
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn generator(&self) -> &TruncatedOperator {
        &self.generator
    }

    /// Channel with the largest `rate * ||L^dagger L||_max`; used in stiffness
    /// diagnostics.
    pub fn dominant_channel(&self) -> Option<(&str, f64)> {
        self.channels
            .iter()
            .map(|c| {
                let n = c.operator.adjoint().matmul(&c.operator).max_abs() * c.rate;
                (c.label.as_str(), n)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn check(&self, x: &TruncatedOperator) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }
}

/// `sum_c rate_c (L rho L^dagger - (L^dagger L rho + rho L^dagger L)/2)`
pub fn lindblad_rhs(model: &LindbladModel, rho: &TruncatedOperator) -> Result<TruncatedOperator> {
    model.check(rho)?;
    let g = model.generator();
    let mut out = -&(&g.matmul(rho) + &rho.matmul(g));
    for c in model.channels() {
        if c.rate == 0.0 {
            continue;
        }
        let jump = c.operator.matmul(rho).matmul(&c.operator.adjoint());
        out = &out + &jump.scale(C64::new(c.rate, 0.0));
    }
    Ok(out)
}

/// `sum_c rate_c (L^dagger X L - (L^dagger L X + X L^dagger L)/2)`
pub fn adjoint_rhs(model: &LindbladModel, x: &TruncatedOperator) -> Result<TruncatedOperator> {
    model.check(x)?;
    let g = model.generator();
    let mut out = -&(&g.matmul(x) + &x.matmul(g));
    for c in model.channels() {
        if c.rate == 0.0 {
            continue;
        }
        let jump = c.operator.adjoint().matmul(x).matmul(&c.operator);
        out = &out + &jump.scale(C64::new(c.rate, 0.0));
    }
    Ok(out)
}
