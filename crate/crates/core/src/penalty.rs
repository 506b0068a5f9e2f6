//! Lasso, SCAD and MCP penalties and their univariate thresholding rules.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SoilError};

pub const DEFAULT_SCAD_GAMMA: f64 = 3.7;
pub const DEFAULT_MCP_GAMMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    Lasso,
    Scad,
    Mcp,
}

impl PenaltyKind {
    pub const ALL: [PenaltyKind; 3] = [PenaltyKind::Lasso, PenaltyKind::Scad, PenaltyKind::Mcp];

    pub fn as_str(self) -> &'static str {
        match self {
            PenaltyKind::Lasso => "lasso",
            PenaltyKind::Scad => "scad",
            PenaltyKind::Mcp => "mcp",
        }
    }

    pub fn default_gamma(self) -> f64 {
        match self {
            PenaltyKind::Lasso => f64::NAN,
            PenaltyKind::Scad => DEFAULT_SCAD_GAMMA,
            PenaltyKind::Mcp => DEFAULT_MCP_GAMMA,
        }
    }

    pub fn validate_gamma(self, gamma: f64) -> Result<()> {
        match self {
            PenaltyKind::Lasso => Ok(()),
            PenaltyKind::Scad if gamma > 2.0 => Ok(()),
            PenaltyKind::Mcp if gamma > 1.0 => Ok(()),
            PenaltyKind::Scad => Err(SoilError::InvalidPenalty(format!("SCAD needs gamma > 2, got {gamma}"))),
            PenaltyKind::Mcp => Err(SoilError::InvalidPenalty(format!("MCP needs gamma > 1, got {gamma}"))),
        }
    }
}

impl std::fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PenaltyKind {
    type Err = SoilError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lasso" => Ok(PenaltyKind::Lasso),
            "scad" => Ok(PenaltyKind::Scad),
            "mcp" => Ok(PenaltyKind::Mcp),
            other => Err(SoilError::InvalidPenalty(format!("unknown penalty '{other}'"))),
        }
    }
}

/// `sign(z) * max(|z| - t, 0)`.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimizer of `(b - z)^2 / 2 + scad(b)` for `gamma > 2`.
pub fn scad_threshold(z: f64, lambda: f64, gamma: f64) -> f64 {
    let az = z.abs();
    if az <= 2.0 * lambda {
        soft_threshold(z, lambda)
    } else if az <= gamma * lambda {
        soft_threshold(z, gamma * lambda / (gamma - 1.0)) / (1.0 - 1.0 / (gamma - 1.0))
    } else {
        z
    }
}

/// Firm threshold: minimizer of `(b - z)^2 / 2 + mcp(b)` for `gamma > 1`.
pub fn mcp_threshold(z: f64, lambda: f64, gamma: f64) -> f64 {
    if z.abs() <= gamma * lambda {
        soft_threshold(z, lambda) / (1.0 - 1.0 / gamma)
    } else {
        z
    }
}

pub fn threshold(kind: PenaltyKind, z: f64, lambda: f64, gamma: f64) -> f64 {
    match kind {
        PenaltyKind::Lasso => soft_threshold(z, lambda),
        PenaltyKind::Scad => scad_threshold(z, lambda, gamma),
        PenaltyKind::Mcp => mcp_threshold(z, lambda, gamma),
    }
}

/// Penalty value `p_lambda(u)`.
pub fn penalty_value(kind: PenaltyKind, u: f64, lambda: f64, gamma: f64) -> f64 {
    let a = u.abs();
    match kind {
        PenaltyKind::Lasso => lambda * a,
        PenaltyKind::Scad => {
            if a <= lambda {
                lambda * a
            } else if a <= gamma * lambda {
                lambda * a - (lambda - a).powi(2) / (2.0 * (gamma - 1.0))
            } else {
                (gamma + 1.0) * lambda * lambda / 2.0
            }
        }
        PenaltyKind::Mcp => {
            if a <= gamma * lambda {
                lambda * (a - a * a / (2.0 * gamma * lambda))
            } else {
                gamma * lambda * lambda / 2.0
            }
        }
    }
}

/// Global minimizer of `curvature/2 * (b - u)^2 + p_lambda(b)`.
///
/// For curvature 1 this agrees with [`threshold`]. Smaller curvatures arise in
/// the majorized logistic updates, where the univariate problem may be
/// nonconvex; the minimizer is found by comparing the stationary point of each
/// quadratic piece of the penalty.
pub fn univariate_minimizer(kind: PenaltyKind, u: f64, lambda: f64, gamma: f64, curvature: f64) -> f64 {
    let a = curvature;
    if kind == PenaltyKind::Lasso {
        return soft_threshold(u, lambda / a);
    }
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    let v = u.abs();
    let objective = |b: f64| 0.5 * a * (b - v).powi(2) + penalty_value(kind, b, lambda, gamma);
    let mut candidates = [0.0; 6];
    let mut count = 0;
    let mut push = |b: f64| {
        candidates[count] = b;
        count += 1;
    };
    push(0.0);
    match kind {
        PenaltyKind::Scad => {
            push((v - lambda / a).clamp(0.0, lambda));
            let denom = a * (gamma - 1.0) - 1.0;
            if denom != 0.0 {
                push(((a * v * (gamma - 1.0) - gamma * lambda) / denom).clamp(lambda, gamma * lambda));
            }
            push(lambda);
            push(gamma * lambda);
            push(v.max(gamma * lambda));
        }
        PenaltyKind::Mcp => {
            let denom = a - 1.0 / gamma;
            if denom != 0.0 {
                push(((a * v - lambda) / denom).clamp(0.0, gamma * lambda));
            }
            push(gamma * lambda);
            push(v.max(gamma * lambda));
        }
        PenaltyKind::Lasso => unreachable!(),
    }
    let mut best = 0.0;
    let mut best_val = objective(0.0);
    for &b in &candidates[1..count] {
        let val = objective(b);
        if val < best_val {
            best = b;
            best_val = val;
        }
    }
    sign * best
}
