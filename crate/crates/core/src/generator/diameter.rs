use crate::tree::AirwayTree;

use super::GeneratorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiameterMode {
    /// `d_z = d0 · 2^(−z/n)` by generation.
    PowerLaw,
    /// Parent diameter divided between children by subtree terminal counts.
    FlowSplit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterConfig {
    /// Trachea diameter.
    pub d0_mm: f64,
    pub exponent: f64,
    pub mode: DiameterMode,
}

impl Default for DiameterConfig {
    fn default() -> Self {
        Self {
            d0_mm: 18.0,
            exponent: 3.0,
            mode: DiameterMode::PowerLaw,
        }
    }
}

impl DiameterConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if !(self.d0_mm > 0.0 && self.d0_mm.is_finite()) {
            return Err(GeneratorError::InvalidConfig("d0_mm must be positive".into()));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(GeneratorError::InvalidConfig("exponent must be positive".into()));
        }
        Ok(())
    }
}

pub fn power_law_diameter(d0: f64, generation: u32, exponent: f64) -> f64 {
    d0 * 2f64.powf(-(generation as f64) / exponent)
}

/// Children of a parent with diameter `d_parent` and flow ratio `r`:
/// `(d · r^(1/n), d · (1 − r)^(1/n))`.
pub fn flow_split_diameters(d_parent: f64, r: f64, exponent: f64) -> (f64, f64) {
    (
        d_parent * r.powf(1.0 / exponent),
        d_parent * (1.0 - r).powf(1.0 / exponent),
    )
}

/// Returns a copy of `tree` with every branch diameter set.
///
/// In flow-split mode a child receives `d_parent · (T_child / T_parent)^(1/n)`,
/// where `T` counts the terminal branches of a subtree; at a bifurcation
/// this is the pair given by [`flow_split_diameters`] with `r` the smaller
/// child's share.
pub fn assign_diameters(tree: &AirwayTree, config: &DiameterConfig) -> Result<AirwayTree, GeneratorError> {
    config.validate()?;
    let branches = tree.branches();
    let diameters: Vec<f64> = match config.mode {
        DiameterMode::PowerLaw => branches
            .iter()
            .map(|b| power_law_diameter(config.d0_mm, b.generation, config.exponent))
            .collect(),
        DiameterMode::FlowSplit => {
            let mut terminals = vec![0u64; branches.len()];
            for b in branches.iter().rev() {
                terminals[b.id] = if b.is_terminal() {
                    1
                } else {
                    b.children.iter().map(|&c| terminals[c]).sum()
                };
            }
            let mut d = vec![0.0; branches.len()];
            for b in branches {
                d[b.id] = match b.parent {
                    None => config.d0_mm,
                    Some(p) => {
                        let share = terminals[b.id] as f64 / terminals[p] as f64;
                        d[p] * share.powf(1.0 / config.exponent)
                    }
                };
            }
            d
        }
    };
    Ok(tree.clone().with_diameters(&diameters))
}

/// Largest pairwise relative deviation among `d0^n / sin(θ1 + θ2)`,
/// `d1^n / sin θ1` and `d2^n / sin θ2`, angles in degrees.
pub fn kamiya_angle_residual(
    d0: f64,
    d1: f64,
    d2: f64,
    theta1_deg: f64,
    theta2_deg: f64,
    exponent: f64,
) -> Result<f64, GeneratorError> {
    let sine = |deg: f64| -> Result<f64, GeneratorError> {
        let s = deg.to_radians().sin();
        if s <= 1e-12 {
            Err(GeneratorError::DegenerateAngle(deg))
        } else {
            Ok(s)
        }
    };
    let q = [
        d0.powf(exponent) / sine(theta1_deg + theta2_deg)?,
        d1.powf(exponent) / sine(theta1_deg)?,
        d2.powf(exponent) / sine(theta2_deg)?,
    ];
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            worst = worst.max((q[i] - q[j]).abs() / q[i].max(q[j]));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures::{caterpillar, complete_binary};

    #[test]
    fn power_law_examples() {
        assert!((power_law_diameter(18.0, 3, 3.0) - 9.0).abs() < 1e-12);
        assert_eq!(power_law_diameter(18.0, 0, 3.0), 18.0);
    }

    #[test]
    fn flow_split_symmetric() {
        let (a, b) = flow_split_diameters(12.0, 0.5, 3.0);
        assert!((a - 9.524_406_311).abs() < 1e-8);
        assert_eq!(a, b);
    }

    #[test]
    fn flow_split_conserves_power_sum() {
        let tree = caterpillar(6);
        let cfg = DiameterConfig {
            mode: DiameterMode::FlowSplit,
            ..DiameterConfig::default()
        };
        let t = assign_diameters(&tree, &cfg).unwrap();
        for b in t.bifurcations() {
            let d0 = b.diameter.unwrap().powi(3);
            let sum: f64 = b.children.iter().map(|&c| t.branch(c).diameter.unwrap().powi(3)).sum();
            assert!((sum - d0).abs() <= 1e-9 * d0);
        }
    }

    #[test]
    fn power_law_by_generation() {
        let t = assign_diameters(&complete_binary(4), &DiameterConfig::default()).unwrap();
        for b in t.branches() {
            assert_eq!(b.diameter, Some(power_law_diameter(18.0, b.generation, 3.0)));
        }
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = DiameterConfig {
            d0_mm: 0.0,
            ..DiameterConfig::default()
        };
        assert!(assign_diameters(&complete_binary(1), &cfg).is_err());
    }

    #[test]
    fn kamiya_examples() {
        // exact: pick θ1, θ2 and d1, then solve for d2 and d0
        let (t1, t2, n) = (30.0f64, 50.0f64, 3.0);
        let q = 7.0f64.powf(n) / t1.to_radians().sin();
        let d2 = (q * t2.to_radians().sin()).powf(1.0 / n);
        let d0 = (q * (t1 + t2).to_radians().sin()).powf(1.0 / n);
        assert!(kamiya_angle_residual(d0, 7.0, d2, t1, t2, n).unwrap() < 1e-12);

        let d1 = 5.0f64;
        let d0 = (2.0 * d1.powi(3)).cbrt();
        let r = kamiya_angle_residual(d0, d1, d1, 45.0, 45.0, 3.0).unwrap();
        assert!((r - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);

        assert!(kamiya_angle_residual(1.0, 1.0, 1.0, 0.0, 30.0, 3.0).is_err());
    }
}
