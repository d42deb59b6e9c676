//! Robust loss functions acting on RKHS residual norms.
//!
//! Every loss is described through its profile `ρ`, `ρ'`, `φ = ρ'/z`, `φ'` and
//! `ζ = φ - zφ'`. At the non-differentiable joints of Huber and Hampel the
//! left one-sided derivative is reported.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math::{ln, powf};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)
)]
pub enum Loss {
    /// `ρ(z) = z²/2`; its minimizer is the ordinary KDE.
    Squared,
    /// `ρ(z) = z²/2` for `z ≤ 1`, `z - 1/2` beyond.
    Huber,
    /// Generalized Charbonnier `ρ(z) = (1+z²)^{α/2} - 1`, `α ∈ [1, 2]`.
    Charbonnier { alpha: f64 },
    /// `ρ(z) = log(1+z²)`.
    Cauchy,
    /// Hampel's three-part redescending loss with knots `a < b < c`.
    Hampel { a: f64, b: f64, c: f64 },
}

/// Values of the loss and its derived quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossProfile {
    pub rho: f64,
    pub rho_prime: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub zeta: f64,
}

impl Loss {
    pub const DEFAULT_HAMPEL: Loss = Loss::Hampel {
        a: 1.0,
        b: 2.0,
        c: 3.0,
    };

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Squared => "squared",
            Loss::Huber => "huber",
            Loss::Charbonnier { .. } => "charbonnier",
            Loss::Cauchy => "cauchy",
            Loss::Hampel { .. } => "hampel",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Loss::Charbonnier { alpha } => {
                if !(1.0..=2.0).contains(&alpha) {
                    return Err(Error::param(format!(
                        "charbonnier alpha must lie in [1, 2], got {alpha}"
                    )));
                }
            }
            Loss::Hampel { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return Err(Error::param("hampel knots must be finite"));
                }
                if !(a > 0.0 && a < b && b < c) {
                    return Err(Error::param(format!(
                        "hampel knots must satisfy 0 < a < b < c, got ({a}, {b}, {c})"
                    )));
                }
            }
            Loss::Squared | Loss::Huber | Loss::Cauchy => {}
        }
        Ok(())
    }

    /// Multiply the knots of a scale-carrying loss (Hampel) by `scale`.
    pub fn scaled(&self, scale: f64) -> Loss {
        match *self {
            Loss::Hampel { a, b, c } => Loss::Hampel {
                a: a * scale,
                b: b * scale,
                c: c * scale,
            },
            other => other,
        }
    }

    /// `ρ(z)`. Parameters are assumed valid.
    pub fn rho(&self, z: f64) -> f64 {
        match *self {
            Loss::Squared => 0.5 * z * z,
            Loss::Huber => {
                if z <= 1.0 {
                    0.5 * z * z
                } else {
                    z - 0.5
                }
            }
            Loss::Charbonnier { alpha } => powf(1.0 + z * z, 0.5 * alpha) - 1.0,
            Loss::Cauchy => ln(1.0 + z * z),
            Loss::Hampel { a, b, c } => {
                if z < a {
                    0.5 * z * z
                } else if z < b {
                    a * z - 0.5 * a * a
                } else if z < c {
                    a * (z - c) * (z - c) / (2.0 * (b - c)) + 0.5 * a * (b + c - a)
                } else {
                    0.5 * a * (b + c - a)
                }
            }
        }
    }

    /// `φ(z) = ρ'(z)/z`, continuously extended to `z = 0`.
    pub fn phi(&self, z: f64) -> f64 {
        match *self {
            Loss::Squared => 1.0,
            Loss::Huber => {
                if z <= 1.0 {
                    1.0
                } else {
                    1.0 / z
                }
            }
            Loss::Charbonnier { alpha } => alpha * powf(1.0 + z * z, 0.5 * alpha - 1.0),
            Loss::Cauchy => 2.0 / (1.0 + z * z),
            Loss::Hampel { a, b, c } => {
                if z <= a {
                    1.0
                } else if z <= b {
                    a / z
                } else if z <= c {
                    a * (c - z) / ((c - b) * z)
                } else {
                    0.0
                }
            }
        }
    }

    /// `ρ'(z)`.
    pub fn rho_prime(&self, z: f64) -> f64 {
        match *self {
            Loss::Huber => z.min(1.0),
            Loss::Hampel { a, b, c } => {
                if z <= a {
                    z
                } else if z <= b {
                    a
                } else if z <= c {
                    a * (c - z) / (c - b)
                } else {
                    0.0
                }
            }
            _ => z * self.phi(z),
        }
    }

    /// `φ'(z)`, left derivative at joints.
    pub fn phi_prime(&self, z: f64) -> f64 {
        match *self {
            Loss::Squared => 0.0,
            Loss::Huber => {
                if z <= 1.0 {
                    0.0
                } else {
                    -1.0 / (z * z)
                }
            }
            Loss::Charbonnier { alpha } => {
                alpha * (alpha - 2.0) * z * powf(1.0 + z * z, 0.5 * alpha - 2.0)
            }
            Loss::Cauchy => {
                let s = 1.0 + z * z;
                -4.0 * z / (s * s)
            }
            Loss::Hampel { a, b, c } => {
                if z <= a {
                    0.0
                } else if z <= b {
                    -a / (z * z)
                } else if z <= c {
                    -a * c / ((c - b) * z * z)
                } else {
                    0.0
                }
            }
        }
    }

    /// `ρ''(z) = φ(z) + zφ'(z)`, left derivative at joints.
    pub fn rho_second(&self, z: f64) -> f64 {
        match *self {
            Loss::Hampel { a, b, c } => {
                if z <= a {
                    1.0
                } else if z <= b {
                    0.0
                } else if z <= c {
                    -a / (c - b)
                } else {
                    0.0
                }
            }
            Loss::Huber => {
                if z <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.phi(z) + z * self.phi_prime(z),
        }
    }

    /// `ζ(z) = φ(z) - zφ'(z)`.
    pub fn zeta(&self, z: f64) -> f64 {
        self.phi(z) - z * self.phi_prime(z)
    }

    /// Lipschitz constant `M = sup ρ'`; `+∞` when `ρ'` is unbounded.
    pub fn lipschitz_constant(&self) -> f64 {
        match *self {
            Loss::Squared => f64::INFINITY,
            Loss::Huber => 1.0,
            Loss::Charbonnier { alpha } => {
                if alpha == 1.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            Loss::Cauchy => 1.0,
            Loss::Hampel { a, .. } => a,
        }
    }

    pub fn profile(&self, z: f64) -> Result<LossProfile> {
        self.validate()?;
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::param(format!(
                "loss argument must be a finite nonnegative number, got {z}"
            )));
        }
        Ok(LossProfile {
            rho: self.rho(z),
            rho_prime: self.rho_prime(z),
            phi: self.phi(z),
            phi_prime: self.phi_prime(z),
            zeta: self.zeta(z),
        })
    }
}

/// `loss_profile` as a free function.
pub fn loss_profile(loss: &Loss, z: f64) -> Result<LossProfile> {
    loss.profile(z)
}

/// Outcome of one numeric assumption check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub passed: bool,
    /// First grid location where the check failed.
    pub first_violation: Option<f64>,
    pub note: String,
}

impl Check {
    fn pass() -> Self {
        Check {
            passed: true,
            first_violation: None,
            note: String::new(),
        }
    }

    fn fail(at: Option<f64>, note: impl Into<String>) -> Self {
        Check {
            passed: false,
            first_violation: at,
            note: note.into(),
        }
    }
}

/// Grid scan of the standing loss assumptions.
///
/// * `a1`: `ρ(0) = 0`, strictly increasing, Lipschitz.
/// * `a2`: `ρ'` continuous, bounded, `ρ'(0) = 0`.
/// * `a3`: `φ` bounded and Lipschitz with finite `φ(0)`.
/// * `a4`: `ρ''` and `φ` nonincreasing.
/// * `strictly_convex`: `ρ'' > 0` (not one of the four, but required by the
///   convergence results; Hampel and Huber fail it).
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub a1: Check,
    pub a2: Check,
    pub a3: Check,
    pub a4: Check,
    pub strictly_convex: Check,
}

impl AssumptionReport {
    pub fn all_standing_pass(&self) -> bool {
        self.a1.passed && self.a2.passed && self.a3.passed && self.a4.passed
    }
}

const SCAN_TOL: f64 = 1e-12;

/// Numerically checks the loss assumptions on a sorted nonnegative grid.
///
/// Never errors: invalid parameters or grids are reported as failures.
pub fn validate_assumptions(loss: &Loss, grid: &[f64]) -> AssumptionReport {
    let bad = |msg: &str| AssumptionReport {
        a1: Check::fail(None, msg),
        a2: Check::fail(None, msg),
        a3: Check::fail(None, msg),
        a4: Check::fail(None, msg),
        strictly_convex: Check::fail(None, msg),
    };
    if let Err(e) = loss.validate() {
        return bad(&format!("{e}"));
    }
    if grid.is_empty()
        || grid.iter().any(|z| !(*z >= 0.0) || !z.is_finite())
        || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return bad("grid must be nonempty, strictly increasing and nonnegative");
    }

    let rho: Vec<f64> = grid.iter().map(|&z| loss.rho(z)).collect();
    let drho: Vec<f64> = grid.iter().map(|&z| loss.rho_prime(z)).collect();
    let phi: Vec<f64> = grid.iter().map(|&z| loss.phi(z)).collect();
    let rho2: Vec<f64> = grid.iter().map(|&z| loss.rho_second(z)).collect();
    let m = loss.lipschitz_constant();

    let a1 = if loss.rho(0.0) != 0.0 {
        Check::fail(Some(0.0), "rho(0) != 0")
    } else if let Some(i) = (1..grid.len()).find(|&i| rho[i] <= rho[i - 1]) {
        Check::fail(Some(grid[i]), "rho is not strictly increasing")
    } else if !m.is_finite() {
        Check::fail(None, "rho is not Lipschitz (unbounded derivative)")
    } else {
        Check::pass()
    };

    let a2 = if loss.rho_prime(0.0) != 0.0 {
        Check::fail(Some(0.0), "rho'(0) != 0")
    } else if !m.is_finite() {
        Check::fail(None, "rho' is unbounded")
    } else if let Some(i) = drho.iter().position(|&d| d > m * (1.0 + SCAN_TOL)) {
        Check::fail(Some(grid[i]), "rho' exceeds its supremum")
    } else {
        Check::pass()
    };

    let a3 = if !loss.phi(0.0).is_finite() {
        Check::fail(Some(0.0), "phi(0) is not finite")
    } else if phi.iter().any(|p| !p.is_finite()) {
        Check::fail(None, "phi is unbounded")
    } else {
        Check::pass()
    };

    let a4 = if let Some(i) = (1..grid.len()).find(|&i| phi[i] > phi[i - 1] + SCAN_TOL) {
        Check::fail(Some(grid[i]), "phi is increasing somewhere")
    } else if let Some(i) = (1..grid.len()).find(|&i| rho2[i] > rho2[i - 1] + SCAN_TOL) {
        Check::fail(Some(grid[i]), "rho'' is increasing somewhere")
    } else {
        Check::pass()
    };

    let strictly_convex = match rho2.iter().position(|&r| r <= 0.0) {
        Some(i) => Check::fail(Some(grid[i]), "rho'' is not positive"),
        None => Check::pass(),
    };

    AssumptionReport {
        a1,
        a2,
        a3,
        a4,
        strictly_convex,
    }
}

/// Strong-convexity constant `μ = 2 min{φ(2ν), ρ''(2ν)}`.
pub fn strong_convexity(loss: &Loss, nu_sigma: f64) -> f64 {
    let z = 2.0 * nu_sigma;
    2.0 * loss.phi(z).min(loss.rho_second(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn all_losses() -> Vec<Loss> {
        vec![
            Loss::Squared,
            Loss::Huber,
            Loss::Charbonnier { alpha: 1.0 },
            Loss::Charbonnier { alpha: 1.5 },
            Loss::Cauchy,
            Loss::DEFAULT_HAMPEL,
        ]
    }

    fn scan_grid() -> Vec<f64> {
        (0..=1000).map(|i| i as f64 * 0.01).collect()
    }

    #[test]
    fn huber_linear_branch() {
        let p = Loss::Huber.profile(2.0).unwrap();
        assert!(close(p.rho, 1.5, 1e-15));
        assert!(close(p.rho_prime, 1.0, 1e-15));
        assert!(close(p.phi, 0.5, 1e-15));
    }

    #[test]
    fn charbonnier_at_zero() {
        let p = Loss::Charbonnier { alpha: 1.0 }.profile(0.0).unwrap();
        assert_eq!(p.rho, 0.0);
        assert!(close(p.phi, 1.0, 1e-15));
        assert!(close(p.zeta, 1.0, 1e-15));
    }

    #[test]
    fn cauchy_at_one() {
        let p = Loss::Cauchy.profile(1.0).unwrap();
        assert!(close(p.rho, core::f64::consts::LN_2, 1e-12));
        assert!(close(p.rho_prime, 1.0, 1e-15));
        assert!(close(p.phi, 1.0, 1e-15));
    }

    #[test]
    fn squared_at_three() {
        let p = Loss::Squared.profile(3.0).unwrap();
        assert!(close(p.rho, 4.5, 1e-15));
        assert_eq!(p.phi, 1.0);
        assert_eq!(p.zeta, 1.0);
    }

    #[test]
    fn parameter_errors() {
        assert!(Loss::Charbonnier { alpha: 0.5 }.profile(1.0).is_err());
        assert!(Loss::Charbonnier { alpha: 2.5 }.profile(1.0).is_err());
        assert!(Loss::Hampel { a: 2.0, b: 2.0, c: 3.0 }.profile(1.0).is_err());
        assert!(Loss::Hampel { a: 1.0, b: 3.0, c: 2.0 }.profile(1.0).is_err());
        assert!(Loss::Huber.profile(-1.0).is_err());
    }

    #[test]
    fn joints_report_left_derivative() {
        assert_eq!(Loss::Huber.phi_prime(1.0), 0.0);
        let h = Loss::DEFAULT_HAMPEL;
        assert_eq!(h.phi_prime(1.0), 0.0);
        assert!(close(h.phi_prime(2.0), -0.25, 1e-15));
        assert!(close(h.phi_prime(3.0), -1.0 / 3.0, 1e-15));
    }

    #[test]
    fn rho_prime_is_z_phi() {
        for loss in all_losses() {
            for &z in &scan_grid()[1..] {
                let lhs = loss.rho_prime(z);
                let rhs = z * loss.phi(z);
                assert!(close(lhs, rhs, 1e-12), "{loss:?} at {z}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn phi_prime_matches_central_difference() {
        let h = 1e-5;
        for loss in all_losses() {
            for &z in &scan_grid()[1..] {
                let near_joint = match loss {
                    Loss::Huber => (z - 1.0).abs() < 2.0 * h,
                    Loss::Hampel { a, b, c } => [a, b, c].iter().any(|k| (z - k).abs() < 2.0 * h),
                    _ => false,
                };
                if near_joint || z < 2.0 * h {
                    continue;
                }
                let fd = (loss.phi(z + h) - loss.phi(z - h)) / (2.0 * h);
                assert!(
                    close(loss.phi_prime(z), fd, 1e-6),
                    "{loss:?} at {z}: {} vs {fd}",
                    loss.phi_prime(z)
                );
            }
        }
    }

    #[test]
    fn rho_prime_matches_central_difference() {
        let h = 1e-6;
        for loss in all_losses() {
            for &z in &scan_grid()[1..] {
                let near_joint = match loss {
                    Loss::Huber => (z - 1.0).abs() < 2.0 * h,
                    Loss::Hampel { a, b, c } => [a, b, c].iter().any(|k| (z - k).abs() < 2.0 * h),
                    _ => false,
                };
                if near_joint || z < 2.0 * h {
                    continue;
                }
                let fd = (loss.rho(z + h) - loss.rho(z - h)) / (2.0 * h);
                assert!(close(loss.rho_prime(z), fd, 1e-6), "{loss:?} at {z}");
            }
        }
    }

    #[test]
    fn zeta_dominates_phi_for_nonincreasing_phi() {
        for loss in [
            Loss::Huber,
            Loss::Charbonnier { alpha: 1.0 },
            Loss::Cauchy,
            Loss::DEFAULT_HAMPEL,
        ] {
            for &z in &scan_grid() {
                if loss.phi_prime(z) <= 0.0 {
                    assert!(loss.zeta(z) >= loss.phi(z));
                    assert!(loss.phi(z) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn huber_passes_standing_assumptions() {
        let r = validate_assumptions(&Loss::Huber, &scan_grid());
        assert!(r.all_standing_pass(), "{r:?}");
    }

    #[test]
    fn squared_fails_bounded_derivative() {
        let r = validate_assumptions(&Loss::Squared, &scan_grid());
        assert!(!r.a2.passed);
    }

    #[test]
    fn hampel_fails_strict_increase_past_c() {
        let r = validate_assumptions(&Loss::DEFAULT_HAMPEL, &scan_grid());
        assert!(!r.a1.passed);
        let at = r.a1.first_violation.unwrap();
        assert!(at > 3.0 && at < 3.02, "{at}");
        assert!(!r.strictly_convex.passed);
    }

    #[test]
    fn cauchy_and_charbonnier_pass_on_grid() {
        for loss in [Loss::Cauchy, Loss::Charbonnier { alpha: 1.0 }] {
            let r = validate_assumptions(&loss, &scan_grid());
            assert!(r.a1.passed && r.a2.passed && r.a3.passed, "{loss:?} {r:?}");
        }
    }

    #[test]
    fn invalid_grid_is_reported_not_raised() {
        let r = validate_assumptions(&Loss::Huber, &[1.0, 0.5]);
        assert!(!r.a1.passed);
    }

    #[test]
    fn strong_convexity_constant() {
        let mu = strong_convexity(&Loss::Charbonnier { alpha: 1.0 }, 1.0);
        // phi(2) = 5^{-1/2}, rho''(2) = 5^{-3/2}
        assert!(close(mu, 2.0 * powf(5.0, -1.5), 1e-15));
        assert_eq!(strong_convexity(&Loss::Huber, 1.0), 0.0);
    }
}
