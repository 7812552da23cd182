//! Tracker configuration: variant selection, weights, bounds and thresholds.

use crate::{Error, Result};

/// Maximum track penalty. Fixed: association cost entries are convex
/// combinations of `[0, 1]` terms, so the penalty term must stay in `[0, 1]`.
pub const RHO_MAX: f64 = 1.0;

const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Basic,
    Pso,
    PsoSocial,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Some(Variant::Basic),
            "pso" => Some(Variant::Pso),
            "pso_social" | "pso-social" | "psosocial" => Some(Variant::PsoSocial),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::Pso => "pso",
            Variant::PsoSocial => "pso_social",
        }
    }
}

/// What happens to low-fitness particles after a PSO run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleMode {
    /// Drop particles below the threshold (always keeping the best one).
    Discard,
    /// Move particles below the threshold onto the swarm's global best.
    ReplaceWithGlobal,
    /// Leave the swarm untouched.
    None,
}

impl ResampleMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "discard" => Some(ResampleMode::Discard),
            "replace_with_global" | "replace" | "global" => Some(ResampleMode::ReplaceWithGlobal),
            "none" => Some(ResampleMode::None),
            _ => None,
        }
    }
}

/// Where new particle sets are propagated from each frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Every particle perturbs the track's previous optimal state.
    FromOptimum,
    /// Each particle perturbs its own previous state (topped up from the
    /// optimum when the previous swarm was smaller than `particles`).
    FromParticles,
}

impl InitMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "from_optimum" | "optimum" => Some(InitMode::FromOptimum),
            "from_particles" | "particles" => Some(InitMode::FromParticles),
            _ => None,
        }
    }
}

/// Full tracker configuration. `default_for` gives per-variant defaults;
/// every weight family must sum to 1 (checked by [`TrackerConfig::validate`]).
#[derive(Debug, Clone)]
pub struct TrackerConfig {
    pub variant: Variant,
    /// Particles per target (S).
    pub particles: usize,
    /// PSO refinement sweeps per frame.
    pub pso_iters: usize,
    /// PSO inertia, in (0, 1).
    pub eta: f64,
    /// PSO personal-best pull, in (1, 3).
    pub phi_p: f64,
    /// PSO global-best pull, in (1, 3).
    pub phi_g: f64,
    /// Association cost weight on the particle motion term.
    pub lambda_p: f64,
    /// Association cost weight on detection confidence.
    pub lambda_d: f64,
    /// Association cost weight on track penalty.
    pub lambda_h: f64,
    /// Pair fitness weight on appearance similarity.
    pub lambda_s: f64,
    /// Pair fitness weight on motion proximity.
    pub lambda_m: f64,
    /// Fitness composition weight on the history term.
    pub sigma_h: f64,
    /// Fitness composition weight on the exploration term.
    pub sigma_p: f64,
    /// Fitness composition weight on the social term (PSO-Social only).
    pub sigma_i: f64,
    /// Social fitness weight on state divergence.
    pub xi_p: f64,
    /// Social fitness weight on velocity divergence.
    pub xi_v: f64,
    /// Recovery threshold: weak tracks whose global-best history fitness
    /// exceeds this heal penalty and age.
    pub rho_re: f64,
    /// Maximum age: a track is removed once its age reaches this.
    pub age_max: u32,
    /// Post-PSO resampling fitness threshold.
    pub sigma_0: f64,
    /// Social weak-track adjustment step.
    pub sigma_s: f64,
    /// State exploration coefficient of the motion model.
    pub eps_x: f64,
    /// Velocity exploration coefficient of the motion model.
    pub eps_v: f64,
    /// State contribution coefficient of the motion model.
    pub lambda_x: f64,
    /// Velocity contribution coefficient of the motion model.
    pub lambda_v: f64,
    /// Position perturbation bound as a fraction of box dimensions.
    pub pos_noise_scale: f64,
    /// Velocity perturbation bound as a fraction of box dimensions.
    pub vel_noise_scale: f64,
    /// Extra damping on the size (w, h) axes of all motion bounds. Box
    /// sizes change far slower than positions; undamped size noise washes
    /// out the size cue that separates overlapping targets.
    pub size_noise_damp: f64,
    /// Association pairs costing more than this are left unmatched;
    /// 1.0 disables the gate.
    pub gate_cost: f64,
    pub resample_mode: ResampleMode,
    pub init_mode: InitMode,
    /// Entrance-area width in pixels; `None` derives 0.1 * min(image dims)
    /// at runtime. Weak tracks centered inside it age twice as fast.
    pub entrance_margin: Option<f64>,
    /// Master RNG seed; per-track streams are derived from it.
    pub seed: u64,
}

impl TrackerConfig {
    /// Defaults for a variant. Particle count and fitness-composition
    /// weights differ per variant; everything else is shared.
    pub fn default_for(variant: Variant) -> Self {
        let (particles, sigma_h, sigma_p, sigma_i) = match variant {
            Variant::Basic => (8, 0.6, 0.4, 0.0),
            Variant::Pso => (6, 0.6, 0.4, 0.0),
            Variant::PsoSocial => (6, 0.5, 0.3, 0.2),
        };
        Self {
            variant,
            particles,
            pso_iters: 4,
            eta: 0.7,
            phi_p: 1.5,
            phi_g: 1.5,
            lambda_p: 0.6,
            lambda_d: 0.2,
            lambda_h: 0.2,
            lambda_s: 0.5,
            lambda_m: 0.5,
            sigma_h,
            sigma_p,
            sigma_i,
            xi_p: 0.5,
            xi_v: 0.5,
            rho_re: 0.9,
            age_max: 10,
            sigma_0: 0.2,
            sigma_s: 0.02,
            eps_x: 1.0,
            eps_v: 1.0,
            lambda_x: 1.0,
            lambda_v: 1.0,
            pos_noise_scale: 0.25,
            vel_noise_scale: 0.125,
            size_noise_damp: 0.25,
            gate_cost: 0.55,
            resample_mode: ResampleMode::ReplaceWithGlobal,
            init_mode: InitMode::FromOptimum,
            entrance_margin: None,
            seed: 0,
        }
    }

    /// Maximum penalty (read-only; see [`RHO_MAX`]).
    pub fn rho_max(&self) -> f64 {
        RHO_MAX
    }

    /// Per-frame penalty step for an unmatched track in the Basic variant.
    pub fn penalty_step(&self) -> f64 {
        RHO_MAX / self.age_max as f64
    }

    /// Entrance-area width for a given image size.
    pub fn entrance_margin_px(&self, width: f64, height: f64) -> f64 {
        self.entrance_margin.unwrap_or_else(|| 0.1 * width.min(height))
    }

    pub fn validate(&self) -> Result<()> {
        let check_sum = |name: &str, sum: f64| {
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                Err(Error::Config(format!("{name} must sum to 1, got {sum}")))
            } else {
                Ok(())
            }
        };
        check_sum(
            "lambda_p + lambda_d + lambda_h",
            self.lambda_p + self.lambda_d + self.lambda_h,
        )?;
        check_sum("lambda_s + lambda_m", self.lambda_s + self.lambda_m)?;
        check_sum("xi_p + xi_v", self.xi_p + self.xi_v)?;
        match self.variant {
            Variant::Basic | Variant::Pso => {
                check_sum("sigma_h + sigma_p", self.sigma_h + self.sigma_p)?
            }
            Variant::PsoSocial => check_sum(
                "sigma_h + sigma_p + sigma_i",
                self.sigma_h + self.sigma_p + self.sigma_i,
            )?,
        }
        for (name, value) in [
            ("lambda_p", self.lambda_p),
            ("lambda_d", self.lambda_d),
            ("lambda_h", self.lambda_h),
            ("lambda_s", self.lambda_s),
            ("lambda_m", self.lambda_m),
            ("sigma_h", self.sigma_h),
            ("sigma_p", self.sigma_p),
            ("sigma_i", self.sigma_i),
            ("xi_p", self.xi_p),
            ("xi_v", self.xi_v),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {value}")));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        for (name, phi) in [("phi_p", self.phi_p), ("phi_g", self.phi_g)] {
            if !(phi > 1.0 && phi < 3.0) {
                return Err(Error::Config(format!("{name} must lie in (1, 3), got {phi}")));
            }
        }
        if self.particles == 0 {
            return Err(Error::Config("particles must be >= 1".into()));
        }
        if self.pso_iters == 0 {
            return Err(Error::Config("pso_iters must be >= 1".into()));
        }
        if self.age_max == 0 {
            return Err(Error::Config("age_max must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.sigma_0) {
            return Err(Error::Config(format!("sigma_0 must lie in [0, 1], got {}", self.sigma_0)));
        }
        if !(0.0..=1.0).contains(&self.rho_re) {
            return Err(Error::Config(format!("rho_re must lie in [0, 1], got {}", self.rho_re)));
        }
        if !(0.0..=1.0).contains(&self.gate_cost) {
            return Err(Error::Config(format!(
                "gate_cost must lie in [0, 1], got {}",
                self.gate_cost
            )));
        }
        if self.sigma_s < 0.0 || self.sigma_s > 1.0 {
            return Err(Error::Config(format!("sigma_s must lie in [0, 1], got {}", self.sigma_s)));
        }
        for (name, value) in [
            ("pos_noise_scale", self.pos_noise_scale),
            ("vel_noise_scale", self.vel_noise_scale),
            ("size_noise_damp", self.size_noise_damp),
        ] {
            if value <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if let Some(margin) = self.entrance_margin {
            if margin < 0.0 {
                return Err(Error::Config(format!("entrance_margin must be >= 0, got {margin}")));
            }
        }
        Ok(())
    }
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self::default_for(Variant::PsoSocial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_all_variants() {
        for variant in [Variant::Basic, Variant::Pso, Variant::PsoSocial] {
            TrackerConfig::default_for(variant).validate().unwrap();
        }
    }

    #[test]
    fn basic_uses_eight_particles_pso_six() {
        assert_eq!(TrackerConfig::default_for(Variant::Basic).particles, 8);
        assert_eq!(TrackerConfig::default_for(Variant::Pso).particles, 6);
        assert_eq!(TrackerConfig::default_for(Variant::PsoSocial).particles, 6);
    }

    #[test]
    fn bad_cost_weights_rejected() {
        let mut cfg = TrackerConfig::default_for(Variant::Basic);
        cfg.lambda_p = 0.5;
        cfg.lambda_d = 0.3;
        cfg.lambda_h = 0.3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn social_sigma_must_sum_to_one() {
        let mut cfg = TrackerConfig::default_for(Variant::PsoSocial);
        cfg.sigma_i = 0.3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn pso_coefficients_constrained() {
        let mut cfg = TrackerConfig::default_for(Variant::Pso);
        cfg.eta = 1.0;
        assert!(cfg.validate().is_err());
        cfg.eta = 0.7;
        cfg.phi_p = 3.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn variant_names_parse() {
        assert_eq!(Variant::parse("pso_social"), Some(Variant::PsoSocial));
        assert_eq!(Variant::parse("PSO"), Some(Variant::Pso));
        assert_eq!(Variant::parse("Basic"), Some(Variant::Basic));
        assert_eq!(Variant::parse("kalman"), None);
    }
}
