//! Channel models as interchangeable strategies.
//!
//! Both pure-cascade models share the form `C_L F_L ⋯ F_1 C_0` with
//! `F_ℓ = Θ_ℓ + c·I`; they differ only in the structural offset `c`.

use std::sync::Arc;

use crate::error::Result;
use crate::linalg::CMat;
use crate::optimizer::channel_gain;
use crate::registry::Registry;
use crate::scattering::{self, CascadeChannels, ScatteringStack};

pub trait ChannelModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Offset `c` in the per-RIS factor `Θ_ℓ + c·I`.
    fn structural_offset(&self) -> f64;

    fn assemble(&self, ch: &CascadeChannels, stack: &ScatteringStack) -> Result<CMat> {
        scattering::assemble_with_offset(ch, stack, self.structural_offset())
    }

    fn gain(&self, ch: &CascadeChannels, stack: &ScatteringStack) -> Result<f64> {
        Ok(channel_gain(&self.assemble(ch, stack)?))
    }
}

/// Includes the structural scattering of every RIS (`Θ_ℓ − I`).
#[derive(Debug, Clone, Copy, Default)]
pub struct PhysicsCompliant;

impl ChannelModel for PhysicsCompliant {
    fn name(&self) -> &'static str {
        "physics"
    }

    fn structural_offset(&self) -> f64 {
        -1.0
    }
}

/// Cascaded reflections only (`Θ_ℓ`).
#[derive(Debug, Clone, Copy, Default)]
pub struct WidelyUsed;

impl ChannelModel for WidelyUsed {
    fn name(&self) -> &'static str {
        "widely_used"
    }

    fn structural_offset(&self) -> f64 {
        0.0
    }
}

pub fn model_registry() -> Registry<dyn ChannelModel> {
    let mut reg: Registry<dyn ChannelModel> = Registry::new("channel model");
    reg.register("physics", Arc::new(PhysicsCompliant));
    reg.register("widely_used", Arc::new(WidelyUsed));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, c};

    #[test]
    fn registry_resolves_both_models() {
        let reg = model_registry();
        assert_eq!(reg.names(), vec!["physics", "widely_used"]);
        assert_eq!(reg.get("physics").unwrap().structural_offset(), -1.0);
        assert!(reg.get("bogus").is_err());
    }

    #[test]
    fn models_match_free_functions() {
        let one = CMat::from_element(1, 1, c(1.0, 0.0));
        let ch = CascadeChannels::pure(one.clone(), vec![one.clone()], one).unwrap();
        let stack = ScatteringStack::from_phases(&[vec![std::f64::consts::PI], vec![std::f64::consts::PI]]);
        let p = PhysicsCompliant.assemble(&ch, &stack).unwrap();
        assert!(linalg::rel_error(&p, &scattering::assemble_physics_channel(&ch, &stack).unwrap()) == 0.0);
        assert!((PhysicsCompliant.gain(&ch, &stack).unwrap() - 16.0).abs() < 1e-12);
        assert!((WidelyUsed.gain(&ch, &stack).unwrap() - 1.0).abs() < 1e-12);
    }
}
