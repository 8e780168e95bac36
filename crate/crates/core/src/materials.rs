//! Isotropic linear thermoelastic material data.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaterialError {
    #[error("invalid material: {0}")]
    Invalid(String),
    #[error("plane strain requires nu < 0.5, got {0}")]
    SingularPlaneStrain(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneCondition {
    Stress,
    Strain,
}

impl PlaneCondition {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stress" | "plane_stress" => Some(PlaneCondition::Stress),
            "strain" | "plane_strain" => Some(PlaneCondition::Strain),
            _ => None,
        }
    }
}

impl fmt::Display for PlaneCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaneCondition::Stress => "stress",
            PlaneCondition::Strain => "strain",
        })
    }
}

/// Material of one region. Units: MPa, W/(mm·K), 1/°C, °C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProps {
    pub e: f64,
    pub nu: f64,
    /// Thermal conductivity in W/(mm·K).
    pub conductivity: f64,
    pub alpha: f64,
    pub t0: f64,
    pub plane: PlaneCondition,
}

impl MaterialProps {
    /// Builds props from handbook units: `e_mpa` in MPa and conductivity in
    /// W/(m·K), which is converted to W/(mm·K).
    pub fn from_handbook(
        e_mpa: f64,
        nu: f64,
        k_w_per_mk: f64,
        alpha: f64,
        t0: f64,
        plane: PlaneCondition,
    ) -> Result<Self, MaterialError> {
        let p = MaterialProps {
            e: e_mpa,
            nu,
            conductivity: k_w_per_mk / 1000.0,
            alpha,
            t0,
            plane,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), MaterialError> {
        if !(self.e.is_finite() && self.e > 0.0) {
            return Err(MaterialError::Invalid(format!("E must be positive, got {}", self.e)));
        }
        if !(self.nu >= 0.0 && self.nu < 0.5) {
            if self.plane == PlaneCondition::Strain && self.nu >= 0.5 {
                return Err(MaterialError::SingularPlaneStrain(self.nu));
            }
            return Err(MaterialError::Invalid(format!("nu must lie in [0, 0.5), got {}", self.nu)));
        }
        if !(self.conductivity.is_finite() && self.conductivity > 0.0) {
            return Err(MaterialError::Invalid(format!(
                "conductivity must be positive, got {}",
                self.conductivity
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(MaterialError::Invalid(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if !self.t0.is_finite() {
            return Err(MaterialError::Invalid("reference temperature is not finite".into()));
        }
        Ok(())
    }

    /// Same material with a different conductivity in W/(mm·K).
    pub fn with_conductivity(self, conductivity: f64) -> Self {
        MaterialProps { conductivity, ..self }
    }
}

/// Region id to material.
pub type MaterialMap = BTreeMap<u32, MaterialProps>;

/// Voigt elasticity matrix (xx, yy, xy) with engineering shear.
pub fn elasticity_matrix(props: &MaterialProps) -> Result<Matrix3<f64>, MaterialError> {
    props.check()?;
    let (e, nu) = (props.e, props.nu);
    Ok(match props.plane {
        PlaneCondition::Stress => {
            let c = e / (1.0 - nu * nu);
            Matrix3::new(c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0)
        }
        PlaneCondition::Strain => {
            let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            Matrix3::new(
                c * (1.0 - nu),
                c * nu,
                0.0,
                c * nu,
                c * (1.0 - nu),
                0.0,
                0.0,
                0.0,
                c * (1.0 - 2.0 * nu) / 2.0,
            )
        }
    })
}

/// In-plane thermal strain at temperature `t`.
///
/// Under plane strain the out-of-plane restraint raises the in-plane
/// expansion coefficient to `(1 + nu) alpha`.
pub fn thermal_strain_voigt(props: &MaterialProps, t: f64) -> Vector3<f64> {
    let coeff = match props.plane {
        PlaneCondition::Stress => props.alpha,
        PlaneCondition::Strain => (1.0 + props.nu) * props.alpha,
    };
    let e = coeff * (t - props.t0);
    Vector3::new(e, e, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn props(e: f64, nu: f64, plane: PlaneCondition) -> MaterialProps {
        MaterialProps {
            e,
            nu,
            conductivity: 1.0,
            alpha: 1e-5,
            t0: 0.0,
            plane,
        }
    }

    #[test]
    fn plane_stress_entry() {
        let d = elasticity_matrix(&props(10.0, 0.3, PlaneCondition::Stress)).unwrap();
        assert!((d[(0, 0)] - 10.0 / 0.91).abs() < 1e-12);
        assert!((d[(0, 0)] - 10.98901).abs() < 1e-5);
        assert_eq!(d[(0, 1)], d[(1, 0)]);
    }

    #[test]
    fn zero_poisson_is_diagonal() {
        for plane in [PlaneCondition::Stress, PlaneCondition::Strain] {
            let d = elasticity_matrix(&props(7.0, 0.0, plane)).unwrap();
            assert_eq!(d, Matrix3::from_diagonal(&Vector3::new(7.0, 7.0, 3.5)));
        }
    }

    #[test]
    fn plane_strain_rejects_incompressible() {
        assert_eq!(
            elasticity_matrix(&props(1.0, 0.5, PlaneCondition::Strain)),
            Err(MaterialError::SingularPlaneStrain(0.5))
        );
    }

    #[test]
    fn silver_thermal_strain() {
        let silver = MaterialProps {
            alpha: 19e-6,
            t0: 25.0,
            ..props(12900.0, 0.3, PlaneCondition::Stress)
        };
        let eps = thermal_strain_voigt(&silver, 150.0);
        assert!((eps[0] - 2.375e-3).abs() < 1e-15);
        assert_eq!(eps[0], eps[1]);
        assert_eq!(eps[2], 0.0);
        assert_eq!(thermal_strain_voigt(&silver, 25.0), Vector3::zeros());
    }

    #[test]
    fn handbook_conductivity_is_per_mm() {
        let p = MaterialProps::from_handbook(1.0, 0.2, 20.0, 0.0, 0.0, PlaneCondition::Stress).unwrap();
        assert!((p.conductivity - 0.02).abs() < 1e-15);
        assert!(MaterialProps::from_handbook(-1.0, 0.2, 20.0, 0.0, 0.0, PlaneCondition::Stress).is_err());
    }

    proptest! {
        #[test]
        fn elasticity_is_positive_definite(e in 1e3f64..4e5, nu in 0.0f64..0.49, strain in any::<bool>()) {
            let plane = if strain { PlaneCondition::Strain } else { PlaneCondition::Stress };
            let d = elasticity_matrix(&props(e, nu, plane)).unwrap();
            prop_assert!((d - d.transpose()).abs().max() == 0.0);
            let eig = d.symmetric_eigen().eigenvalues;
            prop_assert!(eig.iter().all(|&l| l > 0.0));
        }

        #[test]
        fn thermal_strain_is_linear(dt in -500.0f64..500.0, k in -3.0f64..3.0) {
            let p = props(1.0, 0.3, PlaneCondition::Strain);
            let a = thermal_strain_voigt(&p, p.t0 + dt);
            let b = thermal_strain_voigt(&p, p.t0 + k * dt);
            prop_assert!((b - a * k).norm() <= 1e-14 * (1.0 + a.norm() * k.abs()));
        }
    }
}
