//! Initial spinor data of a scenario.

use std::path::Path;

use dslab_core::spinor::{
    catalog_solution, dirac_residual, lift_from_angles, DiracKind, LiftAngles, SpinorField,
    SurfacePotential,
};
use dslab_core::{ComplexField, GridSpec};

use crate::config::{InitialData, ScenarioConfig};
use crate::CliError;

/// Potential and both spinors.
#[derive(Debug, Clone)]
pub struct InitialFields {
    pub potential: SurfacePotential,
    pub psi: SpinorField,
    pub phi: SpinorField,
}

fn read_field(spec: GridSpec, path: &Path) -> Result<ComplexField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    ComplexField::from_csv(spec, &text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses the two-block layout of [`SpinorField::to_csv`].
pub fn spinor_from_csv(spec: GridSpec, text: &str) -> Result<SpinorField, CliError> {
    let (a, b) = text
        .strip_prefix("# c1\n")
        .and_then(|rest| rest.split_once("# c2\n"))
        .ok_or_else(|| CliError::Config("spinor CSV needs '# c1' and '# c2' blocks".into()))?;
    let c1 = ComplexField::from_csv(spec, a).map_err(|e| CliError::Config(e.to_string()))?;
    let c2 = ComplexField::from_csv(spec, b).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(SpinorField::new(c1, c2)?)
}

pub fn build_initial(cfg: &ScenarioConfig) -> Result<InitialFields, CliError> {
    let spec = cfg.grid.spec()?;
    if let Some(params) = cfg.initial.catalog() {
        let sol = catalog_solution(spec, params).map_err(|e| CliError::Config(e.to_string()))?;
        return Ok(InitialFields {
            potential: sol.potential,
            psi: sol.psi,
            phi: sol.phi,
        });
    }
    let InitialData::Lift { theta, eta, phi } = &cfg.initial else {
        unreachable!("catalog kinds handled above")
    };
    let angles = LiftAngles::new(read_field(spec, theta)?, read_field(spec, eta)?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let lift = lift_from_angles(&angles)?;
    let phi = match phi {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            spinor_from_csv(spec, &text)?
        }
        None => {
            let p = &lift.potential.p;
            if p.max_abs_imag() > 1e-10 * (1.0 + p.max_abs()) {
                return Err(CliError::Config(
                    "lift potential is complex; supply phi as a spinor CSV".into(),
                ));
            }
            lift.psi.clone()
        }
    };
    let r = dirac_residual(&lift.potential, &phi, DiracKind::Dtilde)?.max_abs();
    if r > 1e-6 * (1.0 + phi.max_abs()) {
        return Err(CliError::Config(format!(
            "phi does not solve the second Dirac equation (residual {r:e})"
        )));
    }
    Ok(InitialFields {
        potential: lift.potential,
        psi: lift.psi,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dslab_core::Complex64;

    #[test]
    fn spinor_csv_round_trip() {
        let g = GridSpec::square(8).unwrap();
        let s = SpinorField::constant(g, Complex64::new(1.5, -2.0), Complex64::new(0.0, 3.0));
        assert_eq!(spinor_from_csv(g, &s.to_csv()).unwrap(), s);
        assert!(spinor_from_csv(g, "i,j,re,im\n").is_err());
    }

    #[test]
    fn catalog_kinds_build() {
        let cfg = ScenarioConfig::default();
        let f = build_initial(&cfg).unwrap();
        assert!(
            dirac_residual(&f.potential, &f.psi, DiracKind::D)
                .unwrap()
                .max_abs()
                < 1e-10
        );
    }

    #[test]
    fn off_lattice_wave_is_a_config_error() {
        let cfg = ScenarioConfig {
            initial: InitialData::Wave {
                c: 1.0,
                k: [0.3f64.cos(), 0.3f64.sin()],
                m: [1.0, 0.0],
            },
            ..Default::default()
        };
        assert!(matches!(build_initial(&cfg), Err(CliError::Config(_))));
    }
}
