//! Run configuration and the `--v` direction syntax.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acs::{self, DeformationTensor, ShellProfile, StandardStructure, Structure};
use crate::custom::CustomStructure;
use crate::error::{AcxError, Result};
use crate::jet::MAX_VARS;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureSpec {
    #[default]
    Standard,
    RadialH {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_rho0")]
        rho0: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Bump {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_rho0")]
        rho0: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    RadiallyInvariant {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    Custom {
        file: PathBuf,
    },
}

fn default_epsilon() -> f64 {
    ShellProfile::default().epsilon
}
fn default_rho0() -> f64 {
    ShellProfile::default().rho0
}
fn default_delta() -> f64 {
    ShellProfile::default().delta
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub radii: usize,
    pub angles: usize,
    pub degree: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radii: 10, angles: 16, degree: 24 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub interior: f64,
    pub boundary: f64,
    pub psh: f64,
    pub bracket: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { interior: 1e-6, boundary: 1e-6, psh: 1e-7, bracket: 1e-8 }
    }
}

/// Probe shell for pointwise sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub rmin: f64,
    pub rmax: f64,
    pub count: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec { rmin: 0.1, rmax: 0.9, count: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub structure: StructureSpec,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub probes: ProbeSpec,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            structure: StructureSpec::default(),
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            probes: ProbeSpec::default(),
            seed: 1,
        }
    }
}

fn bad(msg: impl Into<String>) -> AcxError {
    AcxError::Config(msg.into())
}

fn check_profile(epsilon: f64, rho0: f64, delta: f64) -> Result<()> {
    if !(epsilon.is_finite() && rho0.is_finite() && delta.is_finite()) {
        return Err(bad("profile parameters must be finite"));
    }
    if !(0.0 < rho0 && delta > 0.0 && rho0 + delta < 1.0) {
        return Err(bad(format!("need 0 < rho0 < rho0 + delta < 1, got rho0 = {rho0}, delta = {delta}")));
    }
    if epsilon.abs() >= 1.0 {
        return Err(bad(format!("|epsilon| = {} must be < 1", epsilon.abs())));
    }
    Ok(())
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| AcxError::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut c = Self::from_json(&text)?;
        if let StructureSpec::Custom { file } = &mut c.structure {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || 2 * self.n > MAX_VARS {
            return Err(bad(format!("n = {} outside 2..={}", self.n, MAX_VARS / 2)));
        }
        match &self.structure {
            StructureSpec::Standard => {}
            StructureSpec::RadialH { epsilon, rho0, delta } | StructureSpec::Bump { epsilon, rho0, delta } => {
                check_profile(*epsilon, *rho0, *delta)?;
                if self.n != 2 {
                    return Err(bad("shell families are defined for n = 2"));
                }
            }
            StructureSpec::RadiallyInvariant { epsilon } => {
                if !epsilon.is_finite() || epsilon.abs() >= 1.0 {
                    return Err(bad("radially invariant family needs |epsilon| < 1"));
                }
                if self.n != 2 {
                    return Err(bad("radially invariant family is defined for n = 2"));
                }
            }
            StructureSpec::Custom { .. } => {
                if self.n != 2 {
                    return Err(bad("custom coefficient files describe n = 2"));
                }
            }
        }
        if self.grid.degree < 8 {
            return Err(bad(format!("grid.degree = {} must be >= 8", self.grid.degree)));
        }
        if self.grid.radii < 2 || self.grid.angles < 4 {
            return Err(bad("grid needs radii >= 2 and angles >= 4"));
        }
        let t = &self.tolerances;
        for (name, v) in [("interior", t.interior), ("boundary", t.boundary), ("psh", t.psh), ("bracket", t.bracket)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        let p = &self.probes;
        if !(0.0 < p.rmin && p.rmin < p.rmax && p.rmax < 1.0) || p.count == 0 {
            return Err(bad("probes need 0 < rmin < rmax < 1 and count >= 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn profile(&self) -> Option<ShellProfile> {
        match self.structure {
            StructureSpec::RadialH { epsilon, rho0, delta } | StructureSpec::Bump { epsilon, rho0, delta } => {
                Some(ShellProfile { epsilon, rho0, delta })
            }
            _ => None,
        }
    }

    /// The deformation tensor of builtin families.
    pub fn deformation(&self) -> Option<DeformationTensor> {
        match &self.structure {
            StructureSpec::Standard => Some(DeformationTensor::zero()),
            StructureSpec::RadialH { .. } => self.profile().map(DeformationTensor::radial_h),
            StructureSpec::Bump { .. } => self.profile().map(DeformationTensor::bump),
            StructureSpec::RadiallyInvariant { epsilon } => Some(DeformationTensor::radially_invariant(*epsilon)),
            StructureSpec::Custom { .. } => None,
        }
    }

    pub fn build_structure(&self) -> Result<Structure> {
        match &self.structure {
            StructureSpec::Standard => Ok(Arc::new(StandardStructure::new(self.n))),
            StructureSpec::Custom { file } => Ok(Arc::new(CustomStructure::from_file(file)?)),
            _ => {
                let phi = self.deformation().expect("builtin family");
                Ok(Arc::new(acs::structure_from_deformation(phi)?))
            }
        }
    }
}

/// Parses one complex number: `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || AcxError::Parse(format!("not a complex number: {s:?}"));
    if t.is_empty() {
        return Err(err());
    }
    let num = |x: &str| -> Result<f64> {
        let v: f64 = match x {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => x.parse().map_err(|_| err())?,
        };
        if v.is_finite() { Ok(v) } else { Err(err()) }
    };
    let Some(body) = t.strip_suffix('i') else {
        if t.contains(['i', 'I', 'j']) {
            return Err(err());
        }
        let re: f64 = t.parse().map_err(|_| err())?;
        return if re.is_finite() { Ok(C64::new(re, 0.0)) } else { Err(err()) };
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = &body[..k];
            if re.parse::<f64>().is_err() {
                return Err(err());
            }
            Ok(C64::new(num(re)?, num(&body[k..])?))
        }
        None => Ok(C64::new(0.0, num(body)?)),
    }
}

/// Parses a comma-separated direction and normalizes it to unit length.
pub fn parse_direction(s: &str) -> Result<Vec<C64>> {
    let v = s.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(AcxError::Parse(format!("direction {s:?} has zero or non-finite length")));
    }
    Ok(v.iter().map(|c| c / norm).collect())
}

/// Parses a comma-separated complex vector without normalizing.
pub fn parse_vector(s: &str) -> Result<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        assert_eq!(parse_complex("0.6+0.8i").unwrap(), C64::new(0.6, 0.8));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3-2e+1i").unwrap(), C64::new(1e-3, -20.0));
        assert_eq!(parse_complex(" 2 ").unwrap(), C64::new(2.0, 0.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("ii").is_err());
        assert!(parse_complex("nan").is_err());
    }

    #[test]
    fn direction_is_normalized() {
        let v = parse_direction("0,2i").unwrap();
        assert_eq!(v, vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)]);
        assert!(parse_direction("0,0").is_err());
    }

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        let c = RunConfig::from_json(r#"{"structure": {"family": "radial_h"}}"#).unwrap();
        assert_eq!(c.profile(), Some(ShellProfile::default()));
    }

    #[test]
    fn rejects_bad_profile() {
        let e = RunConfig::from_json(r#"{"structure": {"family": "radial_h", "rho0": 0.9, "delta": 0.2}}"#);
        assert!(matches!(e, Err(AcxError::Config(_))));
    }
}
