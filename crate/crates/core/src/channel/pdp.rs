use std::path::Path;

use serde::Deserialize;

use super::Numerology;
use crate::error::{Error, Result};

/// Tapped-delay-line power profile. Delays in ns, gains in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    name: String,
    delays_ns: Vec<f64>,
    gains_db: Vec<f64>,
}

pub const STANDARD_PROFILES: [&str; 4] = ["EPA", "EVA", "ETU", "CUSTOM"];

const EPA: ([f64; 7], [f64; 7]) = (
    [0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0],
    [0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8],
);
const EVA: ([f64; 9], [f64; 9]) = (
    [0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0],
    [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9],
);
const ETU: ([f64; 9], [f64; 9]) = (
    [0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0],
    [-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0],
);
const CUSTOM: ([f64; 10], [f64; 10]) = (
    [0.0, 30.0, 200.0, 300.0, 500.0, 1500.0, 2500.0, 5000.0, 7000.0, 9000.0],
    [-1.0, 0.0, 0.0, -1.0, -2.0, -1.0, -1.0, -1.5, -3.0, -5.0],
);

/// Look up one of the built-in profiles by (case-insensitive) name.
pub fn standard_pdp(name: &str) -> Result<PowerDelayProfile> {
    let (d, g): (&[f64], &[f64]) = match name.to_ascii_uppercase().as_str() {
        "EPA" => (&EPA.0, &EPA.1),
        "EVA" => (&EVA.0, &EVA.1),
        "ETU" => (&ETU.0, &ETU.1),
        "CUSTOM" => (&CUSTOM.0, &CUSTOM.1),
        _ => return Err(Error::UnknownProfile(name.to_string())),
    };
    PowerDelayProfile::new(name.to_ascii_uppercase(), d.to_vec(), g.to_vec())
}

impl PowerDelayProfile {
    pub fn new(name: impl Into<String>, delays_ns: Vec<f64>, gains_db: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if delays_ns.is_empty() || delays_ns.len() != gains_db.len() {
            return Err(Error::invalid(format!(
                "profile {name}: {} delays vs {} gains",
                delays_ns.len(),
                gains_db.len()
            )));
        }
        if delays_ns.iter().chain(&gains_db).any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("profile {name}: non-finite entry")));
        }
        if delays_ns[0] < 0.0 || delays_ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "profile {name}: delays must be nonnegative and strictly increasing"
            )));
        }
        let num = Numerology::default();
        let max = num.ns_to_samples(*delays_ns.last().unwrap());
        if max >= num.cp_samples as f64 {
            return Err(Error::invalid(format!(
                "profile {name}: max delay {max:.2} samples exceeds the cyclic prefix ({})",
                num.cp_samples
            )));
        }
        Ok(PowerDelayProfile {
            name,
            delays_ns,
            gains_db,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_paths(&self) -> usize {
        self.delays_ns.len()
    }

    pub fn delays_ns(&self) -> &[f64] {
        &self.delays_ns
    }

    pub fn gains_db(&self) -> &[f64] {
        &self.gains_db
    }

    /// Linear path powers normalized to unit total.
    pub fn linear_gains(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.gains_db.iter().map(|g| 10f64.powf(g / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|g| g / total).collect()
    }

    pub fn delays_samples(&self, num: &Numerology) -> Vec<f64> {
        self.delays_ns.iter().map(|d| num.ns_to_samples(*d)).collect()
    }

    pub fn max_delay_ns(&self) -> f64 {
        *self.delays_ns.last().unwrap()
    }
}

/// On-disk form of a profile (`[[profile]]` tables in TOML).
#[derive(Debug, Clone, Deserialize, serde::Serialize, PartialEq)]
pub struct ProfileDef {
    pub name: String,
    pub delays_ns: Vec<f64>,
    pub gains_db: Vec<f64>,
}

impl ProfileDef {
    pub fn build(&self) -> Result<PowerDelayProfile> {
        PowerDelayProfile::new(self.name.clone(), self.delays_ns.clone(), self.gains_db.clone())
    }
}

#[derive(Deserialize)]
struct ProfileFile {
    #[serde(default)]
    profile: Vec<ProfileDef>,
}

/// Parse `[[profile]]` tables from TOML text.
pub fn parse_profiles(text: &str) -> Result<Vec<PowerDelayProfile>> {
    let file: ProfileFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    file.profile.iter().map(ProfileDef::build).collect()
}

pub fn load_profiles(path: &Path) -> Result<Vec<PowerDelayProfile>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profiles(&text)
}
