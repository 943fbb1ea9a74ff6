//! `key = value` settings file. Blank lines and `#` comments are ignored;
//! unknown keys are rejected so typos do not pass silently.

use threebody_core::feshbach::ClassThresholds;
use threebody_core::{Error, PhysicalConstants, RegimeGuard, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub constants: PhysicalConstants,
    pub classes: ClassThresholds,
    pub guard: RegimeGuard,
    /// Command-specific tolerance; `None` keeps each command's default.
    pub tol: Option<f64>,
    pub steps_per_r0: usize,
    pub r_max_over_r0: f64,
    pub step_rel_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            constants: PhysicalConstants::default(),
            classes: ClassThresholds::default(),
            guard: RegimeGuard::default(),
            tol: None,
            steps_per_r0: 800,
            r_max_over_r0: 20.0,
            step_rel_tol: 1e-10,
        }
    }
}

pub const KEYS: [&str; 11] = [
    "amu_in_electron_masses",
    "bohr_magneton_au",
    "gauss_in_au_field",
    "narrow_ratio",
    "broad_ratio",
    "min_ratio",
    "max_k_reach",
    "tol",
    "steps_per_r0",
    "r_max_over_r0",
    "step_rel_tol",
];

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num: f64 = value.parse().map_err(|_| bad(format!("{key}: cannot parse {value:?} as a number")))?;
            if !num.is_finite() {
                return Err(bad(format!("{key}: value must be finite")));
            }
            match key {
                "amu_in_electron_masses" => s.constants.amu_in_electron_masses = num,
                "bohr_magneton_au" => s.constants.bohr_magneton_au = num,
                "gauss_in_au_field" => s.constants.gauss_in_au_field = num,
                "narrow_ratio" => s.classes.narrow = num,
                "broad_ratio" => s.classes.broad = num,
                "min_ratio" => s.guard.min_ratio = num,
                "max_k_reach" => s.guard.max_k_reach = num,
                "tol" => s.tol = Some(num),
                "steps_per_r0" => {
                    if !(num >= 1.0 && num.fract() == 0.0) {
                        return Err(bad(format!("steps_per_r0 must be a positive integer, got {value}")));
                    }
                    s.steps_per_r0 = num as usize;
                }
                "r_max_over_r0" => s.r_max_over_r0 = num,
                "step_rel_tol" => s.step_rel_tol = num,
                _ => return Err(bad(format!("unknown key {key:?}; known keys: {}", KEYS.join(", ")))),
            }
        }
        s.constants.validate()?;
        Ok(s)
    }
}
