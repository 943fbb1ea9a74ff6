//! Three-body loss rates: closed forms and the single-channel numeric model
//! they are derived from.

pub mod analytic;
pub mod numeric;

/// Inelastic process and particle statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// Recombination of three identical bosons, `a < 0`.
    BosonRecomb,
    /// Atom–dimer relaxation for identical bosons, `a > 0`.
    BosonRelax,
    /// Atom–dimer relaxation for two-component fermions, `a > 0`.
    FermionRelax,
}

impl Process {
    pub fn wave(self) -> Wave {
        match self {
            Process::BosonRecomb => Wave::ThreeHalves,
            Process::BosonRelax | Process::FermionRelax => Wave::Zero,
        }
    }

    pub fn middle(self) -> Middle {
        match self {
            Process::BosonRecomb | Process::BosonRelax => Middle::Efimov(crate::zrp::efimov_root_unitarity()),
            Process::FermionRelax => Middle::Barrier(crate::zrp::P0),
        }
    }

    pub fn is_recombination(self) -> bool {
        matches!(self, Process::BosonRecomb)
    }

    pub fn name(self) -> &'static str {
        match self {
            Process::BosonRecomb => "boson_recomb",
            Process::BosonRelax => "boson_relax",
            Process::FermionRelax => "fermion_relax",
        }
    }
}

impl std::str::FromStr for Process {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "boson_recomb" | "boson_recomb_neg_a" => Ok(Process::BosonRecomb),
            "boson_relax" | "boson_relax_pos_a" => Ok(Process::BosonRelax),
            "fermion_relax" => Ok(Process::FermionRelax),
            _ => Err(crate::Error::Input(format!("unknown process {s:?}"))),
        }
    }
}

/// Effective angular momentum of the outer hyperradial region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wave {
    /// `l = 0`, relaxation.
    Zero,
    /// `l = 3/2`, recombination.
    ThreeHalves,
}

impl Wave {
    pub fn l(self) -> f64 {
        match self {
            Wave::Zero => 0.0,
            Wave::ThreeHalves => 1.5,
        }
    }

    /// Bessel order `l + 1/2` of the outer solutions.
    pub fn order(self) -> f64 {
        self.l() + 0.5
    }
}

/// Potential shape between `α|r_eff|` and `β|a|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Middle {
    /// Attractive `-(s0² + 1/4)/(2μR²)`.
    Efimov(f64),
    /// Repulsive `(p0² - 1/4)/(2μR²)`.
    Barrier(f64),
}

/// Hyperradial reduced mass `m/√3` for three equal masses.
pub fn hyperradial_mass(m: f64) -> f64 {
    m / 3f64.sqrt()
}

/// Rate from the inelastic probability: `π/(μk)·P` for relaxation and
/// `192π²/(μk⁴)·P` for recombination, with `μ` the hyperradial mass.
pub fn rate_from_probability(process: Process, probability: f64, mu: f64, k: f64) -> f64 {
    use std::f64::consts::PI;
    if process.is_recombination() {
        192.0 * PI * PI / (mu * k.powi(4)) * probability
    } else {
        PI / (mu * k) * probability
    }
}
