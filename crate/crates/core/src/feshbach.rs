//! Feshbach resonance catalog: effective ranges from resonance parameters and
//! broad/narrow classification.

use std::fmt;

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::units::PhysicalConstants;

/// The bundled catalog of selected resonances.
pub const CATALOG_CSV: &str = include_str!("../data/resonances.csv");

pub const HEADER: [&str; 7] = ["species", "position_G", "a_bg_au", "delta_mu_muB", "delta_B_G", "mass_amu", "r0_au"];

/// Isotope masses in amu used for heteronuclear pairs.
pub const ISOTOPE_MASSES: [(&str, f64); 6] = [
    ("6Li", 6.0151228874),
    ("23Na", 22.989769282),
    ("39K", 38.9637064864),
    ("52Cr", 51.9405075),
    ("87Rb", 86.909180531),
    ("133Cs", 132.905451961),
];

pub fn isotope_mass(label: &str) -> Option<f64> {
    ISOTOPE_MASSES.iter().find(|(l, _)| *l == label).map(|(_, m)| *m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceEntry {
    /// Isotope label, or `A+B` for a heteronuclear pair.
    pub species: String,
    pub position_g: f64,
    pub a_bg: f64,
    pub delta_mu_mub: f64,
    pub delta_b_g: f64,
    /// Atomic mass; for a pair, the mass of the first species.
    pub mass_amu: f64,
    /// Van der Waals length.
    pub r0: f64,
}

impl ResonanceEntry {
    pub fn is_heteronuclear(&self) -> bool {
        self.species.contains('+')
    }

    /// Two-body reduced mass in atomic units.
    pub fn reduced_mass(&self, c: &PhysicalConstants) -> Result<f64> {
        if let Some((x, y)) = self.species.split_once('+') {
            let look = |s: &str| {
                isotope_mass(s.trim()).ok_or_else(|| Error::Input(format!("no bundled mass for species {s:?}")))
            };
            let (mx, my) = (look(x)?, look(y)?);
            c.amu_to_au(mx * my / (mx + my))
        } else {
            Ok(c.amu_to_au(self.mass_amu)? / 2.0)
        }
    }
}

/// `r_eff = -1/|μ2·a_bg·Δμ·ΔB|`, always negative.
pub fn reff_from_resonance(e: &ResonanceEntry, c: &PhysicalConstants) -> Result<f64> {
    if !(e.r0 > 0.0) {
        return input(format!("{} {} G: r0 must be positive", e.species, e.position_g));
    }
    let mu2 = e.reduced_mass(c)?;
    let zeeman = c.moment_field_product_to_au(e.delta_mu_mub, e.delta_b_g)?;
    let den = (mu2 * e.a_bg * zeeman).abs();
    if den == 0.0 || !den.is_finite() {
        return input(format!(
            "{} {} G: a_bg, delta_mu and delta_B must be nonzero and finite",
            e.species, e.position_g
        ));
    }
    Ok(-1.0 / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Broad,
    Narrow,
    Marginal,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Broad => "broad",
            Classification::Narrow => "narrow",
            Classification::Marginal => "marginal",
        })
    }
}

/// `|r_eff|/r0` boundaries of the classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassThresholds {
    pub narrow: f64,
    pub broad: f64,
}

impl Default for ClassThresholds {
    fn default() -> Self {
        ClassThresholds { narrow: 10.0, broad: 1.0 }
    }
}

pub fn classify(r0: f64, r_eff: f64, t: ClassThresholds) -> Result<Classification> {
    if !(r0 > 0.0) {
        return input(format!("r0 must be positive, got {r0}"));
    }
    let ratio = r_eff.abs() / r0;
    Ok(if ratio >= t.narrow {
        Classification::Narrow
    } else if ratio <= t.broad {
        Classification::Broad
    } else {
        Classification::Marginal
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// Any malformed row aborts the load.
    Strict,
    /// Malformed rows are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Catalog {
    pub entries: Vec<ResonanceEntry>,
    /// `(line, message)` for rows skipped in lenient mode.
    pub skipped: Vec<(usize, String)>,
}

fn is_ditto(cell: &str) -> bool {
    matches!(cell.trim(), "" | "''" | "\"" | "\u{2033}")
}

/// Parses the catalog CSV. Blank or `''` cells in `r0_au` repeat the value of
/// the previous row.
pub fn load_catalog(text: &str, mode: LoadMode) -> Result<Catalog> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column {name:?}") })?;
    }
    let mut cat = Catalog::default();
    let mut last_r0: Option<f64> = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let parsed = parse_row(&rec, &idx, last_r0);
        match parsed {
            Ok(entry) => {
                last_r0 = Some(entry.r0);
                cat.entries.push(entry);
            }
            Err(msg) => match mode {
                LoadMode::Strict => return Err(Error::Parse { line, msg }),
                LoadMode::Lenient => cat.skipped.push((line, msg)),
            },
        }
    }
    Ok(cat)
}

fn parse_row(rec: &csv::StringRecord, idx: &[usize; 7], last_r0: Option<f64>) -> std::result::Result<ResonanceEntry, String> {
    let cell = |i: usize| rec.get(idx[i]).ok_or_else(|| format!("missing cell {:?}", HEADER[i]));
    let num = |i: usize| -> std::result::Result<f64, String> {
        let s = cell(i)?;
        let v: f64 = s.parse().map_err(|_| format!("column {:?}: cannot parse {s:?} as a number", HEADER[i]))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("column {:?}: value must be finite", HEADER[i]))
        }
    };
    let species = cell(0)?.to_string();
    if species.is_empty() {
        return Err("empty species label".into());
    }
    let r0 = if is_ditto(cell(6)?) {
        last_r0.ok_or_else(|| "ditto r0 on the first data row".to_string())?
    } else {
        num(6)?
    };
    Ok(ResonanceEntry {
        species,
        position_g: num(1)?,
        a_bg: num(2)?,
        delta_mu_mub: num(3)?,
        delta_b_g: num(4)?,
        mass_amu: num(5)?,
        r0,
    })
}

/// Bundled catalog, parsed strictly.
pub fn bundled_catalog() -> Vec<ResonanceEntry> {
    load_catalog(CATALOG_CSV, LoadMode::Strict).expect("bundled catalog parses").entries
}

/// One catalog row with its derived columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    #[serde(flatten)]
    pub entry: ResonanceEntry,
    pub r_eff_au: Option<f64>,
    pub class: Option<Classification>,
    pub error: Option<String>,
}

pub fn table_rows(entries: &[ResonanceEntry], c: &PhysicalConstants, t: ClassThresholds) -> Vec<TableRow> {
    entries
        .iter()
        .map(|e| match reff_from_resonance(e, c).and_then(|r| Ok((r, classify(e.r0, r, t)?))) {
            Ok((r, cl)) => TableRow { entry: e.clone(), r_eff_au: Some(r), class: Some(cl), error: None },
            Err(err) => TableRow { entry: e.clone(), r_eff_au: None, class: None, error: Some(err.to_string()) },
        })
        .collect()
}

/// CSV with the input columns (shortest round-trip form) plus `r_eff_au` and
/// `class`. Rows whose effective range cannot be computed get empty cells.
pub fn emit_table(entries: &[ResonanceEntry], c: &PhysicalConstants, t: ClassThresholds) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Numerical(e.to_string());
    let mut header: Vec<&str> = HEADER.to_vec();
    header.extend(["r_eff_au", "class"]);
    w.write_record(&header).map_err(io)?;
    for row in table_rows(entries, c, t) {
        let e = &row.entry;
        w.write_record([
            e.species.clone(),
            e.position_g.to_string(),
            e.a_bg.to_string(),
            e.delta_mu_mub.to_string(),
            e.delta_b_g.to_string(),
            e.mass_amu.to_string(),
            e.r0.to_string(),
            row.r_eff_au.map(|v| v.to_string()).unwrap_or_default(),
            row.class.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}
