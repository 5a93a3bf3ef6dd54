//! Danger-class bands and the fire-trigger predicate.
//!
//! Bands are half-open intervals `[lo, hi)` that partition `[0, ∞)`. They are
//! loaded from a small key-value text format:
//!
//! ```text
//! # quantity = upper:label, upper:label, ..., inf:label
//! ignition_potential = 70:difficult, 80:possible, 90:moderately easy, inf:extremely easy
//! trigger = dmc_class:difficult and extensive, dc_class:difficult and extensive
//! startup_ffmc = 85
//! ```
//!
//! Keys left out of a file keep their default value.

use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use super::{FwiCodes, StartupCodes};
use crate::Scalar;

pub const DEFAULT_BANDS_CONFIG: &str = "\
# Upper bounds are exclusive; the last band of each quantity must be `inf`.
ignition_potential = 70:difficult, 80:possible, 90:moderately easy, inf:extremely easy
spread_rate = 4:slow, 8:moderate, inf:fast
dmc_class = 20:easy, 40:moderate, inf:difficult and extensive
dc_class = 150:easy, 300:moderate, inf:difficult and extensive
bui_class = 40:low, 80:moderate, 120:high, inf:extreme
fwi_class = 5:low, 10:moderate, 20:high, 30:very high, inf:extreme
# Every listed condition must hold for the trigger to fire.
trigger = dmc_class:difficult and extensive, dc_class:difficult and extensive
startup_ffmc = 85
startup_dmc = 6
startup_dc = 15
";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BandError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("{quantity}: bounds must be strictly increasing and positive")]
    NotIncreasing { quantity: &'static str },
    #[error("{quantity}: last band must be unbounded (inf)")]
    LastBounded { quantity: &'static str },
    #[error("{quantity}: empty label")]
    EmptyLabel { quantity: &'static str },
    #[error("{quantity}: no bands")]
    NoBands { quantity: &'static str },
    #[error("trigger: `{label}` is not a {quantity} label")]
    UnknownLabel {
        quantity: &'static str,
        label: String,
    },
}

/// The six classified quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    Ffmc,
    Dmc,
    Dc,
    Isi,
    Bui,
    Fwi,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Ffmc,
        Quantity::Dmc,
        Quantity::Dc,
        Quantity::Isi,
        Quantity::Bui,
        Quantity::Fwi,
    ];

    /// Configuration key of the band set classifying this quantity.
    pub fn band_key(self) -> &'static str {
        match self {
            Quantity::Ffmc => "ignition_potential",
            Quantity::Dmc => "dmc_class",
            Quantity::Dc => "dc_class",
            Quantity::Isi => "spread_rate",
            Quantity::Bui => "bui_class",
            Quantity::Fwi => "fwi_class",
        }
    }

    pub fn from_band_key(key: &str) -> Option<Quantity> {
        Quantity::ALL.into_iter().find(|q| q.band_key() == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band<T> {
    /// Exclusive upper bound; `+∞` for the last band.
    pub upper: T,
    pub label: String,
}

/// Ordered bands for one quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityBands<T> {
    bands: Vec<Band<T>>,
}

impl<T: Scalar> QuantityBands<T> {
    pub fn new(quantity: Quantity, bands: Vec<Band<T>>) -> Result<Self, BandError> {
        let name = quantity.band_key();
        let last = bands.last().ok_or(BandError::NoBands { quantity: name })?;
        if last.upper != T::infinity() {
            return Err(BandError::LastBounded { quantity: name });
        }
        let mut prev = T::zero();
        for b in &bands {
            if b.label.trim().is_empty() {
                return Err(BandError::EmptyLabel { quantity: name });
            }
            if b.upper.is_nan() || b.upper <= prev {
                return Err(BandError::NotIncreasing { quantity: name });
            }
            prev = b.upper;
        }
        Ok(QuantityBands { bands })
    }

    pub fn bands(&self) -> &[Band<T>] {
        &self.bands
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.bands.iter().map(|b| b.label.as_str())
    }

    pub fn contains_label(&self, label: &str) -> bool {
        self.labels().any(|l| l == label)
    }

    /// Index of the band containing `value`. Values below zero fall in the
    /// first band.
    pub fn index_of(&self, value: T) -> usize {
        self.bands
            .iter()
            .position(|b| value < b.upper)
            .unwrap_or(self.bands.len() - 1)
    }

    pub fn label_of(&self, value: T) -> &str {
        &self.bands[self.index_of(value)].label
    }
}

/// Conjunction of `quantity = label` conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerPredicate {
    pub conditions: Vec<(Quantity, String)>,
}

impl TriggerPredicate {
    pub fn holds(&self, c: &DangerClassification) -> bool {
        self.conditions
            .iter()
            .all(|(q, label)| c.label(*q) == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassBands<T> {
    pub ignition_potential: QuantityBands<T>,
    pub spread_rate: QuantityBands<T>,
    pub dmc_class: QuantityBands<T>,
    pub dc_class: QuantityBands<T>,
    pub bui_class: QuantityBands<T>,
    pub fwi_class: QuantityBands<T>,
    pub trigger: TriggerPredicate,
    pub startup: StartupCodes<T>,
}

impl<T: Scalar> Default for ClassBands<T> {
    fn default() -> Self {
        parse_config(DEFAULT_BANDS_CONFIG, None).expect("embedded default bands are valid")
    }
}

impl<T: Scalar> ClassBands<T> {
    /// Parses a configuration; keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self, BandError> {
        parse_config(text, Some(ClassBands::default()))
    }

    pub fn get(&self, q: Quantity) -> &QuantityBands<T> {
        match q {
            Quantity::Ffmc => &self.ignition_potential,
            Quantity::Dmc => &self.dmc_class,
            Quantity::Dc => &self.dc_class,
            Quantity::Isi => &self.spread_rate,
            Quantity::Bui => &self.bui_class,
            Quantity::Fwi => &self.fwi_class,
        }
    }

    fn get_mut(&mut self, q: Quantity) -> &mut QuantityBands<T> {
        match q {
            Quantity::Ffmc => &mut self.ignition_potential,
            Quantity::Dmc => &mut self.dmc_class,
            Quantity::Dc => &mut self.dc_class,
            Quantity::Isi => &mut self.spread_rate,
            Quantity::Bui => &mut self.bui_class,
            Quantity::Fwi => &mut self.fwi_class,
        }
    }

    /// Canonical text form; parses back to an equal value.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for q in Quantity::ALL {
            let bands: Vec<String> = self
                .get(q)
                .bands()
                .iter()
                .map(|b| format!("{}:{}", fmt_bound(b.upper), b.label))
                .collect();
            let _ = writeln!(out, "{} = {}", q.band_key(), bands.join(", "));
        }
        let conds: Vec<String> = self
            .trigger
            .conditions
            .iter()
            .map(|(q, l)| format!("{}:{}", q.band_key(), l))
            .collect();
        let _ = writeln!(out, "trigger = {}", conds.join(", "));
        let _ = writeln!(out, "startup_ffmc = {}", self.startup.ffmc);
        let _ = writeln!(out, "startup_dmc = {}", self.startup.dmc);
        let _ = writeln!(out, "startup_dc = {}", self.startup.dc);
        out
    }
}

impl<T: Scalar> fmt::Display for ClassBands<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config_string())
    }
}

fn fmt_bound<T: Scalar>(v: T) -> String {
    if v == T::infinity() {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

fn parse_config<T: Scalar>(
    text: &str,
    base: Option<ClassBands<T>>,
) -> Result<ClassBands<T>, BandError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut bands: Vec<Option<QuantityBands<T>>> = vec![None; Quantity::ALL.len()];
    let mut trigger_spec: Option<(usize, Vec<(Quantity, String)>)> = None;
    let mut startup = base.as_ref().map(|b| b.startup).unwrap_or_default();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| BandError::Syntax {
            line,
            reason: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(BandError::DuplicateKey {
                line,
                key: key.into(),
            });
        }
        if let Some(q) = Quantity::from_band_key(key) {
            let mut list = Vec::new();
            for item in value.split(',') {
                let (bound, label) = item.split_once(':').ok_or_else(|| BandError::Syntax {
                    line,
                    reason: format!("expected `upper:label`, found `{}`", item.trim()),
                })?;
                let upper = parse_bound::<T>(bound.trim()).ok_or_else(|| BandError::Syntax {
                    line,
                    reason: format!("bad bound `{}`", bound.trim()),
                })?;
                list.push(Band {
                    upper,
                    label: label.trim().to_string(),
                });
            }
            bands[q as usize] = Some(QuantityBands::new(q, list)?);
        } else if key == "trigger" {
            let mut conds = Vec::new();
            for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (qk, label) = item.split_once(':').ok_or_else(|| BandError::Syntax {
                    line,
                    reason: format!("expected `quantity:label`, found `{item}`"),
                })?;
                let q =
                    Quantity::from_band_key(qk.trim()).ok_or_else(|| BandError::UnknownKey {
                        line,
                        key: qk.trim().into(),
                    })?;
                conds.push((q, label.trim().to_string()));
            }
            trigger_spec = Some((line, conds));
        } else if let Some(code) = key.strip_prefix("startup_") {
            let v = value
                .parse::<T>()
                .ok()
                .filter(|v| v.is_finite() && *v >= T::zero());
            let v = v.ok_or_else(|| BandError::Syntax {
                line,
                reason: format!("bad number `{value}`"),
            })?;
            match code {
                "ffmc" if v <= T::lit(101.0) => startup.ffmc = v,
                "ffmc" => {
                    return Err(BandError::Syntax {
                        line,
                        reason: "startup_ffmc must be ≤ 101".into(),
                    })
                }
                "dmc" => startup.dmc = v,
                "dc" => startup.dc = v,
                _ => {
                    return Err(BandError::UnknownKey {
                        line,
                        key: key.into(),
                    })
                }
            }
        } else {
            return Err(BandError::UnknownKey {
                line,
                key: key.into(),
            });
        }
    }

    let mut out = match base {
        Some(b) => b,
        None => {
            // Building the defaults themselves: every band key must be present.
            let mut filled = Vec::new();
            for q in Quantity::ALL {
                filled.push(bands[q as usize].clone().ok_or(BandError::NoBands {
                    quantity: q.band_key(),
                })?);
            }
            let mut it = filled.into_iter();
            let mut next = || it.next().unwrap();
            let (ffmc, dmc, dc, isi, bui, fwi) = (next(), next(), next(), next(), next(), next());
            ClassBands {
                ignition_potential: ffmc,
                dmc_class: dmc,
                dc_class: dc,
                spread_rate: isi,
                bui_class: bui,
                fwi_class: fwi,
                trigger: TriggerPredicate {
                    conditions: Vec::new(),
                },
                startup,
            }
        }
    };
    for q in Quantity::ALL {
        if let Some(b) = bands[q as usize].take() {
            *out.get_mut(q) = b;
        }
    }
    out.startup = startup;
    if let Some((_, conds)) = trigger_spec {
        out.trigger = TriggerPredicate { conditions: conds };
    }
    for (q, label) in &out.trigger.conditions {
        if !out.get(*q).contains_label(label) {
            return Err(BandError::UnknownLabel {
                quantity: q.band_key(),
                label: label.clone(),
            });
        }
    }
    Ok(out)
}

fn parse_bound<T: Scalar>(s: &str) -> Option<T> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(T::infinity()),
        _ => s.parse::<T>().ok().filter(|v| v.is_finite()),
    }
}

/// Categorical danger labels for one set of codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DangerClassification {
    pub ignition_potential: String,
    pub dmc_class: String,
    pub dc_class: String,
    pub spread_rate: String,
    pub bui_class: String,
    pub fwi_class: String,
    pub fire_trigger: bool,
}

impl DangerClassification {
    pub fn label(&self, q: Quantity) -> &str {
        match q {
            Quantity::Ffmc => &self.ignition_potential,
            Quantity::Dmc => &self.dmc_class,
            Quantity::Dc => &self.dc_class,
            Quantity::Isi => &self.spread_rate,
            Quantity::Bui => &self.bui_class,
            Quantity::Fwi => &self.fwi_class,
        }
    }
}

pub fn classify<T: Scalar>(codes: &FwiCodes<T>, bands: &ClassBands<T>) -> DangerClassification {
    let label = |q: Quantity| bands.get(q).label_of(codes.get(q)).to_string();
    let mut c = DangerClassification {
        ignition_potential: label(Quantity::Ffmc),
        dmc_class: label(Quantity::Dmc),
        dc_class: label(Quantity::Dc),
        spread_rate: label(Quantity::Isi),
        bui_class: label(Quantity::Bui),
        fwi_class: label(Quantity::Fwi),
        fire_trigger: false,
    };
    c.fire_trigger = bands.trigger.holds(&c);
    c
}
