//! Constants, atomic species, conductor materials, dielectric stacks and unit handling.
//!
//! Everything inside the library is SI. Unit suffixes only appear at the text
//! boundary: [`parse_quantity`] turns `"50 nm"` into `5e-8`, [`format_quantity`]
//! goes the other way.

use crate::{Error, Result};

/// CODATA 2018 values, SI units.
pub mod consts {
    pub const MU0: f64 = 1.256_637_062_12e-6;
    pub const EPS0: f64 = 8.854_187_812_8e-12;
    pub const C: f64 = 299_792_458.0;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const KB: f64 = 1.380_649e-23;
    pub const MU_B: f64 = 9.274_010_078_3e-24;
    pub const AMU: f64 = 1.660_539_066_60e-27;
    /// Standard gravity.
    pub const G_N: f64 = 9.806_65;
}

use consts::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    /// kg
    pub mass: f64,
    pub f: u32,
    pub m_f: i32,
    pub g_f: f64,
    /// Static polarizability as a volume, m^3 (SI polarizability / 4 pi eps0).
    pub alpha0: f64,
    /// s-wave scattering length, m.
    pub scattering_length: f64,
}

impl Species {
    /// 87Rb in |F=2, mF=2>.
    pub fn rb87() -> Self {
        Species {
            name: "Rb87 |2,2>".into(),
            mass: 86.909_180_527 * AMU,
            f: 2,
            m_f: 2,
            g_f: 0.5,
            alpha0: 47.3e-30,
            scattering_length: 5.4e-9,
        }
    }

    /// Magnetic moment mu_A with U = mu_A |B|; positive for low-field seekers.
    pub fn moment(&self) -> f64 {
        self.g_f * self.m_f as f64 * MU_B
    }

    /// Contact interaction strength 4 pi hbar^2 a / m.
    pub fn g_int(&self) -> f64 {
        4.0 * std::f64::consts::PI * HBAR * HBAR * self.scattering_length / self.mass
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::domain(format!("species mass must be positive, got {}", self.mass)));
        }
        if self.m_f.unsigned_abs() > self.f {
            return Err(Error::domain(format!("|mF|={} exceeds F={}", self.m_f, self.f)));
        }
        if !(self.alpha0 >= 0.0) || !(self.scattering_length >= 0.0) {
            return Err(Error::domain("polarizability and scattering length must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// Bulk resistivity at `t0`, Ohm m.
    pub rho0: f64,
    /// Temperature coefficient of resistivity, 1/K.
    pub alpha_t: f64,
    /// Electron mean free path, m.
    pub mfp: f64,
    /// Fraction of specular boundary reflections, 0..=1.
    pub specularity: f64,
    /// Substrate thermal boundary conductance per unit area, W/(m^2 K).
    pub kappa: f64,
    /// Reference (substrate) temperature, K.
    pub t0: f64,
}

impl Material {
    pub fn gold() -> Self {
        Material {
            name: "gold".into(),
            rho0: 2.2e-8,
            alpha_t: 0.0037,
            mfp: 40e-9,
            specularity: 0.5,
            kappa: 4e6,
            t0: 293.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.specularity) {
            return Err(Error::domain(format!(
                "specularity must lie in [0, 1], got {}",
                self.specularity
            )));
        }
        for (what, v) in [("rho0", self.rho0), ("mfp", self.mfp), ("kappa", self.kappa)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("material {what} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub thickness: f64,
    pub epsilon: f64,
}

/// Planar dielectric stack below z = 0: `layers` from the top down, then a half-space.
#[derive(Debug, Clone, PartialEq)]
pub struct WaferStack {
    pub layers: Vec<Layer>,
    pub substrate_epsilon: f64,
}

impl WaferStack {
    /// 100 nm of oxide (eps = 4) on silicon (eps = 12).
    pub fn oxide_on_silicon() -> Self {
        WaferStack {
            layers: vec![Layer { thickness: 100e-9, epsilon: 4.0 }],
            substrate_epsilon: 12.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() > 1 {
            return Err(Error::domain("only a single layer on a substrate is supported"));
        }
        for l in &self.layers {
            if !(l.thickness >= 0.0) || !(l.epsilon >= 1.0) {
                return Err(Error::domain(format!("bad layer {l:?}")));
            }
        }
        if !(self.substrate_epsilon >= 1.0) {
            return Err(Error::domain("substrate permittivity must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Current,
    Field,
    Temperature,
    Time,
    Frequency,
}

const UNITS: &[(&str, f64, Dimension)] = &[
    ("nm", 1e-9, Dimension::Length),
    ("um", 1e-6, Dimension::Length),
    ("mm", 1e-3, Dimension::Length),
    ("m", 1.0, Dimension::Length),
    ("nA", 1e-9, Dimension::Current),
    ("uA", 1e-6, Dimension::Current),
    ("mA", 1e-3, Dimension::Current),
    ("A", 1.0, Dimension::Current),
    ("mG", 1e-7, Dimension::Field),
    ("G", 1e-4, Dimension::Field),
    ("uT", 1e-6, Dimension::Field),
    ("mT", 1e-3, Dimension::Field),
    ("T", 1.0, Dimension::Field),
    ("nK", 1e-9, Dimension::Temperature),
    ("uK", 1e-6, Dimension::Temperature),
    ("mK", 1e-3, Dimension::Temperature),
    ("K", 1.0, Dimension::Temperature),
    ("us", 1e-6, Dimension::Time),
    ("ms", 1e-3, Dimension::Time),
    ("s", 1.0, Dimension::Time),
    ("Hz", 1.0, Dimension::Frequency),
    ("kHz", 1e3, Dimension::Frequency),
    ("MHz", 1e6, Dimension::Frequency),
];

fn unit(suffix: &str) -> Option<(f64, Dimension)> {
    UNITS.iter().find(|u| u.0 == suffix).map(|u| (u.1, u.2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    /// SI value.
    pub value: f64,
    pub dim: Dimension,
}

/// Parse `"<number> <suffix>"` (the space is optional). `µ`/`μ` are accepted for `u`.
pub fn parse_quantity(text: &str) -> Result<Quantity> {
    let err = |reason: &str| Error::Unit { token: text.to_string(), reason: reason.to_string() };
    let s = text.trim().replace(['µ', 'μ'], "u");
    let split = s
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_alphabetic())
        .last()
        .map(|(i, _)| i)
        .ok_or_else(|| err("missing unit suffix"))?;
    let (num, suffix) = s.split_at(split);
    // "1e-3m" would otherwise swallow the exponent marker into the suffix.
    let (num, suffix) = if num.ends_with(['e', 'E']) || num.is_empty() {
        return Err(err("malformed number"));
    } else {
        (num.trim(), suffix)
    };
    let (scale, dim) = unit(suffix).ok_or_else(|| err("unknown unit suffix"))?;
    let v: f64 = num.parse().map_err(|_| err("malformed number"))?;
    if !v.is_finite() {
        return Err(err("value is not finite"));
    }
    Ok(Quantity { value: v * scale, dim })
}

/// Parse and check the dimension.
pub fn parse_as(text: &str, dim: Dimension) -> Result<f64> {
    let q = parse_quantity(text)?;
    if q.dim != dim {
        return Err(Error::Unit {
            token: text.to_string(),
            reason: format!("expected a {dim:?}, found a {:?}", q.dim),
        });
    }
    Ok(q.value)
}

/// Render an SI value in the given unit, round-tripping through [`parse_quantity`].
pub fn format_quantity(value: f64, suffix: &str) -> Result<String> {
    let (scale, _) = unit(suffix).ok_or_else(|| Error::Unit {
        token: suffix.to_string(),
        reason: "unknown unit suffix".into(),
    })?;
    Ok(format!("{:e} {suffix}", value / scale))
}

/// Thermal-energy equivalent of a temperature.
pub fn kelvin_to_joule(t: f64) -> f64 {
    KB * t
}

pub fn joule_to_kelvin(e: f64) -> f64 {
    e / KB
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suffixes() {
        assert!((parse_quantity("50 nm").unwrap().value - 50e-9).abs() < 1e-22);
        assert!((parse_as("40uA", Dimension::Current).unwrap() - 40e-6).abs() < 1e-19);
        assert!((parse_as("132 mG", Dimension::Field).unwrap() - 1.32e-5).abs() < 1e-20);
        assert_eq!(parse_as("1e-3 m", Dimension::Length).unwrap(), 1e-3);
        assert_eq!(parse_as("2 ms", Dimension::Time).unwrap(), 2e-3);
        assert!((parse_as("1.5 µm", Dimension::Length).unwrap() - 1.5e-6).abs() < 1e-21);
    }

    #[test]
    fn rejects_bad_tokens() {
        for bad in ["50", "50 parsec", "nm", "abc nm", "50 nm nm", "1e m"] {
            match parse_quantity(bad) {
                Err(Error::Unit { token, .. }) => assert_eq!(token, bad),
                other => panic!("{bad}: {other:?}"),
            }
        }
        assert!(parse_as("3 T", Dimension::Length).is_err());
    }

    #[test]
    fn rb87_moment_is_one_bohr_magneton() {
        let rb = Species::rb87();
        assert!((rb.moment() - MU_B).abs() < 1e-35);
        assert!((rb.mass - 1.443_160_6e-25).abs() < 1e-31);
    }
}
