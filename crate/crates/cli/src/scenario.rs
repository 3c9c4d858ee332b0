//! Scenario files: TOML with unit-suffixed quantities, validated into core types.

use std::collections::BTreeMap;
use std::fmt;

use nanotrap::casimir::{CasimirModel, CpChannels, PlanarCp};
use nanotrap::fieldsolver::{FieldConfiguration, TrapPotential, Vec3, ZWire};
use nanotrap::physcore::consts::AMU;
use nanotrap::physcore::{parse_as, Dimension, Layer, Material, Species, WaferStack};
use nanotrap::wiremodel::CrossSection;
use serde::Deserialize;

/// The bundled single-nanowire Z-trap scenario.
pub const Z50: &str = include_str!("../scenarios/z50.cfg");

/// Invalid configuration; the message names the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// How bare numbers (no unit suffix) are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum UnitCheck {
    /// Every dimensional value needs a suffix.
    Strict,
    /// Bare numbers are read as SI.
    Lenient,
}

/// A dimensional value as written: `"50 nm"`, or a bare SI number in lenient mode.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Q {
    Text(String),
    Bare(f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    seed: Option<u64>,
    output_dir: Option<String>,
    species: RawSpecies,
    materials: BTreeMap<String, RawMaterial>,
    #[serde(default)]
    wafer: Option<RawWafer>,
    wires: Vec<RawWire>,
    #[serde(default)]
    bias: RawBias,
    #[serde(default)]
    roughness: Option<RawRoughness>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    gp: RawGp,
    #[serde(default)]
    toggles: RawToggles,
    #[serde(default)]
    noise: RawNoise,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    preset: String,
    mass_amu: Option<f64>,
    f: Option<u32>,
    m_f: Option<i32>,
    g_f: Option<f64>,
    polarizability_m3: Option<f64>,
    scattering_length: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    preset: Option<String>,
    resistivity_ohm_m: Option<f64>,
    temperature_coefficient_per_k: Option<f64>,
    mean_free_path: Option<Q>,
    specularity: Option<f64>,
    boundary_conductance_w_m2k: Option<f64>,
    reference_temperature: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    thickness: Q,
    epsilon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWafer {
    #[serde(default)]
    layers: Vec<RawLayer>,
    substrate_epsilon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWire {
    kind: String,
    material: String,
    central_length: Q,
    lead_length: Q,
    width: Q,
    height: Q,
    current: Q,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBias {
    x: Option<Q>,
    y: Option<Q>,
    z: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoughness {
    band_rms: Q,
    band: [Q; 2],
    #[serde(default)]
    alpha: f64,
    lambda_min: Q,
    length: Option<Q>,
    realizations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    axial_points: Option<usize>,
    transverse_points: Option<usize>,
    axial_half_length: Option<Q>,
    transverse_half_max: Option<Q>,
    transverse_oscillator_lengths: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGp {
    atoms: Option<f64>,
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToggles {
    gravity: Option<bool>,
    casimir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    temperature: Option<Q>,
    max_temperature_rise: Option<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roughness {
    pub band_rms: f64,
    pub band: (f64, f64),
    pub alpha: f64,
    pub lambda_min: f64,
    /// Period of the realisation, m; defaults to the central wire length.
    pub length: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axial_points: usize,
    pub transverse_points: usize,
    pub axial_half_length: f64,
    pub transverse_half_max: f64,
    pub transverse_oscillator_lengths: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
    pub species: Species,
    pub materials: BTreeMap<String, Material>,
    pub wafer: Option<WaferStack>,
    /// Z wires; the first one forms the trap.
    pub wires: Vec<ZWire>,
    pub bias: Vec3,
    pub roughness: Option<Roughness>,
    pub grid: Grid,
    pub atoms: f64,
    pub gp_tolerance: f64,
    pub gravity: bool,
    pub casimir: CpChannels,
    pub noise_temperature: f64,
    pub max_temperature_rise: f64,
}

struct Ctx {
    units: UnitCheck,
}

impl Ctx {
    fn q(&self, q: &Q, dim: Dimension, key: &str) -> Result<f64, ConfigError> {
        match q {
            Q::Text(s) => parse_as(s, dim).map_err(|e| ConfigError(format!("{key}: {e}"))),
            Q::Bare(v) => match self.units {
                UnitCheck::Lenient => Ok(*v),
                UnitCheck::Strict => Err(ConfigError(format!(
                    "{key}: bare number {v} needs a unit suffix (a {dim:?}); pass --units lenient to read it as SI"
                ))),
            },
        }
    }

    fn opt(&self, q: &Option<Q>, dim: Dimension, key: &str, default: f64) -> Result<f64, ConfigError> {
        q.as_ref().map_or(Ok(default), |q| self.q(q, dim, key))
    }
}

fn positive(v: f64, key: &str) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError(format!("{key}: must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn parse(text: &str, units: UnitCheck) -> Result<Self, ConfigError> {
        let raw: Raw = toml::from_str(text).map_err(|e| ConfigError(format!("scenario: {e}")))?;
        let ctx = Ctx { units };

        let mut species = match raw.species.preset.to_ascii_lowercase().as_str() {
            "rb87" => Species::rb87(),
            other => return Err(ConfigError(format!("species.preset: unknown species '{other}' (known: rb87)"))),
        };
        let s = &raw.species;
        if let Some(m) = s.mass_amu {
            species.mass = positive(m, "species.mass_amu")? * AMU;
        }
        species.f = s.f.unwrap_or(species.f);
        species.m_f = s.m_f.unwrap_or(species.m_f);
        species.g_f = s.g_f.unwrap_or(species.g_f);
        species.alpha0 = s.polarizability_m3.unwrap_or(species.alpha0);
        species.scattering_length =
            ctx.opt(&s.scattering_length, Dimension::Length, "species.scattering_length", species.scattering_length)?;
        species.validate().map_err(|e| ConfigError(format!("species: {e}")))?;

        let mut materials = BTreeMap::new();
        for (name, m) in &raw.materials {
            let key = |k: &str| format!("materials.{name}.{k}");
            let mut mat = match m.preset.as_deref() {
                Some("gold") => Material::gold(),
                Some(other) => return Err(ConfigError(format!("{}: unknown material preset '{other}' (known: gold)", key("preset")))),
                None => Material {
                    name: name.clone(),
                    rho0: f64::NAN,
                    alpha_t: 0.0,
                    mfp: f64::NAN,
                    specularity: 0.5,
                    kappa: f64::NAN,
                    t0: 293.0,
                },
            };
            mat.name = name.clone();
            mat.rho0 = m.resistivity_ohm_m.unwrap_or(mat.rho0);
            mat.alpha_t = m.temperature_coefficient_per_k.unwrap_or(mat.alpha_t);
            mat.mfp = ctx.opt(&m.mean_free_path, Dimension::Length, &key("mean_free_path"), mat.mfp)?;
            mat.specularity = m.specularity.unwrap_or(mat.specularity);
            mat.kappa = m.boundary_conductance_w_m2k.unwrap_or(mat.kappa);
            mat.t0 = ctx.opt(&m.reference_temperature, Dimension::Temperature, &key("reference_temperature"), mat.t0)?;
            mat.validate().map_err(|e| ConfigError(format!("materials.{name}: {e}")))?;
            materials.insert(name.clone(), mat);
        }

        let wafer = match &raw.wafer {
            None => None,
            Some(w) => {
                let layers = w
                    .layers
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        Ok(Layer { thickness: ctx.q(&l.thickness, Dimension::Length, &format!("wafer.layers[{i}].thickness"))?, epsilon: l.epsilon })
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                let stack = WaferStack { layers, substrate_epsilon: w.substrate_epsilon };
                stack.validate().map_err(|e| ConfigError(format!("wafer: {e}")))?;
                Some(stack)
            }
        };

        if raw.wires.is_empty() {
            return Err(ConfigError("wires: at least one wire is required".into()));
        }
        let mut wires = Vec::new();
        for (i, w) in raw.wires.iter().enumerate() {
            let key = |k: &str| format!("wires[{i}].{k}");
            if w.kind != "z" {
                return Err(ConfigError(format!("{}: unsupported wire kind '{}' (known: z)", key("kind"), w.kind)));
            }
            let material = materials
                .get(&w.material)
                .ok_or_else(|| ConfigError(format!("{}: no material named '{}' is defined", key("material"), w.material)))?
                .clone();
            let width = positive(ctx.q(&w.width, Dimension::Length, &key("width"))?, &key("width"))?;
            let height = positive(ctx.q(&w.height, Dimension::Length, &key("height"))?, &key("height"))?;
            wires.push(ZWire {
                central_length: positive(ctx.q(&w.central_length, Dimension::Length, &key("central_length"))?, &key("central_length"))?,
                lead_length: positive(ctx.q(&w.lead_length, Dimension::Length, &key("lead_length"))?, &key("lead_length"))?,
                cross_section: CrossSection::new(width, height).map_err(|e| ConfigError(format!("{}: {e}", key("width"))))?,
                material,
                current: ctx.q(&w.current, Dimension::Current, &key("current"))?,
            });
        }

        let bias = Vec3::new(
            ctx.opt(&raw.bias.x, Dimension::Field, "bias.x", 0.0)?,
            ctx.opt(&raw.bias.y, Dimension::Field, "bias.y", 0.0)?,
            ctx.opt(&raw.bias.z, Dimension::Field, "bias.z", 0.0)?,
        );

        let roughness = match &raw.roughness {
            None => None,
            Some(r) => {
                let band = (
                    ctx.q(&r.band[0], Dimension::Length, "roughness.band[0]")?,
                    ctx.q(&r.band[1], Dimension::Length, "roughness.band[1]")?,
                );
                if !(band.0 > 0.0 && band.1 > band.0) {
                    return Err(ConfigError(format!("roughness.band: need 0 < lower < upper, got {band:?}")));
                }
                if !(0.0..=1.0).contains(&r.alpha) {
                    return Err(ConfigError(format!("roughness.alpha: must lie in [0, 1], got {}", r.alpha)));
                }
                Some(Roughness {
                    band_rms: positive(ctx.q(&r.band_rms, Dimension::Length, "roughness.band_rms")?, "roughness.band_rms")?,
                    band,
                    alpha: r.alpha,
                    lambda_min: positive(ctx.q(&r.lambda_min, Dimension::Length, "roughness.lambda_min")?, "roughness.lambda_min")?,
                    length: positive(ctx.opt(&r.length, Dimension::Length, "roughness.length", wires[0].central_length)?, "roughness.length")?,
                    realizations: r.realizations.unwrap_or(10),
                })
            }
        };

        let g = &raw.grid;
        let grid = Grid {
            axial_points: g.axial_points.unwrap_or(512),
            transverse_points: g.transverse_points.unwrap_or(32),
            axial_half_length: positive(ctx.opt(&g.axial_half_length, Dimension::Length, "grid.axial_half_length", 30e-6)?, "grid.axial_half_length")?,
            transverse_half_max: positive(
                ctx.opt(&g.transverse_half_max, Dimension::Length, "grid.transverse_half_max", 0.5e-6)?,
                "grid.transverse_half_max",
            )?,
            transverse_oscillator_lengths: positive(g.transverse_oscillator_lengths.unwrap_or(4.6), "grid.transverse_oscillator_lengths")?,
        };
        for (k, n) in [("grid.axial_points", grid.axial_points), ("grid.transverse_points", grid.transverse_points)] {
            if n < 4 {
                return Err(ConfigError(format!("{k}: need at least 4 points, got {n}")));
            }
        }

        let casimir = match raw.toggles.casimir.as_deref().unwrap_or("both") {
            "both" => CpChannels::Both,
            "wafer" => CpChannels::Wafer,
            "wire" => CpChannels::Wire,
            "none" => CpChannels::None,
            other => return Err(ConfigError(format!("toggles.casimir: expected both, wafer, wire or none, got '{other}'"))),
        };

        Ok(Scenario {
            seed: raw.seed,
            output_dir: raw.output_dir.clone(),
            species,
            materials,
            wafer,
            wires,
            bias,
            roughness,
            grid,
            atoms: positive(raw.gp.atoms.unwrap_or(1000.0), "gp.atoms")?,
            gp_tolerance: positive(raw.gp.tolerance.unwrap_or(1e-4), "gp.tolerance")?,
            gravity: raw.toggles.gravity.unwrap_or(true),
            casimir,
            noise_temperature: positive(ctx.opt(&raw.noise.temperature, Dimension::Temperature, "noise.temperature", 300.0)?, "noise.temperature")?,
            max_temperature_rise: positive(
                ctx.opt(&raw.noise.max_temperature_rise, Dimension::Temperature, "noise.max_temperature_rise", 135.0)?,
                "noise.max_temperature_rise",
            )?,
        })
    }

    /// The trapping wire.
    pub fn trap_wire(&self) -> &ZWire {
        &self.wires[0]
    }

    pub fn field_configuration(&self) -> FieldConfiguration {
        FieldConfiguration { wires: self.wires.iter().map(ZWire::spec).collect(), bias: self.bias }
    }

    pub fn casimir_model(&self) -> nanotrap::Result<CasimirModel> {
        let planar = self.wafer.as_ref().map(|w| PlanarCp::new(w, self.species.alpha0)).transpose()?;
        let cylinders = self.wires.iter().map(|w| w.cylinder(self.species.alpha0)).collect();
        Ok(CasimirModel { planar, cylinders }.with_channels(self.casimir))
    }

    pub fn potential(&self) -> nanotrap::Result<TrapPotential> {
        TrapPotential::new(self.field_configuration(), self.species.clone(), self.casimir_model()?, self.gravity)
    }
}
