//! Magnetostatics of thin polyline wires plus uniform bias fields, and the total
//! trapping potential `U = mu_A |B| + m g z + U_CP`.
//!
//! Wires are filaments along their cross-section centroids. The wafer top is the
//! plane z = 0; a wire lying on it has its centroid at z = h/2.

mod trap;
mod wkb;

pub use trap::*;
pub use wkb::*;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::casimir::{CasimirModel, CylinderCp};
use crate::physcore::consts::{G_N, MU0};
use crate::physcore::{Material, Species};
use crate::wiremodel::CrossSection;
use crate::{Error, Result, Vector3};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct WireSpec {
    pub path: Vec<Vec3>,
    pub cross_section: CrossSection,
    pub material: Material,
    /// A; positive along the path direction.
    pub current: f64,
}

impl WireSpec {
    pub fn validate(&self) -> Result<()> {
        if self.path.len() < 2 {
            return Err(Error::domain("a wire path needs at least two points"));
        }
        if self.path.windows(2).any(|w| (w[1] - w[0]).norm() == 0.0) {
            return Err(Error::domain("consecutive wire path points coincide"));
        }
        if !self.current.is_finite() {
            return Err(Error::domain("wire current must be finite"));
        }
        self.cross_section.validate()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.path.windows(2).map(|w| (w[0], w[1]))
    }

    /// Height of the top surface above the wafer, for a wire lying on the wafer.
    pub fn top(&self) -> f64 {
        self.path[0].z + 0.5 * self.cross_section.height
    }
}

/// Z-shaped wire: a central bar along x through the origin with leads along +y at
/// each end (both leads carry the current in the +y direction).
#[derive(Debug, Clone, PartialEq)]
pub struct ZWire {
    pub central_length: f64,
    pub lead_length: f64,
    pub cross_section: CrossSection,
    pub material: Material,
    pub current: f64,
}

impl ZWire {
    pub fn spec(&self) -> WireSpec {
        let zc = 0.5 * self.cross_section.height;
        let hl = 0.5 * self.central_length;
        WireSpec {
            path: vec![
                Vec3::new(-hl, -self.lead_length, zc),
                Vec3::new(-hl, 0.0, zc),
                Vec3::new(hl, 0.0, zc),
                Vec3::new(hl, self.lead_length, zc),
            ],
            cross_section: self.cross_section,
            material: self.material.clone(),
            current: self.current,
        }
    }

    /// Casimir-Polder cylinder for the central nanowire (radius h/2, axis at height h/2).
    pub fn cylinder(&self, alpha0: f64) -> CylinderCp {
        let a = 0.5 * self.cross_section.height;
        let hl = 0.5 * self.central_length;
        CylinderCp {
            start: Vec3::new(-hl, 0.0, a),
            end: Vec3::new(hl, 0.0, a),
            radius: a,
            alpha0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfiguration {
    pub wires: Vec<WireSpec>,
    /// Uniform bias (including any Ioffe component), T.
    pub bias: Vec3,
}

/// Field of a straight filament from `a` to `b` carrying `current`.
pub fn segment_field(a: &Vec3, b: &Vec3, current: f64, r: &Vec3) -> Result<Vec3> {
    let r1 = r - a;
    let r2 = r - b;
    let (n1, n2) = (r1.norm(), r2.norm());
    let d = b - a;
    let s = (r1.dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    if (r1 - d * s).norm() <= 1e-12 {
        return Err(Error::Singular([r.x, r.y, r.z]));
    }
    // r1 x r2 = d x r1 avoids the difference of nearly parallel vectors, and
    // n1 n2 + r1.r2 = |r1 x r2|^2 / (n1 n2 - r1.r2) avoids cancellation next to the segment
    let cross = d.cross(&r1);
    let (p, dot) = (n1 * n2, r1.dot(&r2));
    let c2 = cross.norm_squared();
    if c2 == 0.0 {
        return Ok(Vec3::zeros());
    }
    let inv = if dot < 0.0 { (p - dot) / c2 } else { 1.0 / (p + dot) };
    Ok(cross * (MU0 * current / (4.0 * PI) * (n1 + n2) * inv / p))
}

/// Total field: bias plus every wire segment.
pub fn field_at(cfg: &FieldConfiguration, r: &Vec3) -> Result<Vec3> {
    let mut b = cfg.bias;
    for w in &cfg.wires {
        for (p, q) in w.segments() {
            b += segment_field(&p, &q, w.current, r)?;
        }
    }
    Ok(b)
}

/// Additional field from a perturbation of the conductor (e.g. edge roughness).
pub trait FieldPerturbation: Send + Sync {
    fn delta_b(&self, r: &Vec3) -> Vec3;
}

/// Anything that gives a potential energy at a point.
pub trait Potential {
    fn energy(&self, r: &Vec3) -> Result<f64>;
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    a: Vec3,
    b: Vec3,
    current: f64,
    u: Vec3,
    v: Vec3,
    len: f64,
    half_w: f64,
    half_h: f64,
}

/// Total potential for an atom: Zeeman energy, gravity and Casimir-Polder.
#[derive(Clone)]
pub struct TrapPotential {
    pub cfg: FieldConfiguration,
    pub species: Species,
    pub cp: CasimirModel,
    pub gravity: bool,
    pub perturbation: Option<Arc<dyn FieldPerturbation>>,
    segs: Vec<Seg>,
}

impl TrapPotential {
    pub fn new(cfg: FieldConfiguration, species: Species, cp: CasimirModel, gravity: bool) -> Result<Self> {
        species.validate()?;
        let mut segs = Vec::new();
        for w in &cfg.wires {
            w.validate()?;
            for (a, b) in w.segments() {
                let d = b - a;
                let len = d.norm();
                let u = d / len;
                let side = Vec3::z().cross(&u);
                let v = if side.norm() > 1e-12 { side.normalize() } else { Vec3::x() };
                segs.push(Seg {
                    a,
                    b,
                    current: w.current,
                    u,
                    v,
                    len,
                    half_w: 0.5 * w.cross_section.width,
                    half_h: 0.5 * w.cross_section.height,
                });
            }
        }
        Ok(TrapPotential { cfg, species, cp, gravity, perturbation: None, segs })
    }

    pub fn with_perturbation(mut self, p: Arc<dyn FieldPerturbation>) -> Self {
        self.perturbation = Some(p);
        self
    }

    pub fn field(&self, r: &Vec3) -> Result<Vec3> {
        let mut b = self.cfg.bias;
        for s in &self.segs {
            b += segment_field(&s.a, &s.b, s.current, r)?;
        }
        if let Some(p) = &self.perturbation {
            b += p.delta_b(r);
        }
        Ok(b)
    }

    /// Distance from `r` to the nearest conductor body (negative inside), ignoring the wafer.
    pub fn wire_clearance(&self, r: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        for s in &self.segs {
            let rel = r - s.a;
            let along = rel.dot(&s.u);
            let side = rel.dot(&s.v);
            let up = rel.dot(&s.u.cross(&s.v));
            let ex = (-along).max(along - s.len);
            let ey = side.abs() - s.half_w;
            let ez = up.abs() - s.half_h;
            let outside = Vec3::new(ex.max(0.0), ey.max(0.0), ez.max(0.0)).norm();
            let d = if outside > 0.0 { outside } else { ex.max(ey).max(ez) };
            best = best.min(d);
        }
        best
    }

    pub fn is_inside(&self, r: &Vec3) -> bool {
        r.z <= 0.0 || self.wire_clearance(r) <= 0.0
    }

    pub fn magnetic(&self, r: &Vec3) -> Result<f64> {
        Ok(self.species.moment() * self.field(r)?.norm())
    }

    /// Potential without the Casimir-Polder part.
    pub fn without_cp(&self) -> Self {
        TrapPotential { cp: CasimirModel::none(), ..self.clone() }
    }
}

impl Potential for TrapPotential {
    fn energy(&self, r: &Vec3) -> Result<f64> {
        if self.is_inside(r) {
            return Err(Error::InsideSurface([r.x, r.y, r.z]));
        }
        let mut u = self.magnetic(r)?;
        if self.gravity {
            u += self.species.mass * G_N * r.z;
        }
        u += self.cp.potential(r)?;
        Ok(u)
    }
}

impl<F: Fn(&Vec3) -> Result<f64>> Potential for F {
    fn energy(&self, r: &Vec3) -> Result<f64> {
        self(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_segment_matches_infinite_wire() {
        let a = Vec3::new(-0.5, 0.0, 0.0);
        let b = Vec3::new(0.5, 0.0, 0.0);
        let r = Vec3::new(0.0, 0.0, 0.6e-6);
        let f = segment_field(&a, &b, 40e-6, &r).unwrap();
        let want = MU0 * 40e-6 / (2.0 * PI * 0.6e-6);
        assert!((f.norm() / want - 1.0).abs() < 1e-9, "{}", f.norm() / want - 1.0);
        // current along +x, point above: field along -y
        assert!(f.y < 0.0 && f.x.abs() < 1e-20 && f.z.abs() < 1e-20);
    }

    #[test]
    fn on_axis_is_singular() {
        let a = Vec3::zeros();
        let b = Vec3::new(1.0, 0.0, 0.0);
        assert!(matches!(segment_field(&a, &b, 1.0, &Vec3::new(0.3, 0.0, 0.0)), Err(Error::Singular(_))));
        // on the extension of the axis the field vanishes
        assert_eq!(segment_field(&a, &b, 1.0, &Vec3::new(2.0, 0.0, 0.0)).unwrap().norm(), 0.0);
    }
}
