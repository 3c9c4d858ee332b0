//! Loss and coherence budget: Johnson-noise spin flips, Majorana flips, tunnelling
//! through the Casimir-Polder-lowered barrier, and spatial decoherence.
//!
//! Noise is quasi-static and white: the magnetic correlation tensor is built from
//! the conductor's geometric factor `X_jk`, a volume integral of dipole-like
//! kernels, evaluated here by recursive box subdivision with tensor Gauss-Legendre
//! rules on cells that are small compared with their distance to the field points.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3};

use crate::fieldsolver::{Potential, Vec3, WireSpec};
use crate::gpsolver::GroundState;
use crate::physcore::consts::{C, EPS0, HBAR, KB, MU0, MU_B};
use crate::physcore::Species;
use crate::quad::{gauss_legendre, integrate, Tol};
use crate::wiremodel::resistivity_ratio;
use crate::{Error, Result};

/// A rectangular conductor body with uniform resistivity.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBody {
    pub center: Vec3,
    /// Orthonormal frame: columns are length, width and height directions.
    pub frame: Matrix3<f64>,
    pub half_extent: Vec3,
    /// Ohm m
    pub resistivity: f64,
}

impl NoiseBody {
    /// Box around the segment `a`..`b` with the given width and height; the width
    /// direction is horizontal.
    pub fn segment(a: Vec3, b: Vec3, width: f64, height: f64, resistivity: f64) -> Result<Self> {
        let d = b - a;
        let len = d.norm();
        if !(len > 0.0 && width > 0.0 && height > 0.0 && resistivity > 0.0) {
            return Err(Error::domain("noise body needs positive size and resistivity"));
        }
        let u = d / len;
        let side = Vec3::z().cross(&u);
        let v = if side.norm() > 1e-12 { side.normalize() } else { Vec3::y() };
        let w = u.cross(&v);
        Ok(NoiseBody {
            center: 0.5 * (a + b),
            frame: Matrix3::from_columns(&[u, v, w]),
            half_extent: Vec3::new(0.5 * len, 0.5 * width, 0.5 * height),
            resistivity,
        })
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extent.x * self.half_extent.y * self.half_extent.z
    }

    fn to_local(&self, r: &Vec3) -> Vec3 {
        self.frame.transpose() * (r - self.center)
    }

    /// Distance from a point to the body (0 inside).
    pub fn distance(&self, r: &Vec3) -> f64 {
        let p = self.to_local(r);
        let e = p.abs() - self.half_extent;
        Vec3::new(e.x.max(0.0), e.y.max(0.0), e.z.max(0.0)).norm()
    }
}

/// All conductors that radiate noise, at temperature `temperature`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseGeometry {
    pub bodies: Vec<NoiseBody>,
    /// K
    pub temperature: f64,
}

impl NoiseGeometry {
    /// Boxes along each segment of a wire, with the size-dependent resistivity of
    /// its cross-section.
    pub fn from_wire(wire: &WireSpec, temperature: f64) -> Result<Self> {
        wire.validate()?;
        let rho = wire.material.rho0 * resistivity_ratio(&wire.cross_section, &wire.material)?;
        let cs = wire.cross_section;
        let bodies =
            wire.segments().map(|(a, b)| NoiseBody::segment(a, b, cs.width, cs.height, rho)).collect::<Result<_>>()?;
        Ok(NoiseGeometry { bodies, temperature })
    }

    /// A straight wire of the given length centred at the origin along x, lying on z = 0.
    pub fn straight_wire(length: f64, width: f64, height: f64, resistivity: f64, temperature: f64) -> Result<Self> {
        let a = Vec3::new(-0.5 * length, 0.0, 0.5 * height);
        let b = Vec3::new(0.5 * length, 0.0, 0.5 * height);
        Ok(NoiseGeometry { bodies: vec![NoiseBody::segment(a, b, width, height, resistivity)?], temperature })
    }

    pub fn distance(&self, r: &Vec3) -> f64 {
        self.bodies.iter().map(|b| b.distance(r)).fold(f64::INFINITY, f64::min)
    }
}

/// Cells are refined until their largest edge is below this fraction of the
/// distance to the nearer field point.
const CELL_RATIO: f64 = 0.25;
const MAX_CELLS: usize = 4_000_000;

/// `X_jk = (1/2) int_V (x1 - x')_j (x2 - x')_k / (|x1 - x'|^3 |x2 - x'|^3) d^3x'`
/// for one uniform body.
pub fn geometric_factor(x1: &Vec3, x2: &Vec3, body: &NoiseBody) -> Result<Matrix3<f64>> {
    geometric_factor_with(x1, x2, body, CELL_RATIO)
}

pub fn geometric_factor_with(x1: &Vec3, x2: &Vec3, body: &NoiseBody, ratio: f64) -> Result<Matrix3<f64>> {
    if body.distance(x1) <= 0.0 || body.distance(x2) <= 0.0 {
        return Err(Error::domain("field point lies inside the conductor"));
    }
    let p1 = body.to_local(x1);
    let p2 = body.to_local(x2);
    let (gx, gw) = gauss_legendre(4);
    let mut acc = Matrix3::zeros();
    let mut stack = vec![(-body.half_extent, body.half_extent)];
    let mut cells = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        let edge = hi - lo;
        let size = edge.max();
        let dist = box_distance(&p1, &lo, &hi).min(box_distance(&p2, &lo, &hi));
        if size > ratio * dist && cells < MAX_CELLS {
            // split every edge that is at least half of the longest one
            let split = edge.map(|e| e >= 0.5 * size);
            let mut children = vec![(lo, hi)];
            for a in 0..3 {
                if !split[a] {
                    continue;
                }
                let mut next = Vec::with_capacity(children.len() * 2);
                for (l, h) in children {
                    let mid = 0.5 * (l[a] + h[a]);
                    let mut h1 = h;
                    h1[a] = mid;
                    let mut l2 = l;
                    l2[a] = mid;
                    next.push((l, h1));
                    next.push((l2, h));
                }
                children = next;
            }
            cells += children.len();
            stack.extend(children);
            continue;
        }
        let c = 0.5 * (lo + hi);
        let h = 0.5 * edge;
        let jac = h.x * h.y * h.z;
        for (i, &xi) in gx.iter().enumerate() {
            for (j, &yj) in gx.iter().enumerate() {
                for (k, &zk) in gx.iter().enumerate() {
                    let q = c + Vec3::new(h.x * xi, h.y * yj, h.z * zk);
                    let r1 = p1 - q;
                    let r2 = p2 - q;
                    let w = gw[i] * gw[j] * gw[k] * jac / (r1.norm().powi(3) * r2.norm().powi(3));
                    acc += r1 * r2.transpose() * w;
                }
            }
        }
    }
    let x_local = acc * 0.5;
    Ok(body.frame * x_local * body.frame.transpose())
}

fn box_distance(p: &Vec3, lo: &Vec3, hi: &Vec3) -> f64 {
    let d = Vec3::new(
        (lo.x - p.x).max(p.x - hi.x).max(0.0),
        (lo.y - p.y).max(p.y - hi.y).max(0.0),
        (lo.z - p.z).max(p.z - hi.z).max(0.0),
    );
    d.norm()
}

/// Skin depth sqrt(2 rho / (mu0 omega)).
pub fn skin_depth(resistivity: f64, omega: f64) -> f64 {
    (2.0 * resistivity / (MU0 * omega)).sqrt()
}

/// Low-frequency magnetic noise correlation `S_B^{jk}(x1, x2)` in T^2 s.
pub fn noise_correlation(x1: &Vec3, x2: &Vec3, geom: &NoiseGeometry) -> Result<Matrix3<f64>> {
    if !(geom.temperature >= 0.0) {
        return Err(Error::domain("temperature must be non-negative"));
    }
    let mut s = Matrix3::zeros();
    for b in &geom.bodies {
        let x = geometric_factor(x1, x2, b)?;
        let pre = KB * geom.temperature / (4.0 * PI * PI * b.resistivity * EPS0 * EPS0 * C.powi(4));
        s += (Matrix3::identity() * x.trace() - x) * pre;
    }
    Ok(s)
}

/// Squared ladder matrix element |<F, m-1| F_- |F, m>|^2 = F(F+1) - m(m-1).
pub fn lowering_element_sq(f: u32, m: i32) -> f64 {
    let f = f as f64;
    let m = m as f64;
    (f * (f + 1.0) - m * (m - 1.0)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinFlip {
    pub rate: f64,
    /// No lower Zeeman state exists (m_F = -F); the rate is then zero.
    pub no_lower_state: bool,
}

/// Rate of |F, m> -> |F, m-1> transitions driven by noise perpendicular to `b_axis`.
pub fn thermal_spinflip_rate(x: &Vec3, geom: &NoiseGeometry, species: &Species, b_axis: &Vec3) -> Result<SpinFlip> {
    if species.m_f <= -(species.f as i32) {
        return Ok(SpinFlip { rate: 0.0, no_lower_state: true });
    }
    let s = noise_correlation(x, x, geom)?;
    let n = b_axis.try_normalize(0.0).ok_or_else(|| Error::domain("quantisation axis must be non-zero"))?;
    let rot = Rotation3::rotation_between(&Vec3::z(), &n).unwrap_or_else(|| Rotation3::from_axis_angle(&Vec3::x_axis(), PI));
    let (e1, e2) = (rot * Vec3::x(), rot * Vec3::y());
    // F_perp1 = (F+ + F-)/2 and F_perp2 = (F+ - F-)/2i: each gives |<f|F|i>|^2 = c^2/4,
    // and the cross terms cancel for a symmetric S.
    let c2 = lowering_element_sq(species.f, species.m_f);
    let s_perp = e1.dot(&(s * e1)) + e2.dot(&(s * e2));
    let pre = (MU_B * species.g_f / HBAR).powi(2);
    Ok(SpinFlip { rate: pre * c2 / 4.0 * s_perp, no_lower_state: false })
}

/// Dephasing rate between two points from noise along the quantisation axis.
pub fn decoherence_rate(x1: &Vec3, x2: &Vec3, geom: &NoiseGeometry, species: &Species, b_axis: &Vec3) -> Result<f64> {
    let n = b_axis.try_normalize(0.0).ok_or_else(|| Error::domain("quantisation axis must be non-zero"))?;
    if x1 == x2 {
        if !(geom.distance(x1) > 0.0) {
            return Err(Error::domain("point inside the conductor"));
        }
        return Ok(0.0);
    }
    let par = |a: &Vec3, b: &Vec3| noise_correlation(a, b, geom).map(|s| n.dot(&(s * n)));
    let s11 = par(x1, x1)?;
    let s22 = par(x2, x2)?;
    // S(x1, x2) is not symmetric in its arguments in general; use the symmetrised part.
    let s12 = 0.5 * (par(x1, x2)? + par(x2, x1)?);
    let pre = (species.m_f as f64 * species.g_f * MU_B / HBAR).powi(2) / 2.0;
    Ok((pre * (s11 + s22 - 2.0 * s12)).max(0.0))
}

/// Majorana loss rate `(pi w / 2) exp(-(2 mu B0 + hbar w) / (2 hbar w))`.
pub fn majorana_rate(omega_r: f64, b0: f64, species: &Species) -> Result<f64> {
    if !(omega_r > 0.0) {
        return Err(Error::domain("radial frequency must be positive"));
    }
    let hw = HBAR * omega_r;
    Ok(PI * omega_r / 2.0 * (-(2.0 * species.moment().abs() * b0.abs() + hw) / (2.0 * hw)).exp())
}

/// Larmor frequency exceeds the trap frequency by at least this factor for the
/// Majorana formula to apply.
pub fn majorana_valid(omega_r: f64, b0: f64, species: &Species) -> bool {
    species.moment().abs() * b0.abs() / HBAR > 10.0 * omega_r
}

/// Offset field giving a Majorana lifetime `tau`.
pub fn ioffe_for_lifetime(tau: f64, omega_r: f64, species: &Species) -> Result<f64> {
    if !(tau > 0.0 && omega_r > 0.0) {
        return Err(Error::domain("lifetime and radial frequency must be positive"));
    }
    let x = (PI * omega_r * tau / 2.0).ln() - 0.5;
    if x < 0.0 {
        return Err(Error::domain(format!(
            "a Majorana lifetime of {tau:e} s is shorter than the zero-field value {:e} s",
            1.0 / majorana_rate(omega_r, 0.0, species)?
        )));
    }
    Ok(HBAR * omega_r / species.moment().abs() * x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunnelingResult {
    /// 1/s
    pub rate: f64,
    /// Columns whose atoms see no barrier and leave at the full attempt rate.
    pub open_columns: usize,
    /// Columns with atoms but no classically allowed region at mu.
    pub skipped_columns: usize,
    /// Integrand P(x,y) w_r(x,y) T(x,y) per column (1/(m^2 s)), indexed [i * ny + j].
    pub weights: Vec<f64>,
}

/// Turning points and barrier integral of one z-column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Column {
    /// Upper and lower edges of the classically allowed well, m.
    pub well: (f64, f64),
    /// exp(-2 int sqrt(2 m (U - mu)) / hbar) across the barrier below the well; 1 when open.
    pub transmission: f64,
    pub open: bool,
}

const Z_STEP_FRACTION: f64 = 1.0 / 400.0;

enum March {
    /// U - mu changed sign at this height.
    Crossing(f64),
    /// A surface or conductor was hit; the last admissible height.
    Surface(f64),
    /// Reached the end of the search range.
    End,
}

/// March from `from` toward `to` until `U > mu` becomes `want_above`.
fn march<F: Fn(f64) -> Option<f64>>(u: &F, mu: f64, from: f64, to: f64, step: f64, want_above: bool) -> March {
    let dir = (to - from).signum();
    let mut z = from;
    loop {
        let next = z + dir * step;
        if (next - to) * dir > 0.0 {
            return March::End;
        }
        match u(next) {
            None => {
                // bisect onto the surface
                let (mut ok, mut bad) = (z, next);
                for _ in 0..60 {
                    let m = 0.5 * (ok + bad);
                    if u(m).is_some() {
                        ok = m;
                    } else {
                        bad = m;
                    }
                }
                return March::Surface(ok);
            }
            Some(v) if (v > mu) == want_above => {
                let (mut a, mut b) = (z, next);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    match u(m) {
                        Some(v) if (v > mu) != want_above => a = m,
                        _ => b = m,
                    }
                }
                return March::Crossing(0.5 * (a + b));
            }
            Some(_) => z = next,
        }
    }
}

/// Analyse the column through (x, y): the allowed well around `z_seed` and the
/// barrier between the well and the surface below it. `None` when U(z_seed) >= mu.
pub fn column_barrier<P: Potential + ?Sized>(pot: &P, x: f64, y: f64, z_seed: f64, mu: f64, mass: f64) -> Result<Option<Column>> {
    let u = |z: f64| if z > 0.0 { pot.energy(&Vec3::new(x, y, z)).ok() } else { None };
    let Some(u0) = u(z_seed) else { return Ok(None) };
    if u0 >= mu {
        return Ok(None);
    }
    let step = z_seed * Z_STEP_FRACTION;
    let top = match march(&u, mu, z_seed, 20.0 * z_seed, step, true) {
        March::Crossing(z) | March::Surface(z) => z,
        March::End => 20.0 * z_seed,
    };
    // lower wall of the well; reaching the surface first means no barrier
    let z_a = match march(&u, mu, z_seed, 0.0, step, true) {
        March::Crossing(z) => z,
        March::Surface(_) | March::End => return Ok(Some(Column { well: (top, 0.0), transmission: 1.0, open: true })),
    };
    // far side of the barrier: U falls below mu again, or the surface itself absorbs
    let z_b = match march(&u, mu, z_a, 0.0, step, false) {
        March::Crossing(z) | March::Surface(z) => z,
        March::End => 0.0,
    };
    let q = integrate(
        |z| u(z).map_or(0.0, |v| (2.0 * mass * (v - mu)).max(0.0).sqrt()),
        z_b,
        z_a,
        Tol::rel(1e-8).with_abs(1e-40),
    );
    Ok(Some(Column { well: (top, z_a), transmission: (-2.0 * q.value / HBAR).exp(), open: false }))
}

/// Weighted tunnelling rate of a condensate to the surfaces:
/// `sum over columns of P(x,y) w_r(x,y) T(x,y) dx dy`, with P the fraction of atoms in
/// the column, `w_r = hbar sqrt(<k_z^2>) / (2 m L)` and L the well width.
pub fn surface_tunneling_rate<P: Potential + ?Sized>(pot: &P, state: &GroundState, mu: f64, species: &Species) -> Result<TunnelingResult> {
    let [nx, ny, nz] = state.dims;
    let (dx, dy, dz) = (state.spacing.x, state.spacing.y, state.spacing.z);
    let norm: f64 = state.psi.iter().map(|p| p * p).sum::<f64>() * dx * dy * dz;
    if !(norm > 0.0) {
        return Err(Error::domain("empty condensate"));
    }
    let mut col_p = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            let base = (i * ny + j) * nz;
            col_p[i * ny + j] = state.psi[base..base + nz].iter().map(|p| p * p).sum::<f64>() * dz / norm;
        }
    }
    let p_max = col_p.iter().cloned().fold(0.0, f64::max);
    let mut weights = vec![0.0; nx * ny];
    let (mut open, mut skipped, mut any_bound) = (0, 0, false);
    let mut rate = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let p = col_p[i * ny + j];
            if p < 1e-14 * p_max {
                continue;
            }
            let base = (i * ny + j) * nz;
            let col = &state.psi[base..base + nz];
            let kmax = (0..nz).max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs())).unwrap();
            let r = state.point(i, j, kmax);
            let Some(c) = column_barrier(pot, r.x, r.y, r.z, mu, species.mass)? else {
                skipped += 1;
                continue;
            };
            any_bound |= !c.open;
            // <k_z^2> from the column's z-derivative
            let num: f64 = col.windows(2).map(|w| ((w[1] - w[0]) / dz).powi(2)).sum::<f64>();
            let den: f64 = col.iter().map(|v| v * v).sum::<f64>();
            let kz2 = num / den;
            let width = (c.well.0 - c.well.1).max(dz);
            let omega = HBAR * kz2.sqrt() / (2.0 * species.mass * width);
            if c.open {
                open += 1;
            }
            let w = p * omega * c.transmission;
            weights[i * ny + j] = w;
            rate += w * dx * dy;
        }
    }
    if !any_bound {
        return Err(Error::domain("trap already open: no column holds the condensate behind a barrier"));
    }
    Ok(TunnelingResult { rate, open_columns: open, skipped_columns: skipped, weights })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget {
    pub gamma_th: f64,
    pub gamma_majorana: f64,
    pub gamma_tunnel: f64,
    pub gamma_dec: f64,
    /// s; decoherence is not a loss channel
    pub lifetime: f64,
}

impl LossBudget {
    pub fn new(gamma_th: f64, gamma_majorana: f64, gamma_tunnel: f64, gamma_dec: f64) -> Result<Self> {
        if [gamma_th, gamma_majorana, gamma_tunnel, gamma_dec].iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::domain("rates must be non-negative"));
        }
        let total = gamma_th + gamma_majorana + gamma_tunnel;
        Ok(LossBudget { gamma_th, gamma_majorana, gamma_tunnel, gamma_dec, lifetime: 1.0 / total })
    }
}
