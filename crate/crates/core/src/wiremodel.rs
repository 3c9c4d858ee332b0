//! Fuchs-Sondheimer surface scattering in rectangular wires and the heating limit on current.
//!
//! Each of the four walls suppresses the local current density by `s(y; z)`. With
//! t = sin(theta) the theta integral collapses to a one-variable kernel
//! `G(a) = 2 int_0^1 t sqrt(1 - t^2) exp(-a / t) dt`, which is tabulated once, so
//! that `s(y; z) = 3/(4 pi) int dphi G(y / (l cos phi))` is a single adaptive
//! quadrature over the azimuth.

use std::f64::consts::PI;
use std::sync::LazyLock;

use crate::physcore::Material;
use crate::quad::{gauss_legendre_on, integrate, Tol};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    /// Along y, m.
    pub width: f64,
    /// Along z, m.
    pub height: f64,
}

impl CrossSection {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let cs = CrossSection { width, height };
        cs.validate()?;
        Ok(cs)
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) || !(self.width * self.height).is_finite() {
            return Err(Error::domain(format!(
                "cross-section must have positive finite width and height, got {} x {}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

fn kernel_direct(a: f64) -> f64 {
    integrate(
        |t: f64| 2.0 * t * (1.0 - t * t).max(0.0).sqrt() * (-a / t).exp(),
        0.0,
        1.0,
        Tol::rel(1e-12).with_abs(1e-300),
    )
    .value
}

fn kernel_slope_direct(a: f64) -> f64 {
    integrate(
        |t: f64| -2.0 * (1.0 - t * t).max(0.0).sqrt() * (-a / t).exp(),
        0.0,
        1.0,
        Tol::rel(1e-12).with_abs(1e-300),
    )
    .value
}

// The kernel is tabulated against u = sqrt(a): near a = 0 it behaves like
// 2/3 - (pi/2) a + O(a^2 ln a), which is smooth in u.
const U_MAX: f64 = 7.75;
const U_STEP: f64 = 0.002;

struct KernelTable {
    g: Vec<f64>,
    dg: Vec<f64>,
}

static KERNEL: LazyLock<KernelTable> = LazyLock::new(|| {
    let n = (U_MAX / U_STEP).round() as usize + 1;
    let (mut g, mut dg) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let u = i as f64 * U_STEP;
        g.push(kernel_direct(u * u));
        dg.push(2.0 * u * kernel_slope_direct(u * u));
    }
    KernelTable { g, dg }
});

/// The azimuth kernel G(a); G(0) = 2/3.
pub fn fs_kernel(a: f64) -> f64 {
    let u = a.max(0.0).sqrt();
    if u >= U_MAX {
        return 0.0;
    }
    // cubic Hermite on the tabulated values and slopes
    let t = KERNEL.g.len();
    let v = u / U_STEP;
    let i = (v.floor() as usize).min(t - 2);
    let s = v - i as f64;
    let (g0, g1) = (KERNEL.g[i], KERNEL.g[i + 1]);
    let (d0, d1) = (KERNEL.dg[i] * U_STEP, KERNEL.dg[i + 1] * U_STEP);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * g0
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * g1
        + (s3 - s2) * d1
}

/// Suppression `s(y; z)` from a wall at y = 0 spanning 0 <= z <= `span`.
///
/// This is the y = 0 wall of a wire of height `span`; the other walls follow by
/// relabelling coordinates. At y = 0 the result is 1/2 for interior z.
pub fn wall_suppression(y: f64, z: f64, span: f64, mfp: f64) -> f64 {
    let y = y.max(0.0);
    let phi1 = -z.atan2(y);
    let phi2 = (span - z).atan2(y);
    if phi2 <= phi1 {
        return 0.0;
    }
    if y == 0.0 {
        return 3.0 / (4.0 * PI) * (phi2 - phi1) * (2.0 / 3.0);
    }
    let r = integrate(
        |phi: f64| {
            let c = phi.cos();
            if c <= 0.0 {
                0.0
            } else {
                fs_kernel(y / (mfp * c))
            }
        },
        phi1,
        phi2,
        Tol::rel(1e-8).with_abs(1e-12),
    );
    3.0 / (4.0 * PI) * r.value
}

/// `s(y; z)` for the y = 0 wall of `cs`.
pub fn scattering_suppression(y: f64, z: f64, cs: &CrossSection, mfp: f64) -> f64 {
    wall_suppression(y, z, cs.height, mfp)
}

/// J/J0 at (y, z): one minus the four wall suppressions, clamped at zero.
pub fn current_density(y: f64, z: f64, cs: &CrossSection, mfp: f64) -> f64 {
    let (w, h) = (cs.width, cs.height);
    let s = wall_suppression(y, z, h, mfp)
        + wall_suppression(w - y, z, h, mfp)
        + wall_suppression(z, y, w, mfp)
        + wall_suppression(h - z, y, w, mfp);
    (1.0 - s).max(0.0)
}

/// J/J0 sampled on a cell-centred grid; `values[i * nz + j]` is at (y_i, z_j).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileGrid {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub values: Vec<f64>,
}

impl ProfileGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.z.len() + j]
    }

    /// Cell average of J/J0; its inverse is the diffuse-wall resistivity ratio.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Evaluate J/J0 at the tensor grid `ys` x `zs`, assumed mirror-symmetric about the
/// wire centre. Each wall's suppression is computed once and reused for its mirror.
fn profile_on(ys: &[f64], zs: &[f64], cs: &CrossSection, mfp: f64) -> Vec<f64> {
    let (ny, nz) = (ys.len(), zs.len());
    // sy[i][j] = s(y_i; z_j) for the y = 0 wall; s(y; h - z) = s(y; z) halves the work.
    let wall = |a: &[f64], b: &[f64], span: f64| -> Vec<f64> {
        let (na, nb) = (a.len(), b.len());
        let mut out = vec![0.0; na * nb];
        for i in 0..na {
            for j in 0..(nb + 1) / 2 {
                let v = wall_suppression(a[i], b[j], span, mfp);
                out[i * nb + j] = v;
                out[i * nb + nb - 1 - j] = v;
            }
        }
        out
    };
    let sy = wall(ys, zs, cs.height);
    let sz = if ys == zs && cs.width == cs.height { sy.clone() } else { wall(zs, ys, cs.width) };
    let mut out = vec![0.0; ny * nz];
    for i in 0..ny {
        for j in 0..nz {
            let s = sy[i * nz + j] + sy[(ny - 1 - i) * nz + j] + sz[j * ny + i] + sz[(nz - 1 - j) * ny + i];
            out[i * nz + j] = (1.0 - s).max(0.0);
        }
    }
    out
}

/// J/J0 on an `n` x `n` cell-centred grid (64 is the customary resolution).
pub fn current_density_profile(cs: &CrossSection, mfp: f64, n: usize) -> Result<ProfileGrid> {
    cs.validate()?;
    if !(mfp > 0.0) || n == 0 {
        return Err(Error::domain("mean free path and grid size must be positive"));
    }
    let centres = |len: f64| (0..n).map(|i| (i as f64 + 0.5) * len / n as f64).collect::<Vec<_>>();
    let (y, z) = (centres(cs.width), centres(cs.height));
    let values = profile_on(&y, &z, cs, mfp);
    Ok(ProfileGrid { y, z, values })
}

/// Composite Gauss-Legendre rule on [0, len], graded towards both ends on the
/// scale of the mean free path so the wall boundary layer is resolved.
fn graded_rule(len: f64, mfp: f64) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * len;
    let mut brk = vec![0.0];
    for f in [0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0] {
        let b = f * mfp;
        if b < 0.9 * half {
            brk.push(b);
        }
    }
    brk.push(half);
    let (mut x, mut w) = (Vec::new(), Vec::new());
    for p in brk.windows(2) {
        let (px, pw) = gauss_legendre_on(6, p[0], p[1]);
        x.extend(px);
        w.extend(pw);
    }
    let n = x.len();
    let mut xs = x.clone();
    let mut ws = w.clone();
    for i in (0..n).rev() {
        xs.push(len - x[i]);
        ws.push(w[i]);
    }
    (xs, ws)
}

/// Diffuse-wall (p = 0) ratio rho/rho0 for mean free path `mfp`.
pub fn diffuse_ratio(cs: &CrossSection, mfp: f64) -> Result<f64> {
    cs.validate()?;
    if !(mfp > 0.0) {
        return Err(Error::domain("mean free path must be positive"));
    }
    let (ys, wy) = graded_rule(cs.width, mfp);
    let (zs, wz) = graded_rule(cs.height, mfp);
    let j = profile_on(&ys, &zs, cs, mfp);
    let mut sum = 0.0;
    for (i, wi) in wy.iter().enumerate() {
        for (k, wk) in wz.iter().enumerate() {
            sum += wi * wk * j[i * zs.len() + k];
        }
    }
    let mean = sum / cs.area();
    if !(mean > 0.0) {
        return Err(Error::domain("current density vanishes across the whole cross-section"));
    }
    Ok(1.0 / mean)
}

/// Source of the room-temperature resistivity enhancement used by [`max_current_with`].
pub trait ResistivityModel {
    fn ratio(&self, cs: &CrossSection, mat: &Material) -> Result<f64>;
}

/// Partially specular walls via the series over diffuse ratios at l/k.
#[derive(Debug, Clone, Copy, Default)]
pub struct FuchsSondheimer;

impl ResistivityModel for FuchsSondheimer {
    fn ratio(&self, cs: &CrossSection, mat: &Material) -> Result<f64> {
        resistivity_ratio(cs, mat)
    }
}

/// Fixed ratio, independent of geometry.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRatio(pub f64);

impl ResistivityModel for ConstantRatio {
    fn ratio(&self, _: &CrossSection, _: &Material) -> Result<f64> {
        Ok(self.0)
    }
}

/// rho/rho0 including surface scattering with specularity `mat.specularity`.
pub fn resistivity_ratio(cs: &CrossSection, mat: &Material) -> Result<f64> {
    cs.validate()?;
    mat.validate()?;
    let p = mat.specularity;
    if p == 1.0 {
        return Ok(1.0);
    }
    // rho0/rho = (1-p)^2 sum_k k p^(k-1) (rho0/rho)_{p=0, l/k}
    let mut sum = 0.0;
    for k in 1..=10_000usize {
        let kf = k as f64;
        let term = kf * p.powi(k as i32 - 1) / diffuse_ratio(cs, mat.mfp / kf)?;
        sum += term;
        if p == 0.0 || term < 1e-4 * sum {
            break;
        }
    }
    Ok(1.0 / ((1.0 - p) * (1.0 - p) * sum))
}

/// Temperature rise at which the wire resistance has grown by half: 1/(2 alpha).
pub fn default_overheat(mat: &Material) -> f64 {
    0.5 / mat.alpha_t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentLimit {
    /// A/m^2
    pub j_max: f64,
    /// A
    pub i_max: f64,
    pub ratio: f64,
}

/// Current at which heat flow into the substrate balances ohmic heating for a rise `dt_max`.
pub fn max_current_with(
    model: &dyn ResistivityModel,
    cs: &CrossSection,
    mat: &Material,
    dt_max: f64,
) -> Result<CurrentLimit> {
    if !(dt_max > 0.0) {
        return Err(Error::domain(format!("temperature rise must be positive, got {dt_max}")));
    }
    let ratio = model.ratio(cs, mat)?;
    let rho = mat.rho0 * ratio;
    let j_max = (mat.kappa * dt_max / (cs.height * rho * (1.0 + mat.alpha_t * dt_max))).sqrt();
    Ok(CurrentLimit { j_max, i_max: j_max * cs.area(), ratio })
}

pub fn max_current(cs: &CrossSection, mat: &Material, dt_max: f64) -> Result<CurrentLimit> {
    max_current_with(&FuchsSondheimer, cs, mat, dt_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_limits() {
        assert!((fs_kernel(0.0) - 2.0 / 3.0).abs() < 1e-12);
        for a in [1e-6, 0.01, 0.07, 0.3, 1.234, 7.77, 33.3] {
            assert!((fs_kernel(a) - kernel_direct(a)).abs() < 1e-10 * kernel_direct(a).max(1e-12));
        }
    }

    #[test]
    fn wall_contact_is_one_half() {
        assert!((wall_suppression(0.0, 0.5, 1.0, 1e-3) - 0.5).abs() < 1e-14);
        // just off the wall the log-singular correction is already visible; mpmath reference
        let s = wall_suppression(1e-12, 0.5e-6, 1e-6, 40e-9);
        assert!((s / 0.499802760423736 - 1.0).abs() < 1e-8, "{s}");
    }
}
