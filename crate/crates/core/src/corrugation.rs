//! Edge-roughness spectra and the longitudinal field corrugation they produce.
//!
//! The wire centre line wanders as `dy_c(x) = sum_n dy_n cos(k_n x + phi_n)` with
//! `k_n = 2 pi n / L` up to `2 pi / lambda_min` and a power-law amplitude
//! `dy0 (k0/k)^alpha`. Field amplitudes use the narrow-wire limit
//! `dB_x(k) = (I mu0 / 2 pi) k^2 dy_c(k) K1(k z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use statrs::function::gamma::gamma;

use crate::bessel::k1;
use crate::fieldsolver::{FieldPerturbation, Vec3};
use crate::physcore::consts::{HBAR, MU0};
use crate::physcore::Species;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RoughnessSpectrum {
    /// Mode amplitude at `k0`, m.
    pub dy0: f64,
    /// Reference wavevector, rad/m.
    pub k0: f64,
    /// Spectral exponent: 0 white, 1 for 1/f.
    pub alpha: f64,
    pub lambda_min: f64,
    /// Wire length, which fixes the mode spacing 2 pi / L.
    pub length: f64,
    pub seed: u64,
}

impl RoughnessSpectrum {
    /// Spectrum whose rms over all modes equals `rms`; `k0 = 2 pi / lambda_min`.
    pub fn from_rms(rms: f64, alpha: f64, lambda_min: f64, length: f64, seed: u64) -> Result<Self> {
        let mut s = RoughnessSpectrum { dy0: 1.0, k0: 2.0 * PI / lambda_min, alpha, lambda_min, length, seed };
        s.validate()?;
        s.dy0 = rms / s.rms();
        s.validate()?;
        Ok(s)
    }

    /// Spectrum over `length` whose rms restricted to wavelengths in `band` equals `rms`.
    pub fn from_band_rms(
        rms: f64,
        band: (f64, f64),
        alpha: f64,
        lambda_min: f64,
        length: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut s = Self::from_rms(1.0, alpha, lambda_min, length, seed)?;
        let in_band = s.band_rms(band);
        if !(in_band > 0.0) {
            return Err(Error::domain("calibration band holds no modes"));
        }
        s.dy0 *= rms / in_band;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dy0 >= 0.0 && self.dy0.is_finite()) {
            return Err(Error::domain("dy0 must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain(format!("spectral exponent must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.length) {
            return Err(Error::domain("need 0 < lambda_min < L"));
        }
        if !(self.k0 > 0.0) {
            return Err(Error::domain("reference wavevector must be positive"));
        }
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        (self.length / self.lambda_min * (1.0 + 1e-12)).floor() as usize
    }

    /// (k_n, amplitude) for n = 1 ..= L / lambda_min.
    pub fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (1..=self.mode_count()).map(move |n| {
            let k = 2.0 * PI * n as f64 / self.length;
            (k, self.dy0 * (self.k0 / k).powf(self.alpha))
        })
    }

    /// rms of the centre line over all modes: sqrt(sum amplitude^2).
    pub fn rms(&self) -> f64 {
        self.modes().map(|(_, a)| a * a).sum::<f64>().sqrt()
    }

    /// rms restricted to wavelengths within `band` (m).
    pub fn band_rms(&self, band: (f64, f64)) -> f64 {
        let (lo, hi) = (band.0.min(band.1), band.0.max(band.1));
        self.modes()
            .filter(|(k, _)| {
                let l = 2.0 * PI / k;
                l >= lo * (1.0 - 1e-12) && l <= hi * (1.0 + 1e-12)
            })
            .map(|(_, a)| a * a)
            .sum::<f64>()
            .sqrt()
    }

    /// Phase of mode n: counter-based, so independent of how many modes are drawn.
    pub fn phase(&self, n: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(2 * n as u128);
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * PI * u
    }
}

/// A sampled centre-line profile on `x_k = k L / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProfile {
    pub x: Vec<f64>,
    pub dy: Vec<f64>,
}

impl EdgeProfile {
    pub fn rms(&self) -> f64 {
        (self.dy.iter().map(|v| v * v).sum::<f64>() / self.dy.len() as f64).sqrt()
    }
}

/// Random-phase realisation. Each mode is a cosine of amplitude sqrt(2) a_n, so the
/// profile rms equals the spectrum rms.
pub fn edge_realization(spec: &RoughnessSpectrum, points: usize) -> Result<EdgeProfile> {
    spec.validate()?;
    if points < 2 {
        return Err(Error::domain("need at least two sample points"));
    }
    let modes: Vec<(f64, f64, f64)> =
        spec.modes().enumerate().map(|(i, (k, a))| (k, a * 2f64.sqrt(), spec.phase(i + 1))).collect();
    let x: Vec<f64> = (0..points).map(|i| spec.length * i as f64 / points as f64).collect();
    let dy = x.iter().map(|&x| modes.iter().map(|&(k, a, p)| a * (k * x + p).cos()).sum()).collect();
    Ok(EdgeProfile { x, dy })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrugationResult {
    pub k_values: Vec<f64>,
    /// Field amplitude of each positive-k mode, T.
    pub dbx_k: Vec<f64>,
    /// rms over both signs of k: sqrt(2 sum dbx_k^2), T.
    pub dbx_rms: f64,
    /// dbx_rms / (I mu0 / 2 pi z)
    pub relative: f64,
    /// Wire width exceeds half the height; the narrow-wire formula is then unreliable.
    pub narrow_wire_warning: bool,
}

/// Mode-by-mode field corrugation at height `z` above a wire of width `width`.
pub fn dbx_spectrum(spec: &RoughnessSpectrum, current: f64, z: f64, width: f64) -> Result<CorrugationResult> {
    spec.validate()?;
    if !(z > 0.0) {
        return Err(Error::domain("height must be positive"));
    }
    let pre = current.abs() * MU0 / (2.0 * PI);
    let (k_values, dbx_k): (Vec<f64>, Vec<f64>) = spec.modes().map(|(k, a)| (k, pre * k * k * a * k1(k * z))).unzip();
    let dbx_rms = (2.0 * dbx_k.iter().map(|b| b * b).sum::<f64>()).sqrt();
    let b0 = pre / z;
    Ok(CorrugationResult {
        k_values,
        dbx_k,
        dbx_rms,
        relative: if b0 > 0.0 { dbx_rms / b0 } else { 0.0 },
        narrow_wire_warning: width > 0.5 * z,
    })
}

/// Closed form `A(alpha) dy_rms / (2z)^(3/2 - alpha)` valid for lambda_min << z << L.
pub fn dbx_rms_relative(spec: &RoughnessSpectrum, z: f64) -> Result<f64> {
    spec.validate()?;
    if !(z > 0.0) {
        return Err(Error::domain("height must be positive"));
    }
    let a = spec.alpha;
    let sum: f64 = spec.modes().map(|(k, _)| k.powf(-2.0 * a)).sum();
    let a2 = spec.length / PI / sum * (1.0 + PI / 4.0 * (3.0 - 2.0 * a)) * gamma(3.0 - 2.0 * a);
    Ok(a2.sqrt() * spec.rms() / (2.0 * z).powf(1.5 - a))
}

/// Symmetric transverse current of one mode at position y across a strip of width w,
/// per unit longitudinal current density.
pub fn symmetric_current_mode(k: f64, dy_plus: Complex64, dy_minus: Complex64, w: f64, y: f64) -> Complex64 {
    let e = (-k.abs() * w / 2.0).exp();
    Complex64::i() * k * (dy_plus + dy_minus) * (e * (k * y).cosh() / (1.0 + e * e))
}

/// Symmetric transverse current profile `dJ_y(x, y) / J0` for periodic edge samples
/// `dy_plus`, `dy_minus` on a grid of period `length`.
pub fn symmetric_current_fluctuation(dy_plus: &[f64], dy_minus: &[f64], length: f64, w: f64, y: f64) -> Result<Vec<f64>> {
    let n = dy_plus.len();
    if n != dy_minus.len() || n < 2 {
        return Err(Error::domain("edge profiles must be sampled on the same grid"));
    }
    if y.abs() > 0.5 * w {
        return Err(Error::domain("y lies outside the strip"));
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut p: Vec<Complex64> = dy_plus.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut m: Vec<Complex64> = dy_minus.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut p);
    fwd.process(&mut m);
    let mut out: Vec<Complex64> = (0..n)
        .map(|j| {
            if j == 0 || (n % 2 == 0 && j == n / 2) {
                return Complex64::new(0.0, 0.0);
            }
            let s = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            let k = 2.0 * PI * s / length;
            symmetric_current_mode(k, p[j], m[j], w, y)
        })
        .collect();
    inv.process(&mut out);
    Ok(out.iter().map(|c| c.re / n as f64).collect())
}

/// Longitudinal field corrugation of one realisation, tabulated on a uniform x grid
/// and in the distance from the wire axis.
#[derive(Debug, Clone)]
pub struct CorrugationField {
    /// Axis position (y, z) of the wire in the transverse plane.
    pub axis: (f64, f64),
    pub x0: f64,
    dx: f64,
    nx: usize,
    ln_r0: f64,
    dln_r: f64,
    nr: usize,
    table: Vec<f64>,
}

impl CorrugationField {
    /// Field of the realisation for a wire carrying `current` along +x whose
    /// centre line starts at `x0`, evaluated at distances `r_range` from the axis.
    pub fn new(spec: &RoughnessSpectrum, current: f64, x0: f64, axis: (f64, f64), r_range: (f64, f64)) -> Result<Self> {
        spec.validate()?;
        let (r_lo, r_hi) = r_range;
        if !(r_lo > 0.0 && r_hi > r_lo) {
            return Err(Error::domain("radial table range must satisfy 0 < r_lo < r_hi"));
        }
        let pre = current * MU0 / (2.0 * PI);
        let modes: Vec<(f64, f64, f64)> =
            spec.modes().enumerate().map(|(i, (k, a))| (k, a * 2f64.sqrt(), spec.phase(i + 1))).collect();
        let dx = spec.lambda_min / 8.0;
        let nx = (spec.length / dx).ceil() as usize;
        let dx = spec.length / nx as f64;
        let nr = 48;
        let ln_r0 = r_lo.ln();
        let dln_r = (r_hi / r_lo).ln() / (nr - 1) as f64;
        let kk: Vec<Vec<f64>> = (0..nr)
            .map(|j| {
                let r = (ln_r0 + j as f64 * dln_r).exp();
                modes.iter().map(|&(k, _, _)| pre * k * k * k1(k * r)).collect()
            })
            .collect();
        let mut table = vec![0.0; nx * nr];
        let mut s = vec![0.0; modes.len()];
        for i in 0..nx {
            let x = i as f64 * dx;
            // d/dx of cos gives -sin: dB_x follows the local slope of the centre line
            for (sm, &(k, a, p)) in s.iter_mut().zip(&modes) {
                *sm = -a * (k * x + p).sin();
            }
            for j in 0..nr {
                table[i * nr + j] = s.iter().zip(&kk[j]).map(|(a, b)| a * b).sum();
            }
        }
        Ok(CorrugationField { axis, x0, dx, nx, ln_r0, dln_r, nr, table })
    }

    /// dB_x at axial coordinate `x` and distance `r` from the axis (periodic in x).
    pub fn dbx(&self, x: f64, r: f64) -> f64 {
        let period = self.dx * self.nx as f64;
        let u = (x - self.x0).rem_euclid(period) / self.dx;
        let i0 = (u.floor() as usize) % self.nx;
        let i1 = (i0 + 1) % self.nx;
        let tx = u - u.floor();
        let v = ((r.max(1e-300).ln() - self.ln_r0) / self.dln_r).clamp(0.0, (self.nr - 1) as f64);
        let j0 = (v.floor() as usize).min(self.nr - 2);
        let tr = v - j0 as f64;
        let at = |i: usize, j: usize| self.table[i * self.nr + j];
        let a = at(i0, j0) * (1.0 - tr) + at(i0, j0 + 1) * tr;
        let b = at(i1, j0) * (1.0 - tr) + at(i1, j0 + 1) * tr;
        a * (1.0 - tx) + b * tx
    }
}

impl FieldPerturbation for CorrugationField {
    fn delta_b(&self, r: &Vec3) -> Vec3 {
        let rho = ((r.y - self.axis.0).powi(2) + (r.z - self.axis.1).powi(2)).sqrt();
        Vec3::new(self.dbx(r.x, rho), 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Largest height at which the periodic barrier still holds a ground state, m.
    pub d_max: f64,
    /// False when the condition fails even arbitrarily close to the wire.
    pub satisfiable: bool,
}

/// Modulation depth `mu mu0 I k^2 dy K1(k d)` of a wire bent with period `lambda`.
pub fn modulation_depth(current: f64, lambda: f64, dy: f64, d: f64, species: &Species) -> f64 {
    let k = 2.0 * PI / lambda;
    species.moment() * MU0 * current * k * k * dy * k1(k * d)
}

/// Largest height d with `V0(d) >= (eta^2/16) hbar^2 k^2 / m`.
pub fn potential_resolution(current: f64, lambda: f64, dy: f64, eta: f64, species: &Species) -> Result<Resolution> {
    if !(current > 0.0 && lambda > 0.0 && eta > 0.0 && dy > 0.0) {
        return Err(Error::domain("current, wavelength, amplitude and eta must be positive"));
    }
    let k = 2.0 * PI / lambda;
    let need = eta * eta / 16.0 * HBAR * HBAR * k * k / species.mass;
    let g = |d: f64| modulation_depth(current, lambda, dy, d, species) - need;
    let mut lo = 1e-6 / k;
    if g(lo) < 0.0 {
        return Ok(Resolution { d_max: 0.0, satisfiable: false });
    }
    let mut hi = 1.0 / k;
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(Resolution { d_max: 0.5 * (lo + hi), satisfiable: true })
}
