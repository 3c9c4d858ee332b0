//! One-dimensional WKB transmission and the crossed-wire barrier used to gate it.

use std::f64::consts::PI;

use crate::physcore::consts::{HBAR, MU0};
use crate::physcore::Species;
use crate::quad::{integrate, Tol};
use crate::{Error, Result};

/// Barrier along a guide produced by a crossing wire at depth `z` below the atoms:
/// `mu B0 + mu mu0 I_cross z / (2 pi (z^2 + x^2))`.
pub fn x_barrier_potential(i_cross: f64, b0: f64, z: f64, x: f64, species: &Species) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("barrier height z must be positive, got {z:e} m")));
    }
    let mu = species.moment();
    Ok(mu * b0 + mu * MU0 * i_cross / (2.0 * PI) * z / (z * z + x * x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbResult {
    pub probability: f64,
    /// Natural log of the probability (finite even when the probability underflows).
    pub log_probability: f64,
    /// Energy at or above the barrier peak; probability is then 1.
    pub over_barrier: bool,
    pub turning_points: (f64, f64),
    /// Position and value of the barrier maximum.
    pub peak: (f64, f64),
}

const TURNING_TOL: f64 = 1e-12;

fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    // g(lo) and g(hi) have opposite signs
    let s_lo = g(lo) > 0.0;
    while (hi - lo).abs() > TURNING_TOL {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (g(mid) > 0.0) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Transmission `exp(-(1/hbar) * integral sqrt(2 m (V - E)) dx)` between the turning
/// points of the barrier contained in `range`. The potential must fall below `e` at
/// both ends of the range.
pub fn wkb_transmission<V: Fn(f64) -> f64>(v: V, e: f64, mass: f64, range: (f64, f64)) -> Result<WkbResult> {
    let (a, b) = range;
    if !(b > a) || !(mass > 0.0) {
        return Err(Error::domain("WKB needs a non-empty range and positive mass"));
    }
    // coarse scan for the peak, then golden-section refinement
    let n = 4001;
    let xs = |i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let mut ip = 0;
    let mut vp = f64::NEG_INFINITY;
    for i in 0..n {
        let vi = v(xs(i));
        if vi > vp {
            vp = vi;
            ip = i;
        }
    }
    let (mut lo, mut hi) = (xs(ip.saturating_sub(1)), xs((ip + 1).min(n - 1)));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        if hi - lo <= TURNING_TOL {
            break;
        }
        let c = hi - gr * (hi - lo);
        let d = lo + gr * (hi - lo);
        if v(c) >= v(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let xp = 0.5 * (lo + hi);
    let peak = if v(xp) >= vp { (xp, v(xp)) } else { (xs(ip), vp) };
    if peak.1 <= e {
        return Ok(WkbResult {
            probability: 1.0,
            log_probability: 0.0,
            over_barrier: true,
            turning_points: (peak.0, peak.0),
            peak,
        });
    }
    if v(a) >= e || v(b) >= e {
        return Err(Error::domain(format!(
            "no turning points in [{a:e}, {b:e}] m: V - E = {:.3e}, {:.3e} J at the ends",
            v(a) - e,
            v(b) - e
        )));
    }
    let g = |x: f64| v(x) - e;
    let x1 = bisect(g, a, peak.0);
    let x2 = bisect(g, peak.0, b);
    // x = m - h cos(theta) removes the square-root endpoint behaviour
    let m = 0.5 * (x1 + x2);
    let h = 0.5 * (x2 - x1);
    let f = |th: f64| {
        let x = m - h * th.cos();
        (2.0 * mass * (v(x) - e)).max(0.0).sqrt() * h * th.sin()
    };
    let q = integrate(f, 0.0, PI, Tol::rel(1e-8));
    let log_p = -q.value / HBAR;
    Ok(WkbResult {
        probability: log_p.exp(),
        log_probability: log_p,
        over_barrier: false,
        turning_points: (x1, x2),
        peak,
    })
}

/// Transmission through the crossed-wire barrier at height `d` for kinetic energy
/// `e` above the guide floor, with crossing current `i_cross`.
pub fn x_barrier_transmission(i_cross: f64, d: f64, e: f64, species: &Species) -> Result<WkbResult> {
    let height = species.moment() * MU0 * i_cross / (2.0 * PI * d);
    // turning points at |x| = d sqrt(H/E - 1)
    let reach = d * ((height / e).max(1.0).sqrt() + 1.0) * 2.0;
    let v = |x: f64| x_barrier_potential(i_cross, 0.0, d, x, species).unwrap_or(f64::NAN);
    wkb_transmission(v, e, species.mass, (-reach, reach))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlCurve {
    pub d: f64,
    pub energy: f64,
    pub p_ref: f64,
    /// Crossing current giving `p_ref`, A.
    pub i_ref: f64,
    /// Barrier height above the floor at `i_ref`, J.
    pub barrier_height: f64,
    /// (Delta I / I_ref, P)
    pub points: Vec<(f64, f64)>,
}

/// Crossing current for which the barrier at height `d` transmits `p` at energy `e`.
pub fn current_for_probability(d: f64, e: f64, p: f64, species: &Species) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || !(e > 0.0) || !(d > 0.0) {
        return Err(Error::domain("need 0 < P < 1, E > 0 and d > 0"));
    }
    let target = p.ln();
    // the barrier only rises above E for I > I_min
    let i_min = 2.0 * PI * d * e / (species.moment() * MU0);
    let log_p = |i: f64| x_barrier_transmission(i, d, e, species).map(|r| r.log_probability);
    let mut lo = i_min * (1.0 + 1e-9);
    let mut hi = i_min * 2.0;
    let mut grow = 0;
    while log_p(hi)? > target {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::domain(format!(
                "control current not bracketed: log P = {:.3e} at I = {hi:.3e} A, target {target:.3e}",
                log_p(hi)?
            )));
        }
    }
    if log_p(lo)? < target {
        return Err(Error::domain(format!("P_ref = {p:e} is not reachable above the barrier onset at I = {lo:.3e} A")));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if log_p(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Sweep the transmission versus fractional change of the crossing current about
/// the current that gives `p_ref`.
pub fn tunneling_control_curve(d: f64, e: f64, p_ref: f64, species: &Species, fractions: &[f64]) -> Result<ControlCurve> {
    let i_ref = current_for_probability(d, e, p_ref, species)?;
    let mut points = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let p = if f == 0.0 { p_ref } else { x_barrier_transmission(i_ref * (1.0 + f), d, e, species)?.probability };
        points.push((f, p));
    }
    Ok(ControlCurve {
        d,
        energy: e,
        p_ref,
        i_ref,
        barrier_height: species.moment() * MU0 * i_ref / (2.0 * PI * d),
        points,
    })
}

/// Barrier height above the floor (J) that keeps the transmission at `p` for height `d`.
pub fn barrier_for_probability(d: f64, e: f64, p: f64, species: &Species) -> Result<f64> {
    let i = current_for_probability(d, e, p, species)?;
    Ok(species.moment() * MU0 * i / (2.0 * PI * d))
}
