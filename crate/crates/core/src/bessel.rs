//! Modified Bessel functions I_n and K_n of integer order and real positive argument.
//!
//! Orders 0 and 1 use power series for small arguments, the asymptotic expansion
//! (I) or Steed's continued fraction (K) for large ones. Higher orders come from
//! ratio recurrences evaluated in log space, so that sequences such as
//! `I_m(t) / K_m(t)` stay finite for m in the thousands.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn series_i(n: u32, x: f64) -> f64 {
    // (x/2)^n sum (x^2/4)^k / (k! (k+n)!)
    let q = 0.25 * x * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= 0.5 * x / k as f64;
    }
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + n as f64));
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
    }
}

/// Scaled asymptotic sum: I_nu(x) e^{-x} sqrt(2 pi x) for large x.
fn asym_i_scaled(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let j = (2 * k - 1) as f64;
        let next = -term * (mu - j * j) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

const I_SWITCH: f64 = 20.0;

/// e^{-x} I_0(x)
pub fn i0e(x: f64) -> f64 {
    let x = x.abs();
    if x < I_SWITCH {
        series_i(0, x) * (-x).exp()
    } else {
        asym_i_scaled(0, x) / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// e^{-x} I_1(x) for x >= 0.
pub fn i1e(x: f64) -> f64 {
    if x < I_SWITCH {
        series_i(1, x) * (-x).exp()
    } else {
        asym_i_scaled(1, x) / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

pub fn i0(x: f64) -> f64 {
    i0e(x) * x.abs().exp()
}

pub fn i1(x: f64) -> f64 {
    i1e(x) * x.exp()
}

/// ln I_0(x), finite for any x >= 0.
pub fn ln_i0(x: f64) -> f64 {
    i0e(x).ln() + x
}

/// (e^x K_0(x), e^x K_1(x)) for x > 0.
pub fn k01e(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "K_n requires a positive argument, got {x}");
    if x <= 2.0 {
        let q = 0.25 * x * x;
        let l = (0.5 * x).ln();
        let i0 = series_i(0, x);
        let i1 = series_i(1, x);
        // K0 = -(ln(x/2)+gamma) I0 + sum H_k q^k/(k!)^2
        let mut t0 = 1.0;
        let mut h = 0.0;
        let mut s0 = 0.0;
        // K1 = 1/x + ln(x/2) I1 - (x/4) sum (psi(k+1)+psi(k+2)) q^k/(k!(k+1)!)
        let mut t1 = 1.0;
        let mut psi1 = -EULER_GAMMA;
        let mut s1 = 0.0;
        for k in 0..60 {
            let kf = k as f64;
            if k > 0 {
                t0 *= q / (kf * kf);
                h += 1.0 / kf;
                psi1 += 1.0 / kf;
                t1 *= q / (kf * (kf + 1.0));
            }
            s0 += h * t0;
            s1 += (2.0 * psi1 + 1.0 / (kf + 1.0)) * t1;
            if t0 < 1e-18 && k > 2 {
                break;
            }
        }
        let k0 = -(l + EULER_GAMMA) * i0 + s0;
        let k1 = 1.0 / x + l * i1 - 0.25 * x * s1;
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        // Steed's method for the second continued fraction (Temme), order 0.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let (mut q1, mut q2) = (0.0, 1.0);
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..10_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        h *= a1;
        let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
        let k1 = k0 * (x + 0.5 - h) / x;
        (k0, k1)
    }
}

pub fn k0(x: f64) -> f64 {
    k01e(x).0 * (-x).exp()
}

pub fn k1(x: f64) -> f64 {
    k01e(x).1 * (-x).exp()
}

/// K_n(x) by upward recurrence (stable for K).
pub fn kn(n: u32, x: f64) -> f64 {
    let (a, b) = k01e(x);
    if n == 0 {
        return a * (-x).exp();
    }
    let (mut km, mut k) = (a, b);
    for m in 1..n {
        let next = km + 2.0 * m as f64 / x * k;
        km = k;
        k = next;
    }
    k * (-x).exp()
}

/// I_n(x) from I_0 and the backward ratio recurrence.
pub fn in_(n: u32, x: f64) -> f64 {
    if n == 0 {
        return i0(x);
    }
    let seq = LogBesselI::new(x, n as usize);
    seq.ln_i[n as usize].exp()
}

/// ln I_m(t) and I'_m(t)/I_m(t) for m = 0..=m_max.
#[derive(Debug, Clone)]
pub struct LogBesselI {
    pub ln_i: Vec<f64>,
    pub dlog: Vec<f64>,
}

impl LogBesselI {
    pub fn new(t: f64, m_max: usize) -> Self {
        assert!(t > 0.0);
        // q_m = I_{m+1}/I_m, seeded far above m_max and recurred downwards.
        let start = m_max + 40 + t.ceil() as usize;
        let mf = (start + 1) as f64;
        let mut q = t / (mf + (mf * mf + t * t).sqrt());
        let mut ratios = vec![0.0; m_max + 1];
        for m in (1..=start).rev() {
            q = 1.0 / (2.0 * m as f64 / t + q);
            if m - 1 <= m_max {
                ratios[m - 1] = q;
            }
        }
        let mut ln_i = Vec::with_capacity(m_max + 1);
        let mut dlog = Vec::with_capacity(m_max + 1);
        let mut l = ln_i0(t);
        for m in 0..=m_max {
            ln_i.push(l);
            dlog.push(ratios[m] + m as f64 / t);
            l += ratios[m].ln();
        }
        LogBesselI { ln_i, dlog }
    }
}

/// ln K_m(t) and K'_m(t)/K_m(t) for m = 0..=m_max.
#[derive(Debug, Clone)]
pub struct LogBesselK {
    pub ln_k: Vec<f64>,
    pub dlog: Vec<f64>,
}

impl LogBesselK {
    pub fn new(t: f64, m_max: usize) -> Self {
        let (k0s, k1s) = k01e(t);
        let mut ln_k = Vec::with_capacity(m_max + 1);
        let mut dlog = Vec::with_capacity(m_max + 1);
        // r = K_m / K_{m-1}
        let mut r = k1s / k0s;
        ln_k.push(k0s.ln() - t);
        dlog.push(-r);
        let mut l = ln_k[0];
        for m in 1..=m_max {
            if m > 1 {
                r = 1.0 / r + 2.0 * (m - 1) as f64 / t;
            }
            l += r.ln();
            ln_k.push(l);
            // K'_m = -K_{m-1} - (m/t) K_m
            dlog.push(-1.0 / r - m as f64 / t);
        }
        LogBesselK { ln_k, dlog }
    }
}
