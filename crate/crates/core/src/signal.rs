//! Trace filtering and misfit metrics.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Filter order used by [`bandpass`].
pub const BANDPASS_ORDER: usize = 4;

/// Second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = self.a[0] + z_inv * (self.a[1] + z_inv * self.a[2]);
        num / den
    }

    /// Direct form II transposed.
    fn run(&self, x: &mut [f64]) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[1] * y + s2;
            s2 = self.b[2] * input - self.a[2] * y;
            *v = y;
        }
    }
}

/// Digital Butterworth band-pass as a cascade of second-order sections.
///
/// Designed by transforming the analog low-pass prototype to a band-pass
/// and mapping it with the bilinear transform at prewarped corners.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthBandpass {
    sections: Vec<Biquad>,
    order: usize,
    f_lo: f64,
    f_hi: f64,
    fs: f64,
}

impl ButterworthBandpass {
    pub fn design(order: usize, f_lo: f64, f_hi: f64, fs: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::config("filter order must be positive"));
        }
        let nyquist = fs / 2.0;
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::config(format!("sample rate must be positive, got {fs}")));
        }
        if !(f_lo > 0.0 && f_lo < f_hi) {
            return Err(Error::config(format!(
                "band-pass corners must satisfy 0 < f_lo < f_hi, got {f_lo}, {f_hi}"
            )));
        }
        if f_hi >= nyquist {
            return Err(Error::config(format!(
                "band-pass corner {f_hi} Hz is not below the Nyquist frequency {nyquist} Hz"
            )));
        }
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (w_lo, w_hi) = (warp(f_lo), warp(f_hi));
        let bw = w_hi - w_lo;
        let w0 = (w_lo * w_hi).sqrt();
        let two_fs = Complex64::new(2.0 * fs, 0.0);

        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0 * w0).sqrt();
            for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
                poles.push((two_fs + s) / (two_fs - s));
            }
        }

        // Pair each upper-half-plane pole with its conjugate; real poles pair up in order.
        let eps = 1e-12;
        let mut sections = Vec::with_capacity(order);
        let mut real = Vec::new();
        for z in &poles {
            if z.im > eps {
                sections.push(Biquad {
                    b: [1.0, 0.0, -1.0],
                    a: [1.0, -2.0 * z.re, z.norm_sqr()],
                });
            } else if z.im.abs() <= eps {
                real.push(z.re);
            }
        }
        for pair in real.chunks(2) {
            let (r1, r2) = (pair[0], *pair.get(1).unwrap_or(&0.0));
            sections.push(Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(r1 + r2), r1 * r2],
            });
        }

        // Unit gain at the centre frequency, which the bilinear map preserves exactly.
        let omega0 = 2.0 * (w0 / (2.0 * fs)).atan();
        let z_inv = Complex64::from_polar(1.0, -omega0);
        for s in &mut sections {
            let g = s.response(z_inv).norm();
            for b in &mut s.b {
                *b /= g;
            }
        }
        Ok(ButterworthBandpass {
            sections,
            order,
            f_lo,
            f_hi,
            fs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn corners(&self) -> (f64, f64) {
        (self.f_lo, self.f_hi)
    }

    /// |H| of one causal pass at frequency `f` Hz.
    pub fn magnitude(&self, f: f64) -> f64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.fs);
        self.sections.iter().map(|s| s.response(z_inv).norm()).product()
    }

    /// Single causal pass.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            s.run(&mut y);
        }
        y
    }

    /// Forward-backward pass with odd-extension padding; zero phase, squared magnitude.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        for s in &self.sections {
            s.run(&mut ext);
        }
        ext.reverse();
        for s in &self.sections {
            s.run(&mut ext);
        }
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase 4th-order Butterworth band-pass of a trace sampled every `dt` seconds.
pub fn bandpass(trace: &[f64], dt: f64, f_lo: f64, f_hi: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("sample interval must be positive, got {dt}")));
    }
    Ok(ButterworthBandpass::design(BANDPASS_ORDER, f_lo, f_hi, 1.0 / dt)?.filtfilt(trace))
}

fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// `sqrt(mean((sim - ref)²))`.
pub fn rms_error(sim: &[f64], reference: &[f64]) -> Result<f64> {
    if sim.len() != reference.len() {
        return Err(Error::Metric(format!(
            "trace lengths differ ({} vs {}); resample first",
            sim.len(),
            reference.len()
        )));
    }
    if sim.is_empty() {
        return Err(Error::Metric("empty traces".into()));
    }
    let sq = sim
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    Ok((sq / sim.len() as f64).sqrt())
}

/// `rms_error(sim, ref) / rms(ref)`.
pub fn relative_error(sim: &[f64], reference: &[f64]) -> Result<f64> {
    let e = rms_error(sim, reference)?;
    let r = rms(reference);
    if r == 0.0 {
        return Err(Error::Metric("reference trace is identically zero".into()));
    }
    Ok(e / r)
}

/// Linear interpolation of `(times, values)` at `at`; `None` outside the sampled span.
pub fn interpolate_at(times: &[f64], values: &[f64], at: f64) -> Option<f64> {
    let n = times.len();
    if n == 0 || at < times[0] || at > times[n - 1] {
        return None;
    }
    let hi = times.partition_point(|&t| t < at);
    if times[hi] == at {
        return Some(values[hi]);
    }
    let (t0, t1) = (times[hi - 1], times[hi]);
    let w = if t1 > t0 { (at - t0) / (t1 - t0) } else { 0.0 };
    Some(values[hi - 1] + (values[hi] - values[hi - 1]) * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Analog Butterworth band-pass magnitude at the prewarped frequency.
    fn analog_magnitude(f: f64, f_lo: f64, f_hi: f64, fs: f64, order: i32) -> f64 {
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (w, wl, wh) = (warp(f), warp(f_lo), warp(f_hi));
        let w0sq = wl * wh;
        let x = (w * w - w0sq) / (w * (wh - wl));
        1.0 / (1.0 + x.powi(2 * order)).sqrt()
    }

    fn sine(f: f64, dt: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 * dt).sin()).collect()
    }

    #[test]
    fn digital_response_matches_analog_prototype() {
        let fs = 10.0;
        let bp = ButterworthBandpass::design(4, 0.02, 0.06, fs).unwrap();
        for f in [0.005, 0.01, 0.02, 0.03, 0.04, 0.06, 0.1, 0.5, 2.0] {
            let want = analog_magnitude(f, 0.02, 0.06, fs, 4);
            let got = bp.magnitude(f);
            assert!((got - want).abs() < 1e-6, "f={f}: {got} vs {want}");
        }
        // -3 dB at both corners
        assert!((bp.magnitude(0.02) - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((bp.magnitude(0.06) - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn passband_sine_preserved() {
        let dt = 0.1;
        let x = sine(0.04, dt, 20_000);
        let y = bandpass(&x, dt, 0.02, 0.06).unwrap();
        let expected = analog_magnitude(0.04, 0.02, 0.06, 10.0, 4).powi(2);
        let mid = &y[8_000..12_000];
        let amp = mid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((amp - 1.0).abs() < 0.05, "amplitude {amp}");
        assert!((amp - expected).abs() < 0.01, "amplitude {amp} vs response {expected}");
    }

    #[test]
    fn stopband_sine_attenuated() {
        let dt = 0.1;
        let x = sine(0.5, dt, 20_000);
        let y = bandpass(&x, dt, 0.02, 0.06).unwrap();
        let amp = y[8_000..12_000].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(20.0 * amp.log10() < -20.0, "amplitude {amp}");
    }

    #[test]
    fn zero_trace_stays_zero() {
        let y = bandpass(&[0.0; 500], 0.1, 0.02, 0.06).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
        assert_eq!(y.len(), 500);
        assert!(bandpass(&[], 0.1, 0.02, 0.06).unwrap().is_empty());
    }

    #[test]
    fn corner_above_nyquist_rejected() {
        assert!(bandpass(&[0.0; 10], 0.1, 0.02, 5.0).is_err());
        assert!(bandpass(&[0.0; 10], 0.1, 0.06, 0.02).is_err());
        assert!(bandpass(&[0.0; 10], 0.1, 0.0, 0.02).is_err());
    }

    #[test]
    fn zero_phase() {
        // A symmetric pulse stays symmetric about its centre.
        let (n, c) = (20_001, 10_000);
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 - c as f64) * 0.1;
                (-t * t / 200.0).exp()
            })
            .collect();
        let y = bandpass(&x, 0.1, 0.02, 0.06).unwrap();
        for d in [10usize, 100, 300, 1000] {
            assert!((y[c - d] - y[c + d]).abs() < 1e-9, "{} vs {}", y[c - d], y[c + d]);
        }
    }

    proptest! {
        #[test]
        fn bandpass_is_linear(
            xs in proptest::collection::vec(-1.0f64..1.0, 300),
            ys in proptest::collection::vec(-1.0f64..1.0, 300),
            a in -3.0f64..3.0, b in -3.0f64..3.0,
        ) {
            let combo: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| a * x + b * y).collect();
            let lhs = bandpass(&combo, 0.1, 0.02, 0.06).unwrap();
            let fx = bandpass(&xs, 0.1, 0.02, 0.06).unwrap();
            let fy = bandpass(&ys, 0.1, 0.02, 0.06).unwrap();
            let scale = lhs.iter().fold(1e-30f64, |m, v| m.max(v.abs()));
            for i in 0..lhs.len() {
                let rhs = a * fx[i] + b * fy[i];
                prop_assert!((lhs[i] - rhs).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn metric_examples() {
        let r = [1.0, -2.0, 3.0, 0.5];
        assert_eq!(rms_error(&r, &r).unwrap(), 0.0);
        assert_eq!(rms_error(&[2.5; 4], &[0.0; 4]).unwrap(), 2.5);
        let e = 0.3;
        let sim: Vec<f64> = r.iter().enumerate().map(|(i, v)| v + if i % 2 == 0 { e } else { -e }).collect();
        assert!((rms_error(&sim, &r).unwrap() - e).abs() < 1e-15);
        assert!(rms_error(&r, &r[..3]).is_err());

        assert_eq!(relative_error(&r, &r).unwrap(), 0.0);
        let twice: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        assert!((relative_error(&twice, &r).unwrap() - 1.0).abs() < 1e-15);
        assert!((relative_error(&[0.0; 4], &r).unwrap() - 1.0).abs() < 1e-15);
        assert!(relative_error(&r, &[0.0; 4]).is_err());
    }

    #[test]
    fn interpolation() {
        let t = [0.0, 1.0, 2.0];
        let v = [0.0, 10.0, 30.0];
        assert_eq!(interpolate_at(&t, &v, 0.5), Some(5.0));
        assert_eq!(interpolate_at(&t, &v, 2.0), Some(30.0));
        assert_eq!(interpolate_at(&t, &v, 0.0), Some(0.0));
        assert_eq!(interpolate_at(&t, &v, 1.5), Some(20.0));
        assert_eq!(interpolate_at(&t, &v, 2.5), None);
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin() * 1e-7).collect();
        for (a, b) in t.iter().zip(&v) {
            assert_eq!(interpolate_at(&t, &v, *a), Some(*b));
        }
    }
}
