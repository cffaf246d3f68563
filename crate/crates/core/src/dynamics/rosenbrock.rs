//! RODAS4: L-stable Rosenbrock method of order 4 with an embedded order-3
//! solution (Hairer & Wanner's coefficients), specialised to a constant
//! linear generator y' = R y in real Hermitian coordinates.
//!
//! Step sizes are quantised to powers of 2^(1/4) so the LU factors of
//! W = I/(γh) − R can be reused across steps. Steps are shortened to land
//! on sample times: a polynomial interpolant across one large stiff step
//! amplifies the decayed fast components and breaks positivity.

use ndarray::{Array1, Array2};

use super::{DynamicsError, IntegratorConfig, StepStats};
use crate::linalg::RealLu;

const GAMMA: f64 = 0.25;

const A21: f64 = 1.544;
const A31: f64 = 0.946_678_528_081_582_6;
const A32: f64 = 0.255_701_169_898_328_4;
const A41: f64 = 3.314_825_187_068_521;
const A42: f64 = 2.896_124_015_972_201;
const A43: f64 = 0.998_641_913_997_781_7;
const A51: f64 = 1.221_224_509_226_641;
const A52: f64 = 6.019_134_481_288_629;
const A53: f64 = 12.537_083_329_320_87;
const A54: f64 = -0.687_886_036_105_895;

const C21: f64 = -5.6688;
const C31: f64 = -2.430_093_356_833_875;
const C32: f64 = -0.206_359_915_709_191_5;
const C41: f64 = -0.107_352_905_815_137_5;
const C42: f64 = -9.594_562_251_023_355;
const C43: f64 = -20.470_286_148_096_16;
const C51: f64 = 7.496_443_313_967_647;
const C52: f64 = -10.246_804_314_643_52;
const C53: f64 = -33.999_903_528_199_05;
const C54: f64 = 11.708_908_932_061_6;
const C61: f64 = 8.083_246_795_921_522;
const C62: f64 = -7.981_132_988_064_893;
const C63: f64 = -31.521_594_328_743_71;
const C64: f64 = 16.319_305_431_231_36;
const C65: f64 = -6.058_818_238_834_054;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 6.0;
const LU_CACHE: usize = 4;
const STEPS_PER_OCTAVE: f64 = 4.0;

fn quantize(h: f64) -> f64 {
    let k = (STEPS_PER_OCTAVE * h.log2()).floor();
    let q = (k / STEPS_PER_OCTAVE).exp2();
    // floor of a log can land one notch high through rounding
    if q > h { ((k - 1.0) / STEPS_PER_OCTAVE).exp2() } else { q }
}

fn real_error_norm(err: &Array1<f64>, y0: &Array1<f64>, y1: &Array1<f64>, rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

pub(crate) struct Rodas4<'a> {
    r: &'a Array2<f64>,
    cfg: &'a IntegratorConfig,
    cache: Vec<(f64, RealLu)>,
    h: f64,
    pub stats: StepStats,
}

impl<'a> Rodas4<'a> {
    pub fn new(r: &'a Array2<f64>, cfg: &'a IntegratorConfig) -> Self {
        Self { r, cfg, cache: Vec::new(), h: 0.0, stats: StepStats::default() }
    }

    fn factor(&mut self, h: f64) -> usize {
        if let Some(pos) = self.cache.iter().position(|(hc, _)| *hc == h) {
            return pos;
        }
        let n = self.r.nrows();
        let mut w = self.r.mapv(|x| -x);
        let diag = 1.0 / (GAMMA * h);
        for i in 0..n {
            w[[i, i]] += diag;
        }
        if self.cache.len() >= LU_CACHE {
            self.cache.remove(0);
        }
        self.cache.push((h, RealLu::new(&w)));
        self.stats.factorizations += 1;
        self.cache.len() - 1
    }

    /// One trial step; returns (y_new, error estimate vector).
    fn step(&mut self, y: &Array1<f64>, h: f64) -> (Array1<f64>, Array1<f64>) {
        let idx = self.factor(h);
        let lu = &self.cache[idx].1;
        let r = self.r;
        let f = |v: &Array1<f64>| r.dot(v);
        let solve = |mut b: Array1<f64>| {
            lu.solve_in_place(&mut b);
            b
        };
        let inv_h = 1.0 / h;

        let k1 = solve(f(y));
        let k2 = solve(f(&(y + &(&k1 * A21))) + &k1 * (C21 * inv_h));
        let y3 = y + &(&k1 * A31) + &(&k2 * A32);
        let k3 = solve(f(&y3) + (&k1 * C31 + &k2 * C32) * inv_h);
        let y4 = y + &(&k1 * A41) + &(&k2 * A42) + &(&k3 * A43);
        let k4 = solve(f(&y4) + (&k1 * C41 + &k2 * C42 + &k3 * C43) * inv_h);
        let y5 = y + &(&k1 * A51) + &(&k2 * A52) + &(&k3 * A53) + &(&k4 * A54);
        let k5 = solve(f(&y5) + (&k1 * C51 + &k2 * C52 + &k3 * C53 + &k4 * C54) * inv_h);
        let y6 = &y5 + &k5;
        let k6 = solve(f(&y6) + (&k1 * C61 + &k2 * C62 + &k3 * C63 + &k4 * C64 + &k5 * C65) * inv_h);
        self.stats.evaluations += 6;
        (&y6 + &k6, k6)
    }

    fn initial_step(&self, y: &Array1<f64>) -> f64 {
        if let Some(h) = self.cfg.initial_step {
            return h;
        }
        let fy = self.r.dot(y);
        let zeros = Array1::zeros(y.len());
        let d0 = real_error_norm(y, &zeros, &zeros, self.cfg.rtol, self.cfg.atol);
        let d1 = real_error_norm(&fy, y, y, self.cfg.rtol, self.cfg.atol);
        if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }
    }

    /// Integrate from `t` to `t_end`, calling `sample(t_s, y_s)` for every
    /// sample time in (t, t_end] in order.
    pub fn integrate(
        &mut self,
        t: &mut f64,
        y: &mut Array1<f64>,
        t_end: f64,
        samples: &[f64],
        sample: &mut dyn FnMut(f64, &Array1<f64>),
    ) -> Result<(), DynamicsError> {
        let max_step = self.cfg.max_step.unwrap_or(f64::INFINITY);
        if self.h == 0.0 {
            self.h = self.initial_step(y).min(max_step);
        }
        let mut next_sample = samples.iter().position(|&s| s > *t).unwrap_or(samples.len());
        let mut rejected_last = false;

        while *t < t_end {
            let target = samples.get(next_sample).map_or(t_end, |&s| s.min(t_end));
            let remaining = target - *t;
            let mut h = quantize(self.h.min(max_step));
            if h * 1.01 >= remaining {
                h = remaining;
            }
            if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(DynamicsError::StepSizeUnderflow { t: *t, h });
            }
            if self.stats.accepted + self.stats.rejected >= self.cfg.max_steps {
                return Err(DynamicsError::TooManySteps { t: *t, steps: self.cfg.max_steps });
            }

            let (y_new, err_vec) = self.step(y, h);
            let err = real_error_norm(&err_vec, y, &y_new, self.cfg.rtol, self.cfg.atol);
            if err <= 1.0 {
                let t_new = if h == remaining { target } else { *t + h };
                while next_sample < samples.len() && samples[next_sample] <= t_new {
                    sample(samples[next_sample], &y_new);
                    next_sample += 1;
                }
                *t = t_new;
                *y = y_new;
                self.stats.accepted += 1;
                let fac = if err == 0.0 { FAC_MAX } else { SAFETY * err.powf(-0.25) };
                let fac = fac.clamp(FAC_MIN, if rejected_last { 1.0 } else { FAC_MAX });
                rejected_last = false;
                if h != remaining || h >= self.h {
                    // keep the current step (and its factorization) unless
                    // the controller asks for a real change
                    if !(1.0..1.5).contains(&fac) {
                        self.h = h * fac;
                    } else {
                        self.h = h;
                    }
                }
            } else {
                self.h = h * (SAFETY * err.powf(-0.25)).max(FAC_MIN);
                self.stats.rejected += 1;
                rejected_last = true;
            }
        }
        Ok(())
    }
}
