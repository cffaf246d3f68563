//! Dormand–Prince 5(4) with FSAL and a standard I-controller.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{error_norm, DynamicsError, Generator, IntegratorConfig, StepStats};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
/// Fifth-order weights; also the last row of the tableau (FSAL).
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
/// Fifth minus fourth order weights, over k1..k7.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub(crate) struct DormandPrince<'a> {
    generator: &'a dyn Generator,
    cfg: &'a IntegratorConfig,
    k: Vec<Array2<C64>>,
    stage: Array2<C64>,
    h: f64,
    pub stats: StepStats,
}

fn combine(out: &mut Array2<C64>, y: &Array2<C64>, h: f64, coeffs: &[f64], k: &[Array2<C64>]) {
    out.assign(y);
    for (c, ki) in coeffs.iter().zip(k) {
        if *c != 0.0 {
            out.scaled_add(C64::new(h * c, 0.0), ki);
        }
    }
}

impl<'a> DormandPrince<'a> {
    pub fn new(generator: &'a dyn Generator, cfg: &'a IntegratorConfig) -> Self {
        let d = generator.dim();
        Self {
            generator,
            cfg,
            k: (0..7).map(|_| Array2::zeros((d, d))).collect(),
            stage: Array2::zeros((d, d)),
            h: 0.0,
            stats: StepStats::default(),
        }
    }

    fn initial_step(&mut self, t: f64, y: &Array2<C64>, direction_span: f64) -> f64 {
        if let Some(h) = self.cfg.initial_step {
            return h.min(self.cfg.max_step.unwrap_or(f64::INFINITY));
        }
        let (rtol, atol) = (self.cfg.rtol, self.cfg.atol);
        let zeros = Array2::zeros(y.dim());
        let d0 = error_norm(y, &zeros, &zeros, rtol, atol);
        let d1 = error_norm(&self.k[0], y, y, rtol, atol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(direction_span);
        let mut y1 = y.clone();
        y1.scaled_add(C64::new(h0, 0.0), &self.k[0]);
        let mut f1 = Array2::zeros(y.dim());
        self.generator.apply(t + h0, &y1, &mut f1);
        self.stats.evaluations += 1;
        let diff = &f1 - &self.k[0];
        let d2 = error_norm(&diff, y, y, rtol, atol) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(self.cfg.max_step.unwrap_or(f64::INFINITY))
    }

    /// Advance `y` from `t` to exactly `t_end`.
    pub fn advance(&mut self, t: &mut f64, y: &mut Array2<C64>, t_end: f64) -> Result<(), DynamicsError> {
        if self.stats.evaluations == 0 {
            self.generator.apply(*t, y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.h = self.initial_step(*t, y, t_end - *t);
        }
        let max_step = self.cfg.max_step.unwrap_or(f64::INFINITY);
        let mut y_new = Array2::zeros(y.dim());
        let mut err_vec = Array2::zeros(y.dim());
        let mut rejected_last = false;

        while *t < t_end {
            let remaining = t_end - *t;
            let mut h = self.h.min(max_step);
            // absorb a sliver left before t_end into this step
            let last = h * 1.01 >= remaining;
            if last {
                h = remaining;
            }
            if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(DynamicsError::StepSizeUnderflow { t: *t, h });
            }
            if self.stats.accepted + self.stats.rejected >= self.cfg.max_steps {
                return Err(DynamicsError::TooManySteps { t: *t, steps: self.cfg.max_steps });
            }

            let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
            for (s, coeffs) in rows.iter().enumerate() {
                let (done, rest) = self.k.split_at_mut(s + 1);
                combine(&mut self.stage, y, h, coeffs, done);
                self.generator.apply(*t + C[s + 1] * h, &self.stage, &mut rest[0]);
            }
            combine(&mut y_new, y, h, &B, &self.k[..6]);
            let t_new = if last { t_end } else { *t + h };
            self.generator.apply(t_new, &y_new, &mut self.k[6]);
            self.stats.evaluations += 6;

            err_vec.fill(C64::new(0.0, 0.0));
            for (e, ki) in E.iter().zip(&self.k) {
                if *e != 0.0 {
                    err_vec.scaled_add(C64::new(h * e, 0.0), ki);
                }
            }
            let err = error_norm(&err_vec, y, &y_new, self.cfg.rtol, self.cfg.atol);

            if err <= 1.0 {
                let mut fac = if err == 0.0 { FAC_MAX } else { SAFETY * err.powf(-0.2) };
                fac = fac.clamp(FAC_MIN, if rejected_last { 1.0 } else { FAC_MAX });
                *t = t_new;
                std::mem::swap(y, &mut y_new);
                self.k.swap(0, 6);
                self.stats.accepted += 1;
                rejected_last = false;
                // A step shortened to land on t_end says nothing about the
                // natural step length.
                if !last || h >= self.h {
                    self.h = h * fac;
                }
            } else {
                let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
                self.h = h * fac;
                self.stats.rejected += 1;
                rejected_last = true;
            }
        }
        Ok(())
    }

    /// Feed back a state modified between steps (e.g. re-symmetrized).
    pub fn reset_state(&mut self, t: f64, y: &Array2<C64>) {
        if self.stats.evaluations > 0 {
            self.generator.apply(t, y, &mut self.k[0]);
            self.stats.evaluations += 1;
        }
    }
}
