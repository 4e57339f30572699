//! Trace functionals under free evolution as trigonometric polynomials.
//!
//! With `H₀` diagonal, `Tr[B ρ(t)] = Σ_ab B_ba ρ_ab e^{-i(E_a-E_b)t}`. Grouping
//! by Bohr frequency turns every evaluation into a short cosine sum, so
//! dense sampling over a period costs almost nothing.

use nalgebra::ComplexField;
use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real, C};

const FREQ_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TrigSignal<T: Real> {
    constant: T,
    /// `(ω > 0, c_ω)` with `F(t) = constant + Σ 2 Re[c_ω e^{-iωt}]`.
    terms: Vec<(T, C<T>)>,
}

/// Location and value of a maximum over a search window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub time: T,
    pub value: T,
    /// Set when the functional is constant over the window.
    pub flat: bool,
}

/// Measure of the super-threshold set over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage<T> {
    pub total: T,
    pub longest: T,
}

/// Extracts the diagonal of `h0`, failing if it has off-diagonal entries.
pub fn diagonal_energies<T: Real>(h0: &CMatrix<T>) -> Result<Vec<T>> {
    let n = h0.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && h0[(i, j)].modulus() != T::zero() {
                return Err(Error::InvalidInput(
                    "free propagation requires H0 diagonal in the stored basis".into(),
                ));
            }
        }
    }
    Ok((0..n).map(|i| h0[(i, i)].re).collect())
}

impl<T: Real> TrigSignal<T> {
    /// Builds `t ↦ Tr[B ρ(t)]` for `ρ(t) = e^{-iH₀t} ρ e^{iH₀t}`.
    pub fn new(rho: &CMatrix<T>, b: &CMatrix<T>, energies: &[T]) -> Self {
        let n = energies.len();
        // Distinct energy levels with their members.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| energies[x].partial_cmp(&energies[y]).unwrap());
        let mut levels: Vec<(T, Vec<usize>)> = Vec::new();
        for &k in &order {
            match levels.last_mut() {
                Some((e, members)) if (energies[k] - *e).abs() <= T::lit(FREQ_MERGE_TOL) => {
                    members.push(k)
                }
                _ => levels.push((energies[k], vec![k])),
            }
        }

        let mut constant = T::zero();
        for (_, members) in &levels {
            for &a in members {
                for &bb in members {
                    constant += (b[(bb, a)] * rho[(a, bb)]).re;
                }
            }
        }

        let mut raw: Vec<(T, C<T>)> = Vec::new();
        for (p, (ep, mp)) in levels.iter().enumerate() {
            for (eq, mq) in &levels[..p] {
                let mut c = C::new(T::zero(), T::zero());
                for &a in mp {
                    for &bb in mq {
                        c += b[(bb, a)] * rho[(a, bb)];
                    }
                }
                raw.push((*ep - *eq, c));
            }
        }
        raw.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut terms: Vec<(T, C<T>)> = Vec::new();
        for (w, c) in raw {
            match terms.last_mut() {
                Some((w0, c0)) if (w - *w0).abs() <= T::lit(FREQ_MERGE_TOL) => *c0 += c,
                _ => terms.push((w, c)),
            }
        }
        terms.retain(|(_, c)| c.modulus() > T::zero());
        Self { constant, terms }
    }

    pub fn value(&self, t: T) -> T {
        let two = T::lit(2.0);
        self.terms.iter().fold(self.constant, |acc, &(w, c)| {
            let (s, co) = (w * t).sin_cos();
            acc + two * (c.re * co + c.im * s)
        })
    }

    pub fn derivative(&self, t: T) -> T {
        let two = T::lit(2.0);
        self.terms.iter().fold(T::zero(), |acc, &(w, c)| {
            let (s, co) = (w * t).sin_cos();
            acc + two * w * (c.im * co - c.re * s)
        })
    }

    pub fn constant(&self) -> T {
        self.constant
    }

    pub fn max_frequency(&self) -> T {
        self.terms.last().map_or(T::zero(), |t| t.0)
    }

    /// Earliest global maximum over `[start, start + len)`: dense sampling,
    /// then golden-section refinement of the best sample's bracket.
    pub fn global_max(&self, start: T, len: T, samples: usize, tol: T) -> Peak<T> {
        let step = len / T::of_usize(samples);
        let values: Vec<T> = (0..samples)
            .map(|i| self.value(start + step * T::of_usize(i)))
            .collect();
        let (mut hi, mut lo) = (values[0], values[0]);
        for &v in &values {
            hi = hi.max(v);
            lo = lo.min(v);
        }
        if hi - lo <= T::lit(1e-14) * T::one().max(hi.abs()) {
            return Peak {
                time: start,
                value: values[0],
                flat: true,
            };
        }
        let tie = T::lit(1e-12);
        let best = values.iter().position(|&v| v >= hi - tie).unwrap();
        let t_best = start + step * T::of_usize(best);
        let a = (t_best - step).max(start);
        let b = (t_best + step).min(start + len);
        // A bracketed sign change of the derivative pins the peak time to full
        // precision; a value-only search stalls near sqrt(eps) on a flat top.
        let t_ref = if self.derivative(a) > T::zero() && self.derivative(b) < T::zero() {
            bisect_root(|t| self.derivative(t), a, b, tol)
        } else {
            golden_max(|t| self.value(t), a, b, tol).0
        };
        let v_ref = self.value(t_ref);
        if v_ref >= values[best] - tie {
            Peak {
                time: t_ref,
                value: v_ref,
                flat: false,
            }
        } else {
            Peak {
                time: t_best,
                value: values[best],
                flat: false,
            }
        }
    }

    /// Measure of `{t ∈ [start, start+len) : F(t) ≥ threshold}`, with crossings
    /// bisected to `tol`. The window is treated as one period, so an interval
    /// running off the end joins the one at the start for `longest`.
    pub fn coverage_above(&self, threshold: T, start: T, len: T, samples: usize, tol: T) -> Coverage<T> {
        let step = len / T::of_usize(samples);
        let at = |i: usize| start + step * T::of_usize(i);
        let above = |t: T| self.value(t) >= threshold;
        let flags: Vec<bool> = (0..=samples).map(|i| above(at(i))).collect();

        let crossing = |mut a: T, mut b: T, a_above: bool| {
            while b - a > tol {
                let mid = (a + b) / T::lit(2.0);
                if above(mid) == a_above {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            (a + b) / T::lit(2.0)
        };

        let mut intervals: Vec<(T, T)> = Vec::new();
        let mut open: Option<T> = if flags[0] { Some(start) } else { None };
        for i in 0..samples {
            if flags[i] != flags[i + 1] {
                let tc = crossing(at(i), at(i + 1), flags[i]);
                if flags[i] {
                    intervals.push((open.take().unwrap(), tc));
                } else {
                    open = Some(tc);
                }
            }
        }
        if let Some(s) = open {
            intervals.push((s, start + len));
        }

        let total = intervals.iter().fold(T::zero(), |acc, (a, b)| acc + (*b - *a));
        let mut lengths: Vec<T> = intervals.iter().map(|(a, b)| *b - *a).collect();
        if intervals.len() > 1 {
            let first = intervals[0];
            let last = intervals[intervals.len() - 1];
            if first.0 <= start && last.1 >= start + len {
                let joined = (first.1 - first.0) + (last.1 - last.0);
                lengths.pop();
                lengths[0] = joined;
            }
        }
        let longest = lengths.into_iter().fold(T::zero(), |a, b| a.max(b));
        Coverage { total, longest }
    }
}

/// Root of `f` in `[a, b]` given `f(a) > 0 > f(b)`.
fn bisect_root<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, tol: T) -> T {
    while b - a > tol {
        let mid = (a + b) / T::lit(2.0);
        if f(mid) > T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a + b) / T::lit(2.0)
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / T::lit(2.0);
    (t, f(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use std::f64::consts::PI;

    fn two_level(coh: C<f64>) -> (CMatrix<f64>, CMatrix<f64>, Vec<f64>) {
        let rho = CMatrix::from_row_slice(2, 2, &[cplx(0.6), coh, coh.conj(), cplx(0.4)]);
        let b = CMatrix::from_row_slice(2, 2, &[cplx(0.0), cplx(1.0), cplx(1.0), cplx(0.0)]);
        (rho, b, vec![0.0, 2.0])
    }

    #[test]
    fn matches_direct_evolution() {
        let (rho, b, e) = two_level(C::new(0.1, 0.2));
        let s = TrigSignal::new(&rho, &b, &e);
        for t in [0.0, 0.3, 1.1, 2.9] {
            let mut r = rho.clone();
            for i in 0..2 {
                for j in 0..2 {
                    r[(i, j)] *= C::new(0.0, -(e[i] - e[j]) * t).exp();
                }
            }
            let direct = crate::linalg::trace_product(&b, &r).re;
            assert!((s.value(t) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn argmax_single_cosine() {
        let coh = C::from_polar(0.2, 0.7);
        let (rho, b, e) = two_level(coh);
        let s = TrigSignal::new(&rho, &b, &e);
        let p = s.global_max(0.0, PI, 4096, 1e-10);
        // F(t) = 2 Re[B10 ρ01 e^{-i(E0-E1)t}] = 0.4 cos(2t + 0.7)
        let expected = (2.0 * PI - 0.7) / 2.0;
        assert!((p.time - expected).abs() < 2e-10);
        assert!((p.value - 0.4).abs() < 1e-12);
        let again = s.global_max(p.time + PI, PI, 4096, 1e-10);
        assert!((again.value - p.value).abs() < 1e-10);
        assert!((again.time - (p.time + PI)).abs() < 1e-8);
    }

    #[test]
    fn flat_signal_flagged() {
        let (mut rho, b, e) = two_level(C::new(0.0, 0.0));
        rho[(0, 0)] = cplx(1.0);
        let s = TrigSignal::new(&rho, &b, &e);
        let p = s.global_max(0.25, PI, 4096, 1e-10);
        assert!(p.flat);
        assert_eq!(p.time, 0.25);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (rho, b, e) = two_level(C::new(0.13, -0.05));
        let s = TrigSignal::new(&rho, &b, &e);
        let h = 1e-6;
        for t in [0.1, 0.9, 2.0] {
            let fd = (s.value(t + h) - s.value(t - h)) / (2.0 * h);
            assert!((fd - s.derivative(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn coverage_of_cosine() {
        // 0.4 cos(2t + 0.7) ≥ 0.2 on a third of each period.
        let (rho, b, e) = two_level(C::from_polar(0.2, 0.7));
        let s = TrigSignal::new(&rho, &b, &e);
        let c = s.coverage_above(0.2, 0.0, PI, 8192, 1e-12);
        assert!((c.total / PI - 1.0 / 3.0).abs() < 1e-9);
        assert!((c.longest - c.total).abs() < 1e-9);
    }

    #[test]
    fn golden_finds_parabola_top() {
        let (t, v) = golden_max(|x: f64| -(x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-10);
        // value-only search: time resolution is limited to about sqrt(eps)
        assert!((t - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
