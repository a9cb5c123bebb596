//! Field trajectories `t ↦ u(t)` on a time grid.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;

/// Closed-form evaluation `t ↦ u(t)`.
pub type Closure = Arc<dyn Fn(f64) -> Result<SpectralField> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Linear in the coefficients between neighbouring samples.
    PiecewiseLinear,
    /// Computable at any `t ≥ 0` from a closure.
    ExactClosure,
}

/// Samples on strictly increasing nonnegative times, optionally backed by an
/// exact closure.
#[derive(Clone)]
pub struct TimeSampledField {
    grid: TorusGrid,
    ncomp: usize,
    times: Vec<f64>,
    samples: Vec<SpectralField>,
    closure: Option<Closure>,
}

impl fmt::Debug for TimeSampledField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeSampledField")
            .field("grid", &self.grid)
            .field("ncomp", &self.ncomp)
            .field("samples", &self.times.len())
            .field("interpolation", &self.interpolation())
            .finish()
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::TimeGrid("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::TimeGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

impl TimeSampledField {
    pub fn sampled(times: Vec<f64>, samples: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() || times.len() != samples.len() {
            return Err(Error::TimeGrid(format!(
                "{} times for {} samples",
                times.len(),
                samples.len()
            )));
        }
        check_times(&times)?;
        let grid = *samples[0].grid();
        let ncomp = samples[0].ncomp();
        for s in &samples[1..] {
            grid.ensure_same(s.grid())?;
            if s.ncomp() != ncomp {
                return Err(Error::Dimension("samples differ in component count".into()));
            }
        }
        Ok(Self {
            grid,
            ncomp,
            times,
            samples,
            closure: None,
        })
    }

    /// Exact-closure trajectory, sampled at `times` (which may be empty).
    pub fn exact(grid: TorusGrid, ncomp: usize, closure: Closure, times: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        let samples = times.iter().map(|&t| closure(t)).collect::<Result<Vec<_>>>()?;
        for s in &samples {
            grid.ensure_same(s.grid())?;
        }
        Ok(Self {
            grid,
            ncomp,
            times,
            samples,
            closure: Some(closure),
        })
    }

    /// The identically zero trajectory (exact).
    pub fn zero(grid: TorusGrid, ncomp: usize) -> Self {
        let z = SpectralField::zeros(grid, ncomp);
        Self {
            grid,
            ncomp,
            times: Vec::new(),
            samples: Vec::new(),
            closure: Some(Arc::new(move |_| Ok(z.clone()))),
        }
    }

    pub fn interpolation(&self) -> Interpolation {
        if self.closure.is_some() {
            Interpolation::ExactClosure
        } else {
            Interpolation::PiecewiseLinear
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[SpectralField] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn closure(&self) -> Option<&Closure> {
        self.closure.as_ref()
    }

    /// Last sample time, if any.
    pub fn t_end(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Whether `at(t)` is defined for all `t ∈ [0, t_end]`.
    pub fn covers(&self, t_end: f64) -> bool {
        if self.closure.is_some() {
            return true;
        }
        let slack = 1e-12 * t_end.abs().max(1.0);
        self.times[0] <= slack && *self.times.last().unwrap() >= t_end - slack
    }

    pub fn at(&self, t: f64) -> Result<SpectralField> {
        if let Some(c) = &self.closure {
            return c(t);
        }
        let times = &self.times;
        let slack = 1e-12 * t.abs().max(1.0);
        let last = times.len() - 1;
        if t < times[0] - slack || t > times[last] + slack {
            return Err(Error::TimeGrid(format!(
                "t = {t} outside sampled range [{}, {}]",
                times[0], times[last]
            )));
        }
        if t <= times[0] {
            return Ok(self.samples[0].clone());
        }
        if t >= times[last] {
            return Ok(self.samples[last].clone());
        }
        let hi = times.partition_point(|&s| s <= t);
        let lo = hi - 1;
        if times[lo] == t {
            return Ok(self.samples[lo].clone());
        }
        let w = (t - times[lo]) / (times[hi] - times[lo]);
        let mut out = self.samples[lo].scaled(1.0 - w);
        out.axpy(w, &self.samples[hi])?;
        Ok(out)
    }

    /// Replaces the stored samples with evaluations at new `times`.
    pub fn resampled(&self, times: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        let samples = times.iter().map(|&t| self.at(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid,
            ncomp: self.ncomp,
            times,
            samples,
            closure: self.closure.clone(),
        })
    }

    /// Sample-wise sum of trajectories sharing one time grid.
    pub fn sum(parts: &[&TimeSampledField]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::TimeGrid("empty sum of trajectories".into()))?;
        let mut samples = first.samples.clone();
        for p in &parts[1..] {
            if p.times != first.times {
                return Err(Error::TimeGrid("trajectories have different time grids".into()));
            }
            for (s, q) in samples.iter_mut().zip(&p.samples) {
                s.axpy(1.0, q)?;
            }
        }
        Self::sampled(first.times.clone(), samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::apply_heat;
    use alloc::vec;

    fn mode() -> SpectralField {
        let g = TorusGrid::cube(2, 8).unwrap();
        let mut u = SpectralField::zeros(g, 2);
        u.add_cos(1, [1, 1, 0], 1.0).unwrap();
        u
    }

    #[test]
    fn exact_closure_reproduces_samples() {
        let u = mode();
        let g = *u.grid();
        let base = u.clone();
        let tr = TimeSampledField::exact(
            g,
            2,
            Arc::new(move |t| apply_heat(&base, t)),
            vec![0.0, 0.1, 0.5],
        )
        .unwrap();
        assert_eq!(tr.interpolation(), Interpolation::ExactClosure);
        for (t, s) in tr.times().iter().zip(tr.samples()) {
            assert!(tr.at(*t).unwrap().sub(s).unwrap().max_amplitude() <= 1e-12);
        }
    }

    #[test]
    fn linear_interpolation_and_range() {
        let u = mode();
        let tr = TimeSampledField::sampled(vec![0.0, 1.0], vec![u.clone(), u.scaled(3.0)]).unwrap();
        let mid = tr.at(0.5).unwrap();
        assert!(mid.sub(&u.scaled(2.0)).unwrap().max_amplitude() < 1e-15);
        assert!(matches!(tr.at(1.5), Err(Error::TimeGrid(_))));
        assert!(TimeSampledField::sampled(vec![0.0, 0.0], vec![u.clone(), u]).is_err());
    }
}
