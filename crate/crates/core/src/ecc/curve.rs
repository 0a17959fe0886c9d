use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An Euler characteristic curve on `[0, T]`, stored as a right-continuous
/// integer step function.
///
/// The curve is 0 before the first breakpoint and equals `values[k]` on
/// `[breakpoints[k], breakpoints[k + 1])`; the last value holds through `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ECCurve {
    horizon: f64,
    breakpoints: Vec<f64>,
    values: Vec<i64>,
}

impl ECCurve {
    pub fn new(horizon: f64, breakpoints: Vec<f64>, values: Vec<i64>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Validation(format!("horizon must be positive, got {horizon}")));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::Validation(
                "breakpoints and values differ in length".into(),
            ));
        }
        if breakpoints.iter().any(|&b| !(0.0..=horizon).contains(&b)) {
            return Err(Error::Validation("breakpoint outside [0, T]".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("breakpoints must strictly increase".into()));
        }
        let mut prev = 0;
        for &v in &values {
            if v == prev {
                return Err(Error::Validation("redundant breakpoint".into()));
            }
            prev = v;
        }
        Ok(Self {
            horizon,
            breakpoints,
            values,
        })
    }

    /// The identically-zero curve.
    pub fn zero(horizon: f64) -> Self {
        Self {
            horizon,
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    /// The curve equal to `value` on all of `[0, T]`.
    pub fn constant(horizon: f64, value: i64) -> Self {
        Self::from_jumps(horizon, [(0.0, value)])
    }

    /// Builds a curve from `(level, jump)` events. Levels are clamped into
    /// `[0, T]`; jumps at equal levels merge into a single net jump.
    pub fn from_jumps(horizon: f64, jumps: impl IntoIterator<Item = (f64, i64)>) -> Self {
        let mut events: Vec<(f64, i64)> = jumps
            .into_iter()
            .filter(|&(_, j)| j != 0)
            .map(|(t, j)| (t.clamp(0.0, horizon), j))
            .collect();
        events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        let mut current = 0i64;
        let mut i = 0;
        while i < events.len() {
            let t = events[i].0;
            let mut net = 0;
            while i < events.len() && events[i].0 == t {
                net += events[i].1;
                i += 1;
            }
            if net != 0 {
                current += net;
                breakpoints.push(t);
                values.push(current);
            }
        }
        Self {
            horizon,
            breakpoints,
            values,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// χ at level `t` (right-continuous).
    pub fn value_at(&self, t: f64) -> i64 {
        match self.breakpoints.partition_point(|&b| b <= t) {
            0 => 0,
            k => self.values[k - 1],
        }
    }

    pub fn terminal_value(&self) -> i64 {
        self.values.last().copied().unwrap_or(0)
    }

    /// `sup_t |χ_t|`.
    pub fn sup_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Maximal constant pieces `(start, end, value)` covering `[0, T]`,
    /// including the leading zero piece when the first breakpoint is > 0.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, i64)> + '_ {
        let lead = match self.breakpoints.first() {
            Some(&b) if b > 0.0 => Some((0.0, b, 0)),
            None => Some((0.0, self.horizon, 0)),
            _ => None,
        };
        let n = self.breakpoints.len();
        lead.into_iter().chain((0..n).map(move |k| {
            let end = if k + 1 < n {
                self.breakpoints[k + 1]
            } else {
                self.horizon
            };
            (self.breakpoints[k], end, self.values[k])
        }))
    }

    /// `∫_0^t χ_τ dτ`, exact.
    pub fn integral_to(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        let mut acc = 0.0;
        for (a, b, v) in self.segments() {
            if a >= t {
                break;
            }
            acc += v as f64 * (b.min(t) - a);
        }
        acc
    }

    /// Pointwise sum of two curves on the same horizon.
    pub fn add(&self, other: &ECCurve) -> Result<ECCurve> {
        if self.horizon != other.horizon {
            return Err(Error::GridMismatch(format!(
                "curve horizons differ: {} vs {}",
                self.horizon, other.horizon
            )));
        }
        Ok(Self::from_jumps(
            self.horizon,
            self.jumps().chain(other.jumps()),
        ))
    }

    /// The curve's jumps `(breakpoint, value change)`.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, i64)> + '_ {
        let mut prev = 0;
        self.breakpoints
            .iter()
            .zip(&self.values)
            .map(move |(&b, &v)| {
                let j = v - prev;
                prev = v;
                (b, j)
            })
    }
}

/// True iff `sup_t |χ_t| ≤ bound`.
pub fn ecc_bounds_check(curve: &ECCurve, bound: f64) -> bool {
    curve.sup_abs() as f64 <= bound
}
