use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default integration step, seconds.
pub const DEFAULT_DT: f64 = 1e-3;

/// States sampled on a uniform grid, as produced by [`integrate_fixed_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Series of one state component.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[i]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Number of steps covering `[0, t_end]` with step `dt`.
pub(crate) fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive and finite, got {dt}")));
    }
    if !(t_end >= dt && t_end.is_finite()) {
        return Err(Error::invalid(format!("duration {t_end} must be at least one step ({dt})")));
    }
    Ok((t_end / dt + 1e-9).floor() as usize)
}

/// Classical fourth-order Runge–Kutta with a fixed step.
///
/// `dynamics(t, x, u, dx)` writes the state derivative into `dx`, where `u`
/// is `input(t)`. Samples are taken at `t_k = k * dt`, including `t = 0`.
/// Any non-finite state aborts with [`Error::Divergence`] carrying the time
/// of the offending sample.
pub fn integrate_fixed_step<F, U>(
    mut dynamics: F,
    x0: &[f64],
    mut input: U,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], f64, &mut [f64]),
    U: FnMut(f64) -> f64,
{
    let steps = step_count(dt, t_end)?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { time: 0.0 });
    }
    let n = x0.len();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];

    times.push(0.0);
    states.push(x.clone());
    for k in 0..steps {
        let t = k as f64 * dt;
        let half = t + 0.5 * dt;
        let next = (k + 1) as f64 * dt;

        dynamics(t, &x, input(t), &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        let u_half = input(half);
        dynamics(half, &tmp, u_half, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        dynamics(half, &tmp, u_half, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        dynamics(next, &tmp, input(next), &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: next });
        }
        times.push(next);
        states.push(x.clone());
    }
    Ok(Trajectory { dt, times, states })
}

/// Clamp of `u` to `[lo, hi]`.
pub fn saturate(u: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::invalid(format!("saturation bounds reversed: [{lo}, {hi}]")));
    }
    Ok(u.clamp(lo, hi))
}

/// Named, equal-length channels on a shared uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    dt: f64,
    time: Vec<f64>,
    channels: Vec<Channel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, time: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("time series step must be positive"));
        }
        if time.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        Ok(TimeSeries { dt, time, channels: Vec::new() })
    }

    pub fn with_channel(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.push_channel(name, values)?;
        Ok(self)
    }

    pub fn push_channel(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.time.len() {
            return Err(Error::invalid(format!(
                "channel `{name}` has {} samples, expected {}",
                values.len(),
                self.time.len()
            )));
        }
        if self.channel(name).is_some() {
            return Err(Error::invalid(format!("duplicate channel `{name}`")));
        }
        self.channels.push(Channel { name: name.to_string(), values });
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }
}
