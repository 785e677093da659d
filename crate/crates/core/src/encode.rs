//! Observation → network input, channels first (`[C, H, W]`), zero padded
//! up to the network's grid size.

use crate::error::{Error, Result};
use crate::gridworld::Observation;

fn check(obs: &Observation, width: usize, height: usize) -> Result<()> {
    if obs.width > width || obs.height > height {
        return Err(Error::Usage(format!(
            "observation {}×{} does not fit network input {width}×{height}",
            obs.width, obs.height
        )));
    }
    Ok(())
}

/// Write `f(channel values)` for every cell into channels
/// `first..first + 4` of `out`.
fn write(
    out: &mut [f64],
    first: usize,
    width: usize,
    height: usize,
    obs: &Observation,
    value: impl Fn(usize, usize, usize) -> f64,
) {
    let plane = width * height;
    for c in 0..4 {
        let base = (first + c) * plane;
        for y in 0..obs.height {
            for x in 0..obs.width {
                out[base + y * width + x] = value(x, y, c);
            }
        }
    }
}

/// Raw elementwise difference `obs − prev`, 4 channels.
pub fn frame_diff(obs: &Observation, prev: &Observation, width: usize, height: usize) -> Result<Vec<f64>> {
    check(obs, width, height)?;
    let mut out = vec![0.0; 4 * width * height];
    write(&mut out, 0, width, height, obs, |x, y, c| {
        (obs.get(x, y)[c] - prev.get(x, y)[c]) as f64
    });
    Ok(out)
}

/// The observation itself followed by the frame difference, 8 channels.
pub fn obs_and_diff(obs: &Observation, prev: &Observation, width: usize, height: usize) -> Result<Vec<f64>> {
    check(obs, width, height)?;
    let mut out = vec![0.0; 8 * width * height];
    write(&mut out, 0, width, height, obs, |x, y, c| obs.get(x, y)[c] as f64);
    write(&mut out, 4, width, height, obs, |x, y, c| {
        (obs.get(x, y)[c] - prev.get(x, y)[c]) as f64
    });
    Ok(out)
}
