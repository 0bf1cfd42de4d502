//! Seeded synthetic weather scenes.
//!
//! A scene is a sum of Gaussian storm cells giving a storm-intensity field
//! `s ≥ 0`. Radar products are monotone transforms of `s`; lightning is
//! Poisson-sampled with a rate rising with VIL; satellite channels are
//! smoothed monotone functions of `s` plus cloud clutter; model fields are
//! low-frequency random fields weakly coupled to `s`. Scene `i` depends only
//! on `(seed, i)`, so generation parallelizes without changing the output.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PatchTensor;
use crate::error::{Error, Result};
use crate::rng::{child_rng, Rng};

pub const GRID: usize = 32;

pub const SAT_CHANNELS: [&str; 7] = [
    "cloud_top_height",
    "solar_zenith_angle",
    "vis_600nm",
    "ir_6.9um",
    "ir_7.3um",
    "ir_11.2um",
    "ir_13.3um",
];
const SAT_UNITS: [&str; 7] = ["km", "deg", "albedo", "K", "K", "K", "K"];

pub const LGHT_CHANNELS: [&str; 3] = ["lght_10min", "lght_20min", "lght_30min"];

pub const MOD_CHANNELS: [&str; 7] = [
    "temperature_2m",
    "pressure_msl",
    "dewpoint_2m",
    "cape",
    "u_wind_850",
    "v_wind_850",
    "precipitable_water",
];
const MOD_UNITS: [&str; 7] = ["K", "hPa", "K", "J/kg", "m/s", "m/s", "mm"];

pub const TARG_CHANNELS: [&str; 3] = ["VIL", "ET", "CR"];
const TARG_UNITS: [&str; 3] = ["kg/m2", "kft", "dBZ"];

/// Radar products from storm intensity: VIL, echo tops, composite reflectivity.
pub fn product_transforms(s: f64) -> [f64; 3] {
    let s = s.max(0.0);
    [
        30.0 * s.powf(1.5),
        50.0 * (1.0 - (-1.5 * s).exp()),
        65.0 * (1.0 - (-3.0 * s).exp()),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_scenes: usize,
    /// Storm cells per scene, drawn uniformly from this inclusive range.
    pub storms: (usize, usize),
    pub intensity: (f64, f64),
    /// Storm cell standard deviation in pixels.
    pub scale: (f64, f64),
    /// Expected strikes per pixel per 10-minute window where VIL = 30.
    pub lightning_rate: f64,
    /// Blur widths (pixels) of the 10/20/30-minute lightning histories.
    pub lightning_blur: [f64; 3],
    pub sat_smoothing: [f64; 7],
    pub sat_clutter: f64,
    /// Correlation length (pixels) of the model fields.
    pub model_length_scale: f64,
    /// Weight of the storm signal in the model fields.
    pub model_coupling: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(n_scenes: usize, seed: u64) -> Self {
        SyntheticConfig {
            n_scenes,
            storms: (1, 5),
            intensity: (0.2, 1.2),
            scale: (1.5, 5.0),
            lightning_rate: 0.6,
            lightning_blur: [1.0, 1.5, 2.0],
            sat_smoothing: [1.0, 4.0, 1.0, 1.5, 1.5, 1.0, 1.0],
            sat_clutter: 0.15,
            model_length_scale: 12.0,
            model_coupling: 0.3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let range_ok = |(lo, hi): (f64, f64)| lo > 0.0 && hi >= lo && hi.is_finite();
        if self.storms.0 > self.storms.1 {
            return Err(Error::invalid("storm count range is inverted"));
        }
        if !range_ok(self.intensity) || !range_ok(self.scale) {
            return Err(Error::invalid("intensity and scale ranges must be positive and ordered"));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.lightning_rate)
            || !positive(self.model_length_scale)
            || !(self.sat_clutter >= 0.0)
            || !(self.model_coupling >= 0.0)
            || !self.lightning_blur.iter().chain(&self.sat_smoothing).all(|&w| positive(w))
        {
            return Err(Error::invalid("rates, widths and length scales must be positive"));
        }
        Ok(())
    }
}

/// Satellite, lightning, model and target channel groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub sat: PatchTensor,
    pub lght: PatchTensor,
    pub model: PatchTensor,
    pub targ: PatchTensor,
}

impl SyntheticDataset {
    pub fn len(&self) -> usize {
        self.targ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targ.is_empty()
    }

    /// `(file stem, tensor)` pairs.
    pub fn parts(&self) -> [(&'static str, &PatchTensor); 4] {
        [
            ("sat", &self.sat),
            ("lght", &self.lght),
            ("mod", &self.model),
            ("targ", &self.targ),
        ]
    }
}

struct Scene {
    sat: Vec<f32>,
    lght: Vec<f32>,
    model: Vec<f32>,
    targ: Vec<f32>,
    strikes: u64,
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let scenes: Vec<Scene> = (0..cfg.n_scenes)
        .into_par_iter()
        .map(|i| generate_scene(cfg, &mut child_rng(cfg.seed, i as u64)))
        .collect();
    let strikes: Vec<u64> = scenes.iter().map(|s| s.strikes).collect();

    let build = |name: &str, names: &[&str], units: &[&str], pick: &dyn Fn(&Scene) -> &Vec<f32>| {
        let data: Vec<f32> = scenes.iter().flat_map(|s| pick(s).iter().copied()).collect();
        PatchTensor::new(
            name,
            [cfg.n_scenes, names.len(), GRID, GRID],
            names.iter().map(|s| s.to_string()).collect(),
            units.iter().map(|s| s.to_string()).collect(),
            data,
        )
        .map(|t| {
            t.with_provenance("generator", "synthetic-weather-v1".into())
                .with_provenance("seed", cfg.seed.into())
                .with_provenance("config", serde_json::to_value(cfg).expect("config serializes"))
        })
    };
    let lght = build("lght", &LGHT_CHANNELS, &["strikes/px"; 3], &|s| &s.lght)?
        .with_provenance("strike_counts", serde_json::to_value(&strikes)?);
    Ok(SyntheticDataset {
        sat: build("sat", &SAT_CHANNELS, &SAT_UNITS, &|s| &s.sat)?,
        lght,
        model: build("mod", &MOD_CHANNELS, &MOD_UNITS, &|s| &s.model)?,
        targ: build("targ", &TARG_CHANNELS, &TARG_UNITS, &|s| &s.targ)?,
    })
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn generate_scene(cfg: &SyntheticConfig, rng: &mut Rng) -> Scene {
    let n = GRID * GRID;
    let storms = rng.random_range(cfg.storms.0..=cfg.storms.1);
    let mut s = vec![0.0f64; n];
    for _ in 0..storms {
        let cx = rng.random::<f64>() * GRID as f64;
        let cy = rng.random::<f64>() * GRID as f64;
        let sigma = uniform(rng, cfg.scale);
        let amp = uniform(rng, cfg.intensity);
        for y in 0..GRID {
            for x in 0..GRID {
                let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                s[y * GRID + x] += amp * (-r2 / (2.0 * sigma * sigma)).exp();
            }
        }
    }

    let products: Vec<[f64; 3]> = s.iter().map(|&v| product_transforms(v)).collect();
    let mut targ = Vec::with_capacity(3 * n);
    for p in 0..3 {
        targ.extend(products.iter().map(|v| v[p] as f32));
    }

    // lightning: cumulative 10/20/30-minute strike histories
    let mut counts = vec![0.0f64; n];
    let mut lght = Vec::with_capacity(3 * n);
    let mut strikes = 0u64;
    for &width in &cfg.lightning_blur {
        for (c, prod) in counts.iter_mut().zip(&products) {
            let rate = cfg.lightning_rate * (prod[0] / 30.0).powi(2);
            if rate > 0.0 {
                let k = Poisson::new(rate).expect("positive rate").sample(rng);
                *c += k;
                strikes += k as u64;
            }
        }
        lght.extend(gaussian_blur(&counts, width).into_iter().map(|v| v as f32));
    }

    let cover: Vec<f64> = s.iter().map(|&v| 1.0 - (-2.0 * v).exp()).collect();
    let zenith_base = uniform(rng, (20.0, 70.0));
    let mut sat = Vec::with_capacity(7 * n);
    for (c, &width) in cfg.sat_smoothing.iter().enumerate() {
        let signal = gaussian_blur(&cover, width);
        let clutter = smooth_noise(rng, 2.0);
        let (offset, gain, clutter_gain) = match c {
            0 => (2.0, 10.0, 2.0),
            1 => (zenith_base, 5.0, 1.0),
            2 => (0.1, 0.7, 0.2),
            3 => (245.0, -25.0, 10.0),
            4 => (255.0, -30.0, 10.0),
            5 => (290.0, -70.0, 15.0),
            _ => (270.0, -45.0, 12.0),
        };
        sat.extend(
            signal
                .iter()
                .zip(&clutter)
                .map(|(v, z)| (offset + gain * v + cfg.sat_clutter * clutter_gain * z) as f32),
        );
    }

    let coupled = gaussian_blur(&s, cfg.model_length_scale / 2.0);
    let mut model = Vec::with_capacity(7 * n);
    let bases = [
        (295.0, 4.0),
        (1010.0, 6.0),
        (288.0, 4.0),
        (800.0, 600.0),
        (0.0, 8.0),
        (0.0, 8.0),
        (30.0, 12.0),
    ];
    for &(base, spread) in &bases {
        let field = low_frequency_field(rng, cfg.model_length_scale);
        model.extend(
            field
                .iter()
                .zip(&coupled)
                .map(|(f, c)| (base + spread * (f + cfg.model_coupling * c)) as f32),
        );
    }

    Scene {
        sat,
        lght,
        model,
        targ,
        strikes,
    }
}

/// Separable Gaussian blur with clamped edges on a `GRID × GRID` field.
pub fn gaussian_blur(field: &[f64], sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let g = GRID as isize;
    let clamp = |v: isize| v.clamp(0, g - 1) as usize;
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for y in 0..g {
            for x in 0..g {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let d = k as isize - radius;
                    let (sx, sy) = if horizontal { (clamp(x + d), y as usize) } else { (x as usize, clamp(y + d)) };
                    acc += w * src[sy * GRID + sx];
                }
                out[y as usize * GRID + x as usize] = acc / norm;
            }
        }
        out
    };
    pass(&pass(field, true), false)
}

/// Blurred white noise rescaled to unit standard deviation.
fn smooth_noise(rng: &mut Rng, sigma: f64) -> Vec<f64> {
    let white: Vec<f64> = (0..GRID * GRID).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let mut f = gaussian_blur(&white, sigma);
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let sd = (f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / f.len() as f64).sqrt();
    f.iter_mut().for_each(|v| *v = (*v - mean) / sd.max(1e-12));
    f
}

/// Sum of a few random plane waves with wavelengths of at least
/// `length_scale` pixels, unit amplitude overall.
fn low_frequency_field(rng: &mut Rng, length_scale: f64) -> Vec<f64> {
    const WAVES: usize = 4;
    let waves: Vec<(f64, f64, f64)> = (0..WAVES)
        .map(|_| {
            let wavelength = length_scale * (1.0 + 2.0 * rng.random::<f64>());
            let dir = rng.random::<f64>() * 2.0 * PI;
            let phase = rng.random::<f64>() * 2.0 * PI;
            let k = 2.0 * PI / wavelength;
            (k * dir.cos(), k * dir.sin(), phase)
        })
        .collect();
    let amp = (2.0 / WAVES as f64).sqrt();
    (0..GRID * GRID)
        .map(|i| {
            let (x, y) = ((i % GRID) as f64, (i / GRID) as f64);
            waves.iter().map(|(kx, ky, ph)| amp * (kx * x + ky * y + ph).cos()).sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_match_channel_groups() {
        let d = generate_synthetic(&SyntheticConfig::new(3, 1)).unwrap();
        assert_eq!(d.sat.shape(), [3, 7, 32, 32]);
        assert_eq!(d.lght.shape(), [3, 3, 32, 32]);
        assert_eq!(d.model.shape(), [3, 7, 32, 32]);
        assert_eq!(d.targ.shape(), [3, 3, 32, 32]);
    }

    #[test]
    fn empty_scene_has_no_weather() {
        let mut cfg = SyntheticConfig::new(4, 2);
        cfg.storms = (0, 0);
        let d = generate_synthetic(&cfg).unwrap();
        assert!(d.targ.data().iter().all(|&v| v == 0.0));
        assert!(d.lght.data().iter().all(|&v| v == 0.0));
        assert_eq!(d.lght.provenance["strike_counts"], serde_json::json!([0, 0, 0, 0]));
    }

    #[test]
    fn seeds_control_output() {
        let a = generate_synthetic(&SyntheticConfig::new(5, 9)).unwrap();
        let b = generate_synthetic(&SyntheticConfig::new(5, 9)).unwrap();
        let c = generate_synthetic(&SyntheticConfig::new(5, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.targ.data(), c.targ.data());
    }

    #[test]
    fn blur_preserves_constants() {
        let f = vec![2.5; GRID * GRID];
        assert!(gaussian_blur(&f, 1.7).iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SyntheticConfig::new(1, 0);
        cfg.scale = (0.0, 1.0);
        assert!(generate_synthetic(&cfg).is_err());
        let mut cfg = SyntheticConfig::new(1, 0);
        cfg.storms = (3, 1);
        assert!(cfg.validate().is_err());
    }
}
