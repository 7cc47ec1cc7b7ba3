//! Deterministic synthetic observation data.
//!
//! Given a seed, a ground-truth state and a noise level, the generators
//! produce the same `ObservationData` on every machine. Observation points
//! are equally spaced on the circle (offset from 0 so no point hits a
//! symmetry axis); data files round-trip through CSV with columns `x,y`.

use std::path::Path;

use anyhow::{Context, Result};
use rand::Rng;
use rand_distr::StandardNormal;

use rcar_core::basis::{BasisSpec, FieldVector};
use rcar_core::potential::{deconv_forward, ConvolutionKernel, ObservationData};
use rcar_core::rng::RngStream;

/// Equally spaced observation points `x_j = 2π (j + 0.3) / m`.
pub fn observation_points(n_obs: usize) -> Vec<f64> {
    (0..n_obs)
        .map(|j| 2.0 * std::f64::consts::PI * (j as f64 + 0.3) / n_obs as f64)
        .collect()
}

/// Sigmoid observations of a ground-truth state:
/// `y_j = tanh(h u†(x_j)) + σ z_j`.
pub fn generate_ssl_data(
    basis: BasisSpec,
    truth: &FieldVector,
    h: f64,
    sigma: f64,
    n_obs: usize,
    seed: u64,
) -> Result<ObservationData> {
    let points = observation_points(n_obs);
    let mut rng = RngStream::new(seed);
    let values: Vec<f64> = points
        .iter()
        .map(|x| {
            let z: f64 = rng.sample(StandardNormal);
            (h * basis.evaluate_at(truth, *x).expect("finite point")).tanh() + sigma * z
        })
        .collect();
    Ok(ObservationData::new(points, values, sigma)?)
}

/// Convolution observations of a ground-truth state:
/// `y_j = (g ∗ u†)(x_j) + σ z_j`.
pub fn generate_deconv_data(
    basis: BasisSpec,
    kernel: &ConvolutionKernel,
    truth: &FieldVector,
    sigma: f64,
    n_obs: usize,
    seed: u64,
) -> Result<ObservationData> {
    let points = observation_points(n_obs);
    let forward = deconv_forward(kernel, basis, truth, &points)?;
    let mut rng = RngStream::new(seed);
    let values: Vec<f64> = forward
        .iter()
        .map(|f| {
            let z: f64 = rng.sample(StandardNormal);
            f + sigma * z
        })
        .collect();
    Ok(ObservationData::new(points, values, sigma)?)
}

/// Writes observation data as CSV with columns `x,y`.
pub fn write_data_csv(data: &ObservationData, path: &Path) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["x", "y"])?;
    for (x, y) in data.points().iter().zip(data.values()) {
        w.write_record([format!("{x}"), format!("{y}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads observation data back from CSV (columns `x,y`); the noise level is
/// supplied by the caller since the file stores only locations and values.
pub fn read_data_csv(path: &Path, sigma: f64) -> Result<ObservationData> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for record in r.records() {
        let record = record?;
        points.push(record[0].parse::<f64>().context("bad x value")?);
        values.push(record[1].parse::<f64>().context("bad y value")?);
    }
    Ok(ObservationData::new(points, values, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rcar_core::measures::{sample_gamma_prior, GammaPriorSpec};

    #[test]
    fn generation_is_deterministic() {
        let basis = BasisSpec::new(8).unwrap();
        let prior = GammaPriorSpec::new(0.5, basis).unwrap();
        let truth = sample_gamma_prior(&prior, &mut RngStream::new(1));
        let a = generate_ssl_data(basis, &truth, 1.0, 0.5, 6, 42).unwrap();
        let b = generate_ssl_data(basis, &truth, 1.0, 0.5, 6, 42).unwrap();
        assert_eq!(a.values(), b.values());
        let c = generate_ssl_data(basis, &truth, 1.0, 0.5, 6, 43).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let basis = BasisSpec::new(4).unwrap();
        let truth = FieldVector::new(vec![1.0, 0.2, -0.1, 0.4]).unwrap();
        let data = generate_ssl_data(basis, &truth, 2.0, 0.3, 5, 7).unwrap();
        let path = dir.path().join("data.csv");
        write_data_csv(&data, &path).unwrap();
        let back = read_data_csv(&path, 0.3).unwrap();
        assert_eq!(data.points(), back.points());
        assert_eq!(data.values(), back.values());
    }
}
