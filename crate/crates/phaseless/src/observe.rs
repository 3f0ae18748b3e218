//! Synthetic phaseless observations, noise covariances and data files.
//!
//! Two noise models pollute the exact phaseless far field `|u_inf|`:
//! multiplicative `y = |u| + sigma |u| w` and additive `y = |u| + sigma w`,
//! with `w` standard normal. The likelihood consumes the matching diagonal
//! covariance built from the exact obstacle's far field. The "ideal
//! setting" keeps the covariance of a 3% multiplicative noise while fixing
//! the realization `w = 0`.

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::geometry::Family;
use crate::stream;
use crate::{Error, Real, Result};

/// Variance floor keeping the misfit norm defined where `|u_inf|` vanishes.
pub const COVARIANCE_FLOOR: f64 = 1.0e-12;

/// Observation noise model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// `y = |u| (1 + sigma w)` — noise scales with the signal.
    Multiplicative,
    /// `y = |u| + sigma w` — uniform noise level.
    Additive,
}

/// Metadata attached to a polluted observation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec<F> {
    pub model: NoiseModel,
    pub sigma_eta: F,
    pub seed: u64,
    /// Index of the noise realization within the seeded study.
    pub sample: u64,
    /// Realization frozen to `w = 0` (covariance kept).
    pub ideal: bool,
}

/// `M x L` matrix of phaseless far-field data (rows = directions,
/// columns = sources) with optional noise metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationMatrix<F> {
    pub data: Array2<F>,
    pub noise: Option<NoiseSpec<F>>,
}

impl<F: Real> ObservationMatrix<F> {
    pub fn noise_free(data: Array2<F>) -> Self {
        Self { data, noise: None }
    }

    pub fn n_directions(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_sources(&self) -> usize {
        self.data.ncols()
    }
}

/// Per-source diagonal noise variances `sigma_m^l`, same layout as the data.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseCovariance<F> {
    pub variances: Array2<F>,
}

/// Pollute the exact data with a seeded noise realization.
///
/// The normal variate for entry `(m, l)` of realization `sample` comes from
/// the counter-based substream indexed by `(seed, sample, l, m)`, so studies
/// are reproducible regardless of evaluation order.
pub fn synthesize<F: Real>(
    exact: &ObservationMatrix<F>,
    model: NoiseModel,
    sigma_eta: F,
    seed: u64,
    sample: u64,
) -> ObservationMatrix<F> {
    let mut data = exact.data.clone();
    for ((m, l), v) in data.indexed_iter_mut() {
        let w = F::of(stream::standard_normal(&[seed, sample, l as u64, m as u64]));
        let bump = match model {
            NoiseModel::Multiplicative => sigma_eta * *v * w,
            NoiseModel::Additive => sigma_eta * w,
        };
        *v += bump;
    }
    ObservationMatrix {
        data,
        noise: Some(NoiseSpec { model, sigma_eta, seed, sample, ideal: false }),
    }
}

/// The ideal setting: the realization `w = 0` at the given noise level.
pub fn synthesize_ideal<F: Real>(
    exact: &ObservationMatrix<F>,
    model: NoiseModel,
    sigma_eta: F,
) -> ObservationMatrix<F> {
    ObservationMatrix {
        data: exact.data.clone(),
        noise: Some(NoiseSpec { model, sigma_eta, seed: 0, sample: 0, ideal: true }),
    }
}

/// Diagonal covariance of the noise model, built from the exact far field.
pub fn covariance<F: Real>(
    exact: &ObservationMatrix<F>,
    model: NoiseModel,
    sigma_eta: F,
) -> NoiseCovariance<F> {
    let floor = F::of(COVARIANCE_FLOOR);
    let variances = match model {
        NoiseModel::Multiplicative => exact.data.mapv(|u| {
            let s = sigma_eta * u;
            (s * s).max(floor)
        }),
        NoiseModel::Additive => {
            Array2::from_elem(exact.data.dim(), (sigma_eta * sigma_eta).max(floor))
        }
    };
    NoiseCovariance { variances }
}

/// Percent relative error `||a - b||_F / ||b||_F`.
pub fn pre_between<F: Real>(a: &ObservationMatrix<F>, b: &ObservationMatrix<F>) -> Result<F> {
    if a.data.dim() != b.data.dim() {
        return Err(Error::Config(format!(
            "shape mismatch: {:?} vs {:?}",
            a.data.dim(),
            b.data.dim()
        )));
    }
    let mut num = F::zero();
    let mut den = F::zero();
    for (x, y) in a.data.iter().zip(b.data.iter()) {
        num += (*x - *y) * (*x - *y);
        den += *y * *y;
    }
    if den == F::zero() {
        return Err(Error::Domain("reference matrix has zero norm".into()));
    }
    Ok((num / den).sqrt())
}

/// Sidecar metadata stored next to every observation CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservationMeta {
    pub k: f64,
    pub radius: f64,
    pub n_sources: usize,
    pub n_directions: usize,
    pub family: Family,
    pub exact_params: Vec<f64>,
    pub noise_model: Option<NoiseModel>,
    pub sigma_eta: f64,
    pub seed: u64,
    pub sample: u64,
    pub ideal: bool,
}

/// Write the data matrix as CSV (M rows of L comma-separated values).
pub fn write_matrix_csv<F: Real>(path: &Path, data: &Array2<F>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for row in data.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{:?}", v.as_f64())).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Read a CSV data matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv<F: Real>(path: &Path) -> Result<Array2<F>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut rows: Vec<Vec<F>> = Vec::new();
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<F>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>().map(F::of))
            .collect();
        rows.push(row.map_err(|e| Error::Format(format!("bad float in {path:?}: {e}")))?);
    }
    if rows.is_empty() {
        return Err(Error::Format(format!("{path:?} holds no data")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(format!("ragged rows in {path:?}")));
    }
    let nrows = rows.len();
    let flat: Vec<F> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Error::Format(format!("shape error: {e}")))
}

/// Write the JSON sidecar.
pub fn write_meta(path: &Path, meta: &ObservationMeta) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::Format(format!("meta serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Read the JSON sidecar.
pub fn read_meta(path: &Path) -> Result<ObservationMeta> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("meta parse: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn exact() -> ObservationMatrix<f64> {
        ObservationMatrix::noise_free(array![[1.0, 2.0], [0.5, 1.5], [3.0, 0.25]])
    }

    #[test]
    fn zero_noise_is_identity() {
        let e = exact();
        let y = synthesize(&e, NoiseModel::Multiplicative, 0.0, 7, 0);
        assert_eq!(y.data, e.data);
    }

    #[test]
    fn ideal_setting_keeps_data_and_covariance() {
        let e = exact();
        let y = synthesize_ideal(&e, NoiseModel::Multiplicative, 0.03);
        assert_eq!(y.data, e.data);
        assert!(y.noise.unwrap().ideal);
        let cov = covariance(&e, NoiseModel::Multiplicative, 0.03);
        assert!(cov.variances.iter().all(|&v| v > 0.0));
        assert!((cov.variances[(0, 0)] - 9.0e-4).abs() < 1e-18);
    }

    #[test]
    fn covariance_values_and_floor() {
        let e: ObservationMatrix<f64> = ObservationMatrix::noise_free(array![[1.0, 0.0]]);
        let cov = covariance(&e, NoiseModel::Multiplicative, 0.03);
        assert!((cov.variances[(0, 0)] - 9.0e-4).abs() < 1e-18);
        assert_eq!(cov.variances[(0, 1)], COVARIANCE_FLOOR);
        let add = covariance(&e, NoiseModel::Additive, 0.03);
        assert!((add.variances[(0, 1)] - 9.0e-4).abs() < 1e-18);
    }

    #[test]
    fn synthesize_deterministic() {
        let e = exact();
        let a = synthesize(&e, NoiseModel::Additive, 0.05, 11, 3);
        let b = synthesize(&e, NoiseModel::Additive, 0.05, 11, 3);
        assert_eq!(a.data, b.data);
        let c = synthesize(&e, NoiseModel::Additive, 0.05, 11, 4);
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn multiplicative_noise_statistics() {
        let e = exact();
        let sigma = 0.03;
        let n = 1000u64;
        for (idx, &u) in e.data.indexed_iter() {
            if u <= 1e-6 {
                continue;
            }
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for s in 0..n {
                let y = synthesize(&e, NoiseModel::Multiplicative, sigma, 99, s);
                let w = (y.data[idx] - u) / (sigma * u);
                sum += w;
                sum2 += w * w;
            }
            let mean = sum / n as f64;
            let sd = (sum2 / n as f64 - mean * mean).sqrt();
            assert!(mean.abs() < 0.1, "mean {mean} at {idx:?}");
            assert!((sd - 1.0).abs() < 0.1, "sd {sd} at {idx:?}");
        }
    }

    #[test]
    fn pre_basic_values() {
        let e = exact();
        assert_eq!(pre_between(&e, &e).unwrap(), 0.0);
        let scaled = ObservationMatrix::noise_free(e.data.mapv(|v| v * 1.01));
        let pre = pre_between(&scaled, &e).unwrap();
        assert!((pre - 0.01).abs() < 1e-12);
        let zero = ObservationMatrix::noise_free(Array2::zeros((3, 2)));
        assert!(pre_between(&e, &zero).is_err());
    }

    #[test]
    fn additive_pre_expectation() {
        // E[PRE^2] = sigma^2 L M / ||Y||^2 for additive noise
        let e = exact();
        let sigma = 0.05;
        let norm2: f64 = e.data.iter().map(|v| v * v).sum();
        let expected = sigma * sigma * 6.0 / norm2;
        let n = 1000u64;
        let mut acc = 0.0;
        for s in 0..n {
            let y = synthesize(&e, NoiseModel::Additive, sigma, 5, s);
            let pre = pre_between(&y, &e).unwrap();
            acc += pre * pre;
        }
        let mean = acc / n as f64;
        assert!(
            (mean - expected).abs() / expected < 0.1,
            "E[PRE^2] {mean} vs {expected}"
        );
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("phaseless_observe_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("obs.csv");
        let e = synthesize(&exact(), NoiseModel::Multiplicative, 0.03, 1, 0);
        write_matrix_csv(&path, &e.data).unwrap();
        let back: Array2<f64> = read_matrix_csv(&path).unwrap();
        assert_eq!(back, e.data);
        std::fs::remove_file(&path).ok();
    }
}
