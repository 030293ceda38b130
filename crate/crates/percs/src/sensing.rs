//! Seeded Gaussian acquisition: sensing matrices, per-block measurements,
//! and the on-disk measurement container.
//!
//! Reproducibility contract: matrices are generated from a ChaCha8 stream
//! (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`) with standard-normal
//! variates from `rand_distr::StandardNormal` (ziggurat), filled row by row
//! and scaled by `1/sqrt(M)`. The same `(M, N, seed)` always regenerates the
//! identical matrix, so measurement files store the seed, not the matrix.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::{partition, GrayImage};
use crate::perceptual::ViewingGeometry;
use crate::transform::vectorize;

/// Measurement-matrix scheme identifier, stored in measurement files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Gaussian,
}

/// A dense `M x N` random sensing matrix with i.i.d. `Normal(0, 1/M)`
/// entries, regenerable from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    m: usize,
    n: usize,
    seed: u64,
    scheme: Scheme,
    entries: DMatrix<f64>,
}

impl SensingMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Generates the deterministic `M x N` Gaussian sensing matrix for a seed.
///
/// `M == N` is permitted (full-rank test mode); `M > N` is rejected.
pub fn generate_sensing_matrix(m: usize, n: usize, seed: u64) -> Result<SensingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(
            "matrix dimensions must be positive".into(),
        ));
    }
    if m > n {
        return Err(Error::MeasurementCountExceedsSignal { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 1.0 / (m as f64).sqrt();
    // Row-major fill order is part of the reproducibility contract.
    let mut entries = DMatrix::zeros(m, n);
    for row in 0..m {
        for col in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            entries[(row, col)] = sigma * z;
        }
    }
    Ok(SensingMatrix {
        m,
        n,
        seed,
        scheme: Scheme::Gaussian,
        entries,
    })
}

/// Acquires one block: `y = Phi * vec(block)`.
pub fn sense_block(phi: &SensingMatrix, block: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = block.nrows() * block.ncols();
    if n != phi.n {
        return Err(Error::DimensionMismatch(format!(
            "block has {} samples but sensing matrix expects {}",
            n, phi.n
        )));
    }
    Ok(&phi.entries * vectorize(block))
}

/// Number of measurements for a ratio: `max(1, round(ratio * n))`,
/// rounding half away from zero.
pub fn measurement_count(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64).round() as usize).max(1)
}

/// Per-block measurements of one image plus everything needed to
/// reconstruct it standalone.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub block_size: usize,
    pub ratio: f64,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub geometry: ViewingGeometry,
    pub width: usize,
    pub height: usize,
    /// Length-`m` measurement vectors in row-major tile order.
    pub measurements: Vec<DVector<f64>>,
}

impl MeasurementSet {
    pub fn tiles_x(&self) -> usize {
        self.width.div_ceil(self.block_size)
    }

    pub fn tiles_y(&self) -> usize {
        self.height.div_ceil(self.block_size)
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_x() * self.tiles_y()
    }
}

/// Senses every block of an image with one shared Gaussian matrix.
///
/// `ratio == 1` yields a square full-rank system (test mode: acquisition is
/// invertible and reconstruction exact).
pub fn sense_image(
    img: &GrayImage,
    block_size: usize,
    ratio: f64,
    seed: u64,
    geometry: ViewingGeometry,
) -> Result<MeasurementSet> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "measurement ratio must be in (0, 1], got {ratio}"
        )));
    }
    let grid = partition(img, block_size)?;
    let n = block_size * block_size;
    let m = measurement_count(ratio, n);
    let phi = generate_sensing_matrix(m, n, seed)?;
    let measurements = grid
        .blocks
        .iter()
        .map(|block| sense_block(&phi, block))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementSet {
        block_size,
        ratio,
        m,
        n,
        seed,
        geometry,
        width: img.width,
        height: img.height,
        measurements,
    })
}

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FileHeader {
    version: u32,
    scheme: Scheme,
    block_size: usize,
    m: usize,
    n: usize,
    ratio: f64,
    seed: u64,
    geometry: ViewingGeometry,
    width: usize,
    height: usize,
    endianness: String,
}

impl MeasurementSet {
    /// Serializes as a one-line JSON header followed by the measurement
    /// payload as little-endian f64, vectors concatenated in tile order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = FileHeader {
            version: FORMAT_VERSION,
            scheme: Scheme::Gaussian,
            block_size: self.block_size,
            m: self.m,
            n: self.n,
            ratio: self.ratio,
            seed: self.seed,
            geometry: self.geometry,
            width: self.width,
            height: self.height,
            endianness: "little".into(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        for v in &self.measurements {
            for &x in v.iter() {
                out.write_all(&x.to_le_bytes()).expect("vec write");
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::CorruptMeasurementFile("missing header line".into()))?;
        let header: FileHeader = serde_json::from_slice(&bytes[..newline])
            .map_err(|e| Error::CorruptMeasurementFile(format!("bad header: {e}")))?;
        if header.version != FORMAT_VERSION {
            return Err(Error::CorruptMeasurementFile(format!(
                "unsupported version {}",
                header.version
            )));
        }
        if header.endianness != "little" {
            return Err(Error::CorruptMeasurementFile(format!(
                "unsupported endianness {:?}",
                header.endianness
            )));
        }
        if header.n != header.block_size * header.block_size {
            return Err(Error::CorruptMeasurementFile(format!(
                "n = {} does not match block size {}",
                header.n, header.block_size
            )));
        }
        let tiles = header.width.div_ceil(header.block_size)
            * header.height.div_ceil(header.block_size);
        let payload = &bytes[newline + 1..];
        let expected = tiles * header.m * 8;
        if payload.len() != expected {
            return Err(Error::CorruptMeasurementFile(format!(
                "payload has {} bytes, expected {expected}",
                payload.len()
            )));
        }
        let mut measurements = Vec::with_capacity(tiles);
        for t in 0..tiles {
            let start = t * header.m * 8;
            let vector = DVector::from_iterator(
                header.m,
                payload[start..start + header.m * 8]
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap())),
            );
            measurements.push(vector);
        }
        Ok(MeasurementSet {
            block_size: header.block_size,
            ratio: header.ratio,
            m: header.m,
            n: header.n,
            seed: header.seed,
            geometry: header.geometry,
            width: header.width,
            height: header.height,
            measurements,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom() -> ViewingGeometry {
        ViewingGeometry::new(4.0, 512).unwrap()
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let a = generate_sensing_matrix(51, 256, 7).unwrap();
        let b = generate_sensing_matrix(51, 256, 7).unwrap();
        assert_eq!(a.entries(), b.entries());
        let c = generate_sensing_matrix(51, 256, 8).unwrap();
        assert_ne!(a.entries(), c.entries());
    }

    #[test]
    fn rejects_m_larger_than_n() {
        assert!(matches!(
            generate_sensing_matrix(300, 256, 0).unwrap_err(),
            Error::MeasurementCountExceedsSignal { m: 300, n: 256 }
        ));
    }

    #[test]
    fn entry_statistics_match_normal_inverse_m() {
        // Statistical oracle over 20 seeds: mean within 4 sigma/sqrt(MN),
        // variance within 10% of 1/M.
        let (m, n) = (51, 256);
        for seed in 0..20u64 {
            let phi = generate_sensing_matrix(m, n, seed).unwrap();
            let count = (m * n) as f64;
            let mean = phi.entries().iter().sum::<f64>() / count;
            let sigma = (1.0 / m as f64).sqrt();
            assert!(
                mean.abs() < 4.0 * sigma / count.sqrt(),
                "seed {seed}: mean {mean}"
            );
            let var = phi.entries().iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / count;
            let expected = 1.0 / m as f64;
            assert!(
                (var - expected).abs() < 0.1 * expected,
                "seed {seed}: var {var} vs {expected}"
            );
        }
    }

    #[test]
    fn gaussian_draw_has_full_rank() {
        let phi = generate_sensing_matrix(51, 256, 3).unwrap();
        let svd = phi.entries().clone().svd(false, false);
        let smallest = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(smallest > 1e-8, "smallest singular value {smallest}");
    }

    #[test]
    fn sensing_is_linear() {
        let phi = generate_sensing_matrix(8, 16, 1).unwrap();
        let zero = sense_block(&phi, &DMatrix::zeros(4, 4)).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));

        let block = DMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64 - 7.5);
        let y = sense_block(&phi, &block).unwrap();
        let y3 = sense_block(&phi, &(3.0 * &block)).unwrap();
        assert!((y3 - 3.0 * y).abs().max() < 1e-12);
    }

    #[test]
    fn identity_matrix_reproduces_vectorized_block() {
        let phi = SensingMatrix {
            m: 4,
            n: 4,
            seed: 0,
            scheme: Scheme::Gaussian,
            entries: DMatrix::identity(4, 4),
        };
        let block = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let y = sense_block(&phi, &block).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn sense_block_checks_dimensions() {
        let phi = generate_sensing_matrix(4, 16, 0).unwrap();
        assert!(sense_block(&phi, &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn sense_image_produces_expected_counts() {
        let img = GrayImage::filled(256, 256, 100.0);
        let ms = sense_image(&img, 16, 0.2, 7, geom()).unwrap();
        assert_eq!(ms.measurements.len(), 256);
        assert_eq!(ms.m, 51);
        assert!(ms.measurements.iter().all(|v| v.len() == 51));
    }

    #[test]
    fn sense_image_rejects_bad_ratio() {
        let img = GrayImage::filled(16, 16, 0.0);
        assert!(sense_image(&img, 16, 0.0, 7, geom()).is_err());
        assert!(sense_image(&img, 16, 1.5, 7, geom()).is_err());
    }

    #[test]
    fn single_block_difference_is_local() {
        let mut a = GrayImage::filled(32, 32, 50.0);
        let b = a.clone();
        // Perturb one pixel inside tile (1, 1).
        a.samples[17 * 32 + 20] += 13.0;
        let ga = geom();
        let ma = sense_image(&a, 16, 0.25, 9, ga).unwrap();
        let mb = sense_image(&b, 16, 0.25, 9, ga).unwrap();
        for t in 0..4 {
            if t == 3 {
                assert_ne!(ma.measurements[t], mb.measurements[t]);
            } else {
                assert_eq!(ma.measurements[t], mb.measurements[t]);
            }
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let img = GrayImage::filled(16, 16, 10.0);
        let ms = sense_image(&img, 16, 0.5, 2, geom()).unwrap();
        let bytes = ms.to_bytes();

        let truncated = &bytes[..bytes.len() - 4];
        assert!(matches!(
            MeasurementSet::from_bytes(truncated).unwrap_err(),
            Error::CorruptMeasurementFile(_)
        ));

        let mut bad_header = bytes.clone();
        bad_header[0] = b'x';
        assert!(MeasurementSet::from_bytes(&bad_header).is_err());
    }

    proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(16))]

        #[test]
        fn file_roundtrip(seed in any::<u64>(), w in 8usize..40, h in 8usize..40) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0.0..255.0)).collect();
            let img = GrayImage::new(w, h, samples).unwrap();
            let ms = sense_image(&img, 8, 0.3, seed, geom()).unwrap();
            let back = MeasurementSet::from_bytes(&ms.to_bytes()).unwrap();
            prop_assert_eq!(back, ms);
        }

        #[test]
        fn acquisition_is_deterministic(seed in any::<u64>()) {
            let img = GrayImage::filled(16, 16, 77.0);
            let a = sense_image(&img, 16, 0.25, seed, geom()).unwrap();
            let b = sense_image(&img, 16, 0.25, seed, geom()).unwrap();
            prop_assert_eq!(a.to_bytes(), b.to_bytes());
        }
    }
}
