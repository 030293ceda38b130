//! Contrast-sensitivity weighting over the block DCT frequency grid.
//!
//! Human contrast sensitivity versus spatial frequency behaves like a
//! band-pass filter: it peaks a few cycles per degree of visual angle and
//! rolls off steeply at high frequencies. Evaluating that curve on the
//! `B x B` DCT frequency grid of a viewing setup yields a weight per
//! coefficient; frequencies the eye barely resolves get penalized harder
//! during recovery so the measurement budget is not spent on them.
//!
//! Weights depend only on the block size and viewing geometry, never on
//! image content, so one [`CsfWeights`] is shared by every block and image
//! reconstructed under the same setup.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::vectorize;

/// Default ratio of viewing distance to picture height.
pub const DEFAULT_R_VD: f64 = 4.0;

/// ITU-R BT.500 recommended range for the viewing-distance ratio.
pub const ITU_R_VD_RANGE: (f64, f64) = (3.0, 6.0);

/// Viewing setup: distance-to-height ratio and picture height in pixels.
///
/// Pixel aspect ratio is assumed 1, so the per-pixel visual angle is the
/// same horizontally and vertically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewingGeometry {
    pub r_vd: f64,
    pub pic_h: u32,
}

impl ViewingGeometry {
    pub fn new(r_vd: f64, pic_h: u32) -> Result<Self> {
        if !(r_vd > 0.0) || !r_vd.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "viewing-distance ratio must be positive, got {r_vd}"
            )));
        }
        if pic_h == 0 {
            return Err(Error::InvalidParameter(
                "picture height must be at least 1 pixel".into(),
            ));
        }
        Ok(Self { r_vd, pic_h })
    }

    /// Visual angle per pixel, in degrees (equal in x and y).
    pub fn theta_deg(&self) -> f64 {
        visual_angle(self.r_vd, self.pic_h).expect("validated on construction")
    }

    /// Whether `r_vd` lies in the ITU-recommended 3..6 range. Out-of-range
    /// values are allowed; callers may want to warn.
    pub fn within_itu_range(&self) -> bool {
        (ITU_R_VD_RANGE.0..=ITU_R_VD_RANGE.1).contains(&self.r_vd)
    }
}

/// Visual angle subtended by one pixel: `2 * atan(1 / (2 * r_vd * pic_h))`,
/// in degrees.
pub fn visual_angle(r_vd: f64, pic_h: u32) -> Result<f64> {
    if !(r_vd > 0.0) || !r_vd.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "viewing-distance ratio must be positive, got {r_vd}"
        )));
    }
    if pic_h == 0 {
        return Err(Error::InvalidParameter(
            "picture height must be at least 1 pixel".into(),
        ));
    }
    let radians = 2.0 * (1.0 / (2.0 * r_vd * pic_h as f64)).atan();
    Ok(radians.to_degrees())
}

/// Contrast sensitivity at spatial frequency `f` (cycles/degree):
/// `2.6 * (0.0192 + 0.114 f) * exp(-(0.114 f)^1.1)`.
pub fn csf_value(f: f64) -> Result<f64> {
    if f < 0.0 || !f.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spatial frequency must be non-negative, got {f}"
        )));
    }
    let u = 0.114 * f;
    Ok(2.6 * (0.0192 + u) * (-u.powf(1.1)).exp())
}

/// Spatial frequency of DCT index pair `(i, j)` in cycles/degree:
/// `(1 / (2B)) * sqrt((i / theta)^2 + (j / theta)^2)`.
pub fn spatial_frequency(
    i: usize,
    j: usize,
    block_size: usize,
    geom: &ViewingGeometry,
) -> Result<f64> {
    if i >= block_size || j >= block_size {
        return Err(Error::InvalidParameter(format!(
            "frequency index ({i}, {j}) out of range for block size {block_size}"
        )));
    }
    let theta = geom.theta_deg();
    let fx = i as f64 / theta;
    let fy = j as f64 / theta;
    Ok((fx * fx + fy * fy).sqrt() / (2.0 * block_size as f64))
}

/// CSF values over the DCT grid plus the diagonal inverse-weight vector.
///
/// `w_inv` is the row-major vectorization of `h`; `w` holds the reciprocals.
/// Built from a geometry, `h` carries the DC override: entry `(0, 0)` is
/// replaced by the maximum over the AC entries so the DC coefficient is the
/// least penalized.
#[derive(Debug, Clone, PartialEq)]
pub struct CsfWeights {
    block_size: usize,
    h: DMatrix<f64>,
    w_inv: DVector<f64>,
    w: DVector<f64>,
}

impl CsfWeights {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// The CSF matrix over the frequency grid (`B x B`).
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Inverse weights `vec(H)`, length `B^2`.
    pub fn w_inv(&self) -> &DVector<f64> {
        &self.w_inv
    }

    /// Weights, elementwise reciprocal of [`Self::w_inv`].
    pub fn w(&self) -> &DVector<f64> {
        &self.w
    }

    /// Builds weights from an explicit inverse-weight matrix.
    ///
    /// Used for externally supplied weight tables; entries must be strictly
    /// positive but no symmetry or DC-dominance is required.
    pub fn from_inverse_matrix(h: DMatrix<f64>) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "inverse-weight matrix must be square with side >= 2, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let w_inv = vectorize(&h);
        for (index, &value) in w_inv.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let w = w_inv.map(|v| 1.0 / v);
        Ok(Self {
            block_size: h.nrows(),
            h,
            w_inv,
            w,
        })
    }

    /// Uniform (all-ones) weights; weighted recovery with these matches the
    /// unweighted solver exactly.
    pub fn uniform(block_size: usize) -> Result<Self> {
        Self::from_inverse_matrix(DMatrix::from_element(block_size, block_size, 1.0))
    }

    /// Writes `h` as CSV, one row per line, 9 significant digits.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        for i in 0..self.h.nrows() {
            let row: Vec<String> = (0..self.h.ncols())
                .map(|j| format!("{:.8e}", self.h[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads a square inverse-weight matrix from CSV.
    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidParameter(format!("csv read: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| {
                Error::InvalidParameter(format!("csv line {}: {e}", lineno + 1))
            })?;
            rows.push(row);
        }
        let side = rows.len();
        if side == 0 || rows.iter().any(|r| r.len() != side) {
            return Err(Error::DimensionMismatch(
                "weights csv must be a square matrix".into(),
            ));
        }
        let h = DMatrix::from_fn(side, side, |i, j| rows[i][j]);
        Self::from_inverse_matrix(h)
    }
}

/// Evaluates the CSF on the `B x B` DCT frequency grid of `geom` and applies
/// the DC override: `h[0][0]` becomes the maximum over the AC entries.
pub fn build_csf_weights(block_size: usize, geom: &ViewingGeometry) -> Result<CsfWeights> {
    if block_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "block size must be >= 2, got {block_size}"
        )));
    }
    let b = block_size;
    let mut h = DMatrix::zeros(b, b);
    let mut ac_max = f64::NEG_INFINITY;
    for i in 0..b {
        for j in 0..b {
            if (i, j) == (0, 0) {
                continue;
            }
            let f = spatial_frequency(i, j, b, geom)?;
            let v = csf_value(f)?;
            h[(i, j)] = v;
            ac_max = ac_max.max(v);
        }
    }
    h[(0, 0)] = ac_max;
    CsfWeights::from_inverse_matrix(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(r_vd: f64, pic_h: u32) -> ViewingGeometry {
        ViewingGeometry::new(r_vd, pic_h).unwrap()
    }

    #[test]
    fn visual_angle_matches_direct_evaluation() {
        // Oracle: evaluate 2*atan(1/(2*4*512)) in degrees directly.
        let expected = 2.0 * (1.0f64 / 4096.0).atan() * 180.0 / std::f64::consts::PI;
        let got = visual_angle(4.0, 512).unwrap();
        assert_eq!(got, expected);
        assert!((got - 0.027976).abs() < 1e-6, "got {got}");
    }

    #[test]
    fn visual_angle_decreases_with_pic_h() {
        let mut last = f64::INFINITY;
        for pic_h in [64, 256, 1024, 4096, 1 << 20] {
            let theta = visual_angle(4.0, pic_h).unwrap();
            assert!(theta < last && theta > 0.0);
            last = theta;
        }
    }

    #[test]
    fn halving_distance_doubles_angle_in_small_angle_regime() {
        let t3 = visual_angle(3.0, 512).unwrap();
        let t6 = visual_angle(6.0, 512).unwrap();
        assert!((t3 - 2.0 * t6).abs() / t3 < 1e-6);
    }

    #[test]
    fn visual_angle_rejects_bad_inputs() {
        assert!(visual_angle(0.0, 512).is_err());
        assert!(visual_angle(-1.0, 512).is_err());
        assert!(visual_angle(4.0, 0).is_err());
    }

    #[test]
    fn csf_at_zero() {
        assert_eq!(csf_value(0.0).unwrap(), 2.6 * 0.0192);
    }

    #[test]
    fn csf_rejects_negative_frequency() {
        assert!(csf_value(-0.5).is_err());
    }

    #[test]
    fn csf_peak_near_eight_cycles_per_degree() {
        // Oracle: grid search with step 1e-3 over [0, 60].
        let mut best = (0.0, f64::NEG_INFINITY);
        let mut f = 0.0;
        while f <= 60.0 {
            let v = csf_value(f).unwrap();
            if v > best.1 {
                best = (f, v);
            }
            f += 1e-3;
        }
        assert!(
            best.0 > 7.5 && best.0 < 8.3,
            "band-pass peak at {} cy/deg",
            best.0
        );
        // High-frequency roll-off: sensitivity at 60 cy/deg is under 1% of peak.
        assert!(csf_value(60.0).unwrap() < best.1 / 100.0);
    }

    #[test]
    fn spatial_frequency_at_dc_is_zero() {
        assert_eq!(spatial_frequency(0, 0, 16, &geom(4.0, 512)).unwrap(), 0.0);
    }

    #[test]
    fn spatial_frequency_is_symmetric() {
        let g = geom(4.0, 512);
        for (i, j) in [(1, 0), (3, 7), (15, 2)] {
            assert_eq!(
                spatial_frequency(i, j, 16, &g).unwrap(),
                spatial_frequency(j, i, 16, &g).unwrap()
            );
        }
    }

    #[test]
    fn spatial_frequency_first_ac() {
        // Oracle: f = (1/32) / theta with theta = 2*atan(1/4096) in degrees.
        let g = geom(4.0, 512);
        let f = spatial_frequency(1, 0, 16, &g).unwrap();
        let oracle = 1.0 / (32.0 * g.theta_deg());
        assert!((f - oracle).abs() < 1e-12);
        assert!((f - 1.117).abs() < 1e-3, "got {f}");
    }

    #[test]
    fn spatial_frequency_rejects_out_of_range_indices() {
        assert!(spatial_frequency(16, 0, 16, &geom(4.0, 512)).is_err());
        assert!(spatial_frequency(0, 99, 16, &geom(4.0, 512)).is_err());
    }

    #[test]
    fn weights_are_symmetric_positive_with_dc_override() {
        let w = build_csf_weights(16, &geom(4.0, 512)).unwrap();
        let h = w.h();
        let mut ac_max = f64::NEG_INFINITY;
        for i in 0..16 {
            for j in 0..16 {
                assert!(h[(i, j)] > 0.0);
                assert_eq!(h[(i, j)], h[(j, i)]);
                if (i, j) != (0, 0) {
                    ac_max = ac_max.max(h[(i, j)]);
                }
            }
        }
        assert_eq!(h[(0, 0)], ac_max);
        assert_eq!(h.max(), h[(0, 0)]);
    }

    #[test]
    fn weights_decrease_away_from_dc_when_grid_is_past_the_peak() {
        // Geometry with a huge r_vd*pic_h product pushes every AC frequency
        // beyond the CSF peak, so H decays monotonically along rows/columns.
        let g = geom(6.0, 4096);
        assert!(spatial_frequency(1, 0, 16, &g).unwrap() > 8.3);
        let w = build_csf_weights(16, &g).unwrap();
        let h = w.h();
        for i in 0..16 {
            for j in 0..15 {
                if (i, j) == (0, 0) {
                    continue;
                }
                assert!(h[(i, j)] > h[(i, j + 1)], "row {i} at col {j}");
                assert!(h[(j, i)] > h[(j + 1, i)], "col {i} at row {j}");
            }
        }
    }

    #[test]
    fn w_and_w_inv_are_reciprocal_and_vec_consistent() {
        let weights = build_csf_weights(16, &geom(4.0, 512)).unwrap();
        let by_vec = vectorize(weights.h());
        for t in 0..256 {
            assert_eq!(weights.w_inv()[t], by_vec[t]);
            assert!((weights.w()[t] * weights.w_inv()[t] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_external_weights() {
        let mut h = DMatrix::from_element(4, 4, 1.0);
        h[(2, 3)] = 0.0;
        let err = CsfWeights::from_inverse_matrix(h).unwrap_err();
        assert!(matches!(
            err,
            crate::error::Error::NonPositiveWeight { index: 11, .. }
        ));
    }

    #[test]
    fn csv_roundtrip() {
        let w = build_csf_weights(8, &geom(4.0, 512)).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let back = CsfWeights::read_csv(buf.as_slice()).unwrap();
        for t in 0..64 {
            let rel = (back.w_inv()[t] - w.w_inv()[t]).abs() / w.w_inv()[t];
            assert!(rel < 1e-8, "entry {t} differs by {rel}");
        }
    }

    #[test]
    fn itu_range_check() {
        assert!(geom(4.0, 512).within_itu_range());
        assert!(!geom(8.0, 512).within_itu_range());
        assert!(!geom(2.0, 512).within_itu_range());
    }

    proptest! {
        #[test]
        fn frequency_strictly_increases_with_r_vd(
            i in 0usize..16,
            j in 0usize..16,
            r1 in 3.0f64..5.9,
            bump in 0.05f64..2.0,
        ) {
            prop_assume!((i, j) != (0, 0));
            let f1 = spatial_frequency(i, j, 16, &geom(r1, 512)).unwrap();
            let f2 = spatial_frequency(i, j, 16, &geom(r1 + bump, 512)).unwrap();
            prop_assert!(f2 > f1);
        }

        #[test]
        fn h_symmetry_holds_for_any_geometry(r_vd in 0.5f64..12.0, pic_h in 16u32..4096) {
            let w = build_csf_weights(8, &geom(r_vd, pic_h)).unwrap();
            let h = w.h();
            for i in 0..8 {
                for j in 0..8 {
                    prop_assert_eq!(h[(i, j)], h[(j, i)]);
                    prop_assert!(h[(i, j)] > 0.0);
                    prop_assert!(h[(0, 0)] >= h[(i, j)]);
                }
            }
        }
    }
}
