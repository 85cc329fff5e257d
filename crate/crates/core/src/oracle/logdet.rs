//! Log-det mutual information of the Gaussian HD-MARC.
//!
//! Each slot is written as a linear map of independent zero-mean sources
//! (inputs with variance `P`, unit noises, quantization noise `σ_Q²`) and
//! the covariance is `L D Lᵀ`. Conditional MI follows from
//!
//! ```text
//! I(A;B|C) = ½ log2 det Σ_AC det Σ_BC / (det Σ_C det Σ_ABC)
//! ```
//!
//! with determinants from Cholesky factors.
//!
//! Bracket mapping (`i` the source, `j` the other one):
//!
//! | bracket | slot 1 | slot 2 |
//! |---|---|---|
//! | individual, first | `I(Xi1; Xj1,Y11,ŶR)` | `I(Xi2; Xj2,XR,Y12)` |
//! | individual, second | `I(Xi1,ŶR; Xj1,Y11) + I(Xi1;ŶR) - I(YR;ŶR)` | `I(Xi2,XR; Xj2,Y12)` |
//! | sum `I1` | `I(X11,X21; Y11,ŶR)` | `I(X12,X22; XR,Y12)` |
//! | sum `I2` | `I(X11,X21,ŶR; Y11) + I(X11,X21;ŶR) - I(YR;ŶR)` | `I(X12,X22,XR; Y12)` |
//!
//! and the CF binning sides are `β[I(YR;ŶR) - I(Y11;ŶR)]` and `(1-β) I(XR;Y12)`.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::gaussian::{GaussianMarcParams, IndividualBrackets, SlotPair, SumBrackets};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaussVar {
    X11,
    X21,
    YR,
    YhR,
    Y11,
    X12,
    X22,
    XR,
    Y12,
}

impl fmt::Display for GaussVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Listen,
    Transmit,
}

impl TryFrom<u8> for Slot {
    type Error = OracleError;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            1 => Ok(Slot::Listen),
            2 => Ok(Slot::Transmit),
            _ => Err(OracleError::InvalidParams(format!("slot {n} (expected 1 or 2)"))),
        }
    }
}

const SYM_TOL: f64 = 1e-12;
const EIG_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

/// Covariance of a named set of jointly Gaussian variables.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVectorModel {
    vars: Vec<GaussVar>,
    cov: DMatrix<f64>,
}

impl GaussianVectorModel {
    pub fn new(vars: Vec<GaussVar>, cov: DMatrix<f64>) -> Result<Self, OracleError> {
        let n = vars.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(OracleError::InvalidParams(format!(
                "{n} variables but a {}x{} covariance",
                cov.nrows(),
                cov.ncols()
            )));
        }
        for (k, v) in vars.iter().enumerate() {
            if vars[..k].contains(v) {
                return Err(OracleError::InvalidParams(format!("{v} listed twice")));
            }
        }
        if cov.iter().any(|x| !x.is_finite()) {
            return Err(OracleError::NotPsd("non-finite entry".into()));
        }
        for r in 0..n {
            for c in 0..r {
                if (cov[(r, c)] - cov[(c, r)]).abs() > SYM_TOL {
                    return Err(OracleError::NotPsd(format!("asymmetric at ({r}, {c})")));
                }
            }
        }
        if n > 0 {
            let min = SymmetricEigen::new(cov.clone()).eigenvalues.min();
            if min < -EIG_TOL {
                return Err(OracleError::NotPsd(format!("eigenvalue {min}")));
            }
        }
        Ok(GaussianVectorModel { vars, cov })
    }

    pub fn vars(&self) -> &[GaussVar] {
        &self.vars
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn index(&self, v: GaussVar) -> Result<usize, OracleError> {
        self.vars.iter().position(|&w| w == v).ok_or(OracleError::UnknownVariable(v))
    }

    pub fn cov(&self, a: GaussVar, b: GaussVar) -> Result<f64, OracleError> {
        Ok(self.cov[(self.index(a)?, self.index(b)?)])
    }

    /// Natural-log determinant of the sub-covariance over `set`.
    fn log_det(&self, set: &[GaussVar]) -> Result<f64, OracleError> {
        if set.is_empty() {
            return Ok(0.0);
        }
        let idx = set.iter().map(|&v| self.index(v)).collect::<Result<Vec<_>, _>>()?;
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        let singular = || OracleError::SingularCovariance(set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        let chol = sub.cholesky().ok_or_else(singular)?;
        let l = chol.l_dirty();
        let mut acc = 0.0;
        for k in 0..idx.len() {
            let pivot = l[(k, k)] * l[(k, k)];
            if !(pivot > PIVOT_TOL) {
                return Err(singular());
            }
            acc += pivot.ln();
        }
        Ok(acc)
    }
}

/// Covariance of one slot of the channel.
///
/// Listening slot order: `X11, X21, YR, YhR, Y11`. Transmitting slot
/// order: `X12, X22, XR, Y12`.
pub fn build_covariance(p: &GaussianMarcParams, slot: Slot) -> Result<GaussianVectorModel, OracleError> {
    p.validate().map_err(|e| OracleError::InvalidParams(e.to_string()))?;
    let ch = &p.channel;
    // rows: variables, columns: independent sources
    let (vars, loadings, variances) = match slot {
        Slot::Listen => {
            use GaussVar::*;
            // sources: X11, X21, ZR, ZQ, Z11
            let yr = [ch.h1r, ch.h2r, 1.0, 0.0, 0.0];
            let yhr = [ch.h1r, ch.h2r, 1.0, 1.0, 0.0];
            let rows = vec![
                vec![1.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0, 0.0],
                yr.to_vec(),
                yhr.to_vec(),
                vec![ch.h11, ch.h21, 0.0, 0.0, 1.0],
            ];
            (vec![X11, X21, YR, YhR, Y11], rows, vec![ch.p11, ch.p21, 1.0, p.sigma_q2, 1.0])
        }
        Slot::Transmit => {
            use GaussVar::*;
            // sources: X12, X22, XR, Z12
            let rows = vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![ch.h11, ch.h21, ch.hr1, 1.0],
            ];
            (vec![X12, X22, XR, Y12], rows, vec![ch.p12, ch.p22, ch.pr, 1.0])
        }
    };
    let n = vars.len();
    let l = DMatrix::from_fn(n, variances.len(), |r, c| loadings[r][c]);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(variances));
    let mut cov = &l * d * l.transpose();
    // exact symmetry regardless of rounding order
    for r in 0..n {
        for c in 0..r {
            let m = 0.5 * (cov[(r, c)] + cov[(c, r)]);
            cov[(r, c)] = m;
            cov[(c, r)] = m;
        }
    }
    GaussianVectorModel::new(vars, cov)
}

/// `I(A;B|C)` in bits.
pub fn gaussian_mi(
    model: &GaussianVectorModel,
    a: &[GaussVar],
    b: &[GaussVar],
    c: &[GaussVar],
) -> Result<f64, OracleError> {
    for (x, y) in [(a, b), (a, c), (b, c)] {
        if x.iter().any(|v| y.contains(v)) {
            return Err(OracleError::OverlappingSets);
        }
    }
    for v in a.iter().chain(b).chain(c) {
        model.index(*v)?;
    }
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let join = |sets: &[&[GaussVar]]| sets.iter().flat_map(|s| s.iter().copied()).collect::<Vec<_>>();
    let ac = model.log_det(&join(&[a, c]))?;
    let bc = model.log_det(&join(&[b, c]))?;
    let cc = model.log_det(c)?;
    let abc = model.log_det(&join(&[a, b, c]))?;
    Ok(0.5 * (ac + bc - cc - abc) / std::f64::consts::LN_2)
}

/// Per-slot MI values of every closed-form bracket, computed by log-det.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBrackets {
    pub individual: [IndividualBrackets; 2],
    pub sum: SumBrackets,
}

pub fn oracle_brackets(p: &GaussianMarcParams) -> Result<OracleBrackets, OracleError> {
    use GaussVar::*;
    let s1 = build_covariance(p, Slot::Listen)?;
    let s2 = build_covariance(p, Slot::Transmit)?;
    let i_rr = gaussian_mi(&s1, &[YR], &[YhR], &[])?;
    let individual = |xi1: GaussVar, xj1: GaussVar, xi2: GaussVar, xj2: GaussVar| -> Result<IndividualBrackets, OracleError> {
        Ok(IndividualBrackets {
            first: SlotPair {
                slot1: gaussian_mi(&s1, &[xi1], &[xj1, Y11, YhR], &[])?,
                slot2: gaussian_mi(&s2, &[xi2], &[xj2, XR, Y12], &[])?,
            },
            second: SlotPair {
                slot1: gaussian_mi(&s1, &[xi1, YhR], &[xj1, Y11], &[])? + gaussian_mi(&s1, &[xi1], &[YhR], &[])? - i_rr,
                slot2: gaussian_mi(&s2, &[xi2, XR], &[xj2, Y12], &[])?,
            },
        })
    };
    Ok(OracleBrackets {
        individual: [individual(X11, X21, X12, X22)?, individual(X21, X11, X22, X12)?],
        sum: SumBrackets {
            i1: SlotPair {
                slot1: gaussian_mi(&s1, &[X11, X21], &[Y11, YhR], &[])?,
                slot2: gaussian_mi(&s2, &[X12, X22], &[XR, Y12], &[])?,
            },
            i2: SlotPair {
                slot1: gaussian_mi(&s1, &[X11, X21, YhR], &[Y11], &[])? + gaussian_mi(&s1, &[X11, X21], &[YhR], &[])?
                    - i_rr,
                slot2: gaussian_mi(&s2, &[X12, X22, XR], &[Y12], &[])?,
            },
        },
    })
}

/// Weighted sides of the CF binning constraint `lhs < rhs`.
pub fn cf_binning_sides(p: &GaussianMarcParams) -> Result<(f64, f64), OracleError> {
    use GaussVar::*;
    let s1 = build_covariance(p, Slot::Listen)?;
    let s2 = build_covariance(p, Slot::Transmit)?;
    let lhs = p.beta.listen() * (gaussian_mi(&s1, &[YR], &[YhR], &[])? - gaussian_mi(&s1, &[Y11], &[YhR], &[])?);
    let rhs = p.beta.transmit() * gaussian_mi(&s2, &[XR], &[Y12], &[])?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::MarcChannel;
    use crate::types::SlotFraction;
    use proptest::prelude::*;
    use GaussVar::*;

    fn reference(sigma: f64) -> GaussianMarcParams {
        GaussianMarcParams::new(MarcChannel::reference(), SlotFraction::new(0.5).unwrap(), sigma).unwrap()
    }

    #[test]
    fn zero_gains_give_diagonal() {
        let ch = MarcChannel { h11: 0.0, h21: 0.0, h1r: 0.0, h2r: 0.0, hr1: 0.0, p11: 2.0, p21: 3.0, ..MarcChannel::reference() };
        let p = GaussianMarcParams::new(ch, SlotFraction::new(0.5).unwrap(), 0.7).unwrap();
        let m = build_covariance(&p, Slot::Listen).unwrap();
        let mut expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0, 1.0, 1.7, 1.0]));
        // ŶR is YR plus noise, so the pair keeps the shared relay noise
        expect[(2, 3)] = 1.0;
        expect[(3, 2)] = 1.0;
        assert_eq!(m.covariance(), &expect);
    }

    #[test]
    fn reference_covariance_entries() {
        let m = build_covariance(&reference(1.0), Slot::Listen).unwrap();
        assert!((m.cov(YR, YR).unwrap() - 10.25).abs() < 1e-14);
        assert!((m.cov(Y11, YR).unwrap() - 3.5).abs() < 1e-14);
        assert!((m.cov(YhR, YhR).unwrap() - 11.25).abs() < 1e-14);
        for v in [YR, YhR, Y11] {
            assert!(m.cov(v, v).unwrap() >= 1.0);
        }
        let m2 = build_covariance(&reference(1.0), Slot::Transmit).unwrap();
        assert!((m2.cov(Y12, Y12).unwrap() - 12.0).abs() < 1e-14);
    }

    #[test]
    fn quantizer_mi_reference() {
        let m = build_covariance(&reference(1.0), Slot::Listen).unwrap();
        let i = gaussian_mi(&m, &[YR], &[YhR], &[]).unwrap();
        assert!((i - 0.5 * 11.25f64.log2()).abs() < 1e-12);
        assert!((i - 1.7459).abs() < 1e-4);
    }

    #[test]
    fn errors() {
        let m = build_covariance(&reference(1.0), Slot::Listen).unwrap();
        assert!(matches!(gaussian_mi(&m, &[YR], &[YR], &[]), Err(OracleError::OverlappingSets)));
        assert!(matches!(gaussian_mi(&m, &[XR], &[YR], &[]), Err(OracleError::UnknownVariable(XR))));
        let singular = GaussianVectorModel::new(vec![X11, X21], DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(gaussian_mi(&singular, &[X11], &[X21], &[]), Err(OracleError::SingularCovariance(_))));
        assert!(GaussianVectorModel::new(vec![X11, X21], DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(GaussianVectorModel::new(vec![X11, X21], DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        assert!(matches!(Slot::try_from(3), Err(OracleError::InvalidParams(_))));
    }

    #[test]
    fn independent_blocks_have_zero_mi() {
        let m = build_covariance(&reference(2.0), Slot::Transmit).unwrap();
        assert!(gaussian_mi(&m, &[X12], &[X22, XR], &[]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn reference_brackets() {
        let o = oracle_brackets(&reference(1.0)).unwrap();
        let w = |s: SlotPair| 0.5 * s.slot1 + 0.5 * s.slot2;
        assert!((w(o.individual[0].first) - (0.25 * 6.5f64.log2() + 0.25)).abs() < 1e-12);
        assert!((w(o.sum.i1) - 1.252807).abs() < 1e-6);
        assert!((w(o.sum.i2) - 1.04248).abs() < 1e-5);
    }

    fn random_model(seed: &[f64], n: usize) -> GaussianVectorModel {
        let vars = [X11, X21, YR, YhR, Y11, X12][..n].to_vec();
        let a = DMatrix::from_fn(n, n + 1, |r, c| seed[(r * (n + 1) + c) % seed.len()]);
        let mut cov = &a * a.transpose() + DMatrix::identity(n, n) * 0.05;
        for r in 0..n {
            for c in 0..r {
                cov[(c, r)] = cov[(r, c)];
            }
        }
        GaussianVectorModel::new(vars, cov).unwrap()
    }

    proptest! {
        #[test]
        fn mi_nonnegative_and_symmetric(seed in proptest::collection::vec(-2.0f64..2.0, 42)) {
            let m = random_model(&seed, 6);
            let ab = gaussian_mi(&m, &[X11, YR], &[Y11], &[YhR]).unwrap();
            let ba = gaussian_mi(&m, &[Y11], &[X11, YR], &[YhR]).unwrap();
            prop_assert!(ab >= -1e-12);
            prop_assert!((ab - ba).abs() < 1e-9);
        }

        #[test]
        fn mi_chain_rule(seed in proptest::collection::vec(-2.0f64..2.0, 42)) {
            let m = random_model(&seed, 6);
            let whole = gaussian_mi(&m, &[X11], &[X21, YR], &[X12]).unwrap();
            let parts = gaussian_mi(&m, &[X11], &[X21], &[X12]).unwrap() + gaussian_mi(&m, &[X11], &[YR], &[X21, X12]).unwrap();
            prop_assert!((whole - parts).abs() < 1e-9);
        }
    }
}
