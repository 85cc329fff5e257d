use std::fmt;
use std::str::FromStr;

use super::DmError;

/// Largest dense tensor a [`JointPmf`] will allocate.
pub const MAX_ENTRIES: usize = 1 << 18;

/// Entries below this are treated as exact zeros in `p log p`.
const ZERO_PROB: f64 = 1e-15;

/// Normalization tolerance enforced on construction.
pub const PMF_TOL: f64 = 1e-12;

/// Random variables of the two-slot channel model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    X11,
    X21,
    X12,
    X22,
    XR,
    YR,
    YhR,
    Y11,
    Y21,
    Y12,
    Y22,
}

impl VarId {
    pub const ALL: [VarId; 11] = [
        VarId::X11,
        VarId::X21,
        VarId::X12,
        VarId::X22,
        VarId::XR,
        VarId::YR,
        VarId::YhR,
        VarId::Y11,
        VarId::Y21,
        VarId::Y12,
        VarId::Y22,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VarId::X11 => "X11",
            VarId::X21 => "X21",
            VarId::X12 => "X12",
            VarId::X22 => "X22",
            VarId::XR => "XR",
            VarId::YR => "YR",
            VarId::YhR => "YhR",
            VarId::Y11 => "Y11",
            VarId::Y21 => "Y21",
            VarId::Y12 => "Y12",
            VarId::Y22 => "Y22",
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VarId {
    type Err = DmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VarId::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| DmError::UnknownVariableName(s.to_string()))
    }
}

/// Dense joint probability tensor over named finite-alphabet variables.
///
/// Storage is row-major: the last variable in `vars` varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    vars: Vec<VarId>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(vars: Vec<(VarId, usize)>, probs: Vec<f64>) -> Result<Self, DmError> {
        let (vars, sizes): (Vec<_>, Vec<_>) = vars.into_iter().unzip();
        for (k, v) in vars.iter().enumerate() {
            if vars[..k].contains(v) {
                return Err(DmError::DuplicateVariable(*v));
            }
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(DmError::EmptyAlphabet(vars[k]));
        }
        let total = checked_size(&sizes)?;
        if probs.len() != total {
            return Err(DmError::DimensionMismatch(format!(
                "tensor over {} has {} entries, expected {}",
                fmt_vars(&vars),
                probs.len(),
                total
            )));
        }
        check_pmf(&probs, &format!("joint pmf over {}", fmt_vars(&vars)))?;
        Ok(JointPmf { vars, sizes, probs })
    }

    /// Internal constructor for tensors already known to be valid.
    pub(crate) fn from_parts(vars: Vec<VarId>, sizes: Vec<usize>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(sizes.iter().product::<usize>(), probs.len());
        JointPmf { vars, sizes, probs }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet(&self, v: VarId) -> Option<usize> {
        self.position(v).map(|k| self.sizes[k])
    }

    fn position(&self, v: VarId) -> Option<usize> {
        self.vars.iter().position(|&u| u == v)
    }

    /// Probability of a single outcome, indices in `vars` order.
    pub fn prob(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (k, &i) in index.iter().enumerate() {
            flat = flat * self.sizes[k] + i;
        }
        self.probs[flat]
    }

    /// Sums out every variable not in `keep`. The result lists the kept
    /// variables in their original order.
    pub fn marginalize(&self, keep: &[VarId]) -> Result<JointPmf, DmError> {
        for v in keep {
            if self.position(*v).is_none() {
                return Err(DmError::UnknownVariable(*v));
            }
        }
        let kept: Vec<usize> = (0..self.vars.len())
            .filter(|&k| keep.contains(&self.vars[k]))
            .collect();
        if kept.len() == self.vars.len() {
            return Ok(self.clone());
        }
        let out_sizes: Vec<usize> = kept.iter().map(|&k| self.sizes[k]).collect();
        // stride of each source axis inside the output tensor (0 if summed out)
        let mut out_stride = vec![0usize; self.vars.len()];
        let mut s = 1;
        for (pos, &k) in kept.iter().enumerate().rev() {
            out_stride[k] = s;
            s *= out_sizes[pos];
        }
        let mut out = vec![0.0; s];
        let mut idx = vec![0usize; self.vars.len()];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] += p;
            // odometer increment, last axis fastest
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                target += out_stride[k];
                if idx[k] < self.sizes[k] {
                    break;
                }
                target -= out_stride[k] * idx[k];
                idx[k] = 0;
            }
        }
        Ok(JointPmf::from_parts(
            kept.iter().map(|&k| self.vars[k]).collect(),
            out_sizes,
            out,
        ))
    }

    /// Joint entropy `H(set)` in bits.
    pub fn entropy(&self, set: &[VarId]) -> Result<f64, DmError> {
        let m = self.marginalize(set)?;
        Ok(m.probs.iter().map(|&p| plogp(p)).sum::<f64>())
    }

    /// Conditional mutual information `I(A; B | C)` in bits, assembled as
    /// `H(A,C) + H(B,C) - H(A,B,C) - H(C)`.
    pub fn mutual_information(&self, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<f64, DmError> {
        for (x, y) in [(a, b), (a, c), (b, c)] {
            if let Some(v) = x.iter().find(|v| y.contains(v)) {
                return Err(DmError::OverlappingSets(*v));
            }
        }
        let union = |sets: &[&[VarId]]| -> Vec<VarId> { sets.iter().flat_map(|s| s.iter().copied()).collect() };
        let h_ac = self.entropy(&union(&[a, c]))?;
        let h_bc = self.entropy(&union(&[b, c]))?;
        let h_abc = self.entropy(&union(&[a, b, c]))?;
        let h_c = self.entropy(c)?;
        Ok(h_ac + h_bc - h_abc - h_c)
    }
}

fn plogp(p: f64) -> f64 {
    if p < ZERO_PROB {
        0.0
    } else {
        -p * p.log2()
    }
}

pub(crate) fn checked_size(sizes: &[usize]) -> Result<usize, DmError> {
    let mut total: usize = 1;
    for &s in sizes {
        total = total
            .checked_mul(s)
            .filter(|&t| t <= MAX_ENTRIES)
            .ok_or(DmError::TooLarge { limit: MAX_ENTRIES })?;
    }
    Ok(total)
}

/// Rejects negative or non-finite entries and sums off 1 by more than [`PMF_TOL`].
pub(crate) fn check_pmf(probs: &[f64], what: &str) -> Result<(), DmError> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(DmError::InvalidPmf(format!("{what}: entry {p} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PMF_TOL {
        return Err(DmError::InvalidPmf(format!("{what}: entries sum to {total}")));
    }
    Ok(())
}

fn fmt_vars(vars: &[VarId]) -> String {
    let names: Vec<&str> = vars.iter().map(|v| v.name()).collect();
    format!("({})", names.join(","))
}
