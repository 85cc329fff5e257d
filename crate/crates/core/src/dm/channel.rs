use serde::{Deserialize, Serialize};

use super::pmf::{check_pmf, checked_size, JointPmf, VarId};
use super::DmError;

/// Variable order of the slot-1 joint.
pub const SLOT1_VARS: [VarId; 6] = [VarId::X11, VarId::X21, VarId::YR, VarId::Y11, VarId::Y21, VarId::YhR];
/// Variable order of the slot-2 joint.
pub const SLOT2_VARS: [VarId; 5] = [VarId::X12, VarId::X22, VarId::XR, VarId::Y12, VarId::Y22];

/// Alphabet size of every variable in the model. A size of 1 marks a
/// degenerate (constant) variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alphabets {
    pub x11: usize,
    pub x21: usize,
    pub x12: usize,
    pub x22: usize,
    pub xr: usize,
    pub yr: usize,
    pub yhr: usize,
    pub y11: usize,
    pub y21: usize,
    pub y12: usize,
    pub y22: usize,
}

impl Alphabets {
    pub fn uniform(size: usize) -> Self {
        Alphabets {
            x11: size,
            x21: size,
            x12: size,
            x22: size,
            xr: size,
            yr: size,
            yhr: size,
            y11: size,
            y21: size,
            y12: size,
            y22: size,
        }
    }

    pub fn get(&self, v: VarId) -> usize {
        match v {
            VarId::X11 => self.x11,
            VarId::X21 => self.x21,
            VarId::X12 => self.x12,
            VarId::X22 => self.x22,
            VarId::XR => self.xr,
            VarId::YR => self.yr,
            VarId::YhR => self.yhr,
            VarId::Y11 => self.y11,
            VarId::Y21 => self.y21,
            VarId::Y12 => self.y12,
            VarId::Y22 => self.y22,
        }
    }
}

/// A discrete memoryless half-duplex channel together with the product
/// input law `p(x11)p(x21)p(x12)p(x22)p(xR)` and the relay test channel
/// `p(yhR | yR)`.
///
/// Tables are stored flat and row-major:
/// * `test_channel[yr][yhr]`
/// * `slot1[x11][x21][yr][y11][y21]` = `p(yR, y11, y21 | x11, x21)`
/// * `slot2[x12][x22][xr][y12][y22]` = `p(y12, y22 | x12, x22, xR)`
#[derive(Debug, Clone, PartialEq)]
pub struct DmChannelSpec {
    alphabets: Alphabets,
    p_x11: Vec<f64>,
    p_x21: Vec<f64>,
    p_x12: Vec<f64>,
    p_x22: Vec<f64>,
    p_xr: Vec<f64>,
    test_channel: Vec<f64>,
    slot1: Vec<f64>,
    slot2: Vec<f64>,
}

/// Input distributions in the order `x11, x21, x12, x22, xr`.
pub type InputDists = [Vec<f64>; 5];

impl DmChannelSpec {
    pub fn new(
        alphabets: Alphabets,
        inputs: InputDists,
        test_channel: Vec<f64>,
        slot1: Vec<f64>,
        slot2: Vec<f64>,
    ) -> Result<Self, DmError> {
        let [p_x11, p_x21, p_x12, p_x22, p_xr] = inputs;
        let spec = DmChannelSpec {
            alphabets,
            p_x11,
            p_x21,
            p_x12,
            p_x22,
            p_xr,
            test_channel,
            slot1,
            slot2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds the tables by evaluating closures over every index tuple.
    pub fn from_fns(
        alphabets: Alphabets,
        inputs: InputDists,
        test_channel: impl Fn(usize, usize) -> f64,
        slot1: impl Fn([usize; 2], [usize; 3]) -> f64,
        slot2: impl Fn([usize; 3], [usize; 2]) -> f64,
    ) -> Result<Self, DmError> {
        let a = alphabets;
        let mut tc = Vec::with_capacity(a.yr * a.yhr);
        for yr in 0..a.yr {
            for yh in 0..a.yhr {
                tc.push(test_channel(yr, yh));
            }
        }
        let mut s1 = Vec::new();
        for x1 in 0..a.x11 {
            for x2 in 0..a.x21 {
                for yr in 0..a.yr {
                    for y1 in 0..a.y11 {
                        for y2 in 0..a.y21 {
                            s1.push(slot1([x1, x2], [yr, y1, y2]));
                        }
                    }
                }
            }
        }
        let mut s2 = Vec::new();
        for x1 in 0..a.x12 {
            for x2 in 0..a.x22 {
                for xr in 0..a.xr {
                    for y1 in 0..a.y12 {
                        for y2 in 0..a.y22 {
                            s2.push(slot2([x1, x2, xr], [y1, y2]));
                        }
                    }
                }
            }
        }
        DmChannelSpec::new(alphabets, inputs, tc, s1, s2)
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    pub fn is_singleton(&self, v: VarId) -> bool {
        self.alphabets.get(v) == 1
    }

    pub fn input(&self, v: VarId) -> Option<&[f64]> {
        match v {
            VarId::X11 => Some(&self.p_x11),
            VarId::X21 => Some(&self.p_x21),
            VarId::X12 => Some(&self.p_x12),
            VarId::X22 => Some(&self.p_x22),
            VarId::XR => Some(&self.p_xr),
            _ => None,
        }
    }

    pub fn test_channel(&self) -> &[f64] {
        &self.test_channel
    }

    pub fn slot1_table(&self) -> &[f64] {
        &self.slot1
    }

    pub fn slot2_table(&self) -> &[f64] {
        &self.slot2
    }

    fn validate(&self) -> Result<(), DmError> {
        let a = &self.alphabets;
        for v in VarId::ALL {
            if a.get(v) == 0 {
                return Err(DmError::EmptyAlphabet(v));
            }
        }
        for v in [VarId::X11, VarId::X21, VarId::X12, VarId::X22, VarId::XR] {
            let p = self.input(v).unwrap_or_default();
            if p.len() != a.get(v) {
                return Err(DmError::DimensionMismatch(format!(
                    "p({}) has {} entries but the alphabet has {}",
                    v.name().to_lowercase(),
                    p.len(),
                    a.get(v)
                )));
            }
            check_pmf(p, &format!("p({})", v.name().to_lowercase()))?;
        }
        check_conditional(&self.test_channel, a.yr, a.yhr, "p(yhR|yR)")?;
        let s1_rows = checked_size(&[a.x11, a.x21])?;
        let s1_cols = checked_size(&[a.yr, a.y11, a.y21])?;
        check_conditional(&self.slot1, s1_rows, s1_cols, "p(yR,y11,y21|x11,x21)")?;
        let s2_rows = checked_size(&[a.x12, a.x22, a.xr])?;
        let s2_cols = checked_size(&[a.y12, a.y22])?;
        check_conditional(&self.slot2, s2_rows, s2_cols, "p(y12,y22|x12,x22,xR)")?;
        checked_size(&SLOT1_VARS.map(|v| a.get(v)))?;
        checked_size(&SLOT2_VARS.map(|v| a.get(v)))?;
        Ok(())
    }

    /// `p(x11)p(x21) p(yR,y11,y21|x11,x21) p(yhR|yR)` over [`SLOT1_VARS`].
    pub fn build_slot1_joint(&self) -> Result<JointPmf, DmError> {
        let a = &self.alphabets;
        let sizes: Vec<usize> = SLOT1_VARS.iter().map(|&v| a.get(v)).collect();
        let mut probs = Vec::with_capacity(checked_size(&sizes)?);
        let mut row = 0;
        for x1 in 0..a.x11 {
            for x2 in 0..a.x21 {
                let px = self.p_x11[x1] * self.p_x21[x2];
                for yr in 0..a.yr {
                    for _y1 in 0..a.y11 {
                        for _y2 in 0..a.y21 {
                            let pt = self.slot1[row];
                            row += 1;
                            for yh in 0..a.yhr {
                                probs.push(px * pt * self.test_channel[yr * a.yhr + yh]);
                            }
                        }
                    }
                }
            }
        }
        Ok(JointPmf::from_parts(SLOT1_VARS.to_vec(), sizes, probs))
    }

    /// `p(x12)p(x22)p(xR) p(y12,y22|x12,x22,xR)` over [`SLOT2_VARS`].
    pub fn build_slot2_joint(&self) -> Result<JointPmf, DmError> {
        let a = &self.alphabets;
        let sizes: Vec<usize> = SLOT2_VARS.iter().map(|&v| a.get(v)).collect();
        let cols = a.y12 * a.y22;
        let mut probs = Vec::with_capacity(checked_size(&sizes)?);
        let mut row = 0;
        for x1 in 0..a.x12 {
            for x2 in 0..a.x22 {
                for xr in 0..a.xr {
                    let px = self.p_x12[x1] * self.p_x22[x2] * self.p_xr[xr];
                    probs.extend(self.slot2[row * cols..(row + 1) * cols].iter().map(|p| px * p));
                    row += 1;
                }
            }
        }
        Ok(JointPmf::from_parts(SLOT2_VARS.to_vec(), sizes, probs))
    }

    /// The same channel with the relay switched off: the quantizer output
    /// is a constant and the relay always sends symbol 0.
    pub fn without_relay(&self) -> DmChannelSpec {
        let a = self.alphabets;
        let cols = a.y12 * a.y22;
        let mut slot2 = Vec::with_capacity(a.x12 * a.x22 * cols);
        for x1 in 0..a.x12 {
            for x2 in 0..a.x22 {
                let row = (x1 * a.x22 + x2) * a.xr;
                slot2.extend_from_slice(&self.slot2[row * cols..(row + 1) * cols]);
            }
        }
        DmChannelSpec {
            alphabets: Alphabets { xr: 1, yhr: 1, ..a },
            p_x11: self.p_x11.clone(),
            p_x21: self.p_x21.clone(),
            p_x12: self.p_x12.clone(),
            p_x22: self.p_x22.clone(),
            p_xr: vec![1.0],
            test_channel: vec![1.0; a.yr],
            slot1: self.slot1.clone(),
            slot2,
        }
    }

    /// Replaces the test channel, keeping everything else.
    pub fn with_test_channel(&self, yhr: usize, table: Vec<f64>) -> Result<DmChannelSpec, DmError> {
        let spec = DmChannelSpec {
            alphabets: Alphabets { yhr, ..self.alphabets },
            test_channel: table,
            ..self.clone()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self, DmError> {
        serde_json::from_str(text).map_err(|e| DmError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel spec serializes")
    }
}

fn check_conditional(table: &[f64], rows: usize, cols: usize, what: &str) -> Result<(), DmError> {
    if table.len() != rows * cols {
        return Err(DmError::DimensionMismatch(format!(
            "{what} has {} entries, expected {rows} x {cols}",
            table.len()
        )));
    }
    for (r, chunk) in table.chunks(cols).enumerate() {
        check_pmf(chunk, &format!("{what} row {r}"))?;
    }
    Ok(())
}

type Nested5 = Vec<Vec<Vec<Vec<Vec<f64>>>>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    x11: Vec<f64>,
    x21: Vec<f64>,
    x12: Vec<f64>,
    x22: Vec<f64>,
    xr: Vec<f64>,
}

/// On-disk layout: tables as nested arrays in the index order documented on
/// [`DmChannelSpec`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    alphabets: Alphabets,
    inputs: RawInputs,
    test_channel: Vec<Vec<f64>>,
    slot1: Nested5,
    slot2: Nested5,
}

fn flatten5(t: &Nested5, shape: [usize; 5], what: &str) -> Result<Vec<f64>, DmError> {
    let bad = |depth: usize, got: usize| {
        DmError::DimensionMismatch(format!(
            "{what}: axis {depth} has length {got}, expected {}",
            shape[depth]
        ))
    };
    let mut out = Vec::new();
    if t.len() != shape[0] {
        return Err(bad(0, t.len()));
    }
    for a in t {
        if a.len() != shape[1] {
            return Err(bad(1, a.len()));
        }
        for b in a {
            if b.len() != shape[2] {
                return Err(bad(2, b.len()));
            }
            for c in b {
                if c.len() != shape[3] {
                    return Err(bad(3, c.len()));
                }
                for d in c {
                    if d.len() != shape[4] {
                        return Err(bad(4, d.len()));
                    }
                    out.extend_from_slice(d);
                }
            }
        }
    }
    Ok(out)
}

fn nest5(flat: &[f64], shape: [usize; 5]) -> Nested5 {
    let mut it = flat.iter().copied();
    (0..shape[0])
        .map(|_| {
            (0..shape[1])
                .map(|_| {
                    (0..shape[2])
                        .map(|_| (0..shape[3]).map(|_| it.by_ref().take(shape[4]).collect()).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

impl TryFrom<RawSpec> for DmChannelSpec {
    type Error = DmError;

    fn try_from(raw: RawSpec) -> Result<Self, DmError> {
        let a = raw.alphabets;
        if raw.test_channel.len() != a.yr || raw.test_channel.iter().any(|r| r.len() != a.yhr) {
            return Err(DmError::DimensionMismatch(format!(
                "test_channel must be {} x {}",
                a.yr, a.yhr
            )));
        }
        let tc = raw.test_channel.concat();
        let s1 = flatten5(&raw.slot1, [a.x11, a.x21, a.yr, a.y11, a.y21], "slot1")?;
        let s2 = flatten5(&raw.slot2, [a.x12, a.x22, a.xr, a.y12, a.y22], "slot2")?;
        let RawInputs { x11, x21, x12, x22, xr } = raw.inputs;
        DmChannelSpec::new(a, [x11, x21, x12, x22, xr], tc, s1, s2)
    }
}

impl From<&DmChannelSpec> for RawSpec {
    fn from(s: &DmChannelSpec) -> Self {
        let a = s.alphabets;
        RawSpec {
            alphabets: a,
            inputs: RawInputs {
                x11: s.p_x11.clone(),
                x21: s.p_x21.clone(),
                x12: s.p_x12.clone(),
                x22: s.p_x22.clone(),
                xr: s.p_xr.clone(),
            },
            test_channel: s.test_channel.chunks(a.yhr).map(<[f64]>::to_vec).collect(),
            slot1: nest5(&s.slot1, [a.x11, a.x21, a.yr, a.y11, a.y21]),
            slot2: nest5(&s.slot2, [a.x12, a.x22, a.xr, a.y12, a.y22]),
        }
    }
}

impl Serialize for DmChannelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawSpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DmChannelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawSpec::deserialize(d)?;
        DmChannelSpec::try_from(raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use VarId::*;

    fn bsc(eps: f64) -> impl Fn(usize, usize) -> f64 {
        move |a, b| if a == b { 1.0 - eps } else { eps }
    }

    /// Binary toy channel: YR = X11 xor X21 through a BSC, Y11 = X11 through
    /// a BSC, Y21 constant; slot 2 Y12 = X12 xor XR through a BSC.
    fn toy() -> DmChannelSpec {
        let a = Alphabets { y21: 1, y22: 1, ..Alphabets::uniform(2) };
        DmChannelSpec::from_fns(
            a,
            [vec![0.5, 0.5], vec![0.3, 0.7], vec![0.5, 0.5], vec![0.6, 0.4], vec![0.5, 0.5]],
            bsc(0.2),
            |[x1, x2], [yr, y1, _]| bsc(0.1)(x1 ^ x2, yr) * bsc(0.15)(x1, y1),
            |[x1, x2, xr], [y1, _]| bsc(0.05)(x1 ^ xr ^ x2, y1),
        )
        .unwrap()
    }

    #[test]
    fn slot1_joint_matches_nested_loops() {
        let spec = toy();
        let joint = spec.build_slot1_joint().unwrap();
        let px11 = [0.5, 0.5];
        let px21 = [0.3, 0.7];
        let mut n = 0;
        for x1 in 0..2 {
            for x2 in 0..2 {
                for yr in 0..2 {
                    for y1 in 0..2 {
                        for yh in 0..2 {
                            let expect = px11[x1] * px21[x2] * bsc(0.1)(x1 ^ x2, yr) * bsc(0.15)(x1, y1) * bsc(0.2)(yr, yh);
                            let got = joint.prob(&[x1, x2, yr, y1, 0, yh]);
                            assert!((got - expect).abs() < 1e-16);
                            n += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(n, 32);
        let total: f64 = joint.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slot2_joint_matches_nested_loops() {
        let spec = toy();
        let joint = spec.build_slot2_joint().unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                for xr in 0..2 {
                    for y1 in 0..2 {
                        let expect = 0.5 * [0.6, 0.4][x2] * 0.5 * bsc(0.05)(x1 ^ xr ^ x2, y1);
                        assert!((joint.prob(&[x1, x2, xr, y1, 0]) - expect).abs() < 1e-16);
                    }
                }
            }
        }
        // inputs are independent by construction
        assert!(joint.mutual_information(&[X12], &[X22], &[]).unwrap().abs() < 1e-14);
        assert!(joint.mutual_information(&[X12, X22], &[XR], &[]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn deterministic_factors_give_point_mass() {
        let a = Alphabets::uniform(2);
        let spec = DmChannelSpec::from_fns(
            a,
            [vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            |yr, yh| (yr == yh) as u8 as f64,
            |[x1, x2], [yr, y1, y2]| ((yr == x1 ^ x2) && y1 == x1 && y2 == x2) as u8 as f64,
            |[x1, x2, xr], [y1, y2]| ((y1 == x1) && (y2 == x2 ^ xr)) as u8 as f64,
        )
        .unwrap();
        let j1 = spec.build_slot1_joint().unwrap();
        assert_eq!(j1.probs().iter().filter(|&&p| p > 0.0).count(), 1);
        assert_eq!(j1.prob(&[1, 0, 1, 1, 0, 1]), 1.0);
        let j2 = spec.build_slot2_joint().unwrap();
        assert_eq!(j2.probs().iter().filter(|&&p| p > 0.0).count(), 1);
        assert_eq!(j2.entropy(&SLOT2_VARS).unwrap(), 0.0);
    }

    #[test]
    fn identity_test_channel_copies_yr() {
        let spec = toy().with_test_channel(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let j = spec.build_slot1_joint().unwrap();
        let m = j.marginalize(&[YR, YhR]).unwrap();
        let diag = m.prob(&[0, 0]) + m.prob(&[1, 1]);
        assert!((diag - 1.0).abs() < 1e-15);
        let h = j.entropy(&[YR]).unwrap();
        assert!((j.mutual_information(&[YR], &[YhR], &[]).unwrap() - h).abs() < 1e-14);
    }

    #[test]
    fn validation_errors() {
        let a = Alphabets::uniform(2);
        let good_inputs = || [vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5]];
        let r = DmChannelSpec::new(a, good_inputs(), vec![0.5; 3], vec![0.125; 32], vec![0.25; 32]);
        assert!(matches!(r, Err(DmError::DimensionMismatch(_))));
        let r = DmChannelSpec::new(a, good_inputs(), vec![0.5; 4], vec![0.125; 32], vec![0.3; 32]);
        assert!(matches!(r, Err(DmError::InvalidPmf(_))));
        let mut bad = good_inputs();
        bad[4] = vec![0.5, 0.5, 0.0];
        let r = DmChannelSpec::new(a, bad, vec![0.5; 4], vec![0.125; 32], vec![0.25; 32]);
        assert!(matches!(r, Err(DmError::DimensionMismatch(_))));
        assert!(DmChannelSpec::new(a, good_inputs(), vec![0.5; 4], vec![0.125; 32], vec![0.25; 32]).is_ok());
    }

    #[test]
    fn json_round_trip_and_shape_errors() {
        let spec = toy();
        let text = spec.to_json();
        assert_eq!(DmChannelSpec::from_json(&text).unwrap(), spec);

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["slot1"][0][0][0][0] = serde_json::json!([1.0, 0.0]);
        let err = DmChannelSpec::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, DmError::Json(ref m) if m.contains("slot1")), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["inputs"]["x11"] = serde_json::json!([0.6, 0.6]);
        assert!(DmChannelSpec::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn without_relay_slices_symbol_zero() {
        let spec = toy();
        let nr = spec.without_relay();
        assert_eq!(nr.alphabets().xr, 1);
        assert_eq!(nr.alphabets().yhr, 1);
        let j = nr.build_slot2_joint().unwrap();
        // Y12 = X12 xor X22 through the BSC once XR is pinned to 0
        let expect = 0.5 * 0.6 * 0.95;
        assert!((j.prob(&[1, 0, 0, 1, 0]) - expect).abs() < 1e-16);
        assert!(nr.build_slot1_joint().unwrap().entropy(&[YhR]).unwrap() == 0.0);
    }
}
