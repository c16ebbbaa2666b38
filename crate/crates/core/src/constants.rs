//! Explicit structural constants evaluated in extended log space.
//!
//! The ledger values grow as iterated exponentials, so each logarithm is held
//! as a [`Tower`]: a float together with the number of exponentials applied
//! to it.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Largest `x` with `exp(x)` finite.
pub const LN_MAX: f64 = 709.782712893384;

/// The number `exp^level(value)`.
///
/// Canonical form: `level == 0` (any finite real), or `level >= 1` with
/// `value > LN_MAX`, so each number has exactly one representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub level: u32,
    pub value: f64,
}

impl Tower {
    pub const fn real(value: f64) -> Tower {
        Tower { level: 0, value }
    }

    pub fn new(level: u32, value: f64) -> Tower {
        let mut t = Tower { level, value };
        while t.level > 0 && t.value <= LN_MAX {
            t.value = t.value.exp();
            t.level -= 1;
        }
        t
    }

    /// The plain float, if representable.
    pub fn to_f64(&self) -> Option<f64> {
        (self.level == 0).then_some(self.value)
    }

    pub fn is_positive(&self) -> bool {
        self.level > 0 || self.value > 0.0
    }

    pub fn exp(self) -> Tower {
        if self.level == 0 && self.value <= LN_MAX {
            Tower::real(self.value.exp())
        } else {
            Tower {
                level: self.level + 1,
                value: self.value,
            }
        }
    }

    pub fn ln(self) -> Result<Tower> {
        if self.level == 0 {
            if self.value > 0.0 {
                Ok(Tower::real(self.value.ln()))
            } else {
                Err(Error::InvalidParameter {
                    name: "tower",
                    reason: format!("logarithm of nonpositive value {}", self.value),
                })
            }
        } else {
            Ok(Tower::new(self.level - 1, self.value))
        }
    }

    /// Sum. Operands at level `>= 1` are positive; a level-0 operand may have
    /// any sign as long as the result stays positive when large.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Tower) -> Tower {
        let (hi, lo) = if self >= other {
            (self, other)
        } else {
            (other, self)
        };
        if hi.level == 0 {
            let s = hi.value + lo.value;
            if s.is_finite() {
                return Tower::real(s);
            }
            // Both operands near f64::MAX.
            let l = hi.value.ln() + (lo.value / hi.value).ln_1p();
            return Tower::new(1, l);
        }
        if lo.level == 0 && lo.value <= 0.0 {
            // Subtracting a float from a number above f64::MAX.
            if hi.level == 1 {
                let l = hi.value + (lo.value * (-hi.value).exp()).ln_1p();
                return Tower::new(1, l);
            }
            return hi;
        }
        let (lh, ll) = (hi.ln_unchecked(), lo.ln_unchecked());
        if lh.level == 0 {
            // log-sum-exp one level down.
            let l = lh.value + (ll.value - lh.value).exp().ln_1p();
            return Tower::new(1, l);
        }
        // hi > e^{LN_MAX·…}; a factor of at most 2 is below resolution.
        hi
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Tower) -> Tower {
        if self.level == 0 && other.level == 0 {
            let p = self.value * other.value;
            if p.is_finite() && p != 0.0 || self.value == 0.0 || other.value == 0.0 {
                return Tower::real(p);
            }
        }
        self.ln_unchecked().add(other.ln_unchecked()).exp()
    }

    pub fn scale(self, k: f64) -> Tower {
        self.mul(Tower::real(k))
    }

    pub fn max(self, other: Tower) -> Tower {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `ln` for values known to be positive.
    fn ln_unchecked(self) -> Tower {
        self.ln().expect("positive operand")
    }
}

impl PartialOrd for Tower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        // Levels >= 1 are positive and exceed every level-0 float.
        match (self.level, other.level) {
            (0, 0) => self.value.partial_cmp(&other.value),
            (a, b) if a != b => Some(a.cmp(&b)),
            _ => self.value.partial_cmp(&other.value),
        }
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            write!(f, "{}", self.value)
        } else {
            write!(f, "exp^{}({})", self.level, self.value)
        }
    }
}

/// Distortion function descriptor. `Power`: `a·t^b`; `Affine`: `a·t + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Eta {
    Power { a: f64, b: f64 },
    Affine { a: f64, c: f64 },
}

impl Eta {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InputConstraint(format!("eta {self}: {m}")));
        match *self {
            Eta::Power { a, b } => {
                if !(a.is_finite() && b.is_finite() && a >= 1.0 && b >= 1.0) {
                    return bad("power law needs finite a >= 1 and b >= 1");
                }
            }
            Eta::Affine { a, c } => {
                if !(a.is_finite() && c.is_finite() && a > 0.0 && c >= 0.0) {
                    return bad("affine map needs finite a > 0 and c >= 0");
                }
                if a + c < 1.0 {
                    return bad("eta(1) must be >= 1");
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Eta::Power { a, b } => a * t.powf(b),
            Eta::Affine { a, c } => a * t + c,
        }
    }

    /// `ln η(t)` given `ln t`.
    pub fn ln_apply(&self, ln_t: Tower) -> Tower {
        match *self {
            Eta::Power { a, b } => Tower::real(a.ln()).add(ln_t.scale(b)),
            Eta::Affine { a, c } => {
                let main = Tower::real(a.ln()).add(ln_t).exp();
                if c > 0.0 {
                    main.add(Tower::real(c)).ln_unchecked()
                } else {
                    main.ln_unchecked()
                }
            }
        }
    }

    /// `ln η⁻¹(s)` given `ln s`.
    pub fn ln_inverse(&self, ln_s: Tower) -> Result<Tower> {
        match *self {
            Eta::Power { a, b } => Ok(ln_s.add(Tower::real(-a.ln())).scale(1.0 / b)),
            Eta::Affine { a, c } => {
                if c == 0.0 {
                    return Ok(ln_s.add(Tower::real(-a.ln())));
                }
                let s = ln_s.exp();
                let v = s.add(Tower::real(-c));
                if !v.is_positive() {
                    return Err(Error::EtaInversion(format!(
                        "{self} has no preimage for exp({ln_s}) (values below {c} are not attained)"
                    )));
                }
                Ok(v.ln_unchecked().add(Tower::real(-a.ln())))
            }
        }
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Power { a, b } => write!(f, "pow:{a}:{b}"),
            Eta::Affine { a, c } => write!(f, "affine:{a}:{c}"),
        }
    }
}

impl FromStr for Eta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{x}` in eta `{s}`")))
        };
        let eta = match parts.as_slice() {
            ["pow", a, b] => Eta::Power {
                a: num(a)?,
                b: num(b)?,
            },
            ["affine", a, c] => Eta::Affine {
                a: num(a)?,
                c: num(c)?,
            },
            _ => {
                return Err(Error::Parse(format!(
                    "eta `{s}` must look like pow:a:b or affine:a:c"
                )))
            }
        };
        eta.validate()?;
        Ok(eta)
    }
}

impl TryFrom<String> for Eta {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Eta> for String {
    fn from(e: Eta) -> String {
        e.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerInputs {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub eta: Eta,
}

/// Natural logarithms of the ledger constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub inputs: LedgerInputs,
    #[serde(rename = "logC1")]
    pub log_c1: Tower,
    #[serde(rename = "logM2")]
    pub log_m2: Tower,
    #[serde(rename = "logM1")]
    pub log_m1: Tower,
    #[serde(rename = "logM0")]
    pub log_m0: Tower,
    #[serde(rename = "logB0")]
    pub log_b0: Tower,
    #[serde(rename = "logA0")]
    pub log_a0: Tower,
    /// `ln(8·A₀·B₀)`, the length-cigar coefficient.
    pub log_thm5_coeff: Tower,
    /// `ln(32·A₀·B₀²)`, the inner-uniformity coefficient.
    pub log_thm7_coeff: Tower,
}

impl ConstantLedger {
    /// Entries in dependency order, with their JSON names.
    pub fn entries(&self) -> [(&'static str, Tower); 8] {
        [
            ("logC1", self.log_c1),
            ("logM2", self.log_m2),
            ("logM1", self.log_m1),
            ("logM0", self.log_m0),
            ("logB0", self.log_b0),
            ("logA0", self.log_a0),
            ("log_thm5_coeff", self.log_thm5_coeff),
            ("log_thm7_coeff", self.log_thm7_coeff),
        ]
    }
}

fn check_inputs(m: f64, c: f64, eta: &Eta) -> Result<()> {
    if !(m.is_finite() && c.is_finite()) {
        return Err(Error::InputConstraint(format!(
            "M and C must be finite, got M={m}, C={c}"
        )));
    }
    if !(37.0 <= m + 1.0 && m + 1.0 <= c) {
        return Err(Error::InputConstraint(format!(
            "need 37 <= M+1 <= C, got M={m}, C={c}"
        )));
    }
    eta.validate()?;
    if eta.eval(1.0) < 1.0 {
        return Err(Error::InputConstraint(format!(
            "eta(1) = {} < 1",
            eta.eval(1.0)
        )));
    }
    Ok(())
}

fn ln_f(x: f64) -> Tower {
    Tower::real(x.ln())
}

/// Evaluates the ledger bottom-up: `C₁ → M₂ → M₁ → M₀ → B₀ → A₀`.
pub fn compute_ledger(m: f64, c: f64, eta: Eta) -> Result<ConstantLedger> {
    check_inputs(m, c, &eta)?;

    // C₁ = e^{4(CM)²}
    let cm = c * m;
    let log_c1 = Tower::real(4.0 * cm * cm);

    // M₂ = 10·C₁⁴·η(C₁)·max{1, 1/η⁻¹(C⁻³/5)}
    let ln_small = Tower::real(-3.0 * c.ln() - 5f64.ln());
    let inv = eta.ln_inverse(ln_small)?;
    let log_m2 = ln_f(10.0)
        .add(log_c1.scale(4.0))
        .add(eta.ln_apply(log_c1))
        .add(Tower::real(0.0).max(negate(inv)?));

    // M₁ = max{η(M₂⁵), e^{M·M₂⁵}, M₂/η⁻¹(1/M₂)}
    let log_m2_5 = log_m2.scale(5.0);
    let t1 = eta.ln_apply(log_m2_5);
    let t2 = ln_f(m).add(log_m2_5).exp();
    let neg_log_m2 = negate(log_m2)?;
    let inv_m2 = eta.ln_inverse(neg_log_m2)?;
    let t3 = log_m2.add(negate(inv_m2)?);
    let log_m1 = t1.max(t2).max(t3);

    // M₀ = max{e^{C₁M₁}, η(C₁M₁²)}
    let u1 = log_c1.add(log_m1).exp();
    let u2 = eta.ln_apply(log_c1.add(log_m1.scale(2.0)));
    let log_m0 = u1.max(u2);

    // B₀ = 20·M₀²
    let log_b0 = ln_f(20.0).add(log_m0.scale(2.0));

    // A₀ = max{e^{B₀²M₀}, (M₁·η(B₀²))^{M₀}}
    let v1 = log_b0.scale(2.0).add(log_m0).exp();
    let inner = log_m1.add(eta.ln_apply(log_b0.scale(2.0)));
    let v2 = log_m0.add(inner.ln()?).exp();
    let log_a0 = v1.max(v2);

    let log_thm5_coeff = ln_f(8.0).add(log_a0).add(log_b0);
    let log_thm7_coeff = ln_f(32.0).add(log_a0).add(log_b0.scale(2.0));

    Ok(ConstantLedger {
        inputs: LedgerInputs { m, c, eta },
        log_c1,
        log_m2,
        log_m1,
        log_m0,
        log_b0,
        log_a0,
        log_thm5_coeff,
        log_thm7_coeff,
    })
}

/// `−x` for level-0 values; large towers cannot be negated.
fn negate(x: Tower) -> Result<Tower> {
    if x.level == 0 {
        Ok(Tower::real(-x.value))
    } else {
        Err(Error::EtaInversion(format!(
            "value {x} is beyond the representable range for inversion"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub entry: String,
    pub lower: (f64, f64),
    pub upper: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub rows: Vec<ConstantLedger>,
    pub monotone: bool,
    pub violations: Vec<MonotonicityViolation>,
}

/// Evaluates the ledger on every grid point and checks that each entry is
/// nondecreasing along the componentwise order on `(M, C)`.
pub fn ledger_monotonicity_report(grid: &[(f64, f64)], eta: Eta) -> Result<MonotonicityReport> {
    if grid.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let rows = grid
        .iter()
        .map(|&(m, c)| compute_ledger(m, c, eta))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for lo in &rows {
        for hi in &rows {
            let (a, b) = (lo.inputs, hi.inputs);
            if !(a.m <= b.m && a.c <= b.c) || (a.m == b.m && a.c == b.c) {
                continue;
            }
            for ((name, x), (_, y)) in lo.entries().iter().zip(hi.entries().iter()) {
                if y < x {
                    violations.push(MonotonicityViolation {
                        entry: name.to_string(),
                        lower: (a.m, a.c),
                        upper: (b.m, b.c),
                    });
                }
            }
        }
    }
    Ok(MonotonicityReport {
        rows,
        monotone: violations.is_empty(),
        violations,
    })
}
