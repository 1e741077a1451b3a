use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mikado::exact_power;

/// Exact rational parameter, written `a/b`, an integer, or a decimal such as
/// `1e-4` or `0.25`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Frac(pub Ratio<i64>);

impl Frac {
    pub fn new(n: i64, d: i64) -> Self {
        Frac(Ratio::new(n, d))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn parse_decimal(s: &str) -> Option<Ratio<i64>> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let exp = exp - frac.len() as i32;
    let p = 10i64.checked_pow(exp.unsigned_abs())?;
    let r = if exp >= 0 { Ratio::from_integer(digits.checked_mul(p)?) } else { Ratio::new(digits, p) };
    Some(if neg { -r } else { r })
}

impl FromStr for Frac {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parameter(format!("cannot parse '{s}' as an exact fraction"));
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            return Ok(Frac(Ratio::new(a, b)));
        }
        parse_decimal(s).map(Frac).ok_or_else(bad)
    }
}

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            F(f64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::F(x) => format!("{x:e}").parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Parameters of the iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterationParams {
    /// Modulation exponent: increments sit near frequency `lambda^beta`.
    pub beta: u32,
    /// First frequency tried by the doubling search.
    pub lambda0: u64,
    pub eps_gamma: Frac,
    /// Base amplitude `A`.
    pub amp: Frac,
    /// Required ratio `lambda_{q+1} / lambda_q`.
    pub gap: u64,
    pub qmax: u32,
    pub lambda_cap: u64,
    /// Largest dense grid allowed.
    pub grid_max: usize,
    /// Frequencies of the structured `||R_{q+1}||` trend.
    pub trend_sweep: Vec<u64>,
    /// `eps'` of the `L^{2-eps'}` partial sums and the Besov exponent `-1/2 - eps'`.
    pub diag_eps: Frac,
}

impl Default for IterationParams {
    fn default() -> Self {
        IterationParams {
            beta: 3,
            lambda0: 8,
            eps_gamma: Frac::new(1, 3),
            amp: Frac::new(1, 10000),
            gap: 8,
            qmax: 1,
            lambda_cap: 64,
            grid_max: 4096,
            trend_sweep: vec![8, 16, 32],
            diag_eps: Frac::new(1, 8),
        }
    }
}

/// `2^{-10} / (2 pi)`: base amplitudes must stay below it.
pub fn amp_limit() -> f64 {
    2f64.powi(-10) / (2.0 * std::f64::consts::PI)
}

impl IterationParams {
    pub fn eps_f64(&self) -> f64 {
        self.eps_gamma.to_f64()
    }

    pub fn amp_f64(&self) -> f64 {
        self.amp.to_f64()
    }

    pub fn validate(&self) -> Result<()> {
        let p = |m: String| Err(Error::Parameter(m));
        if self.beta < 3 {
            return p(format!("beta = {} < 3", self.beta));
        }
        if self.lambda0 < 4 || !self.lambda0.is_power_of_two() {
            return p(format!("lambda0 = {} is not a power of two >= 4", self.lambda0));
        }
        if self.lambda_cap < self.lambda0 || !self.lambda_cap.is_power_of_two() {
            return p(format!("lambda_cap = {} must be a power of two >= lambda0", self.lambda_cap));
        }
        let e = self.eps_gamma.0;
        if e <= Ratio::from_integer(0) || e >= Ratio::from_integer(1) {
            return p(format!("eps_gamma = {e} outside (0, 1)"));
        }
        let mut l = self.lambda0;
        let mut any = false;
        while l <= self.lambda_cap {
            any |= exact_power(l, e).is_some();
            l *= 2;
        }
        if !any {
            return p(format!("no lambda in [{}, {}] has an integer power lambda^({e})", self.lambda0, self.lambda_cap));
        }
        let a = self.amp_f64();
        if !(a > 0.0 && a < amp_limit()) {
            return p(format!("amplitude {a:e} outside (0, 2^-10/(2 pi))"));
        }
        if self.gap < 1 {
            return p("gap must be >= 1".into());
        }
        if self.grid_max < 8 || !self.grid_max.is_power_of_two() {
            return p(format!("grid_max = {} is not a power of two >= 8", self.grid_max));
        }
        if let Some(l) = self.trend_sweep.iter().find(|l| **l < 4 || !l.is_power_of_two()) {
            return p(format!("trend sweep entry {l} is not a power of two >= 4"));
        }
        let d = self.diag_eps.0;
        if d <= Ratio::from_integer(0) || d >= Ratio::from_integer(1) {
            return p(format!("diag_eps = {d} outside (0, 1)"));
        }
        Ok(())
    }
}

/// `p(q) = 2 - 2^{-q-10}`.
pub fn p_of(q: u32) -> f64 {
    2.0 - 2f64.powi(-(q as i32) - 10)
}
