//! Poincaré polynomials of space expressions.
//!
//! Coefficients are exact arbitrary-precision integers. The evaluation rules
//! are the standard ones for products, projective bundles and blowups along
//! smooth centers; divisorial blowups contribute nothing.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{SpaceExpr, SpaceNode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BettiError {
    #[error("insufficient data: atom `{atom}` carries no Poincaré polynomial")]
    InsufficientData { atom: String },
}

/// Poincaré polynomial `sum b_i t^i`, stored densely with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poincare {
    coeffs: Vec<BigUint>,
}

impl Poincare {
    pub fn zero() -> Self {
        Poincare { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poincare::from_coeffs([1u64])
    }

    pub fn from_coeffs<I, C>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = C>,
        C: Into<BigUint>,
    {
        let mut p = Poincare {
            coeffs: coeffs.into_iter().map(Into::into).collect(),
        };
        p.trim();
        p
    }

    /// `t^lo + t^(lo+2) + ... + t^hi` (even steps). Empty when `lo > hi`.
    pub fn even_run(lo: usize, hi: usize) -> Self {
        if lo > hi {
            return Poincare::zero();
        }
        let mut coeffs = vec![BigUint::zero(); hi + 1];
        for k in (lo..=hi).step_by(2) {
            coeffs[k] = BigUint::one();
        }
        Poincare::from_coeffs(coeffs)
    }

    /// Poincaré polynomial of projective `d`-space.
    pub fn projective(d: usize) -> Self {
        Poincare::even_run(0, 2 * d)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the top nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigUint {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Betti numbers as machine integers; `None` if any overflows `u64`.
    pub fn to_u64_vec(&self) -> Option<Vec<u64>> {
        self.coeffs.iter().map(ToPrimitive::to_u64).collect()
    }

    /// Euler number `P(-1)`. Odd coefficients subtract.
    pub fn euler(&self) -> num_bigint::BigInt {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let c = num_bigint::BigInt::from(c.clone());
                if i % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }

    pub fn is_palindromic(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev())
    }

    pub fn is_palindromic_of_degree(&self, degree: usize) -> bool {
        self.degree() == Some(degree) && self.is_palindromic()
    }
}

impl Add for &Poincare {
    type Output = Poincare;

    fn add(self, rhs: &Poincare) -> Poincare {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poincare::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)))
    }
}

impl Mul for &Poincare {
    type Output = Poincare;

    fn mul(self, rhs: &Poincare) -> Poincare {
        if self.is_zero() || rhs.is_zero() {
            return Poincare::zero();
        }
        let mut out = vec![BigUint::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poincare::from_coeffs(out)
    }
}

impl fmt::Display for Poincare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match (i, c.is_one()) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => f.write_str("t")?,
                (1, false) => write!(f, "{c}*t")?,
                (_, true) => write!(f, "t^{i}")?,
                (_, false) => write!(f, "{c}*t^{i}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

// Coefficients go out as JSON numbers when they fit in u64, as decimal
// strings otherwise.
impl Serialize for Poincare {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            match c.to_u64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&c.to_string())?,
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Poincare {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Coeff {
            Num(u64),
            Text(String),
        }

        struct CoeffsVisitor;

        impl<'de> Visitor<'de> for CoeffsVisitor {
            type Value = Poincare;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of nonnegative integer coefficients")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Poincare, A::Error> {
                let mut coeffs = Vec::new();
                while let Some(c) = seq.next_element::<Coeff>()? {
                    coeffs.push(match c {
                        Coeff::Num(v) => BigUint::from(v),
                        Coeff::Text(s) => s.parse::<BigUint>().map_err(de::Error::custom)?,
                    });
                }
                Ok(Poincare::from_coeffs(coeffs))
            }
        }

        deserializer.deserialize_seq(CoeffsVisitor)
    }
}

/// Memoizing evaluator; shared sub-expressions are computed once.
#[derive(Default)]
pub struct BettiCalculator {
    memo: HashMap<*const SpaceNode, (SpaceExpr, Poincare)>,
}

impl BettiCalculator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn poincare(&mut self, s: &SpaceExpr) -> Result<Poincare, BettiError> {
        if let Some((_, p)) = self.memo.get(&s.node_ptr()) {
            return Ok(p.clone());
        }
        let p = match s.node() {
            SpaceNode::Empty => Poincare::zero(),
            SpaceNode::Point => Poincare::one(),
            SpaceNode::Atom { name, poincare, .. } => {
                poincare.clone().ok_or_else(|| BettiError::InsufficientData { atom: name.clone() })?
            }
            SpaceNode::Product { left, right } => &self.poincare(left)? * &self.poincare(right)?,
            SpaceNode::ProjBundle { base, fiber_rank } => {
                &self.poincare(base)? * &Poincare::projective(*fiber_rank as usize - 1)
            }
            SpaceNode::Blowup { ambient, center, codim } => {
                let ambient = self.poincare(ambient)?;
                if *codim <= 1 {
                    ambient
                } else {
                    let exceptional = &self.poincare(center)?
                        * &Poincare::even_run(2, 2 * (*codim as usize - 1));
                    &ambient + &exceptional
                }
            }
        };
        self.memo.insert(s.node_ptr(), (s.clone(), p.clone()));
        Ok(p)
    }
}

pub fn poincare(s: &SpaceExpr) -> Result<Poincare, BettiError> {
    BettiCalculator::new().poincare(s)
}

pub fn betti_vector(s: &SpaceExpr) -> Result<Vec<BigUint>, BettiError> {
    Ok(poincare(s)?.coeffs)
}
