use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::realnum::{eval_real, parse_components, RealSpec, SurdSum};

/// The vector `alpha ∈ R^N` whose products with integer vectors are studied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaVector {
    components: Vec<RealSpec>,
    resonant: bool,
}

impl AlphaVector {
    pub fn new(components: Vec<RealSpec>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("alpha must have at least one component".into()));
        }
        // all-rational vectors make 1, alpha_1, ..., alpha_N linearly dependent
        let resonant = components.iter().all(RealSpec::is_rational);
        Ok(AlphaVector { components, resonant })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(parse_components(src)?)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[RealSpec] {
        &self.components
    }

    pub fn is_resonant(&self) -> bool {
        self.resonant
    }

    pub fn is_exact(&self) -> bool {
        self.components.iter().all(RealSpec::is_exact)
    }

    /// Exact `alpha · q`, when every coordinate is exact.
    pub fn dot_exact(&self, q: &[i64]) -> Option<SurdSum> {
        let mut acc = SurdSum::zero();
        for (c, &k) in self.components.iter().zip(q) {
            if k != 0 {
                acc = acc.add(&c.to_surd()?.scale(&BigRational::from_integer(BigInt::from(k))));
            }
        }
        Some(acc)
    }

    /// Upper bound on `Σ |alpha_i|`.
    pub fn l1_upper(&self) -> Result<f64> {
        let mut s = 0.0;
        for c in &self.components {
            let v = eval_real(c, 64)?;
            s += v.upper_f64().abs().max(v.lower_f64().abs());
        }
        Ok(s * (1.0 + 1e-12))
    }

    pub fn approx(&self) -> Vec<f64> {
        self.components.iter().map(RealSpec::approx_f64).collect()
    }
}

impl fmt::Display for AlphaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for AlphaVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vectors() {
        let g = AlphaVector::parse("quad:(1+1*sqrt(5))/2").unwrap();
        assert_eq!(g.dim(), 1);
        assert!(!g.is_resonant());
        let v = AlphaVector::parse("quad:(0+1*sqrt(2))/1,quad:(0+1*sqrt(3))/1").unwrap();
        assert_eq!(v.dim(), 2);
        assert_eq!(v.to_string(), "quad:(0+1*sqrt(2))/1,quad:(0+1*sqrt(3))/1");
        assert!(AlphaVector::parse("quad:(1+1*sqrt(4))/2").is_err());
    }

    #[test]
    fn rational_vectors_are_resonant() {
        let r = AlphaVector::parse("rat:1/2,rat:1/3").unwrap();
        assert!(r.is_resonant());
        let m = AlphaVector::parse("rat:1/2,quad:(0+1*sqrt(2))/1").unwrap();
        assert!(!m.is_resonant());
    }
}
