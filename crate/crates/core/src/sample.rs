use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty collection of finite observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("sample is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("sample value at index {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Apply `a * y + b` to every value.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|y| a * y + b).collect())
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.0
    }
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Outcomes partitioned by observed treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoArmSample {
    pub treated: Sample,
    pub control: Sample,
}

impl TwoArmSample {
    pub fn new(treated: Sample, control: Sample) -> Self {
        Self { treated, control }
    }

    /// Split `outcomes` by a 0/1 treatment indicator.
    pub fn from_indicator(outcomes: &[f64], treatment: &[f64]) -> Result<Self> {
        if outcomes.len() != treatment.len() {
            return Err(Error::input(format!(
                "outcome length {} does not match treatment length {}",
                outcomes.len(),
                treatment.len()
            )));
        }
        let mut treated = Vec::new();
        let mut control = Vec::new();
        for (&y, &t) in outcomes.iter().zip(treatment) {
            if t == 1.0 {
                treated.push(y);
            } else if t == 0.0 {
                control.push(y);
            } else {
                return Err(Error::input(format!("treatment value {t} is not 0 or 1")));
            }
        }
        let treated = Sample::new(treated).map_err(|_| Error::input("treated arm is empty"))?;
        let control = Sample::new(control).map_err(|_| Error::input("control arm is empty"))?;
        Ok(Self { treated, control })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(Sample::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn split_by_indicator() {
        let two = TwoArmSample::from_indicator(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(two.treated.values(), &[1.0, 3.0]);
        assert_eq!(two.control.values(), &[2.0]);
        assert!(TwoArmSample::from_indicator(&[1.0], &[1.0]).is_err());
        assert!(TwoArmSample::from_indicator(&[1.0, 2.0], &[1.0, 0.5]).is_err());
    }
}
