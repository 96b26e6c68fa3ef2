use num_complex::Complex64;

use crate::geometry::GeometryFields;

use super::EvolveError;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    /// Classical surface density `φ⁽²⁾`.
    Density(Vec<f64>),
    /// Quantum surface amplitude `φ`.
    Amplitude(Vec<Complex64>),
}

/// Snapshot of a field on the surface grid at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub values: FieldValues,
    pub time: f64,
}

impl FieldState {
    /// Classical state; values must be finite and nonnegative.
    pub fn density(values: Vec<f64>) -> Result<Self, EvolveError> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(EvolveError::InvalidState);
        }
        Ok(Self {
            values: FieldValues::Density(values),
            time: 0.0,
        })
    }

    pub fn amplitude(values: Vec<Complex64>) -> Result<Self, EvolveError> {
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(EvolveError::InvalidState);
        }
        Ok(Self {
            values: FieldValues::Amplitude(values),
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        match &self.values {
            FieldValues::Density(v) => v.len(),
            FieldValues::Amplitude(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `ρ`: the density itself, or `|φ|²`.
    pub fn rho(&self) -> Vec<f64> {
        match &self.values {
            FieldValues::Density(v) => v.clone(),
            FieldValues::Amplitude(v) => v.iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

/// `Σ √g ρ h₁h₂`.
pub fn total_charge(state: &FieldState, geo: &GeometryFields) -> f64 {
    geo.integrate(&state.rho())
}

/// Rescales the state so that its total charge is one.
pub fn normalize(state: &mut FieldState, geo: &GeometryFields) -> Result<(), EvolveError> {
    geo.grid().check_len(state.len())?;
    let q = total_charge(state, geo);
    if !(q > 0.0 && q.is_finite()) {
        return Err(EvolveError::ZeroNorm);
    }
    match &mut state.values {
        FieldValues::Density(v) => v.iter_mut().for_each(|x| *x /= q),
        FieldValues::Amplitude(v) => {
            let s = q.sqrt();
            v.iter_mut().for_each(|x| *x /= s);
        }
    }
    Ok(())
}
