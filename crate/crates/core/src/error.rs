use thiserror::Error;

/// Which state field a positivity check tripped on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    SpecificVolume,
    Velocity,
    Temperature,
    RadiativeFlux,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Field::SpecificVolume => "v",
            Field::Velocity => "u",
            Field::Temperature => "theta",
            Field::RadiativeFlux => "q",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {what} = {value} is outside the admissible range")]
    Domain { what: &'static str, value: f64 },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("singular matrix: pivot magnitude {pivot:e} below floor {floor:e}")]
    Singular { pivot: f64, floor: f64 },

    #[error("positivity violated in {field} at cell {cell} (value {value:e})")]
    Positivity { field: Field, cell: usize, value: f64 },

    #[error("pole in exponent {which}: denominator {denominator:e} vanishes")]
    Pole { which: &'static str, denominator: f64 },

    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape { expected, got })
    }
}
