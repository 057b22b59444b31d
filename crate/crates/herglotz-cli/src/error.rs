use herglotz::coeffs::FieldError;
use herglotz::epi::EpiError;
use herglotz::pencil::PencilError;
use herglotz::presets::PresetError;
use herglotz::prufer::PruferError;
use herglotz::wkb::WkbError;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// An error message with the process exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

fn pencil_code(e: &PencilError) -> i32 {
    match e {
        PencilError::Invalid(_)
        | PencilError::NotPositive { .. }
        | PencilError::Field { .. }
        | PencilError::SingularBoundary(_)
        | PencilError::GridTooSmall(_)
        | PencilError::Length { .. }
        | PencilError::ZeroVector
        | PencilError::NoSuchInterval(..)
        | PencilError::Io(_) => EXIT_INPUT,
        PencilError::AtPole(..)
        | PencilError::RealityViolated { .. }
        | PencilError::NotSymmetrizable
        | PencilError::Search(_)
        | PencilError::Linalg(_) => EXIT_NUMERICAL,
    }
}

fn epi_code(e: &EpiError) -> i32 {
    match e {
        EpiError::Pencil(p) => pencil_code(p),
        EpiError::Linalg(_) => EXIT_NUMERICAL,
        EpiError::Invalid(_) | EpiError::Field { .. } | EpiError::Weight { .. } | EpiError::EmptySweep => EXIT_INPUT,
    }
}

impl From<PencilError> for CliError {
    fn from(e: PencilError) -> Self {
        Self { code: pencil_code(&e), message: e.to_string() }
    }
}

impl From<EpiError> for CliError {
    fn from(e: EpiError) -> Self {
        Self { code: epi_code(&e), message: e.to_string() }
    }
}

impl From<PresetError> for CliError {
    fn from(e: PresetError) -> Self {
        let code = match &e {
            PresetError::Pencil(p) => pencil_code(p),
            PresetError::Epi(p) => epi_code(p),
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<PruferError> for CliError {
    fn from(e: PruferError) -> Self {
        let code = match &e {
            PruferError::Pencil(p) => pencil_code(p),
            _ => EXIT_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<WkbError> for CliError {
    fn from(e: WkbError) -> Self {
        // asking for a mode outside the WKB-valid range is an input problem
        let code = match &e {
            WkbError::Pencil(p) => pencil_code(p),
            WkbError::Quadrature(_) => EXIT_NUMERICAL,
            WkbError::Invalid { .. } | WkbError::BelowRange { .. } | WkbError::EmptyValidity(_) | WkbError::NoSuchPole(..) => {
                EXIT_INPUT
            }
        };
        Self { code, message: e.to_string() }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(e.to_string())
    }
}
