//! Named problems. Every number used by a preset lives in this file.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coeffs::{parse_expr, CoefficientField};
use crate::epi::{self, EpiError, RabiesParams};
use crate::pencil::{BoundaryCondition, PencilError, PencilProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresetError {
    #[error("unknown preset '{0}' (available: {list})", list = PRESET_NAMES.join(", "))]
    Unknown(String),
    #[error("preset '{preset}' needs --field {field}=<expr>")]
    MissingField { preset: &'static str, field: &'static str },
    #[error("preset '{preset}' does not take field '{field}'")]
    UnexpectedField { preset: &'static str, field: String },
    #[error("field {field}: {msg}")]
    BadField { field: String, msg: String },
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Epi(#[from] EpiError),
}

pub const PRESET_NAMES: [&str; 5] = ["example39", "capasso", "morphogen", "rabies-fig3", "rabies-vaccine"];

/// `−u″ + sin(x) u = λu − (0.2 + cos²x)/(λ − 2) u` on `(0, π)`, Dirichlet ends.
pub const EXAMPLE39_JSON: &str = r#"{
  "domain": [0, "pi"],
  "D": "1",
  "V": "sin(x)",
  "W0": "1",
  "poles": [{"alpha": 2, "W": "0.2 + cos(x)^2"}],
  "bc_left": {"b0": 1, "b1": 0},
  "bc_right": {"b0": 1, "b1": 0}
}"#;

// rabies rates shared by both parameter sets (per year)
const RABIES_A: f64 = 0.0027;
const RABIES_SIGMA: f64 = 0.0357;
const RABIES_ALPHA: f64 = 0.2;
/// Diffusion (km²/year) of the vaccination study.
const RABIES_D: f64 = 0.1371;

/// Homogeneous parameters of the heterogeneity study; `D` is the vaccination-study value.
pub fn rabies_fig3() -> Result<RabiesParams, EpiError> {
    RabiesParams::from_exprs(
        epi::HET_A,
        epi::HET_B,
        epi::HET_SIGMA,
        epi::HET_K,
        &epi::HET_ALPHA.to_string(),
        &epi::HET_BETA.to_string(),
        &epi::HET_ASSUMED_D.to_string(),
    )
}

/// Vaccination-study baseline: `K = 1.5`, `b = a/2`, transmission shaped as `6x(1 − x)`
/// (mean 1) and scaled to the homogeneous level 0.2192.
pub fn rabies_vaccine() -> Result<RabiesParams, EpiError> {
    RabiesParams::from_exprs(
        RABIES_A,
        RABIES_A / 2.0,
        RABIES_SIGMA,
        1.5,
        &RABIES_ALPHA.to_string(),
        "0.2192*6*x*(1-x)",
        &RABIES_D.to_string(),
    )
}

pub fn example39() -> PencilProblem {
    PencilProblem::from_json_str(EXAMPLE39_JSON).expect("built-in problem is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// A pencil. `note` says how its spectral parameter relates to the model's growth rate.
    Pencil { problem: PencilProblem, note: Option<&'static str> },
    Rabies(RabiesParams),
}

impl Preset {
    /// The pencil, building the rabies stability pencil when needed.
    pub fn problem(&self) -> Result<PencilProblem, PresetError> {
        match self {
            Preset::Pencil { problem, .. } => Ok(problem.clone()),
            Preset::Rabies(rp) => Ok(epi::build_stability_pencil(rp)?),
        }
    }

    pub fn note(&self) -> Option<&'static str> {
        match self {
            Preset::Pencil { note, .. } => *note,
            Preset::Rabies(_) => Some("spectral parameter is minus the growth rate"),
        }
    }
}

/// Fields each preset accepts; all are required.
pub fn preset_fields(name: &str) -> &'static [&'static str] {
    match name {
        "capasso" => &["d", "a11", "a12", "a22", "gprime"],
        "morphogen" => &["abar", "h0", "f0", "g0"],
        _ => &[],
    }
}

pub fn load_preset(name: &str, fields: &BTreeMap<String, String>) -> Result<Preset, PresetError> {
    let Some(&canonical) = PRESET_NAMES.iter().find(|&&n| n == name) else {
        return Err(PresetError::Unknown(name.to_string()));
    };
    let accepted = preset_fields(canonical);
    if let Some(extra) = fields.keys().find(|k| !accepted.contains(&k.as_str())) {
        return Err(PresetError::UnexpectedField { preset: canonical, field: extra.clone() });
    }
    let get = |field: &'static str| -> Result<&str, PresetError> {
        fields.get(field).map(String::as_str).ok_or(PresetError::MissingField { preset: canonical, field })
    };
    match canonical {
        "example39" => Ok(Preset::Pencil { problem: example39(), note: None }),
        "rabies-fig3" => Ok(Preset::Rabies(rabies_fig3()?)),
        "rabies-vaccine" => Ok(Preset::Rabies(rabies_vaccine()?)),
        "capasso" => {
            let (d, a11, a12, a22, gp) = (get("d")?, get("a11")?, get("a12")?, get("a22")?, get("gprime")?);
            constant("a12", a12)?;
            let problem = capasso(d, a11, a12, constant("a22", a22)?, gp)?;
            Ok(Preset::Pencil { problem, note: Some("spectral parameter is minus the growth rate") })
        }
        "morphogen" => {
            let abar = get("abar")?;
            let h0 = positive_constant("h0", get("h0")?)?;
            let f0 = positive_constant("f0", get("f0")?)?;
            let g0 = positive_constant("g0", get("g0")?)?;
            let problem = morphogen(abar, h0, f0, g0)?;
            Ok(Preset::Pencil { problem, note: Some("spectral parameter is minus the growth rate") })
        }
        _ => unreachable!("name checked against PRESET_NAMES"),
    }
}

fn constant(field: &str, s: &str) -> Result<f64, PresetError> {
    let bad = |msg: String| PresetError::BadField { field: field.to_string(), msg };
    let e = parse_expr(s).map_err(|e| bad(e.to_string()))?;
    if !e.is_constant() {
        return Err(bad(format!("'{s}' must not depend on x")));
    }
    e.eval(0.0f64).map_err(|e| bad(e.to_string()))
}

fn positive_constant(field: &str, s: &str) -> Result<f64, PresetError> {
    let v = constant(field, s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(PresetError::BadField { field: field.to_string(), msg: format!("must be positive, got {v}") })
    }
}

/// Propagule model `d p″ − a₁₁ p = λp − a₁₂ g̃′ p/(λ + a₂₂)` on `(0, 1)` with no-flux ends.
/// In `μ = −λ` it reads `−d p″ = μp − a₁₂g̃′/(μ − a₂₂) p − a₁₁ p`.
pub fn capasso(d: &str, a11: &str, a12: &str, a22: f64, gprime: &str) -> Result<PencilProblem, PencilError> {
    let w = format!("({a12})*({gprime})");
    PencilProblem::from_exprs((0.0, 1.0), d, a11, "1", &[(a22, &w)], BoundaryCondition::NEUMANN, BoundaryCondition::NEUMANN)
}

/// Morphogen pencil `â″ − (λ + q)â = 0`, `q = s(λ + g₀)/(λ + c)` with `c = f₀ + g₀ + h₀ā` and
/// `s = h₀(f₀ + g₀)/c`. In `μ = −λ`: `−â″ = μâ − s(c − g₀)/(μ − c) â − s â`. The pole sits at
/// `c`, so `ā` must be constant. No flux at `x = 0`, absorbing at `x = 1`.
pub fn morphogen(abar: &str, h0: f64, f0: f64, g0: f64) -> Result<PencilProblem, PresetError> {
    let a = constant("abar", abar)?;
    if !(a >= 0.0) {
        return Err(PresetError::BadField { field: "abar".into(), msg: format!("must be non-negative, got {a}") });
    }
    let c = f0 + g0 + h0 * a;
    let s = h0 * (f0 + g0) / c;
    let w = CoefficientField::constant(s * (c - g0), 0.0, 1.0);
    Ok(PencilProblem::new(
        (0.0, 1.0),
        CoefficientField::constant(1.0, 0.0, 1.0),
        CoefficientField::constant(s, 0.0, 1.0),
        CoefficientField::constant(1.0, 0.0, 1.0),
        vec![crate::pencil::Pole { alpha: c, w }],
        BoundaryCondition::NEUMANN,
        BoundaryCondition::DIRICHLET,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn example39_shape() {
        let p = example39();
        assert_eq!((p.a, p.b), (0.0, std::f64::consts::PI));
        assert_eq!(p.pole_locations(), vec![2.0]);
        assert_eq!(p.dirichlet_ends(), 2);
    }

    #[test]
    fn rabies_vaccine_values() {
        let rp = rabies_vaccine().unwrap();
        assert_eq!((rp.a, rp.sigma, rp.k), (0.0027, 0.0357, 1.5));
        assert_eq!(rp.alpha.as_constant(), Some(0.2));
        assert_eq!(rp.d.as_constant(), Some(0.1371));
        let b: f64 = rp.beta.eval(0.5).unwrap();
        assert!((b - 0.2192 * 1.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_and_missing() {
        assert!(matches!(load_preset("nonexistent", &BTreeMap::new()), Err(PresetError::Unknown(_))));
        assert!(matches!(load_preset("morphogen", &BTreeMap::new()), Err(PresetError::MissingField { .. })));
        assert!(matches!(
            load_preset("example39", &fields(&[("d", "1")])),
            Err(PresetError::UnexpectedField { .. })
        ));
    }

    #[test]
    fn all_presets_load() {
        let capasso = fields(&[("d", "1"), ("a11", "0.5"), ("a12", "2"), ("a22", "1"), ("gprime", "1 + x")]);
        let morph = fields(&[("abar", "0.3"), ("h0", "1"), ("f0", "0.5"), ("g0", "0.25")]);
        for name in PRESET_NAMES {
            let f = match name {
                "capasso" => capasso.clone(),
                "morphogen" => morph.clone(),
                _ => BTreeMap::new(),
            };
            let p = load_preset(name, &f).unwrap().problem().unwrap();
            assert!(crate::pencil::sign_report(&p, 100).unwrap().holds, "{name}");
        }
        assert!(load_preset("morphogen", &fields(&[("abar", "x"), ("h0", "1"), ("f0", "0.5"), ("g0", "0.25")])).is_err());
    }

    #[test]
    fn morphogen_matches_symbol() {
        // −(λ + q) at λ = −μ equals g(μ) of the pencil
        let (a, h0, f0, g0) = (0.3, 1.0, 0.5, 0.25);
        let p = morphogen("0.3", h0, f0, g0).unwrap();
        let c = f0 + g0 + h0 * a;
        for mu in [-3.0, 0.1, 0.7, 5.0] {
            let lam: f64 = -mu;
            let q = h0 * (f0 + g0) / c * (lam + g0) / (lam + c);
            let g: f64 = p.g(0.4, mu).unwrap();
            assert!((g - (-(lam + q))).abs() < 1e-13);
        }
    }
}
