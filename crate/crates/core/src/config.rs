//! JSON system description. Frequencies and rates are ordinary frequencies
//! in Hz under `_hz` keys; [`SystemParams`] holds them in rad/s.
//!
//! ```json
//! {
//!   "cavity": {"f_c_hz": 1e10, "kappa_in_hz": 8e5, "kappa_ex_hz": 1.2e6},
//!   "mech": {"f_m_hz": 4e6, "gamma_hz": 100, "m_eff_kg": 2e-15},
//!   "pump": {"f_p_hz": 9.996e9, "power_w": 1e-9},
//!   "coupling": {"g0_hz": 60, "n_cavity": 1e6},
//!   "temperature_k": 0.007,
//!   "cooperativity_convention": "full",
//!   "tripartite": {
//!     "delta_a_hz": -4e6, "delta_c_hz": -4e6, "g_b_hz": 1e6, "g_c_hz": 6.43e6,
//!     "kappa_c_in_hz": 8e5, "kappa_c_ex_hz": 1.2e6, "f_magnon_hz": 1e10
//!   }
//! }
//! ```
//!
//! Only `cavity` is required.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{
    hz_to_rad, intracavity_photon_number, rad_to_hz, thermal_occupation, CavityParams, CooperativityConvention,
    CouplingParams, MechParams, PumpParams,
};
use crate::tripartite::{Occupations, TripartiteParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub f_c_hz: f64,
    pub kappa_in_hz: f64,
    pub kappa_ex_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechConfig {
    pub f_m_hz: f64,
    pub gamma_hz: f64,
    pub m_eff_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub f_p_hz: f64,
    #[serde(default)]
    pub power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub g0_hz: f64,
    /// Computed from the pump when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cavity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupationsConfig {
    pub a_in: f64,
    pub a_ex: f64,
    pub b_in: f64,
    pub c_in: f64,
    pub c_ex: f64,
}

/// Magnon mode and the two couplings. The cavity and mechanical rates come
/// from the `cavity` and `mech` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripartiteConfig {
    pub delta_a_hz: f64,
    pub delta_c_hz: f64,
    pub g_b_hz: f64,
    pub g_c_hz: f64,
    pub kappa_c_in_hz: f64,
    pub kappa_c_ex_hz: f64,
    /// Magnon frequency, used only for thermal occupations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_magnon_hz: Option<f64>,
    /// Explicit occupations; otherwise derived from `temperature_k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupations: Option<OccupationsConfig>,
}

/// The file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub cavity: CavityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mech: Option<MechConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<PumpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub cooperativity_convention: CooperativityConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tripartite: Option<TripartiteConfig>,
}

/// Normalized parameters in rad/s, plus notes on every default applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub cavity: CavityParams,
    pub mech: Option<MechParams>,
    pub pump: Option<PumpParams>,
    pub coupling: Option<CouplingParams>,
    pub temperature: Option<f64>,
    pub cooperativity_convention: CooperativityConvention,
    pub tripartite: Option<TripartiteParams>,
    pub warnings: Vec<String>,
}

fn field_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        msg: msg.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(field_err(path, format!("must be positive, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(field_err(path, format!("must be non-negative, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field_err(path, format!("must be finite, got {v}")))
    }
}

/// Parses JSON text; syntax and schema errors name the offending field.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        field_err(&path, e.inner().to_string())
    })
}

pub fn load_config(path: &Path) -> Result<SystemParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)?.normalize()
}

impl SystemConfig {
    /// Converts to rad/s and checks ranges.
    pub fn normalize(&self) -> Result<SystemParams> {
        let mut warnings = Vec::new();
        let c = &self.cavity;
        let cavity = CavityParams::new(
            hz_to_rad(positive("cavity.f_c_hz", c.f_c_hz)?),
            hz_to_rad(non_negative("cavity.kappa_in_hz", c.kappa_in_hz)?),
            hz_to_rad(non_negative("cavity.kappa_ex_hz", c.kappa_ex_hz)?),
        )?;

        let mech = match &self.mech {
            Some(m) => Some(MechParams::new(
                hz_to_rad(positive("mech.f_m_hz", m.f_m_hz)?),
                hz_to_rad(non_negative("mech.gamma_hz", m.gamma_hz)?),
                positive("mech.m_eff_kg", m.m_eff_kg)?,
            )?),
            None => None,
        };

        let pump = match &self.pump {
            Some(p) => Some(PumpParams::new(
                hz_to_rad(positive("pump.f_p_hz", p.f_p_hz)?),
                non_negative("pump.power_w", p.power_w)?,
            )?),
            None => None,
        };

        let coupling = match &self.coupling {
            Some(k) => {
                let g0 = hz_to_rad(finite("coupling.g0_hz", k.g0_hz)?);
                let n = match (k.n_cavity, &pump) {
                    (Some(n), _) => non_negative("coupling.n_cavity", n)?,
                    (None, Some(p)) => {
                        warnings.push("coupling.n_cavity derived from pump power".into());
                        intracavity_photon_number(&cavity, p)?
                    }
                    (None, None) => {
                        warnings.push("coupling.n_cavity missing and no pump; using 0".into());
                        0.0
                    }
                };
                Some(CouplingParams::new(g0, n)?)
            }
            None => None,
        };

        let temperature = match self.temperature_k {
            Some(t) => Some(non_negative("temperature_k", t)?),
            None => None,
        };

        let tripartite = match &self.tripartite {
            Some(t) => {
                let m = mech.ok_or_else(|| field_err("tripartite", "requires a `mech` block"))?;
                let occupations = match (&t.occupations, temperature) {
                    (Some(o), _) => Occupations {
                        a_in: non_negative("tripartite.occupations.a_in", o.a_in)?,
                        a_ex: non_negative("tripartite.occupations.a_ex", o.a_ex)?,
                        b_in: non_negative("tripartite.occupations.b_in", o.b_in)?,
                        c_in: non_negative("tripartite.occupations.c_in", o.c_in)?,
                        c_ex: non_negative("tripartite.occupations.c_ex", o.c_ex)?,
                    },
                    (None, Some(temp)) => {
                        let f_mag = match t.f_magnon_hz {
                            Some(f) => hz_to_rad(positive("tripartite.f_magnon_hz", f)?),
                            None => {
                                warnings.push("tripartite.f_magnon_hz missing; using the cavity frequency".into());
                                cavity.omega_c
                            }
                        };
                        let n_a = thermal_occupation(cavity.omega_c, temp)?;
                        let n_c = thermal_occupation(f_mag, temp)?;
                        Occupations {
                            a_in: n_a,
                            a_ex: n_a,
                            b_in: thermal_occupation(m.omega_m, temp)?,
                            c_in: n_c,
                            c_ex: n_c,
                        }
                    }
                    (None, None) => {
                        warnings.push("no occupations or temperature given; using vacuum inputs".into());
                        Occupations::default()
                    }
                };
                let p = TripartiteParams {
                    delta_a: hz_to_rad(finite("tripartite.delta_a_hz", t.delta_a_hz)?),
                    delta_c: hz_to_rad(finite("tripartite.delta_c_hz", t.delta_c_hz)?),
                    omega_m: m.omega_m,
                    g_b: hz_to_rad(finite("tripartite.g_b_hz", t.g_b_hz)?),
                    g_c: hz_to_rad(finite("tripartite.g_c_hz", t.g_c_hz)?),
                    kappa_a_in: cavity.kappa_in,
                    kappa_a_ex: cavity.kappa_ex,
                    kappa_c_in: hz_to_rad(non_negative("tripartite.kappa_c_in_hz", t.kappa_c_in_hz)?),
                    kappa_c_ex: hz_to_rad(non_negative("tripartite.kappa_c_ex_hz", t.kappa_c_ex_hz)?),
                    gamma: m.gamma,
                    occupations,
                };
                p.validate()?;
                Some(p)
            }
            None => None,
        };

        for (block, present) in [
            ("mech", mech.is_some()),
            ("pump", pump.is_some()),
            ("coupling", coupling.is_some()),
        ] {
            if !present {
                warnings.push(format!("optional block `{block}` absent"));
            }
        }

        Ok(SystemParams {
            cavity,
            mech,
            pump,
            coupling,
            temperature,
            cooperativity_convention: self.cooperativity_convention,
            tripartite,
            warnings,
        })
    }
}

impl SystemParams {
    /// Back to the file representation, with occupations written out
    /// explicitly.
    pub fn to_config(&self) -> SystemConfig {
        SystemConfig {
            cavity: CavityConfig {
                f_c_hz: rad_to_hz(self.cavity.omega_c),
                kappa_in_hz: rad_to_hz(self.cavity.kappa_in),
                kappa_ex_hz: rad_to_hz(self.cavity.kappa_ex),
            },
            mech: self.mech.map(|m| MechConfig {
                f_m_hz: rad_to_hz(m.omega_m),
                gamma_hz: rad_to_hz(m.gamma),
                m_eff_kg: m.m_eff,
            }),
            pump: self.pump.map(|p| PumpConfig {
                f_p_hz: rad_to_hz(p.omega_p),
                power_w: p.power,
            }),
            coupling: self.coupling.map(|k| CouplingConfig {
                g0_hz: rad_to_hz(k.g0),
                n_cavity: Some(k.n_cavity),
            }),
            temperature_k: self.temperature,
            cooperativity_convention: self.cooperativity_convention,
            tripartite: self.tripartite.map(|t| TripartiteConfig {
                delta_a_hz: rad_to_hz(t.delta_a),
                delta_c_hz: rad_to_hz(t.delta_c),
                g_b_hz: rad_to_hz(t.g_b),
                g_c_hz: rad_to_hz(t.g_c),
                kappa_c_in_hz: rad_to_hz(t.kappa_c_in),
                kappa_c_ex_hz: rad_to_hz(t.kappa_c_ex),
                f_magnon_hz: None,
                occupations: Some(OccupationsConfig {
                    a_in: t.occupations.a_in,
                    a_ex: t.occupations.a_ex,
                    b_in: t.occupations.b_in,
                    c_in: t.occupations.c_in,
                    c_ex: t.occupations.c_ex,
                }),
            }),
        }
    }

    /// `omega_c - omega_p` when a pump is configured.
    pub fn detuning(&self) -> Option<f64> {
        self.pump.map(|p| p.detuning(&self.cavity))
    }

    /// Pump-enhanced coupling when a coupling block is configured.
    pub fn g(&self) -> Option<f64> {
        self.coupling.map(|k| k.g())
    }

    pub fn require_mech(&self) -> Result<MechParams> {
        self.mech
            .ok_or_else(|| field_err("mech", "block required for this command"))
    }

    pub fn require_tripartite(&self) -> Result<TripartiteParams> {
        self.tripartite
            .ok_or_else(|| field_err("tripartite", "block required for this command"))
    }
}
