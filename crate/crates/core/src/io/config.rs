use std::collections::HashSet;

use crate::birkhoff_rott::Domain;
use crate::dynamics::{ConstantPolicy, DtPolicy, Regularization, SimConfig};
use crate::error::{Error, Result};
use crate::initdata::Parametrization;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| parse_err(line, format!("invalid value '{raw}' for {key}")))
}

fn flag(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(parse_err(line, format!("{key} expects true or false, got '{raw}'"))),
    }
}

fn optional<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<Option<T>> {
    if raw == "none" {
        Ok(None)
    } else {
        value(line, key, raw).map(Some)
    }
}

fn parametrization(line: usize, raw: &str) -> Result<Parametrization> {
    match raw {
        "analytic" => Ok(Parametrization::Analytic),
        "arclength" => Ok(Parametrization::Arclength),
        _ => match raw.strip_prefix("curvature:") {
            Some(l) => Ok(Parametrization::CurvatureWeighted(value(line, "parametrization", l)?)),
            None => Err(parse_err(line, format!("unknown parametrization '{raw}'"))),
        },
    }
}

/// Parses `key = value` lines with `#` comments into a validated
/// configuration. Unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut c = SimConfig::default();
    let mut seen = HashSet::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, raw) = content.split_once('=').ok_or_else(|| parse_err(line, "expected 'key = value'"))?;
        let (key, raw) = (key.trim(), raw.trim());
        if raw.is_empty() {
            return Err(parse_err(line, format!("missing value for {key}")));
        }
        if !seen.insert(key.to_string()) {
            return Err(parse_err(line, format!("duplicate key {key}")));
        }
        let p = &mut c.preset_params;
        match key {
            "n" => c.n = value(line, key, raw)?,
            "tau" => c.tau = value(line, key, raw)?,
            "dt" => c.dt = value(line, key, raw)?,
            "dt_policy" => {
                c.dt_policy = match raw {
                    "fixed" => DtPolicy::Fixed,
                    "cfl" => DtPolicy::Cfl,
                    _ => return Err(parse_err(line, format!("dt_policy must be fixed or cfl, got '{raw}'"))),
                }
            }
            "cfl" => c.cfl = value(line, key, raw)?,
            "t_end" => c.t_end = value(line, key, raw)?,
            "domain" => c.domain = raw.parse::<Domain>().map_err(|e| parse_err(line, e.to_string()))?,
            "eps" => c.regularization.eps = value(line, key, raw)?,
            "delta" => c.regularization.delta = value(line, key, raw)?,
            "mu" => c.regularization.mu = value(line, key, raw)?,
            "k" => c.k = value(line, key, raw)?,
            "C_policy" => {
                c.c_policy = if raw == "auto" { ConstantPolicy::Auto } else { ConstantPolicy::Value(value(line, key, raw)?) }
            }
            "preset" => c.preset = raw.parse().map_err(|e: Error| parse_err(line, e.to_string()))?,
            "flip_velocity" => p.flip_velocity = flag(line, key, raw)?,
            "amplitude" => p.amplitude = value(line, key, raw)?,
            "omega_amplitude" => p.omega_amplitude = value(line, key, raw)?,
            "mode" => p.mode = value(line, key, raw)?,
            "depth" => p.depth = value(line, key, raw)?,
            "flat_width" => p.flat_width = value(line, key, raw)?,
            "gap" => p.gap = value(line, key, raw)?,
            "parametrization" => p.parametrization = parametrization(line, raw)?,
            "snapshot_every" => c.snapshot_every = value(line, key, raw)?,
            "record_every" => c.record_every = value(line, key, raw)?,
            "out_dir" => c.out_dir = raw.to_string(),
            "filter_order" => c.filter_order = optional(line, key, raw)?,
            "halt_arc_chord_factor" => c.halt.arc_chord_factor = value(line, key, raw)?,
            "halt_min_q" => c.halt.min_q_distance = value(line, key, raw)?,
            "halt_min_sigma" => c.halt.min_sigma = optional(line, key, raw)?,
            "stop_at_contact" => c.halt.stop_at_contact = flag(line, key, raw)?,
            _ => return Err(parse_err(line, format!("unknown key {key}"))),
        }
    }
    c.validate()?;
    Ok(c)
}

fn show<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".into())
}

/// Writes every key in a fixed order; `parse_config` reads it back to an
/// equal configuration.
pub fn serialize_config(c: &SimConfig) -> String {
    let p = &c.preset_params;
    let Regularization { eps, delta, mu } = c.regularization;
    let parametrization = match p.parametrization {
        Parametrization::Analytic => "analytic".to_string(),
        Parametrization::Arclength => "arclength".to_string(),
        Parametrization::CurvatureWeighted(l) => format!("curvature:{l}"),
    };
    let entries: Vec<(&str, String)> = vec![
        ("n", c.n.to_string()),
        ("tau", c.tau.to_string()),
        ("dt", c.dt.to_string()),
        ("dt_policy", match c.dt_policy {
            DtPolicy::Fixed => "fixed".into(),
            DtPolicy::Cfl => "cfl".into(),
        }),
        ("cfl", c.cfl.to_string()),
        ("t_end", c.t_end.to_string()),
        ("domain", c.domain.as_str().into()),
        ("eps", eps.to_string()),
        ("delta", delta.to_string()),
        ("mu", mu.to_string()),
        ("k", c.k.to_string()),
        ("C_policy", match c.c_policy {
            ConstantPolicy::Auto => "auto".into(),
            ConstantPolicy::Value(v) => v.to_string(),
        }),
        ("preset", c.preset.as_str().into()),
        ("flip_velocity", p.flip_velocity.to_string()),
        ("amplitude", p.amplitude.to_string()),
        ("omega_amplitude", p.omega_amplitude.to_string()),
        ("mode", p.mode.to_string()),
        ("depth", p.depth.to_string()),
        ("flat_width", p.flat_width.to_string()),
        ("gap", p.gap.to_string()),
        ("parametrization", parametrization),
        ("snapshot_every", c.snapshot_every.to_string()),
        ("record_every", c.record_every.to_string()),
        ("out_dir", c.out_dir.clone()),
        ("filter_order", show(c.filter_order)),
        ("halt_arc_chord_factor", c.halt.arc_chord_factor.to_string()),
        ("halt_min_q", c.halt.min_q_distance.to_string()),
        ("halt_min_sigma", show(c.halt.min_sigma)),
        ("stop_at_contact", c.halt.stop_at_contact.to_string()),
    ];
    entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
