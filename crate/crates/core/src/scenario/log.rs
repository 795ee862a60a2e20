//! Uniform-rate signal log and the channel catalogue.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Every channel a run can record for an airframe with `rotors` rotors,
/// in canonical order.
pub fn channel_catalogue(rotors: usize) -> Vec<String> {
    let add =
        |out: &mut Vec<String>, prefix: &str, names: &[&str]| out.extend(names.iter().map(|n| format!("{prefix}.{n}")));
    let mut out = Vec::new();
    add(
        &mut out,
        "state",
        &["x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw", "p", "q", "r"],
    );
    add(
        &mut out,
        "setpoint",
        &["x", "y", "z", "roll", "pitch", "yaw", "fx", "fy", "fz"],
    );
    add(&mut out, "ee", &["x", "y", "z", "fx", "fy", "fz", "mx", "my", "mz"]);
    add(
        &mut out,
        "wrench",
        &["fx", "fy", "fz", "mx", "my", "mz", "cx", "cy", "cz"],
    );
    for kind in ["u", "cmd", "servo"] {
        for i in 1..=rotors {
            out.push(format!("rotor.{kind}{i}"));
        }
    }
    add(&mut out, "ctrl", &["fx", "fy", "fz", "saturated", "waypoint", "hybrid"]);
    out
}

/// Builds an unknown-channel error with up to three close matches.
pub fn unknown_channel(name: &str, known: &[String]) -> Error {
    // ties go to names that extend or truncate the typo
    let mut scored: Vec<(usize, bool, &String)> = known
        .iter()
        .map(|k| {
            (
                strsim::levenshtein(name, k),
                !(name.starts_with(k.as_str()) || k.starts_with(name)),
                k,
            )
        })
        .filter(|(d, _, _)| *d <= 2)
        .collect();
    scored.sort();
    Error::UnknownChannel {
        name: name.to_string(),
        suggestions: scored.into_iter().take(3).map(|(_, _, k)| format!("`{k}`")).collect(),
    }
}

/// Named scalar time series sampled at t = k·dt.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalLog {
    pub dt: f64,
    names: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<Vec<f64>>,
}

impl SignalLog {
    pub fn new(dt: f64, names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate channel `{n}`")));
            }
        }
        let data = vec![Vec::new(); names.len()];
        Ok(Self { dt, names, index, data })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.index.get(name).map(|&i| self.data[i].as_slice())
    }

    /// Like `channel`, but unknown names become an error with suggestions.
    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.channel(name).ok_or_else(|| unknown_channel(name, &self.names))
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::Dimension {
                what: "log row",
                expected: self.names.len(),
                got: row.len(),
            });
        }
        for (col, v) in self.data.iter_mut().zip(row) {
            col.push(*v);
        }
        Ok(())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.data.iter().map(Vec::as_slice))
    }
}

/// Group label used to gather channels into plot panels.
pub fn channel_group(name: &str) -> &'static str {
    let (ns, ch) = name.split_once('.').unwrap_or((name, ""));
    let counterpart = |ch: &str| match ch {
        "x" | "y" | "z" => "Position [m]",
        "vx" | "vy" | "vz" => "Velocity [m/s]",
        "roll" | "pitch" | "yaw" => "Attitude [deg]",
        "p" | "q" | "r" => "Body rates [rad/s]",
        _ => "Other",
    };
    match ns {
        "state" => counterpart(ch),
        "setpoint" if ch.starts_with('f') => "End-effector force [N]",
        "setpoint" => counterpart(ch),
        "ee" if ch.starts_with('f') => "End-effector force [N]",
        "ee" if ch.starts_with('m') => "End-effector moment [N m]",
        "ee" => "End-effector position [m]",
        "wrench" if ch.starts_with('f') => "Generated force, body [N]",
        "wrench" if ch.starts_with('m') => "Generated moment, body [N m]",
        "wrench" => "Contact force on vehicle [N]",
        "rotor" if ch.starts_with("servo") => "Servo angle [deg]",
        "rotor" if ch.starts_with("cmd") => "Rotor command [N]",
        "rotor" => "Rotor thrust [N]",
        "ctrl" if ch.starts_with('f') => "Force command [N]",
        "ctrl" => "Controller flags",
        _ => "Other",
    }
}

/// The setpoint channel drawn over `name`, if one exists.
pub fn setpoint_for(name: &str) -> Option<String> {
    let (ns, ch) = name.split_once('.')?;
    let sp = match (ns, ch) {
        ("state", "x" | "y" | "z" | "roll" | "pitch" | "yaw") => ch.to_string(),
        ("ee", "fx" | "fy" | "fz") => ch.to_string(),
        _ => return None,
    };
    Some(format!("setpoint.{sp}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_unique() {
        let c = channel_catalogue(6);
        let mut s = c.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), c.len());
        assert!(c.contains(&"rotor.servo6".to_string()));
    }

    #[test]
    fn suggestion_for_typo() {
        let err = unknown_channel("state.xy", &channel_catalogue(4));
        match &err {
            Error::UnknownChannel { suggestions, .. } => assert_eq!(suggestions[0], "`state.x`"),
            _ => unreachable!(),
        }
        assert!(err.to_string().contains("did you mean `state.x`"));
    }

    #[test]
    fn duplicate_rejected() {
        assert!(SignalLog::new(0.1, vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn groups() {
        assert_eq!(channel_group("state.x"), channel_group("setpoint.x"));
        assert_eq!(channel_group("ee.fx"), channel_group("setpoint.fx"));
        assert_ne!(channel_group("state.x"), channel_group("state.roll"));
        assert_eq!(setpoint_for("state.roll").as_deref(), Some("setpoint.roll"));
        assert_eq!(setpoint_for("state.vx"), None);
    }
}
