//! Embedded example bundles: the crossing scenario with its belief
//! formations, and the acceleration measurement scenario.

use crate::io::{Bundle, IoError};

/// Every fixture file by name.
pub const FILES: &[(&str, &str)] = &[
    ("accel.cat", include_str!("../fixtures/accel.cat")),
    ("accel_dry.bundle", include_str!("../fixtures/accel_dry.bundle")),
    ("accel_dry.world", include_str!("../fixtures/accel_dry.world")),
    ("accel_goals.txt", include_str!("../fixtures/accel_goals.txt")),
    ("accel_hi.world", include_str!("../fixtures/accel_hi.world")),
    ("accel_lo.world", include_str!("../fixtures/accel_lo.world")),
    ("accel_rain.bundle", include_str!("../fixtures/accel_rain.bundle")),
    ("accel_rain.world", include_str!("../fixtures/accel_rain.world")),
    ("beliefs.cat", include_str!("../fixtures/beliefs.cat")),
    ("believe_sensor.form", include_str!("../fixtures/believe_sensor.form")),
    ("coarse.bundle", include_str!("../fixtures/coarse.bundle")),
    ("coarse.cat", include_str!("../fixtures/coarse.cat")),
    ("coarse.form", include_str!("../fixtures/coarse.form")),
    ("design.world", include_str!("../fixtures/design.world")),
    ("design_perm.world", include_str!("../fixtures/design_perm.world")),
    ("dry.kb", include_str!("../fixtures/dry.kb")),
    ("goals.txt", include_str!("../fixtures/goals.txt")),
    ("hasty.env", include_str!("../fixtures/hasty.env")),
    ("kappa.kb", include_str!("../fixtures/kappa.kb")),
    ("kappa_prime.kb", include_str!("../fixtures/kappa_prime.kb")),
    ("kappa_pu.kb", include_str!("../fixtures/kappa_pu.kb")),
    ("perm.bundle", include_str!("../fixtures/perm.bundle")),
    ("pu.bundle", include_str!("../fixtures/pu.bundle")),
    ("pu.cat", include_str!("../fixtures/pu.cat")),
    ("pu.form", include_str!("../fixtures/pu.form")),
    ("running.bundle", include_str!("../fixtures/running.bundle")),
    ("setup.world", include_str!("../fixtures/setup.world")),
    ("sigma_b.strat", include_str!("../fixtures/sigma_b.strat")),
    ("sigma_b_prime.strat", include_str!("../fixtures/sigma_b_prime.strat")),
    ("sigma_pu.strat", include_str!("../fixtures/sigma_pu.strat")),
    ("slow.env", include_str!("../fixtures/slow.env")),
    ("wbh.world", include_str!("../fixtures/wbh.world")),
    ("wh.world", include_str!("../fixtures/wh.world")),
    ("wh2.world", include_str!("../fixtures/wh2.world")),
    ("wrs.world", include_str!("../fixtures/wrs.world")),
    ("ws.world", include_str!("../fixtures/ws.world")),
    ("ws2.world", include_str!("../fixtures/ws2.world")),
];

pub fn file(name: &str) -> Result<String, IoError> {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| t.to_string())
        .ok_or_else(|| IoError::Read { path: name.to_string(), msg: "no such fixture".into() })
}

/// Loads an embedded bundle by manifest name, e.g. `running.bundle`.
pub fn bundle(name: &str) -> Result<Bundle, IoError> {
    Bundle::load(name, &file)
}

/// Writes every fixture file into `dir`.
pub fn write_all(dir: &std::path::Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (n, t) in FILES {
        std::fs::write(dir.join(n), t)?;
    }
    Ok(())
}

/// Bundles in the crossing scenario.
pub const CROSSING: &[&str] = &["running.bundle", "perm.bundle", "coarse.bundle", "pu.bundle"];
/// Bundles in the acceleration scenario.
pub const ACCELERATION: &[&str] = &["accel_rain.bundle", "accel_dry.bundle"];
