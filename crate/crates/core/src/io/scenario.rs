//! Scenario files.
//!
//! ```toml
//! [uav]
//! altitude_m = 50.0
//! v_max_mps = 50.0
//! tx_power_dbm = 30.0
//! slot_s = 1.0
//! init_xy_m = [0.0, 0.0]
//! final_xy_m = [1000.0, 0.0]
//!
//! [radio]
//! bandwidth_hz = 1e6
//! ref_gain_db = -30.0
//! noise_dbm = -60.0
//!
//! [[gbs]]
//! xy_m = [500.0, 0.0]
//! cpu_ghz = 2.5
//! cycles_per_bit = 1000.0
//!
//! [task]
//! l_bits = 1e8
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{db_to_linear, dbm_to_watts, Gbs, Kinematics, Point, Radio, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub uav: UavSection,
    pub radio: RadioSection,
    pub gbs: Vec<GbsSection>,
    pub task: TaskSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSection {
    pub altitude_m: f64,
    pub v_max_mps: f64,
    pub tx_power_dbm: f64,
    pub slot_s: f64,
    pub init_xy_m: [f64; 2],
    pub final_xy_m: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub bandwidth_hz: f64,
    pub ref_gain_db: f64,
    pub noise_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbsSection {
    pub xy_m: [f64; 2],
    pub cpu_ghz: f64,
    pub cycles_per_bit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub l_bits: f64,
}

impl ScenarioFile {
    /// Convert to linear units and validate.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let gbs = self.gbs.iter().map(|g| Gbs::new(g.xy_m[0], g.xy_m[1], g.cpu_ghz * 1e9, g.cycles_per_bit)).collect();
        let radio = Radio {
            bandwidth: self.radio.bandwidth_hz,
            ref_gain: db_to_linear(self.radio.ref_gain_db),
            noise_power: dbm_to_watts(self.radio.noise_dbm),
            tx_power: dbm_to_watts(self.uav.tx_power_dbm),
        };
        let uav = Kinematics {
            altitude: self.uav.altitude_m,
            v_max: self.uav.v_max_mps,
            slot_len: self.uav.slot_s,
            u_init: Point::new(self.uav.init_xy_m[0], self.uav.init_xy_m[1]),
            u_final: Point::new(self.uav.final_xy_m[0], self.uav.final_xy_m[1]),
        };
        Ok(Scenario::new(gbs, radio, uav, self.task.l_bits)?)
    }
}

/// Parse scenario text. `origin` only labels error messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let message = match line {
            Some(l) => format!("line {l}: {}", e.message()),
            None => e.message().to_string(),
        };
        Error::ScenarioFile { path: origin.to_string(), message }
    })?;
    file.to_scenario().map_err(|e| match e {
        Error::Model(m) => Error::ScenarioFile { path: origin.to_string(), message: m.to_string() },
        other => other,
    })
}

/// Read and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ScenarioFile { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text, &path.display().to_string())
}
