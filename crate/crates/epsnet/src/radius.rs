use serde::{Deserialize, Serialize};

/// Slow-scale radius `r_eps` below which frequencies are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusNet {
    Constant { value: f64 },
    /// `max(floor, log(1/eps))`
    LogInv { floor: f64 },
    /// `factor / eps`; not of slow scale, for probing the region `|xi| >~ 1/eps`
    InvEps { factor: f64 },
}

impl Default for RadiusNet {
    fn default() -> Self {
        RadiusNet::LogInv { floor: 2.0 }
    }
}

impl RadiusNet {
    pub fn at(&self, eps: f64) -> f64 {
        match *self {
            RadiusNet::Constant { value } => value,
            RadiusNet::LogInv { floor } => floor.max((1.0 / eps).ln()),
            RadiusNet::InvEps { factor } => factor / eps,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            RadiusNet::Constant { value } => format!("r_eps = {value}"),
            RadiusNet::LogInv { floor } => format!("r_eps = max({floor}, log(1/eps))"),
            RadiusNet::InvEps { factor } => format!("r_eps = {factor}/eps"),
        }
    }
}
