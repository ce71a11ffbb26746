//! JSON run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use conditions::DirectionSet;
use epsnet::RadiusNet;
use serde::{Deserialize, Serialize};
use symbols::SymbolJson;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub symbol: SymbolSpec,
    /// named nets referenced as `$name` in DSL text
    #[serde(default)]
    pub nets: BTreeMap<String, NetSpec>,
    /// defaults to the built-in's box and the full direction sphere
    #[serde(default)]
    pub region: Option<RegionSpec>,
    #[serde(default)]
    pub grids: GridSpec,
    pub checks: Vec<CheckSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("microhyp-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolSpec {
    Builtin(String),
    Inline(SymbolJson),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetSpec {
    /// `on` where `1/eps` is an integer, `off` elsewhere; values are `[re, im]`
    Resonance { on: [f64; 2], off: [f64; 2] },
    /// two-column `eps,"re,im"` file; must sample the run's eps grid
    Csv { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default)]
    pub directions: Option<DirectionSet>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub eps: Option<EpsSpec>,
    #[serde(default)]
    pub radii: RadiiSpec,
    /// direction count of the full sphere when the region gives none
    #[serde(default)]
    pub directions: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsSpec {
    /// `2^-1 .. 2^-count`
    Dyadic { count: u32 },
    /// `1/k`, `k = 1..=count`
    Reciprocal { count: u32 },
    /// `1/k` and `2/(2k+1)`
    ReciprocalMidpoints { count: u32 },
    Explicit { values: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    /// constant inner radius; overrides `radius_net`
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub radius_net: Option<RadiusNet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Centers {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Centers {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as i64;
        (0..=n.max(0)).map(|k| self.from + k as f64 * self.step).collect()
    }
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn points() -> usize {
    4096
}
fn samples() -> usize {
    200
}
fn identity_tol() -> f64 {
    1e-9
}
fn split_tol() -> f64 {
    1e-8
}
fn order_tol() -> f64 {
    0.05
}
fn min_radius() -> f64 {
    2.0
}
fn xi_max() -> f64 {
    200.0
}
fn sixty_four() -> usize {
    64
}

/// One requested operation; `op` selects the variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// lower bound; `m0` is fitted when absent
    Mh1 {
        #[serde(default)]
        m0: Option<f64>,
    },
    Mh2 {
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        delta: f64,
        #[serde(default = "one_u32")]
        alpha_max: u32,
    },
    /// principal-part lower bound, ratio bound and invertibility
    Principal {
        #[serde(default = "one_u32")]
        gamma_max: u32,
    },
    Wh {},
    FirstOrder {
        #[serde(default = "one_u32")]
        k_max: u32,
    },
    CrossCheck {},
    ScanMg {
        /// principal-part conditions per wedge instead of mh1/mh2
        #[serde(default)]
        principal: bool,
        #[serde(default)]
        m0: Option<f64>,
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        delta: f64,
        #[serde(default = "one_u32")]
        alpha_max: u32,
        #[serde(default = "sixty_four")]
        direction_count: usize,
        #[serde(default = "one_usize")]
        cells_per_dim: usize,
        /// expected `|tau|/|xi|` slopes of the failing-cone boundary (2-D)
        #[serde(default)]
        expect_slopes: Option<Vec<f64>>,
    },
    AcousticCone {
        gamma0: f64,
        gamma1: f64,
        thetas: Vec<f64>,
        #[serde(default = "sixty_four")]
        direction_count: usize,
    },
    AdjointIdentity {
        phi: String,
        n_iter: usize,
        #[serde(default = "samples")]
        samples: usize,
        #[serde(default = "one_u64")]
        seed: u64,
        #[serde(default = "min_radius")]
        min_radius: f64,
        #[serde(default = "xi_max")]
        xi_max: f64,
        #[serde(default = "identity_tol")]
        tol: f64,
    },
    AssumptionR {
        phi: String,
        n_max: usize,
        #[serde(default)]
        tau: Option<f64>,
    },
    AssumptionPsi {
        phi: String,
        n_iter: usize,
        #[serde(default = "one_u32")]
        alpha_max: u32,
    },
    RemainderBounds {
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        delta: f64,
        #[serde(default = "one_u32")]
        alpha_max: u32,
    },
    FourierSplit {
        u: String,
        phi: String,
        n_iter: usize,
        xi: Vec<f64>,
        eps: f64,
        #[serde(default = "min_radius")]
        min_radius: f64,
        #[serde(default = "split_tol")]
        tol: f64,
    },
    Wavefront {
        u: String,
        centers: Centers,
        window_radius: f64,
        #[serde(default = "points")]
        points: usize,
        /// singular support to match within one center spacing
        #[serde(default)]
        expect_singular_support: Option<Vec<f64>>,
    },
    Microlocality {
        u: String,
        centers: Centers,
        window_radius: f64,
        #[serde(default = "points")]
        points: usize,
    },
    Derivatives {
        u: String,
        lo: f64,
        hi: f64,
        k_max: u32,
        #[serde(default)]
        focus: Vec<f64>,
    },
    /// asymptotic order of an x-free DSL net
    Order {
        net: String,
        #[serde(default)]
        expect: Option<f64>,
        #[serde(default = "order_tol")]
        tol: f64,
    },
}

fn one_usize() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}

impl CheckSpec {
    pub fn op(&self) -> &'static str {
        match self {
            CheckSpec::Mh1 { .. } => "mh1",
            CheckSpec::Mh2 { .. } => "mh2",
            CheckSpec::Principal { .. } => "principal",
            CheckSpec::Wh {} => "wh",
            CheckSpec::FirstOrder { .. } => "first_order",
            CheckSpec::CrossCheck {} => "cross_check",
            CheckSpec::ScanMg { .. } => "scan_mg",
            CheckSpec::AcousticCone { .. } => "acoustic_cone",
            CheckSpec::AdjointIdentity { .. } => "adjoint_identity",
            CheckSpec::AssumptionR { .. } => "assumption_r",
            CheckSpec::AssumptionPsi { .. } => "assumption_psi",
            CheckSpec::RemainderBounds { .. } => "remainder_bounds",
            CheckSpec::FourierSplit { .. } => "fourier_split",
            CheckSpec::Wavefront { .. } => "wavefront",
            CheckSpec::Microlocality { .. } => "microlocality",
            CheckSpec::Derivatives { .. } => "derivatives",
            CheckSpec::Order { .. } => "order",
        }
    }

    pub fn uses_cache(&self) -> bool {
        matches!(self, CheckSpec::Wavefront { .. } | CheckSpec::Microlocality { .. })
    }
}
