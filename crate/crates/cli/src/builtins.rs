//! Built-in symbols with their default boxes and grids.

use epsnet::{EpsGrid, RadiusNet};
use serde::Serialize;
use symbols::{library, SymbolFamily};
use symexpr::NetTable;

#[derive(Clone, Debug, Serialize)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub dim: usize,
    pub degree: u32,
    pub symbol: &'static str,
    /// the statement or example the built-in reproduces
    pub realizes: &'static str,
    pub default_lo: &'static [f64],
    pub default_hi: &'static [f64],
    pub default_grid: &'static str,
}

pub const CATALOG: &[BuiltinInfo] = &[
    BuiltinInfo {
        name: "elliptic1d",
        dim: 1,
        degree: 2,
        symbol: "xi^2 + 1",
        realizes: "constant-coefficient elliptic test case of the remainder and adjoint-solution construction",
        default_lo: &[-1.0],
        default_hi: &[1.0],
        default_grid: "dyadic 2^-1 .. 2^-40",
    },
    BuiltinInfo {
        name: "heat2d",
        dim: 2,
        degree: 2,
        symbol: "i tau + xi^2",
        realizes: "heat operator: hypoelliptic with a characteristic direction, so not elliptic",
        default_lo: &[-1.0, 0.0],
        default_hi: &[1.0, 1.0],
        default_grid: "dyadic 2^-1 .. 2^-40",
    },
    BuiltinInfo {
        name: "acoustic",
        dim: 2,
        degree: 2,
        symbol: "-tau^2 + c^2 xi^2 - i c^2 (rho'/rho) xi",
        realizes: "closing example on acoustic wave propagation in a medium with slow-scale regularized jumps of sound speed and density",
        default_lo: &[-1.5, 0.0],
        default_hi: &[1.5, 1.0],
        default_grid: "dyadic 2^-1 .. 2^-40",
    },
    BuiltinInfo {
        name: "acoustic_smooth",
        dim: 2,
        degree: 2,
        symbol: "acoustic operator with c = 1.5 + 0.5 sin x, rho = 2 + cos x",
        realizes: "acoustic operator with smooth eps-independent coefficients, the adjoint-identity test case",
        default_lo: &[-1.0, -1.0],
        default_hi: &[1.0, 1.0],
        default_grid: "dyadic 2^-1 .. 2^-40",
    },
    BuiltinInfo {
        name: "remark_i",
        dim: 1,
        degree: 1,
        symbol: "c_eps xi, c_eps = 0 on 1/eps in N and i elsewhere",
        realizes: "first counterexample after the principal-part conditions: a zero divisor as principal coefficient",
        default_lo: &[-1.0],
        default_hi: &[1.0],
        default_grid: "reciprocal with midpoints, k = 1..40",
    },
    BuiltinInfo {
        name: "remark_ii",
        dim: 1,
        degree: 1,
        symbol: "a_eps xi + b_eps, a_eps = 0 on 1/eps in N and 1 elsewhere, b = 1 - a",
        realizes: "second counterexample: lower and ratio bounds hold but the principal-part ratio bound fails",
        default_lo: &[-1.0],
        default_hi: &[1.0],
        default_grid: "reciprocal with midpoints, k = 1..40, inner radius 2",
    },
    BuiltinInfo {
        name: "remark_iii",
        dim: 1,
        degree: 1,
        symbol: "eps xi + i",
        realizes: "third counterexample: lower and ratio bounds hold but the principal-part ratio bound fails with ratio 1/eps",
        default_lo: &[-1.0],
        default_hi: &[1.0],
        default_grid: "dyadic 2^-1 .. 2^-40",
    },
    BuiltinInfo {
        name: "first_order_demo",
        dim: 1,
        degree: 1,
        symbol: "(1 + hstep(x; 1/log(1/eps))) xi + 1",
        realizes: "first-order operator with a slow-scale coefficient jump, the first-order hypoellipticity criterion",
        default_lo: &[-1.0],
        default_hi: &[1.0],
        default_grid: "dyadic 2^-1 .. 2^-40",
    },
];

pub fn info(name: &str) -> Option<&'static BuiltinInfo> {
    CATALOG.iter().find(|b| b.name == name)
}

pub fn default_grid(name: &str) -> EpsGrid {
    match name {
        "remark_i" | "remark_ii" => EpsGrid::reciprocal_midpoints(40).expect("static grid"),
        _ => EpsGrid::default_dyadic(),
    }
}

pub fn default_radius(name: &str) -> Option<RadiusNet> {
    (name == "remark_ii").then_some(RadiusNet::Constant { value: 2.0 })
}

/// The symbol and the nets it references, built on `grid`.
pub fn resolve(name: &str, grid: &EpsGrid) -> Option<(SymbolFamily, NetTable)> {
    let plain = |p: SymbolFamily| Some((p, NetTable::new()));
    match name {
        "elliptic1d" => plain(library::elliptic1d()),
        "heat2d" => plain(library::heat2d()),
        "acoustic" => plain(library::acoustic()),
        "acoustic_smooth" => plain(library::acoustic_smooth()),
        "remark_i" => Some(library::remark_i(grid)),
        "remark_ii" => Some(library::remark_ii(grid)),
        "remark_iii" => plain(library::remark_iii()),
        "first_order_demo" => plain(library::first_order_demo()),
        _ => None,
    }
}
