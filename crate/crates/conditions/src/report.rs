use std::collections::BTreeMap;

use epsnet::{classify_net, estimate_order, Classification, EpsNet};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    Mh1,
    Mh2,
    Wh,
    FirstOrder,
    St1,
    St2,
    Inv,
    Principal,
    RemainderCoefficients,
}

/// One sample `(eps, x, xi)` where a bound is worst or broken.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub eps: f64,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub value: f64,
    pub what: String,
}

/// An eps-net produced by a checker together with its verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetSummary {
    pub name: String,
    pub kappa_hat: Option<f64>,
    pub class: Option<Classification>,
    /// `(eps, value)` for every grid point
    pub values: Vec<(f64, f64)>,
}

impl NetSummary {
    pub fn new(name: impl Into<String>, net: &EpsNet, tol: f64, tail: f64) -> Self {
        NetSummary {
            name: name.into(),
            kappa_hat: estimate_order(net, tail).ok().map(|e| e.kappa_hat),
            class: classify_net(net, tol).ok(),
            values: net.grid().values().iter().copied().zip(net.abs()).collect(),
        }
    }

    /// Slow scale or null.
    pub fn is_slow_scale(&self) -> bool {
        matches!(self.class, Some(Classification::SlowScale | Classification::Null))
    }

    pub fn at_smallest_eps(&self) -> f64 {
        self.values.last().map(|v| v.1).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub pass: bool,
    pub region: String,
    pub fitted: BTreeMap<String, f64>,
    pub nets: Vec<NetSummary>,
    pub radius_net: String,
    pub witnesses: Vec<Witness>,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub parts: Vec<ConditionReport>,
}

pub(crate) const NUMERICAL_NOTE: &str =
    "numerical verdict: sampled eps tail, base points, directions and radii";

impl ConditionReport {
    pub fn new(condition: ConditionId, region: String, radius_net: String) -> Self {
        ConditionReport {
            condition,
            pass: true,
            region,
            fitted: BTreeMap::new(),
            nets: Vec::new(),
            radius_net,
            witnesses: Vec::new(),
            tolerances: BTreeMap::new(),
            notes: vec![NUMERICAL_NOTE.to_string()],
            parts: Vec::new(),
        }
    }

    pub fn part(&self, id: ConditionId) -> Option<&ConditionReport> {
        self.parts.iter().find(|p| p.condition == id)
    }

    pub fn net(&self, name: &str) -> Option<&NetSummary> {
        self.nets.iter().find(|n| n.name == name)
    }

    pub fn fail(&mut self, w: Witness) {
        self.pass = false;
        self.witnesses.push(w);
    }

    /// Failing report with at least one witness.
    pub fn ensure_witness(&mut self, fallback: impl FnOnce() -> Witness) {
        if !self.pass && self.witnesses.is_empty() {
            self.witnesses.push(fallback());
        }
    }
}
