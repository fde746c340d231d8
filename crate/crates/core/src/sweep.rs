//! Parameter sweeps comparing the approximations with the ED oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::baselines::{energy_grwa, mean_photon_grwa};
use crate::ed::{exact_ground, EdConfig};
use crate::error::{RabiError, Result};
use crate::gvm::{energy_explicit, ground_state, mean_photon_approx, LambdaMethod, PerturbationConfig};
use crate::model::ModelParams;

pub const DEFAULT_STEPS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweptParam {
    AtomFreq,
    Coupling,
}

/// Evaluation methods. `Gvm` is the closed-form route (explicit energy and
/// approximate photon number); `GvmFull` the rooted λ with second-order sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Gvm,
    GvmFull,
    Grwa,
    Ed,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gvm, Method::GvmFull, Method::Grwa, Method::Ed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gvm => "gvm",
            Method::GvmFull => "gvm_full",
            Method::Grwa => "grwa",
            Method::Ed => "ed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = RabiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gvm" | "gvm_explicit" => Ok(Method::Gvm),
            "gvm_full" => Ok(Method::GvmFull),
            "grwa" => Ok(Method::Grwa),
            "ed" => Ok(Method::Ed),
            other => Err(RabiError::Domain(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    Energy,
    MeanPhoton,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Energy => "energy",
            Observable::MeanPhoton => "mean_photon",
        }
    }
}

impl FromStr for Observable {
    type Err = RabiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(Observable::Energy),
            "mean_photon" | "photon" => Ok(Observable::MeanPhoton),
            other => Err(RabiError::Domain(format!("unknown observable {other:?}"))),
        }
    }
}

/// A one-dimensional sweep over Ω or g with the other fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub swept: SweptParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub omega: f64,
    /// Value of the parameter that is not swept.
    pub fixed: f64,
    pub methods: Vec<Method>,
    pub observables: Vec<Observable>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(RabiError::Domain("steps must be at least 2".into()));
        }
        if !(self.start < self.stop) {
            return Err(RabiError::Domain("start must be below stop".into()));
        }
        if self.start < 0.0 || self.fixed < 0.0 || !self.stop.is_finite() || !self.fixed.is_finite() {
            return Err(RabiError::Domain("sweep values must be finite and non-negative".into()));
        }
        if !(self.omega > 0.0) {
            return Err(RabiError::Domain("omega must be positive".into()));
        }
        if self.methods.is_empty() || self.observables.is_empty() {
            return Err(RabiError::Domain("at least one method and one observable required".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last as f64
                }
            })
            .collect()
    }

    /// Model parameters at swept value `x` (in units of ω).
    pub fn params_at(&self, x: f64) -> ModelParams {
        let w = self.omega;
        match self.swept {
            SweptParam::AtomFreq => ModelParams::new(w, x * w, self.fixed * w),
            SweptParam::Coupling => ModelParams::new(w, self.fixed * w, x * w),
        }
    }

    fn has_ed(&self) -> bool {
        self.methods.contains(&Method::Ed)
    }
}

/// One grid point: values per (method, observable), absolute deviations
/// from the ED value, and failure reasons for methods that errored.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub values: BTreeMap<(Method, Observable), f64>,
    pub errors: BTreeMap<(Method, Observable), f64>,
    pub failures: BTreeMap<Method, String>,
}

impl CurvePoint {
    pub fn value(&self, method: Method, observable: Observable) -> Option<f64> {
        self.values.get(&(method, observable)).copied()
    }

    pub fn error(&self, method: Method, observable: Observable) -> Option<f64> {
        self.errors.get(&(method, observable)).copied()
    }
}

fn column(method: Method, observable: Observable) -> String {
    format!("{}_{}", method.name(), observable.name())
}

struct NamedMap<'a>(&'a BTreeMap<(Method, Observable), f64>);

impl Serialize for NamedMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for ((m, o), v) in self.0 {
            map.serialize_entry(&column(*m, *o), v)?;
        }
        map.end()
    }
}

impl Serialize for CurvePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("x", &self.x)?;
        map.serialize_entry("values", &NamedMap(&self.values))?;
        map.serialize_entry("errors", &NamedMap(&self.errors))?;
        let failures: BTreeMap<&str, &String> = self.failures.iter().map(|(m, r)| (m.name(), r)).collect();
        map.serialize_entry("failures", &failures)?;
        map.end()
    }
}

/// Evaluates every requested (method, observable) at `params`.
pub fn evaluate_point(
    x: f64,
    params: &ModelParams,
    methods: &[Method],
    observables: &[Observable],
    pcfg: &PerturbationConfig,
    ecfg: &EdConfig,
) -> CurvePoint {
    let mut values = BTreeMap::new();
    let mut failures = BTreeMap::new();
    let mut put = |m: Method, energy: f64, photon: f64| {
        for &o in observables {
            let v = match o {
                Observable::Energy => energy,
                Observable::MeanPhoton => photon,
            };
            values.insert((m, o), v);
        }
    };
    for &m in methods {
        match m {
            Method::Gvm => put(m, energy_explicit(params), mean_photon_approx(params)),
            Method::Grwa => put(m, energy_grwa(params), mean_photon_grwa(params)),
            Method::GvmFull => match ground_state(params, pcfg, LambdaMethod::ExactRoot) {
                Ok(gs) => put(m, gs.e0_total, gs.mean_photon_full),
                Err(e) => {
                    failures.insert(m, e.to_string());
                }
            },
            Method::Ed => match exact_ground(params, ecfg) {
                Ok(r) => put(m, r.energy, r.mean_photon),
                Err(e) => {
                    failures.insert(m, e.to_string());
                }
            },
        }
    }
    let mut errors = BTreeMap::new();
    for &o in observables {
        if let Some(reference) = values.get(&(Method::Ed, o)).copied() {
            for &m in methods.iter().filter(|m| **m != Method::Ed) {
                if let Some(v) = values.get(&(m, o)) {
                    errors.insert((m, o), (v - reference).abs());
                }
            }
        }
    }
    CurvePoint { x, values, errors, failures }
}

/// Runs the sweep with grid points evaluated in parallel; the output is in
/// grid order.
pub fn run_sweep(spec: &SweepSpec, pcfg: &PerturbationConfig, ecfg: &EdConfig) -> Result<Vec<CurvePoint>> {
    run_sweep_with(spec, pcfg, ecfg, true)
}

pub fn run_sweep_with(
    spec: &SweepSpec,
    pcfg: &PerturbationConfig,
    ecfg: &EdConfig,
    parallel: bool,
) -> Result<Vec<CurvePoint>> {
    spec.validate()?;
    let grid = spec.grid();
    let eval = |&x: &f64| evaluate_point(x, &spec.params_at(x), &spec.methods, &spec.observables, pcfg, ecfg);
    Ok(if parallel {
        grid.par_iter().map(eval).collect()
    } else {
        grid.iter().map(eval).collect()
    })
}

/// Canonical figure sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    F1a,
    F1b,
    F2a,
    F2b,
    F3,
    F4,
    F4Inset,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::F1a,
        FigureId::F1b,
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F3,
        FigureId::F4,
        FigureId::F4Inset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::F1a => "1a",
            FigureId::F1b => "1b",
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F3 => "3",
            FigureId::F4 => "4",
            FigureId::F4Inset => "4i",
        }
    }

    /// Canonical sweep in units of ω.
    pub fn spec(self, steps: usize) -> SweepSpec {
        use Method::*;
        use Observable::*;
        let (swept, start, stop, fixed, methods, observable) = match self {
            FigureId::F1a => (SweptParam::AtomFreq, 0.0, 2.0, 0.2, vec![Gvm, GvmFull, Grwa, Ed], Energy),
            FigureId::F1b => (SweptParam::AtomFreq, 0.0, 2.0, 0.6, vec![Gvm, GvmFull, Grwa, Ed], Energy),
            FigureId::F2a => (SweptParam::Coupling, 0.0, 0.8, 1.0, vec![Gvm, Grwa, Ed], Energy),
            FigureId::F2b => (SweptParam::Coupling, 0.0, 0.8, 1.5, vec![Gvm, Grwa, Ed], Energy),
            FigureId::F3 => (SweptParam::AtomFreq, 0.0, 2.0, 1.0, vec![GvmFull, Grwa, Ed], Energy),
            FigureId::F4 => (SweptParam::AtomFreq, 0.0, 2.0, 0.6, vec![Gvm, Grwa, Ed], MeanPhoton),
            FigureId::F4Inset => (SweptParam::Coupling, 0.0, 1.0, 1.5, vec![Gvm, Grwa, Ed], MeanPhoton),
        };
        SweepSpec { swept, start, stop, steps, omega: 1.0, fixed, methods, observables: vec![observable] }
    }
}

impl FromStr for FigureId {
    type Err = RabiError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().trim_start_matches(['f', 'F']).to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == key || (key == "4_inset" && *id == FigureId::F4Inset))
            .ok_or_else(|| RabiError::Domain(format!("unknown figure id {s:?}")))
    }
}

/// Dataset behind a figure, with the default grid unless `steps` is given.
pub fn figure_dataset(
    id: FigureId,
    steps: Option<usize>,
    pcfg: &PerturbationConfig,
    ecfg: &EdConfig,
) -> Result<(SweepSpec, Vec<CurvePoint>)> {
    let spec = id.spec(steps.unwrap_or(DEFAULT_STEPS));
    let points = run_sweep(&spec, pcfg, ecfg)?;
    Ok((spec, points))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub argmax_x: f64,
}

/// Statistics of `|method − ed|` over a sweep. Points where the method
/// itself failed are skipped; a missing ED value is an error.
pub fn error_summary(points: &[CurvePoint], method: Method, observable: Observable) -> Result<ErrorSummary> {
    let mut max_abs = 0.0;
    let mut argmax_x = f64::NAN;
    let mut sum = 0.0;
    let mut count = 0usize;
    for p in points {
        let reference = p.value(Method::Ed, observable).ok_or(RabiError::MissingOracle { x: p.x })?;
        let Some(v) = p.value(method, observable) else { continue };
        let err = (v - reference).abs();
        if count == 0 || err > max_abs {
            max_abs = err;
            argmax_x = p.x;
        }
        sum += err;
        count += 1;
    }
    let mean_abs = if count == 0 { f64::NAN } else { sum / count as f64 };
    Ok(ErrorSummary { max_abs, mean_abs, argmax_x })
}

fn format_value(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.16e}"),
        None => "NaN".to_string(),
    }
}

/// CSV header: `x`, then `<method>_<observable>` columns, then error
/// columns (`<method>_err`, or `<method>_<observable>_err` when several
/// observables are present).
pub fn csv_header(spec: &SweepSpec) -> Vec<String> {
    let mut header = vec!["x".to_string()];
    for &o in &spec.observables {
        for &m in &spec.methods {
            header.push(column(m, o));
        }
    }
    if spec.has_ed() {
        for &o in &spec.observables {
            for &m in spec.methods.iter().filter(|m| **m != Method::Ed) {
                if spec.observables.len() == 1 {
                    header.push(format!("{}_err", m.name()));
                } else {
                    header.push(format!("{}_err", column(m, o)));
                }
            }
        }
    }
    header
}

/// Writes the sweep as CSV with 17 significant digits per value.
pub fn write_csv<W: Write>(spec: &SweepSpec, points: &[CurvePoint], out: W) -> Result<()> {
    let io = |e: csv::Error| RabiError::Domain(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(spec)).map_err(io)?;
    for p in points {
        let mut row = vec![format_value(Some(p.x))];
        for &o in &spec.observables {
            for &m in &spec.methods {
                row.push(format_value(p.value(m, o)));
            }
        }
        if spec.has_ed() {
            for &o in &spec.observables {
                for &m in spec.methods.iter().filter(|m| **m != Method::Ed) {
                    row.push(format_value(p.error(m, o)));
                }
            }
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| RabiError::Domain(format!("csv output failed: {e}")))?;
    Ok(())
}

pub fn to_csv_string(spec: &SweepSpec, points: &[CurvePoint]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(spec, points, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn to_json_string(points: &[CurvePoint]) -> Result<String> {
    serde_json::to_string_pretty(points).map_err(|e| RabiError::Domain(format!("json output failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfgs() -> (PerturbationConfig, EdConfig) {
        (PerturbationConfig::default(), EdConfig::with_n_fock(60))
    }

    #[test]
    fn spec_validation() {
        let mut spec = FigureId::F1a.spec(11);
        assert!(spec.validate().is_ok());
        spec.steps = 1;
        assert!(spec.validate().is_err());
        let mut spec = FigureId::F1a.spec(11);
        spec.start = 2.0;
        assert!(spec.validate().is_err());
        let mut spec = FigureId::F1a.spec(11);
        spec.fixed = -0.1;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn grid_ends_exactly() {
        let g = FigureId::F2a.spec(101).grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 0.8);
    }

    #[test]
    fn decoupled_point_agrees_across_methods() {
        let (p, e) = cfgs();
        let params = ModelParams::new(1.0, 1.3, 0.0);
        let point = evaluate_point(0.0, &params, &Method::ALL, &[Observable::Energy], &p, &e);
        for m in Method::ALL {
            assert_eq!(point.value(m, Observable::Energy), Some(0.5 - 0.65), "{m}");
        }
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let (p, e) = cfgs();
        // an invalid truncation makes the full method fail at every point
        let bad = PerturbationConfig { n_max: 1, ..p };
        let point = evaluate_point(1.0, &ModelParams::new(1.0, 1.0, 0.6), &Method::ALL, &[Observable::Energy], &bad, &e);
        assert!(point.failures.contains_key(&Method::GvmFull));
        assert!(point.value(Method::GvmFull, Observable::Energy).is_none());
        assert!(point.value(Method::Ed, Observable::Energy).is_some());
    }

    #[test]
    fn parallel_matches_serial() {
        let (p, e) = cfgs();
        let spec = FigureId::F1b.spec(21);
        let a = run_sweep_with(&spec, &p, &e, true).unwrap();
        let b = run_sweep_with(&spec, &p, &e, false).unwrap();
        assert_eq!(to_csv_string(&spec, &a).unwrap(), to_csv_string(&spec, &b).unwrap());
    }

    #[test]
    fn csv_header_layout() {
        let spec = FigureId::F4.spec(11);
        assert_eq!(
            csv_header(&spec),
            vec!["x", "gvm_mean_photon", "grwa_mean_photon", "ed_mean_photon", "gvm_err", "grwa_err"]
        );
        let mut two = spec.clone();
        two.observables = vec![Observable::Energy, Observable::MeanPhoton];
        let header = csv_header(&two);
        assert!(header.contains(&"gvm_energy_err".to_string()));
        assert!(header.contains(&"grwa_mean_photon_err".to_string()));
    }

    #[test]
    fn summary_requires_oracle() {
        let (p, e) = cfgs();
        let mut spec = FigureId::F4.spec(5);
        spec.methods = vec![Method::Gvm, Method::Grwa];
        let pts = run_sweep(&spec, &p, &e).unwrap();
        assert!(matches!(
            error_summary(&pts, Method::Gvm, Observable::MeanPhoton),
            Err(RabiError::MissingOracle { .. })
        ));
    }

    #[test]
    fn summary_of_exact_curves_is_zero() {
        let (p, e) = cfgs();
        let spec = SweepSpec {
            swept: SweptParam::AtomFreq,
            start: 0.0,
            stop: 2.0,
            steps: 9,
            omega: 1.0,
            fixed: 0.0,
            methods: Method::ALL.to_vec(),
            observables: vec![Observable::Energy],
        };
        let pts = run_sweep(&spec, &p, &e).unwrap();
        for m in [Method::Gvm, Method::GvmFull, Method::Grwa] {
            let s = error_summary(&pts, m, Observable::Energy).unwrap();
            assert_eq!(s.max_abs, 0.0, "{m}");
        }
    }

    #[test]
    fn figure_ids_parse() {
        assert_eq!("1a".parse::<FigureId>().unwrap(), FigureId::F1a);
        assert_eq!("f4_inset".parse::<FigureId>().unwrap(), FigureId::F4Inset);
        assert_eq!("4i".parse::<FigureId>().unwrap(), FigureId::F4Inset);
        assert!("9".parse::<FigureId>().is_err());
    }
}
