//! Scenario files: sectioned TOML with defaults for every key.
//!
//! ```toml
//! seed = 7
//!
//! [grid]
//! nx = 32
//! ny = 32
//!
//! [initial]
//! kind = "profile"
//! eta0 = 0.39269908169872414
//! amp = 0.4
//! kappa = 3.0
//!
//! [flow]
//! n = 2
//! dt = 1e-3
//! steps = 100
//!
//! [hierarchy]
//! a3_variant = "v1"
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dslab_core::hierarchy::A3Variant;
use dslab_core::spinor::CatalogParams;
use dslab_core::{Complex64, GridSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Seed of every randomized check.
    pub seed: u64,
    pub grid: GridSection,
    pub initial: InitialData,
    pub flow: FlowSection,
    pub tolerances: Tolerances,
    pub output: OutputSection,
    pub hierarchy: HierarchySection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            grid: GridSection::default(),
            initial: InitialData::default(),
            flow: FlowSection::default(),
            tolerances: Tolerances::default(),
            output: OutputSection::default(),
            hierarchy: HierarchySection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            lx: 2.0 * PI,
            ly: 2.0 * PI,
        }
    }
}

impl GridSection {
    pub fn spec(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.nx, self.ny, self.lx, self.ly)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Initial spinor data. Complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Plane,
    Wave {
        c: f64,
        k: [f64; 2],
        m: [f64; 2],
    },
    GaugedWave {
        c: f64,
        k: [f64; 2],
        m: [f64; 2],
        gauge: [f64; 2],
    },
    Profile {
        eta0: f64,
        amp: f64,
        kappa: f64,
    },
    /// Angles `theta`, `eta` as field CSVs (`i,j,re,im`). Without `phi`
    /// (a spinor CSV) the second spinor is `psi` itself, which needs a real
    /// potential.
    Lift {
        theta: PathBuf,
        eta: PathBuf,
        #[serde(default)]
        phi: Option<PathBuf>,
    },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Wave {
            c: 1.0,
            k: [1.0, 0.0],
            m: [-1.0, 0.0],
        }
    }
}

fn cx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl InitialData {
    pub fn name(&self) -> &'static str {
        match self {
            InitialData::Plane => "plane",
            InitialData::Wave { .. } => "wave",
            InitialData::GaugedWave { .. } => "gauged_wave",
            InitialData::Profile { .. } => "profile",
            InitialData::Lift { .. } => "lift",
        }
    }

    /// Catalog parameters, or `None` for lifts.
    pub fn catalog(&self) -> Option<CatalogParams> {
        Some(match *self {
            InitialData::Plane => CatalogParams::Plane,
            InitialData::Wave { c, k, m } => CatalogParams::Wave {
                c,
                k: cx(k),
                m: cx(m),
            },
            InitialData::GaugedWave { c, k, m, gauge } => CatalogParams::GaugedWave {
                c,
                k: cx(k),
                m: cx(m),
                gauge: cx(gauge),
            },
            InitialData::Profile { eta0, amp, kappa } => {
                CatalogParams::Profile { eta0, amp, kappa }
            }
            InitialData::Lift { .. } => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    /// Hierarchy level, 1 to 3.
    pub n: u8,
    pub dt: f64,
    pub steps: usize,
    /// Surface snapshot every this many steps; 0 disables snapshots.
    pub snapshot_stride: usize,
    pub dealias: bool,
    /// Divergence threshold on `max |field|`.
    pub blowup: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            n: 2,
            dt: 1e-3,
            steps: 100,
            snapshot_stride: 0,
            dealias: false,
            blowup: dslab_core::flow::BLOWUP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Replaces every tolerance below when set.
    pub all: Option<f64>,
    pub spectral: f64,
    pub dirac: f64,
    pub closedness: f64,
    pub path_independence: f64,
    pub geometry: f64,
    pub curvature: f64,
    pub identity_n1: f64,
    pub identity_n23: f64,
    /// Required shrink factor of the identity residual when the grid doubles.
    pub refinement: f64,
    pub reduction: f64,
    pub reduced_aux: f64,
    pub nv: f64,
    pub gauge: f64,
    pub gauge_forms: f64,
    pub quadric: f64,
    pub round_trip: f64,
    pub gauss_parallel: f64,
    pub r3_x4: f64,
    pub r3: f64,
    pub flow_coherence: f64,
    pub willmore_drift: f64,
    pub j_drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            all: None,
            spectral: 1e-12,
            dirac: 1e-10,
            closedness: 1e-10,
            path_independence: 1e-8,
            geometry: 1e-8,
            curvature: 1e-6,
            identity_n1: 1e-8,
            identity_n23: 1e-7,
            refinement: 10.0,
            reduction: 1e-12,
            reduced_aux: 1e-10,
            nv: 1e-9,
            gauge: 1e-10,
            gauge_forms: 1e-12,
            quadric: 1e-13,
            round_trip: 1e-12,
            gauss_parallel: 1e-8,
            r3_x4: 1e-10,
            r3: 1e-8,
            flow_coherence: 1e-6,
            willmore_drift: 1e-5,
            j_drift: 1e-6,
        }
    }
}

impl Tolerances {
    /// Tolerance `value` unless `all` overrides it.
    pub fn get(&self, value: f64) -> f64 {
        self.all.unwrap_or(value)
    }

    fn values(&self) -> [f64; 22] {
        [
            self.spectral,
            self.dirac,
            self.closedness,
            self.path_independence,
            self.geometry,
            self.curvature,
            self.identity_n1,
            self.identity_n23,
            self.refinement,
            self.reduction,
            self.reduced_aux,
            self.nv,
            self.gauge,
            self.gauge_forms,
            self.quadric,
            self.round_trip,
            self.gauss_parallel,
            self.r3_x4,
            self.r3,
            self.flow_coherence,
            self.willmore_drift,
            self.j_drift,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// 1-based coordinates of the OBJ projection.
    pub projection: [usize; 3],
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("dslab-out"),
            projection: [1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchySection {
    pub a3_variant: A3Variant,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<(usize, usize)>,
    pub level: Option<u8>,
    pub a3_variant: Option<A3Variant>,
    pub projection: Option<[usize; 3]>,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads and validates a scenario; relative lift paths are taken from
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let InitialData::Lift { theta, eta, phi } = &mut cfg.initial {
            for p in [Some(theta), Some(eta), phi.as_mut()].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some((nx, ny)) = o.grid {
            self.grid.nx = nx;
            self.grid.ny = ny;
        }
        if let Some(n) = o.level {
            self.flow.n = n;
        }
        if let Some(v) = o.a3_variant {
            self.hierarchy.a3_variant = v;
        }
        if let Some(p) = o.projection {
            self.output.projection = p;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.grid.spec()?;
        if !(1..=3).contains(&self.flow.n) {
            return bad(format!("flow.n = {} must be 1, 2 or 3", self.flow.n));
        }
        if !(self.flow.dt.is_finite() && self.flow.dt > 0.0) {
            return bad(format!("flow.dt = {} must be positive", self.flow.dt));
        }
        if !(self.flow.blowup > 0.0) {
            return bad(format!(
                "flow.blowup = {} must be positive",
                self.flow.blowup
            ));
        }
        let t = &self.tolerances;
        if let Some(a) = t.all {
            if !(a.is_finite() && a >= 0.0) {
                return bad(format!("tolerances.all = {a} must be nonnegative"));
            }
        }
        if t.values().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("tolerances must be finite and nonnegative".into());
        }
        let p = self.output.projection;
        if p.iter().any(|&k| !(1..=4).contains(&k)) || p[0] == p[1] || p[1] == p[2] || p[0] == p[2]
        {
            return bad(format!(
                "projection {p:?} must be three distinct indices in 1..=4"
            ));
        }
        if let InitialData::Lift { theta, eta, phi } = &self.initial {
            for f in [Some(theta), Some(eta), phi.as_ref()].into_iter().flatten() {
                if !f.is_file() {
                    return bad(format!("missing input file {}", f.display()));
                }
            }
        }
        Ok(())
    }
}

/// Parses `"NX,NY"`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected NX,NY")?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((n(a)?, n(b)?))
}

pub fn parse_variant(s: &str) -> Result<A3Variant, String> {
    s.parse().map_err(|e: dslab_core::Error| e.to_string())
}

/// Parses `"i,j,k"`.
pub fn parse_projection(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| "expected three indices i,j,k".to_string())
}
