//! Validated run configuration and the evaluation of each requested quantity.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use wigent_core::criteria::{self, BellSettings};
use wigent_core::linalg::C64;
use wigent_core::optimize::{self, BellConfig, OptimizerConfig};
use wigent_core::phase::Disk;
use wigent_core::quadrature::QuadratureRule;
use wigent_core::states::{self, state_to_fock};
use wigent_core::wigner::{self, fock_wigner};
use wigent_core::{
    BellState, CatParams, CatSign, CriterionId, CriterionReport, Error, FockDensityMatrix, GaussianTwoMode, PhasePoint,
    QuadratureSpec, Rect, Region, StateSpec, TmstParams, Transform2, WernerParams, WignerField,
};

use crate::config::{parse_axis, parse_f64, ConfigError, Table};

/// Pass mark of the Gaussian/Fock engine comparison.
pub const ENGINE_TOLERANCE: f64 = 1e-6;
/// Pass mark of the kernel/displaced-parity comparison.
pub const PARITY_TOLERANCE: f64 = 1e-9;
const PARITY_POINTS: usize = 20;
const BISECTION_STEPS: usize = 30;

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Core(Error),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    /// 2 for bad input, 3 for quadrature non-convergence, 4 for a too-small
    /// Fock cutoff, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(e) => match e {
                Error::NonConvergence { .. } => 3,
                Error::CutoffTooSmall { .. } => 4,
                Error::InvalidParameter { .. }
                | Error::BadDeterminant(_)
                | Error::NonPositiveSqueeze(_)
                | Error::BadRegion(_)
                | Error::DegenerateAngle(_)
                | Error::SingularCovariance(_)
                | Error::SingularNormalization
                | Error::CutoffMismatch(..) => 2,
                _ => 1,
            },
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config error: {e}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Tmsv,
    Tmst,
    WernerPhiPlus,
    WernerPsiPlus,
    CatPlus,
    CatMinus,
    StandardForm,
}

impl Family {
    const ALL: [Family; 7] = [
        Family::Tmsv,
        Family::Tmst,
        Family::WernerPhiPlus,
        Family::WernerPsiPlus,
        Family::CatPlus,
        Family::CatMinus,
        Family::StandardForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Tmsv => "tmsv",
            Family::Tmst => "tmst",
            Family::WernerPhiPlus => "werner-phi+",
            Family::WernerPsiPlus => "werner-psi+",
            Family::CatPlus => "cat-plus",
            Family::CatMinus => "cat-minus",
            Family::StandardForm => "standard-form",
        }
    }

    /// Parameters with their defaults (`None` means required).
    fn params(self) -> &'static [(&'static str, Option<f64>)] {
        match self {
            Family::Tmsv => &[("s", None)],
            Family::Tmst => &[("s", None), ("eta", None), ("r", None)],
            Family::WernerPhiPlus | Family::WernerPsiPlus => &[("epsilon", Some(1.0))],
            Family::CatPlus | Family::CatMinus => &[("gamma", None), ("epsilon", Some(1.0))],
            Family::StandardForm => &[("n", None), ("m", None), ("c1", None), ("c2", None)],
        }
    }

    fn has_param(self, name: &str) -> bool {
        self.params().iter().any(|(p, _)| *p == name)
    }
}

/// A state family plus fully resolved parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub family: Family,
    pub params: BTreeMap<&'static str, f64>,
    pub cutoff: Option<usize>,
}

impl State {
    fn get(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn with_param(&self, name: &str, value: f64) -> State {
        let mut s = self.clone();
        let key = self.family.params().iter().find(|(p, _)| *p == name).map(|(p, _)| *p).expect("checked parameter");
        s.params.insert(key, value);
        s
    }

    /// Fock-representable family, if any.
    pub fn spec(&self) -> Option<StateSpec> {
        let cat = |sign| StateSpec::Cat(CatParams { gamma: self.get("gamma"), epsilon: self.get("epsilon"), sign });
        let werner = |bell| StateSpec::Werner(WernerParams { bell, epsilon: self.get("epsilon") });
        Some(match self.family {
            Family::Tmsv => StateSpec::Tmst(TmstParams::tmsv(self.get("s"))),
            Family::Tmst => StateSpec::Tmst(TmstParams { s: self.get("s"), eta: self.get("eta"), r: self.get("r") }),
            Family::WernerPhiPlus => werner(BellState::PhiPlus),
            Family::WernerPsiPlus => werner(BellState::PsiPlus),
            Family::CatPlus => cat(CatSign::Plus),
            Family::CatMinus => cat(CatSign::Minus),
            Family::StandardForm => return None,
        })
    }

    pub fn gaussian(&self) -> Option<wigent_core::Result<GaussianTwoMode>> {
        match self.family {
            Family::StandardForm => {
                Some(GaussianTwoMode::standard_form(self.get("n"), self.get("m"), self.get("c1"), self.get("c2")))
            }
            _ => match self.spec()? {
                StateSpec::Tmst(p) => Some(states::tmst_covariance(&p)),
                _ => None,
            },
        }
    }

    pub fn wigner(&self) -> wigent_core::Result<WignerField> {
        match self.spec() {
            Some(spec) => spec.wigner(),
            None => self.gaussian().expect("standard form is Gaussian")?.wigner(),
        }
    }

    pub fn effective_cutoff(&self) -> Option<usize> {
        self.cutoff.or_else(|| self.spec().map(|s| s.default_cutoff()))
    }

    pub fn fock(&self) -> Option<wigent_core::Result<FockDensityMatrix>> {
        let spec = self.spec()?;
        Some(state_to_fock(&spec, self.effective_cutoff()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformChoice {
    Fixed(Transform2),
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaChoice {
    Fixed(f64),
    Optimize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionChoice {
    Fixed(Region),
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisplacementChoice {
    Fixed(BellSettings),
    Optimize,
}

/// What a run computes: a criterion, or the smallest mixing weight at which
/// it is violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Criterion(CriterionId),
    EpsilonMin(CriterionId),
}

impl Quantity {
    pub fn name(&self) -> String {
        match self {
            Quantity::Criterion(c) => c.name().to_string(),
            Quantity::EpsilonMin(c) => format!("epsilon-min:{}", c.name()),
        }
    }

    /// CSV-friendly column stem.
    pub fn column(&self) -> String {
        match self {
            Quantity::Criterion(c) => c.name().replace('-', "_"),
            Quantity::EpsilonMin(c) => format!("epsilon_min_{}", c.name().replace('-', "_")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Ppt,
    Pseudospin,
    CrosscheckWigner,
    Bell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: &'static str,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub state: State,
    pub quantities: Vec<Quantity>,
    pub transform: Option<TransformChoice>,
    pub theta: Option<ThetaChoice>,
    pub region: RegionChoice,
    pub displacements: DisplacementChoice,
    pub quadrature: QuadratureSpec,
    pub optimizer: OptimizerConfig,
    pub bell: BellConfig,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub gnuplot: Option<PathBuf>,
    pub timing: bool,
    pub workers: usize,
    pub axes: Vec<Axis>,
    pub checks: Vec<Check>,
    pub optimize_bell: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Evaluate,
    Sweep,
    Oracle,
}

fn parse_family(table: &Table) -> Result<Family, ConfigError> {
    let key = "state.family";
    let name = table.str(key).ok_or_else(|| table.error(key, "a state family is required (--state)"))?;
    Family::ALL.iter().copied().find(|f| f.name() == name).ok_or_else(|| {
        let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        table.error(key, format!("unknown family `{name}`; expected one of {}", names.join(", ")))
    })
}

fn parse_state(table: &Table, swept: &[&str]) -> Result<State, ConfigError> {
    let family = parse_family(table)?;
    for key in table.keys_in("state") {
        if key != "family" && key != "cutoff" && !family.has_param(key) {
            return Err(table.error(&format!("state.{key}"), format!("not a parameter of family {}", family.name())));
        }
    }
    let mut params = BTreeMap::new();
    for &(name, default) in family.params() {
        let key = format!("state.{name}");
        let value = match table.f64(&key)? {
            Some(v) => v,
            None if swept.contains(&name) => f64::NAN,
            None => default.ok_or_else(|| table.error(&key, format!("family {} needs `{name}` (--{name})", family.name())))?,
        };
        params.insert(name, value);
    }
    let cutoff = table.usize("state.cutoff")?;
    if family == Family::StandardForm && cutoff.is_some() {
        return Err(table.error("state.cutoff", "standard-form states have no Fock representation"));
    }
    if cutoff == Some(0) {
        return Err(table.error("state.cutoff", "cutoff must be positive"));
    }
    Ok(State { family, params, cutoff })
}

/// Maps a state-construction error to the key that caused it.
fn state_error(table: &Table, e: Error, axes: &[Axis]) -> Failure {
    let key = match &e {
        Error::InvalidParameter { name, .. } => {
            match axes.iter().position(|a| a.param == *name) {
                Some(0) => "sweep.x_values".to_string(),
                Some(_) => "sweep.y_values".to_string(),
                None => format!("state.{name}"),
            }
        }
        _ => "state.family".to_string(),
    };
    Failure::Config(table.error(&key, e.to_string()))
}

fn parse_quantities(table: &Table, mode: Mode) -> Result<Vec<Quantity>, ConfigError> {
    let key = "criterion.name";
    let names = match table.list(key)? {
        Some(n) => n,
        None if mode == Mode::Oracle => return Ok(Vec::new()),
        None => return Err(table.error(key, "at least one criterion is required (--criterion)")),
    };
    let mut out = Vec::new();
    for name in names {
        let q = match name.strip_prefix("epsilon-min:") {
            Some(inner) => match CriterionId::from_name(inner) {
                Some(c @ (CriterionId::C1 | CriterionId::C2 | CriterionId::C3 | CriterionId::Ppt | CriterionId::BellChsh)) => {
                    Quantity::EpsilonMin(c)
                }
                _ => return Err(table.error(key, format!("`{name}`: epsilon-min supports c1, c2, c3, ppt and bell-chsh"))),
            },
            None => Quantity::Criterion(CriterionId::from_name(&name).ok_or_else(|| {
                let names: Vec<&str> = CriterionId::ALL.iter().map(|c| c.name()).collect();
                table.error(key, format!("unknown criterion `{name}`; expected one of {}", names.join(", ")))
            })?),
        };
        if out.contains(&q) {
            return Err(table.error(key, format!("criterion `{name}` listed twice")));
        }
        out.push(q);
    }
    Ok(out)
}

fn parse_transform(table: &Table) -> Result<Option<TransformChoice>, ConfigError> {
    let key = "criterion.transform";
    let Some(v) = table.str(key) else { return Ok(None) };
    let choice = match v {
        "identity" => TransformChoice::Fixed(Transform2::IDENTITY),
        "p-reflect" => TransformChoice::Fixed(Transform2::P_REFLECT),
        "neg-identity" => TransformChoice::Fixed(Transform2::NEG_IDENTITY),
        "optimize" => TransformChoice::Optimize,
        explicit => {
            let nums: Option<Vec<f64>> = explicit.split(',').map(parse_f64).collect();
            match nums.as_deref() {
                Some(&[a, b, c, d, x0, p0]) => TransformChoice::Fixed(
                    Transform2::new(a, b, c, d, x0, p0).map_err(|e| table.error(key, e.to_string()))?,
                ),
                _ => {
                    return Err(table.error(
                        key,
                        format!("expected identity, p-reflect, neg-identity, optimize or `a,b,c,d,x0,p0`, got `{explicit}`"),
                    ))
                }
            }
        }
    };
    Ok(Some(choice))
}

fn parse_theta(table: &Table) -> Result<Option<ThetaChoice>, ConfigError> {
    let key = "criterion.theta";
    match table.str(key) {
        None => Ok(None),
        Some("optimize") => Ok(Some(ThetaChoice::Optimize)),
        Some(v) => {
            let t = parse_f64(v).ok_or_else(|| table.error(key, format!("expected radians or `optimize`, got `{v}`")))?;
            if !(t > 0.0 && t < PI) {
                return Err(table.error(key, "mixing angle must lie strictly between 0 and π"));
            }
            Ok(Some(ThetaChoice::Fixed(t)))
        }
    }
}

fn parse_region(table: &Table) -> Result<RegionChoice, ConfigError> {
    let key = "criterion.region";
    let Some(v) = table.str(key) else { return Ok(RegionChoice::Fixed(Region::FullPlane)) };
    let bad = |msg: String| table.error(key, msg);
    if v == "full" {
        return Ok(RegionChoice::Fixed(Region::FullPlane));
    }
    if v == "shrink" {
        return Ok(RegionChoice::Shrink);
    }
    if let Some(rest) = v.strip_prefix("rect:") {
        let nums: Option<Vec<f64>> = rest.split(',').map(parse_f64).collect();
        return match nums.as_deref() {
            Some(&[x0, x1, p0, p1]) => {
                let r = Region::Rectangle(Rect::new(x0, x1, p0, p1));
                r.validate().map_err(|e| bad(e.to_string()))?;
                Ok(RegionChoice::Fixed(r))
            }
            _ => Err(bad(format!("expected rect:x_min,x_max,p_min,p_max, got `{v}`"))),
        };
    }
    if let Some(rest) = v.strip_prefix("disks:") {
        let mut disks = Vec::new();
        for item in rest.split(';') {
            let nums: Option<Vec<f64>> = item.split(',').map(parse_f64).collect();
            match nums.as_deref() {
                Some(&[x, p, radius]) => disks.push(Disk { center: PhasePoint::new(x, p), radius }),
                _ => return Err(bad(format!("expected disks:x,p,radius;..., got `{item}`"))),
            }
        }
        return Region::disks(disks).map(RegionChoice::Fixed).map_err(|e| bad(e.to_string()));
    }
    Err(bad(format!("expected full, shrink, rect:... or disks:..., got `{v}`")))
}

fn parse_displacements(table: &Table) -> Result<DisplacementChoice, ConfigError> {
    let key = "criterion.displacements";
    match table.str(key) {
        None => Ok(DisplacementChoice::Fixed(BellSettings::ORIGIN)),
        Some("optimize") => Ok(DisplacementChoice::Optimize),
        Some(v) => {
            let nums: Option<Vec<f64>> = v.split(',').map(parse_f64).collect();
            match nums.as_deref() {
                Some(&[ar, ai, a2r, a2i, br, bi, b2r, b2i]) => Ok(DisplacementChoice::Fixed(BellSettings {
                    a: C64::new(ar, ai),
                    a2: C64::new(a2r, a2i),
                    b: C64::new(br, bi),
                    b2: C64::new(b2r, b2i),
                })),
                _ => Err(table.error(key, "expected `optimize` or eight numbers: Re/Im of α_A, α_A', α_B, α_B'")),
            }
        }
    }
}

fn parse_quadrature(table: &Table) -> Result<QuadratureSpec, ConfigError> {
    let mut spec = QuadratureSpec::default();
    match table.str("quadrature.rule") {
        None | Some("tensor") => {}
        Some("adaptive") => spec.rule = QuadratureRule::AdaptiveSubdivision,
        Some(v) => return Err(table.error("quadrature.rule", format!("expected tensor or adaptive, got `{v}`"))),
    }
    if let Some(order) = table.usize("quadrature.order")? {
        if order < 8 {
            return Err(table.error("quadrature.order", "quadrature order must be at least 8"));
        }
        spec.order = order;
    }
    if let Some(tol) = table.f64("quadrature.tolerance")? {
        if !(tol > 0.0) {
            return Err(table.error("quadrature.tolerance", "tolerance must be positive"));
        }
        spec.tolerance = tol;
    }
    Ok(spec)
}

fn positive(table: &Table, key: &str) -> Result<Option<usize>, ConfigError> {
    match table.usize(key)? {
        Some(0) => Err(table.error(key, "must be positive")),
        v => Ok(v),
    }
}

fn parse_checks(table: &Table) -> Result<Vec<Check>, ConfigError> {
    let key = "oracle.checks";
    let mut out = Vec::new();
    for name in table.list(key)?.unwrap_or_default() {
        let c = match name.as_str() {
            "ppt" => Check::Ppt,
            "pseudospin" => Check::Pseudospin,
            "crosscheck-wigner" => Check::CrosscheckWigner,
            "bell" => Check::Bell,
            other => {
                return Err(table.error(key, format!("unknown check `{other}`; expected ppt, pseudospin, crosscheck-wigner or bell")))
            }
        };
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_table(table: &Table, mode: Mode) -> Result<Self, Failure> {
        let family = parse_family(table)?;
        let mut axes = Vec::new();
        if mode == Mode::Sweep {
            for (name_key, values_key) in [("sweep.x", "sweep.x_values"), ("sweep.y", "sweep.y_values")] {
                match (table.str(name_key), table.str(values_key)) {
                    (None, None) if name_key == "sweep.y" => {}
                    (Some(name), Some(values)) => {
                        let param = family
                            .params()
                            .iter()
                            .find(|(p, _)| *p == name)
                            .map(|(p, _)| *p)
                            .ok_or_else(|| table.error(name_key, format!("`{name}` is not a parameter of family {}", family.name())))?;
                        if axes.iter().any(|a: &Axis| a.param == param) {
                            return Err(table.error(name_key, "both sweep axes name the same parameter").into());
                        }
                        let values = parse_axis(values).map_err(|m| table.error(values_key, m))?;
                        axes.push(Axis { param, values });
                    }
                    (None, _) => return Err(table.error(name_key, "sweep needs an axis parameter (--x / --y)").into()),
                    (Some(_), None) => return Err(table.error(values_key, "sweep axis needs values (--x-values / --y-values)").into()),
                }
            }
        }
        let swept: Vec<&str> = axes.iter().map(|a| a.param).collect();
        let state = parse_state(table, &swept)?;

        let quantities = parse_quantities(table, mode)?;
        let transform = parse_transform(table)?;
        let theta = parse_theta(table)?;
        let region = parse_region(table)?;
        let displacements = parse_displacements(table)?;
        let quadrature = parse_quadrature(table)?;

        let mut optimizer = OptimizerConfig::default();
        if let Some(v) = positive(table, "optimizer.iterations")? {
            optimizer.iterations = v;
        }
        if let Some(v) = table.usize("optimizer.search_order")? {
            if v < 8 {
                return Err(table.error("optimizer.search_order", "search order must be at least 8").into());
            }
            optimizer.search_order = v;
        }
        if let Some(v) = positive(table, "optimizer.refined")? {
            optimizer.refined_per_branch = v;
        }
        optimizer.report_spec.rule = quadrature.rule;
        optimizer.report_spec.tolerance = quadrature.tolerance;
        optimizer.report_spec.order = optimizer.report_spec.order.max(quadrature.order);
        if let RegionChoice::Fixed(r) = &region {
            optimizer.region = r.clone();
        }
        let mut bell = BellConfig::default();
        if let Some(v) = positive(table, "optimizer.bell_starts")? {
            bell.starts = v;
        }
        if let Some(v) = positive(table, "optimizer.bell_iterations")? {
            bell.iterations = v;
        }
        if let Some(v) = table.u64("optimizer.bell_seed")? {
            bell.seed = v;
        }

        let format = match table.str("output.format") {
            None => match mode {
                Mode::Sweep => Format::Csv,
                _ => Format::Json,
            },
            Some("json") if mode == Mode::Sweep => {
                return Err(table.error("output.format", "sweeps write CSV only").into());
            }
            Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(v) => return Err(table.error("output.format", format!("expected json or csv, got `{v}`")).into()),
        };
        let gnuplot = table.str("output.gnuplot").map(PathBuf::from);
        if gnuplot.is_some() && mode != Mode::Sweep {
            return Err(table.error("output.gnuplot", "plot scripts are generated for sweeps only").into());
        }
        let output = table.str("output.path").map(PathBuf::from);
        if gnuplot.is_some() && output.is_none() {
            return Err(table.error("output.gnuplot", "a plot script needs the CSV written to a file (--output)").into());
        }
        let timing = table.bool("output.timing")?.unwrap_or(false);
        let workers = match positive(table, "run.workers")? {
            Some(w) => w,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let checks = parse_checks(table)?;
        let optimize_bell = table.bool("oracle.optimize")?.unwrap_or(false);
        if mode == Mode::Oracle && checks.is_empty() {
            return Err(table.error("oracle.checks", "choose at least one of --ppt, --pseudospin, --crosscheck-wigner, --bell").into());
        }
        if mode != Mode::Oracle && (!checks.is_empty() || table.str("oracle.optimize").is_some()) {
            return Err(table.error("oracle.checks", "oracle checks belong to the `oracle` command").into());
        }

        let cfg = RunConfig {
            state,
            quantities,
            transform,
            theta,
            region,
            displacements,
            quadrature,
            optimizer,
            bell,
            format,
            output,
            gnuplot,
            timing,
            workers,
            axes,
            checks,
            optimize_bell,
        };
        cfg.check_combinations(table)?;
        // Every state the run will touch is built once up front so bad
        // parameters fail before any work starts.
        for point in cfg.grid() {
            let s = cfg.state_at(&point);
            s.wigner().map_err(|e| state_error(table, e, &cfg.axes))?;
        }
        Ok(cfg)
    }

    fn check_combinations(&self, table: &Table) -> Result<(), ConfigError> {
        let err = |key: &str, msg: String| Err(table.error(key, msg));
        for q in &self.quantities {
            let (c, eps) = match *q {
                Quantity::Criterion(c) => (c, false),
                Quantity::EpsilonMin(c) => (c, true),
            };
            let name = q.name();
            if eps && !matches!(self.state.family, Family::WernerPhiPlus | Family::WernerPsiPlus | Family::CatPlus | Family::CatMinus) {
                return err("criterion.name", format!("`{name}` needs a family with a mixing weight (werner or cat)"));
            }
            match c {
                CriterionId::C1 | CriterionId::C2 | CriterionId::C3 => match self.transform {
                    None => return err("criterion.transform", format!("criterion {} needs a transform (--transform)", c.name())),
                    Some(TransformChoice::Optimize) if eps => {
                        return err("criterion.transform", format!("`{name}` bisects at a fixed transform"))
                    }
                    Some(TransformChoice::Optimize) => {
                        if matches!(self.theta, Some(ThetaChoice::Fixed(_))) && c != CriterionId::C3 {
                            return err("criterion.theta", "an optimized transform is searched jointly with θ; drop --theta".into());
                        }
                        if c == CriterionId::C2 && self.region == RegionChoice::Shrink {
                            return err("criterion.region", "region shrinking needs a fixed transform and θ".into());
                        }
                    }
                    Some(TransformChoice::Fixed(_)) => {
                        if c != CriterionId::C3 {
                            match self.theta {
                                Some(ThetaChoice::Fixed(t)) => {
                                    if c == CriterionId::C1 && (t - PI / 2.0).abs() < 1e-9 {
                                        return err("criterion.theta", "criterion c1 is degenerate at θ = π/2".into());
                                    }
                                    if c == CriterionId::C2 && (2.0 * t).sin().abs() < 1e-9 {
                                        return err("criterion.theta", "criterion c2 is degenerate at θ = π/2".into());
                                    }
                                }
                                Some(ThetaChoice::Optimize) => {
                                    return err("criterion.theta", "θ is optimized only together with --transform optimize".into())
                                }
                                None => return err("criterion.theta", format!("criterion {} needs a mixing angle (--theta)", c.name())),
                            }
                        }
                    }
                },
                CriterionId::PurityS1 => {
                    if self.theta.is_none() {
                        return err("criterion.theta", "criterion purity-s1 needs --theta (radians or optimize)".into());
                    }
                }
                CriterionId::Simon | CriterionId::Duan => {
                    if !matches!(self.state.family, Family::Tmsv | Family::Tmst | Family::StandardForm) {
                        return err("criterion.name", format!("criterion {} needs a Gaussian state", c.name()));
                    }
                }
                CriterionId::Ppt | CriterionId::PseudospinEpr => {
                    if self.state.family == Family::StandardForm {
                        return err("criterion.name", format!("criterion {} needs a Fock representation; use tmst", c.name()));
                    }
                }
                CriterionId::BellChsh => {
                    if self.displacements == DisplacementChoice::Optimize
                        && !matches!(self.state.family, Family::WernerPhiPlus | Family::WernerPsiPlus | Family::CatPlus | Family::CatMinus)
                    {
                        return err("criterion.displacements", "displacement search needs a werner or cat family".into());
                    }
                }
            }
        }
        for check in &self.checks {
            match check {
                Check::Ppt | Check::Pseudospin | Check::CrosscheckWigner if self.state.family == Family::StandardForm => {
                    return err("oracle.checks", "this check needs a Fock representation; use tmst".into());
                }
                Check::Bell
                    if self.optimize_bell
                        && !matches!(
                            self.state.family,
                            Family::WernerPhiPlus | Family::WernerPsiPlus | Family::CatPlus | Family::CatMinus
                        ) =>
                {
                    return err("oracle.optimize", "displacement search needs a werner or cat family".into());
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Grid points in row-major order (first axis outermost).
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn state_at(&self, point: &[f64]) -> State {
        let mut s = self.state.clone();
        for (axis, &v) in self.axes.iter().zip(point) {
            s = s.with_param(axis.param, v);
        }
        s
    }
}

/// One line of output: a criterion report or oracle check.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
    pub transform: Option<Transform2>,
    pub theta: Option<f64>,
    pub region: Option<Region>,
    pub error_estimate: f64,
    pub details: BTreeMap<&'static str, f64>,
    pub runtime_ms: Option<f64>,
}

impl Outcome {
    fn from_report(r: CriterionReport) -> Self {
        Outcome {
            name: r.id.name().to_string(),
            value: r.value,
            bound: r.bound,
            violated: r.violated,
            transform: r.transform,
            theta: r.theta,
            region: r.region,
            error_estimate: r.error_estimate,
            details: BTreeMap::new(),
            runtime_ms: None,
        }
    }

    fn plain(name: &str, value: f64, bound: f64, violated: bool) -> Self {
        Outcome {
            name: name.to_string(),
            value,
            bound,
            violated,
            transform: None,
            theta: None,
            region: None,
            error_estimate: 0.0,
            details: BTreeMap::new(),
            runtime_ms: None,
        }
    }
}

fn fixed_transform(cfg: &RunConfig) -> Transform2 {
    match cfg.transform {
        Some(TransformChoice::Fixed(t)) => t,
        _ => unreachable!("checked by check_combinations"),
    }
}

fn fixed_theta(cfg: &RunConfig) -> f64 {
    match cfg.theta {
        Some(ThetaChoice::Fixed(t)) => t,
        _ => unreachable!("checked by check_combinations"),
    }
}

/// Criterion report for one state. `inner_workers` parallelizes the
/// optimizer; sweeps pass 1 and parallelize over grid points instead.
pub fn evaluate_criterion(state: &State, c: CriterionId, cfg: &RunConfig, inner_workers: usize) -> Result<Outcome, Failure> {
    let spec = &cfg.quadrature;
    let report = match c {
        CriterionId::C1 | CriterionId::C2 | CriterionId::C3 => {
            let w = state.wigner()?;
            if cfg.transform == Some(TransformChoice::Optimize) {
                let ocfg = OptimizerConfig { workers: inner_workers, ..cfg.optimizer.clone() };
                let r = optimize::optimize_criterion(&w, c, &ocfg)?;
                let mut out = Outcome::from_report(r.report);
                out.details.insert("restarts", r.restarts as f64);
                return Ok(out);
            }
            let t = fixed_transform(cfg);
            match c {
                CriterionId::C1 => criteria::criterion1(&w, &t, fixed_theta(cfg), spec)?,
                CriterionId::C2 => {
                    let theta = fixed_theta(cfg);
                    let region = match &cfg.region {
                        RegionChoice::Fixed(r) => r.clone(),
                        RegionChoice::Shrink => optimize::shrink_region(&w, &t, theta, spec)?,
                    };
                    let r = criteria::criterion2(&w, &t, theta, &region, spec)?;
                    let mut out = Outcome::from_report(r);
                    if cfg.region == RegionChoice::Shrink {
                        let area = wigent_core::quadrature::integrate(|_, _| 1.0, &region, spec)?.value;
                        out.details.insert("region_area", area);
                    }
                    return Ok(out);
                }
                _ => criteria::criterion3(&w, &t, spec)?,
            }
        }
        CriterionId::PurityS1 => {
            let w = state.wigner()?;
            match cfg.theta {
                Some(ThetaChoice::Optimize) => optimize::maximize_purity(&w, spec)?,
                _ => criteria::purity_s1(&w, fixed_theta(cfg), spec)?,
            }
        }
        CriterionId::Simon => criteria::simon_check(&state.gaussian().expect("checked Gaussian")?),
        CriterionId::Duan => criteria::duan_check(&state.gaussian().expect("checked Gaussian")?),
        CriterionId::Ppt => criteria::ppt_check(&state.fock().expect("checked Fock")?),
        CriterionId::PseudospinEpr => criteria::pseudospin_epr(&state.fock().expect("checked Fock")?)?,
        CriterionId::BellChsh => {
            let w = state.wigner()?;
            match cfg.displacements {
                DisplacementChoice::Fixed(s) => criteria::bell_chsh(&w, &s),
                DisplacementChoice::Optimize => return bell_search(state, cfg),
            }
        }
    };
    Ok(Outcome::from_report(report))
}

fn bell_search(state: &State, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = state.spec().expect("checked family");
    let found = optimize::bell_epsilon_min(&spec, &cfg.bell)?;
    let mut out = Outcome::from_report(criteria::bell_chsh(&state.wigner()?, &found.settings));
    out.details.insert("epsilon_min", found.epsilon_min);
    out.details.insert("chsh_pure", found.chsh_pure);
    out.details.insert("starts", found.starts as f64);
    for (name, a) in [("a", found.settings.a), ("a2", found.settings.a2), ("b", found.settings.b), ("b2", found.settings.b2)] {
        let (re, im) = match name {
            "a" => ("alpha_a_re", "alpha_a_im"),
            "a2" => ("alpha_a2_re", "alpha_a2_im"),
            "b" => ("alpha_b_re", "alpha_b_im"),
            _ => ("alpha_b2_re", "alpha_b2_im"),
        };
        out.details.insert(re, a.re);
        out.details.insert(im, a.im);
    }
    Ok(out)
}

/// Smallest mixing weight at which `c` is violated, by bisection on `[0, 1]`.
/// NaN when even the pure member is not flagged.
fn epsilon_min(state: &State, c: CriterionId, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let current = state.get("epsilon");
    if c == CriterionId::BellChsh {
        let found = optimize::bell_epsilon_min(&state.spec().expect("checked family"), &cfg.bell)?;
        let eps = if found.epsilon_min <= 1.0 { found.epsilon_min } else { f64::NAN };
        let mut out = Outcome::plain(&Quantity::EpsilonMin(c).name(), eps, current, current > eps);
        out.details.insert("starts", found.starts as f64);
        return Ok(out);
    }
    let flagged = |eps: f64| -> Result<bool, Failure> {
        Ok(evaluate_criterion(&state.with_param("epsilon", eps), c, cfg, 1)?.violated)
    };
    let mut out = Outcome::plain(&Quantity::EpsilonMin(c).name(), f64::NAN, current, false);
    if let Some(TransformChoice::Fixed(t)) = cfg.transform {
        if matches!(c, CriterionId::C1 | CriterionId::C2 | CriterionId::C3) {
            out.transform = Some(t);
        }
    }
    if let Some(ThetaChoice::Fixed(t)) = cfg.theta {
        if matches!(c, CriterionId::C1 | CriterionId::C2) {
            out.theta = Some(t);
        }
    }
    if !flagged(1.0)? {
        return Ok(out);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if flagged(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.value = hi;
    out.error_estimate = hi - lo;
    out.violated = current > hi;
    Ok(out)
}

pub fn evaluate_quantity(state: &State, q: Quantity, cfg: &RunConfig, inner_workers: usize) -> Result<Outcome, Failure> {
    let start = std::time::Instant::now();
    let mut out = match q {
        Quantity::Criterion(c) => evaluate_criterion(state, c, cfg, inner_workers)?,
        Quantity::EpsilonMin(c) => epsilon_min(state, c, cfg)?,
    };
    if cfg.timing {
        out.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(out)
}

/// Deterministic low-discrepancy points in `[-2.5, 2.5]⁴`.
pub fn parity_points() -> Vec<[f64; 4]> {
    // Additive recurrence with the reciprocal powers of the 4D golden ratio.
    let g: f64 = 1.167_303_978_261_418_7;
    let step = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g), 1.0 / (g * g * g * g)];
    (1..=PARITY_POINTS)
        .map(|k| {
            let mut z = [0.0; 4];
            for (i, s) in step.iter().enumerate() {
                z[i] = 5.0 * ((0.5 + k as f64 * s).fract()) - 2.5;
            }
            z
        })
        .collect()
}

pub fn run_check(state: &State, check: Check, cfg: &RunConfig) -> Result<Vec<Outcome>, Failure> {
    let start = std::time::Instant::now();
    let mut out = match check {
        Check::Ppt => vec![Outcome::from_report(criteria::ppt_check(&state.fock().expect("checked Fock")?))],
        Check::Pseudospin => vec![Outcome::from_report(criteria::pseudospin_epr(&state.fock().expect("checked Fock")?)?)],
        Check::Bell => {
            if cfg.optimize_bell {
                vec![bell_search(state, cfg)?]
            } else {
                let s = match cfg.displacements {
                    DisplacementChoice::Fixed(s) => s,
                    DisplacementChoice::Optimize => return Ok(vec![bell_search(state, cfg)?]),
                };
                vec![Outcome::from_report(criteria::bell_chsh(&state.wigner()?, &s))]
            }
        }
        Check::CrosscheckWigner => {
            let spec = state.spec().expect("checked Fock");
            let cutoff = state.effective_cutoff().expect("Fock family");
            let gap = wigner::engine_disagreement(&spec, cutoff)?;
            let mut engines = Outcome::plain("wigner-crosscheck", gap, ENGINE_TOLERANCE, gap >= ENGINE_TOLERANCE);
            engines.details.insert("cutoff", cutoff as f64);
            engines.details.insert("grid_points", 625.0);

            let rho = state_to_fock(&spec, cutoff)?;
            let fock = fock_wigner(&rho);
            let mut worst = 0.0f64;
            for z in parity_points() {
                let direct = wigent_core::oracle::displaced_parity_wigner(&rho, &z)?;
                worst = worst.max((fock.eval(&z) - direct).abs());
            }
            let mut parity = Outcome::plain("parity-crosscheck", worst, PARITY_TOLERANCE, worst >= PARITY_TOLERANCE);
            parity.details.insert("cutoff", cutoff as f64);
            parity.details.insert("points", PARITY_POINTS as f64);
            vec![engines, parity]
        }
    };
    if cfg.timing {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        for o in &mut out {
            o.runtime_ms = Some(ms);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Table {
        Table::parse(text, "t.ini").unwrap()
    }

    #[test]
    fn missing_parameter_names_the_flag() {
        let t = table("[state]\nfamily = tmst\ns = 0.5\neta = 0.5\n[criterion]\nname = simon\n");
        let e = RunConfig::from_table(&t, Mode::Evaluate).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("needs `r`"), "{e}");
    }

    #[test]
    fn out_of_range_parameter_points_at_its_line() {
        let t = table("[state]\nfamily = tmst\ns = 0.5\neta = 1.5\nr = 0\n[criterion]\nname = simon\n");
        let e = RunConfig::from_table(&t, Mode::Evaluate).unwrap_err();
        assert!(e.to_string().contains("t.ini:4"), "{e}");
    }

    #[test]
    fn foreign_parameter_is_rejected() {
        let t = table("[state]\nfamily = tmsv\ns = 0.5\ngamma = 1\n[criterion]\nname = c1\n");
        let e = RunConfig::from_table(&t, Mode::Evaluate).unwrap_err();
        assert!(e.to_string().contains("t.ini:4"), "{e}");
    }

    #[test]
    fn theta_and_optimized_transform_conflict() {
        let t = table("[state]\nfamily = tmsv\ns = 0.5\n[criterion]\nname = c1\ntransform = optimize\ntheta = 0.5\n");
        assert!(RunConfig::from_table(&t, Mode::Evaluate).is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let t = table(
            "[state]\nfamily = tmst\ns = 0.5\n[criterion]\nname = simon\n[sweep]\nx = r\nx_values = 0,1\ny = eta\ny_values = 0.5,1\n",
        );
        let cfg = RunConfig::from_table(&t, Mode::Sweep).unwrap();
        assert_eq!(cfg.grid(), vec![vec![0.0, 0.5], vec![0.0, 1.0], vec![1.0, 0.5], vec![1.0, 1.0]]);
        assert_eq!(cfg.state_at(&[1.0, 0.5]).params["r"], 1.0);
    }

    #[test]
    fn bad_sweep_value_points_at_axis() {
        let t = table("[state]\nfamily = tmst\ns = 0.5\nr = 0\n[criterion]\nname = simon\n[sweep]\nx = eta\nx_values = 0.5,2\n");
        let e = RunConfig::from_table(&t, Mode::Sweep).unwrap_err();
        assert!(e.to_string().contains("sweep.x_values"), "{e}");
    }

    #[test]
    fn parity_points_are_spread_and_bounded() {
        let pts = parity_points();
        assert_eq!(pts.len(), PARITY_POINTS);
        assert!(pts.iter().flatten().all(|v| v.abs() <= 2.5));
        assert_ne!(pts[0], pts[1]);
    }

    #[test]
    fn werner_threshold_by_bisection() {
        let t = table("[state]\nfamily = werner-psi+\nepsilon = 0.5\n[criterion]\nname = epsilon-min:c3\ntransform = neg-identity\n");
        let cfg = RunConfig::from_table(&t, Mode::Evaluate).unwrap();
        let out = evaluate_quantity(&cfg.state, cfg.quantities[0], &cfg, 1).unwrap();
        assert!((out.value - 1.0 / 3.0).abs() < 1e-3, "{}", out.value);
        assert!(out.violated);
    }
}
