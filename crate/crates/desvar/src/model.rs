//! The benchmark models, built from validated configs. Each model declares
//! its named randomness sources and its registered output measures,
//! including the wait-time concomitant used as the control variate.
//!
//! Config files are JSON. Numeric parameters that the source material only
//! names in shape (routing sequences, triangular triples, failure means,
//! staff schedules, cost rates) ship as reconstruction defaults in the
//! `configs/` directory and are all overridable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config validation error: {0}")]
    Validation(String),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Manufacturing,
    CallCenter,
    Crossdock,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    AtHorizon,
    HorizonThenDrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    TallyMean,
    TimeAverage,
    Cost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureStat {
    EntityTotalTime,
    EntityWaitTime,
    Wip,
    UtilizationInstantaneous,
    UtilizationScheduled,
    ResourceCost,
}

impl MeasureStat {
    pub fn kind(self) -> MeasureKind {
        match self {
            MeasureStat::EntityTotalTime | MeasureStat::EntityWaitTime => MeasureKind::TallyMean,
            MeasureStat::Wip
            | MeasureStat::UtilizationInstantaneous
            | MeasureStat::UtilizationScheduled => MeasureKind::TimeAverage,
            MeasureStat::ResourceCost => MeasureKind::Cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureRole {
    PrimaryMeasure,
    ControlVariate,
}

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model_kind: ModelKind,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub notes: String,
    pub horizon_minutes: f64,
    pub stop_rule: StopRule,
    #[serde(default)]
    pub strict_paper: bool,
    pub arrivals: ArrivalConfig,
    #[serde(default)]
    pub routing_source: Option<String>,
    #[serde(default)]
    pub trunk: Option<TrunkConfig>,
    #[serde(default)]
    pub transfer_delay_minutes: f64,
    pub classes: Vec<ClassConfig>,
    pub stations: Vec<StationConfig>,
    pub measures: Vec<MeasureConfig>,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
}

fn default_max_events() -> u64 {
    50_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrivalConfig {
    /// Exponential interarrival gaps.
    Expo {
        mean_minutes: f64,
        #[serde(default)]
        first_at_zero: bool,
    },
    /// Piecewise-constant arrival rate; creation stops when the last
    /// positive-rate segment ends.
    Schedule { segments: Vec<ScheduleSegment> },
    /// Fixed arrival instants. Validation models only.
    Batch { times: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub minutes: f64,
    pub rate_per_hour: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrunkConfig {
    pub capacity: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassConfig {
    pub name: String,
    pub weight: f64,
    pub route: Vec<RouteStepConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteStepConfig {
    pub station: String,
    pub service: Distribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationConfig {
    pub name: String,
    pub resources: Vec<ResourceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResourceConfig {
    pub name: String,
    /// Piecewise-constant scheduled capacity: `[{from_minute, units}]`,
    /// first step at minute 0, last step extends forever.
    pub capacity: Vec<CapacityStep>,
    /// Scales every sampled service time on this resource; the newer Cell 3
    /// machine runs at 0.8, picker crews encode proficiency here.
    #[serde(default = "default_multiplier")]
    pub speed_multiplier: f64,
    #[serde(default)]
    pub failure: Option<FailureConfig>,
    #[serde(default)]
    pub cost: CostRates,
    /// Whether utilization and cost measures aggregate over this resource.
    #[serde(default = "default_true")]
    pub measured: bool,
}

fn default_multiplier() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityStep {
    pub from_minute: f64,
    pub units: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureConfig {
    pub uptime: Distribution,
    pub downtime: Distribution,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CostRates {
    #[serde(default)]
    pub busy_per_hour: f64,
    #[serde(default)]
    pub idle_per_hour: f64,
    #[serde(default)]
    pub per_use: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub name: String,
    pub kind: MeasureKind,
    pub stat: MeasureStat,
    pub role: MeasureRole,
}

// ---------------------------------------------------------------------------
// Resolved model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Station {
    pub name: String,
    /// Indices into the model's flat resource list, in preference order.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Resource {
    pub name: String,
    pub station: usize,
    pub capacity: Vec<(f64, u32)>,
    pub multiplier: f64,
    pub failure: Option<FailureConfig>,
    pub cost: CostRates,
    pub measured: bool,
}

#[derive(Debug, Clone)]
pub struct RouteStep {
    pub station: usize,
    pub service: Distribution,
}

#[derive(Debug, Clone)]
pub struct EntityClass {
    pub name: String,
    pub weight: f64,
    pub route: Vec<RouteStep>,
}

#[derive(Debug, Clone)]
pub enum ArrivalProcess {
    Expo { mean: f64, first_at_zero: bool },
    /// (duration, rate per minute) segments starting at time 0.
    Schedule { segments: Vec<(f64, f64)> },
    Batch { times: Vec<f64> },
}

#[derive(Debug, Clone, Copy)]
pub struct Trunk {
    pub capacity: u32,
}

#[derive(Debug, Clone)]
pub struct MeasureSpec {
    pub name: String,
    pub kind: MeasureKind,
    pub stat: MeasureStat,
    pub role: MeasureRole,
}

/// A validated, immutable model ready to replicate.
#[derive(Debug, Clone)]
pub struct Model {
    pub kind: ModelKind,
    pub name: String,
    pub horizon: f64,
    pub stop_rule: StopRule,
    stations: Vec<Station>,
    resources: Vec<Resource>,
    classes: Vec<EntityClass>,
    total_weight: f64,
    arrivals: ArrivalProcess,
    routing_source: Option<String>,
    trunk: Option<Trunk>,
    transfer_delay: f64,
    measures: Vec<MeasureSpec>,
    max_events: u64,
    sources: Vec<String>,
}

impl Model {
    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn classes(&self) -> &[EntityClass] {
        &self.classes
    }

    pub fn arrivals(&self) -> &ArrivalProcess {
        &self.arrivals
    }

    pub fn trunk(&self) -> Option<&Trunk> {
        self.trunk.as_ref()
    }

    pub fn transfer_delay(&self) -> f64 {
        self.transfer_delay
    }

    pub fn measures(&self) -> &[MeasureSpec] {
        &self.measures
    }

    pub fn measure(&self, name: &str) -> Option<&MeasureSpec> {
        self.measures.iter().find(|m| m.name == name)
    }

    pub fn control_variate(&self) -> Option<&MeasureSpec> {
        self.measures.iter().find(|m| m.role == MeasureRole::ControlVariate)
    }

    pub fn routing_source(&self) -> Option<&String> {
        self.routing_source.as_ref()
    }

    pub fn max_events(&self) -> u64 {
        self.max_events
    }

    /// Stable, exhaustive enumeration of every randomness source: the
    /// arrival process, the class-mix split when there is one, and one
    /// service (plus failure/repair) sampler per resource.
    pub fn randomness_sources(&self) -> &[String] {
        &self.sources
    }

    /// Maps one uniform onto a class index by cumulative weight.
    pub fn pick_class(&self, u: f64) -> usize {
        let target = u * self.total_weight;
        let mut cumulative = 0.0;
        for (idx, class) in self.classes.iter().enumerate() {
            cumulative += class.weight;
            if target < cumulative {
                return idx;
            }
        }
        self.classes.len() - 1
    }
}

// ---------------------------------------------------------------------------
// Build & validate
// ---------------------------------------------------------------------------

impl ModelConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Validates and resolves the config into a runnable [`Model`],
    /// dispatching the per-kind shape checks.
    pub fn build(&self) -> Result<Model, ConfigError> {
        match self.model_kind {
            ModelKind::Manufacturing => build_manufacturing(self),
            ModelKind::CallCenter => build_call_center(self),
            ModelKind::Crossdock => build_crossdock(self),
            ModelKind::Custom => resolve(self),
        }
    }
}

/// Builds the four-cell manufacturing model: three part types on fixed
/// routing sequences, exponential arrivals with the first part at time 0,
/// per-cell exponential failures, and the two-machine Cell 3 where the
/// newer machine's sampled process times are scaled by 0.8.
pub fn build_manufacturing(config: &ModelConfig) -> Result<Model, ConfigError> {
    expect_kind(config, ModelKind::Manufacturing)?;
    let model = resolve(config)?;
    if config.strict_paper {
        if model.stations.len() != 4 {
            return Err(ConfigError::Validation(format!(
                "strict manufacturing shape wants 4 cells, found {}",
                model.stations.len()
            )));
        }
        if model.classes.len() != 3 {
            return Err(ConfigError::Validation(format!(
                "strict manufacturing shape wants 3 part types, found {}",
                model.classes.len()
            )));
        }
        match model.arrivals {
            ArrivalProcess::Expo { mean, first_at_zero } if mean == 13.0 && first_at_zero => {}
            _ => {
                return Err(ConfigError::Validation(
                    "strict manufacturing shape wants EXPO(13) arrivals with the first part at time 0"
                        .into(),
                ))
            }
        }
        let two_machine_cells: Vec<&Station> =
            model.stations.iter().filter(|s| s.members.len() == 2).collect();
        if two_machine_cells.len() != 1 {
            return Err(ConfigError::Validation(
                "strict manufacturing shape wants exactly one two-machine cell".into(),
            ));
        }
        let mut multipliers: Vec<f64> = two_machine_cells[0]
            .members
            .iter()
            .map(|&r| model.resources[r].multiplier)
            .collect();
        multipliers.sort_by(f64::total_cmp);
        if multipliers != [0.8, 1.0] {
            return Err(ConfigError::Validation(
                "strict manufacturing shape wants machine multipliers {0.8, 1.0} in the two-machine cell"
                    .into(),
            ));
        }
        if model.horizon != 43_200.0 {
            return Err(ConfigError::Validation(
                "strict manufacturing shape wants a 30-day (43200-minute) horizon".into(),
            ));
        }
    }
    Ok(model)
}

/// Builds the call-centre model: a fixed block of trunk lines seized for a
/// call's whole stay (arrivals finding none balk; nobody reneges), an
/// arrival schedule that stops creating calls before the horizon, staff on
/// capacity schedules, and a terminating run that drains after the horizon.
pub fn build_call_center(config: &ModelConfig) -> Result<Model, ConfigError> {
    expect_kind(config, ModelKind::CallCenter)?;
    let model = resolve(config)?;
    if model.trunk.is_none() {
        return Err(ConfigError::Validation("call centre needs a trunk block".into()));
    }
    if !matches!(model.arrivals, ArrivalProcess::Schedule { .. }) {
        return Err(ConfigError::Validation(
            "call centre arrivals come from a schedule".into(),
        ));
    }
    if model.stop_rule != StopRule::HorizonThenDrain {
        return Err(ConfigError::Validation(
            "call centre runs terminate at the horizon and then drain".into(),
        ));
    }
    if config.strict_paper {
        if model.trunk.unwrap().capacity != 26 {
            return Err(ConfigError::Validation(
                "strict call-centre shape wants 26 trunk lines".into(),
            ));
        }
        if model.horizon != 660.0 {
            return Err(ConfigError::Validation(
                "strict call-centre shape wants a 660-minute replication length".into(),
            ));
        }
    }
    Ok(model)
}

/// Builds the cross-docking order-picking model: exponential order
/// arrivals, triangular picking times, two automated dispensers (with the
/// failure option) and two manual picker crews of distinct proficiency.
pub fn build_crossdock(config: &ModelConfig) -> Result<Model, ConfigError> {
    expect_kind(config, ModelKind::Crossdock)?;
    let model = resolve(config)?;
    if config.strict_paper {
        if !matches!(model.arrivals, ArrivalProcess::Expo { .. }) {
            return Err(ConfigError::Validation(
                "strict cross-dock shape wants exponential order arrivals".into(),
            ));
        }
        let automated: Vec<&Resource> =
            model.resources.iter().filter(|r| r.failure.is_some()).collect();
        let manual: Vec<&Resource> =
            model.resources.iter().filter(|r| r.failure.is_none()).collect();
        if automated.len() != 2 || manual.len() != 2 {
            return Err(ConfigError::Validation(format!(
                "strict cross-dock shape wants 2 automated dispensers and 2 manual crews, found {} and {}",
                automated.len(),
                manual.len()
            )));
        }
        if manual[0].multiplier == manual[1].multiplier {
            return Err(ConfigError::Validation(
                "strict cross-dock shape wants distinct proficiency multipliers for the manual crews"
                    .into(),
            ));
        }
        if model.horizon != 43_200.0 {
            return Err(ConfigError::Validation(
                "strict cross-dock shape wants a 30-day (43200-minute) horizon".into(),
            ));
        }
    }
    Ok(model)
}

fn expect_kind(config: &ModelConfig, kind: ModelKind) -> Result<(), ConfigError> {
    if config.model_kind != kind {
        return Err(ConfigError::Validation(format!(
            "expected model_kind {kind:?}, config says {:?}",
            config.model_kind
        )));
    }
    Ok(())
}

fn resolve(config: &ModelConfig) -> Result<Model, ConfigError> {
    let invalid = |msg: String| Err(ConfigError::Validation(msg));

    if !config.horizon_minutes.is_finite() || config.horizon_minutes <= 0.0 {
        return invalid(format!("horizon must be positive, got {}", config.horizon_minutes));
    }
    if config.stations.is_empty() {
        return invalid("at least one station is required".into());
    }
    if config.classes.is_empty() {
        return invalid("at least one entity class is required".into());
    }
    if config.transfer_delay_minutes < 0.0 {
        return invalid("transfer delay cannot be negative".into());
    }

    let mut stations = Vec::new();
    let mut resources: Vec<Resource> = Vec::new();
    for (station_idx, station) in config.stations.iter().enumerate() {
        if station.resources.is_empty() {
            return invalid(format!("station `{}` has no resources", station.name));
        }
        if stations.iter().any(|s: &Station| s.name == station.name) {
            return invalid(format!("duplicate station name `{}`", station.name));
        }
        let mut members = Vec::new();
        for r in &station.resources {
            if resources.iter().any(|existing| existing.name == r.name) {
                return invalid(format!("duplicate resource name `{}`", r.name));
            }
            validate_capacity(&r.name, &r.capacity)?;
            if !r.speed_multiplier.is_finite() || r.speed_multiplier <= 0.0 {
                return invalid(format!(
                    "resource `{}` needs a positive speed multiplier",
                    r.name
                ));
            }
            members.push(resources.len());
            resources.push(Resource {
                name: r.name.clone(),
                station: station_idx,
                capacity: r.capacity.iter().map(|c| (c.from_minute, c.units)).collect(),
                multiplier: r.speed_multiplier,
                failure: r.failure.clone(),
                cost: r.cost.clone(),
                measured: r.measured,
            });
        }
        stations.push(Station {
            name: station.name.clone(),
            members,
        });
    }

    let mut classes = Vec::new();
    for class in &config.classes {
        if classes.iter().any(|c: &EntityClass| c.name == class.name) {
            return invalid(format!("duplicate class name `{}`", class.name));
        }
        if !class.weight.is_finite() || class.weight <= 0.0 {
            return invalid(format!("class `{}` needs a positive weight", class.name));
        }
        if class.route.is_empty() {
            return invalid(format!("class `{}` has an empty route", class.name));
        }
        let mut route = Vec::new();
        for step in &class.route {
            let station = stations
                .iter()
                .position(|s| s.name == step.station)
                .ok_or_else(|| {
                    ConfigError::Validation(format!(
                        "class `{}` routes through unknown station `{}`",
                        class.name, step.station
                    ))
                })?;
            route.push(RouteStep {
                station,
                service: step.service,
            });
        }
        classes.push(EntityClass {
            name: class.name.clone(),
            weight: class.weight,
            route,
        });
    }
    let total_weight: f64 = classes.iter().map(|c| c.weight).sum();

    let routing_source = if classes.len() > 1 {
        let name = config
            .routing_source
            .clone()
            .unwrap_or_else(|| "routing.class".to_string());
        Some(name)
    } else {
        None
    };

    let arrivals = match &config.arrivals {
        ArrivalConfig::Expo {
            mean_minutes,
            first_at_zero,
        } => {
            Distribution::expo(*mean_minutes).map_err(|e| ConfigError::Validation(e.to_string()))?;
            ArrivalProcess::Expo {
                mean: *mean_minutes,
                first_at_zero: *first_at_zero,
            }
        }
        ArrivalConfig::Schedule { segments } => {
            if segments.is_empty() {
                return invalid("arrival schedule has no segments".into());
            }
            let mut resolved = Vec::new();
            for seg in segments {
                if !seg.minutes.is_finite() || seg.minutes <= 0.0 {
                    return invalid("arrival schedule segments need positive durations".into());
                }
                if seg.rate_per_hour < 0.0 {
                    return invalid("arrival schedule rates cannot be negative".into());
                }
                resolved.push((seg.minutes, seg.rate_per_hour / 60.0));
            }
            ArrivalProcess::Schedule { segments: resolved }
        }
        ArrivalConfig::Batch { times } => {
            if times.iter().any(|t| t.is_nan() || *t < 0.0) {
                return invalid("batch arrival times must be non-negative".into());
            }
            ArrivalProcess::Batch { times: times.clone() }
        }
    };

    if config.stop_rule == StopRule::HorizonThenDrain {
        let creation_ends = match &arrivals {
            ArrivalProcess::Expo { .. } => {
                return invalid(
                    "a drain stop rule needs terminating arrivals; exponential arrivals never stop"
                        .into(),
                )
            }
            ArrivalProcess::Schedule { segments } => {
                let mut end = 0.0;
                let mut t = 0.0;
                for &(duration, rate) in segments {
                    t += duration;
                    if rate > 0.0 {
                        end = t;
                    }
                }
                end
            }
            ArrivalProcess::Batch { times } => times.iter().copied().fold(0.0, f64::max),
        };
        if creation_ends >= config.horizon_minutes {
            return invalid(format!(
                "arrival schedule must stop creating entities before the horizon: last arrivals at {creation_ends}, horizon {}",
                config.horizon_minutes
            ));
        }
    }

    if let Some(trunk) = &config.trunk {
        if trunk.capacity == 0 {
            return invalid("trunk capacity must be positive".into());
        }
    }

    if config.measures.is_empty() {
        return invalid("at least one measure must be registered".into());
    }
    let mut measures = Vec::new();
    for m in &config.measures {
        if measures.iter().any(|existing: &MeasureSpec| existing.name == m.name) {
            return invalid(format!("duplicate measure name `{}`", m.name));
        }
        if m.stat.kind() != m.kind {
            return invalid(format!(
                "measure `{}` declares kind {:?} but its statistic is {:?}",
                m.name,
                m.kind,
                m.stat.kind()
            ));
        }
        measures.push(MeasureSpec {
            name: m.name.clone(),
            kind: m.kind,
            stat: m.stat,
            role: m.role,
        });
    }
    let cv_count = measures
        .iter()
        .filter(|m| m.role == MeasureRole::ControlVariate)
        .count();
    if cv_count > 1 {
        return invalid(format!("at most one control variate per model, found {cv_count}"));
    }
    if config.model_kind != ModelKind::Custom && cv_count != 1 {
        return invalid("benchmark models register exactly one control-variate measure".into());
    }

    let mut sources = vec!["arrivals".to_string()];
    if let Some(name) = &routing_source {
        sources.push(name.clone());
    }
    for station in &stations {
        for &r in &station.members {
            let resource = &resources[r];
            sources.push(format!("service.{}", resource.name));
            if resource.failure.is_some() {
                sources.push(format!("failure.{}", resource.name));
                sources.push(format!("repair.{}", resource.name));
            }
        }
    }

    Ok(Model {
        kind: config.model_kind,
        name: if config.name.is_empty() {
            format!("{:?}", config.model_kind).to_lowercase()
        } else {
            config.name.clone()
        },
        horizon: config.horizon_minutes,
        stop_rule: config.stop_rule,
        stations,
        resources,
        classes,
        total_weight,
        arrivals,
        routing_source,
        trunk: config.trunk.as_ref().map(|t| Trunk { capacity: t.capacity }),
        transfer_delay: config.transfer_delay_minutes,
        measures,
        max_events: config.max_events,
        sources,
    })
}

fn validate_capacity(name: &str, steps: &[CapacityStep]) -> Result<(), ConfigError> {
    if steps.is_empty() {
        return Err(ConfigError::Validation(format!(
            "resource `{name}` needs a capacity schedule"
        )));
    }
    if steps[0].from_minute != 0.0 {
        return Err(ConfigError::Validation(format!(
            "resource `{name}`: capacity schedule must start at minute 0"
        )));
    }
    for pair in steps.windows(2) {
        if pair[1].from_minute.is_nan() || pair[1].from_minute <= pair[0].from_minute {
            return Err(ConfigError::Validation(format!(
                "resource `{name}`: capacity steps must have increasing times"
            )));
        }
    }
    Ok(())
}

/// Single-queue M/M/1 config used by the kernel validation suite and the
/// two-configuration comparison examples.
pub fn mm1_config(interarrival_mean: f64, service_mean: f64, horizon: f64) -> ModelConfig {
    ModelConfig {
        model_kind: ModelKind::Custom,
        name: "mm1".into(),
        notes: String::new(),
        horizon_minutes: horizon,
        stop_rule: StopRule::AtHorizon,
        strict_paper: false,
        arrivals: ArrivalConfig::Expo {
            mean_minutes: interarrival_mean,
            first_at_zero: false,
        },
        routing_source: None,
        trunk: None,
        transfer_delay_minutes: 0.0,
        classes: vec![ClassConfig {
            name: "job".into(),
            weight: 1.0,
            route: vec![RouteStepConfig {
                station: "server".into(),
                service: Distribution::Expo { mean: service_mean },
            }],
        }],
        stations: vec![StationConfig {
            name: "server".into(),
            resources: vec![ResourceConfig {
                name: "server".into(),
                capacity: vec![CapacityStep {
                    from_minute: 0.0,
                    units: 1,
                }],
                speed_multiplier: 1.0,
                failure: None,
                cost: CostRates::default(),
                measured: true,
            }],
        }],
        measures: vec![
            MeasureConfig {
                name: "Server Utilization".into(),
                kind: MeasureKind::TimeAverage,
                stat: MeasureStat::UtilizationInstantaneous,
                role: MeasureRole::PrimaryMeasure,
            },
            MeasureConfig {
                name: "Mean Queue Wait".into(),
                kind: MeasureKind::TallyMean,
                stat: MeasureStat::EntityWaitTime,
                role: MeasureRole::PrimaryMeasure,
            },
            MeasureConfig {
                name: "Entity Total Time".into(),
                kind: MeasureKind::TallyMean,
                stat: MeasureStat::EntityTotalTime,
                role: MeasureRole::PrimaryMeasure,
            },
            MeasureConfig {
                name: "WIP".into(),
                kind: MeasureKind::TimeAverage,
                stat: MeasureStat::Wip,
                role: MeasureRole::PrimaryMeasure,
            },
        ],
        max_events: default_max_events(),
    }
}

// ---------------------------------------------------------------------------
