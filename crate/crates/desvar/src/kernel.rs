//! Terminating discrete-event simulation engine: event calendar, clock,
//! entities with routing sequences, capacitated resources with schedules
//! and random failures, FIFO queues, and tally / time-weighted statistics.
//!
//! One replication is one isolated state machine. Everything it touches is
//! owned, so replications can run on separate threads with no coordination,
//! and identical (model, manifest) inputs produce bit-identical outputs.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::dist::Distribution;
use crate::model::{ArrivalProcess, MeasureStat, Model, StopRule};
use crate::rng::{SeedManifest, StreamSet};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("causality violation: event at t={event_time} scheduled while clock is {clock}")]
    CausalityViolation { event_time: f64, clock: f64 },
    #[error("time regression: observation at t={at} precedes accumulator time {last}")]
    TimeRegression { at: f64, last: f64 },
    #[error("unsynchronized source: `{0}` is missing from the seed manifest")]
    UnsynchronizedSource(String),
    #[error("runaway model: {0}")]
    RunawayModel(String),
}

/// A scheduled state transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub fire_time: f64,
    pub action: Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Arrival,
    ServiceDone { entity: usize, station: usize, resource: usize },
    TransferDone { entity: usize, station: usize },
    CapacityChange { resource: usize },
    FailureStrike { resource: usize },
    RepairDone { resource: usize },
    StatsReset,
}

#[derive(Debug)]
struct Scheduled {
    fire_time: f64,
    sequence: u64,
    action: Action,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.sequence == other.sequence
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so the BinaryHeap pops the earliest (fire_time, sequence).
        other
            .fire_time
            .total_cmp(&self.fire_time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

/// Future event list ordered by (fire_time, insertion sequence). Ties fire
/// in insertion order, which keeps replications reproducible.
#[derive(Debug, Default)]
pub struct EventCalendar {
    heap: BinaryHeap<Scheduled>,
    next_sequence: u64,
    now: f64,
}

impl EventCalendar {
    pub fn new() -> Self {
        EventCalendar::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, event: Event) -> Result<(), SimError> {
        if event.fire_time.is_nan() || event.fire_time < self.now {
            return Err(SimError::CausalityViolation {
                event_time: event.fire_time,
                clock: self.now,
            });
        }
        self.heap.push(Scheduled {
            fire_time: event.fire_time,
            sequence: self.next_sequence,
            action: event.action,
        });
        self.next_sequence += 1;
        Ok(())
    }

    pub fn pop(&mut self) -> Option<Event> {
        let next = self.heap.pop()?;
        self.now = next.fire_time;
        Some(Event {
            fire_time: next.fire_time,
            action: next.action,
        })
    }

    /// Fire time of the next event without removing it.
    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|s| s.fire_time)
    }
}

/// Average over discrete observations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    sum: f64,
    count: u64,
}

impl Tally {
    pub fn add(&mut self, value: f64) {
        self.sum += value;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// None when nothing was observed; a zero here would corrupt variance
    /// comparisons downstream.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    pub fn reset(&mut self) {
        self.sum = 0.0;
        self.count = 0;
    }
}

/// Time-integral of a piecewise-constant signal. Exact for step inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWeighted {
    integral: f64,
    last_value: f64,
    last_time: f64,
}

impl TimeWeighted {
    pub fn new(start: f64, value: f64) -> Self {
        TimeWeighted {
            integral: 0.0,
            last_value: value,
            last_time: start,
        }
    }

    /// Extends the integral with the held value over [last_time, at], then
    /// holds `value` from `at` onward.
    pub fn accumulate(&mut self, value: f64, at: f64) -> Result<(), SimError> {
        if at.is_nan() || at < self.last_time {
            return Err(SimError::TimeRegression {
                at,
                last: self.last_time,
            });
        }
        self.integral += self.last_value * (at - self.last_time);
        self.last_value = value;
        self.last_time = at;
        Ok(())
    }

    /// Integral over [start, end] after extending to `end`.
    pub fn finalize(&mut self, end: f64) -> Result<f64, SimError> {
        self.accumulate(self.last_value, end)?;
        Ok(self.integral)
    }

    pub fn last_value(&self) -> f64 {
        self.last_value
    }

    /// Restarts the integral at `at`, keeping the held value.
    pub fn reset(&mut self, at: f64) {
        self.integral = 0.0;
        self.last_time = at;
    }
}

/// Statistics accumulator in either of the two flavors the measures use.
#[derive(Debug, Clone, PartialEq)]
pub enum StatAccumulator {
    Tally(Tally),
    TimeWeighted(TimeWeighted),
}

/// Per-replication results: one value per registered measure plus the run
/// metadata needed to reproduce it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutput {
    /// Measure name -> value; `None` marks a measure with zero observations.
    pub measures: Vec<(String, Option<f64>)>,
    pub manifest: SeedManifest,
    /// Time at which statistics were finalized (the horizon, or the drain
    /// completion time for terminating-then-drain runs).
    pub horizon: f64,
    pub created: u64,
    pub disposed: u64,
    pub balked: u64,
    pub in_system_at_end: u64,
    pub draw_counts: Vec<(String, u64)>,
    pub events_processed: u64,
}

impl ReplicationOutput {
    pub fn measure(&self, name: &str) -> Option<Option<f64>> {
        self.measures
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// Knobs the harness may override per run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub horizon: Option<f64>,
    pub stop_rule: Option<StopRule>,
    /// Statistics are discarded at this time and collection restarts. The
    /// benchmark experiments all run with 0.
    pub warm_up: f64,
    pub max_events: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            horizon: None,
            stop_rule: None,
            warm_up: 0.0,
            max_events: 50_000_000,
        }
    }
}

struct EntityState {
    class: usize,
    created_at: f64,
    route_pos: usize,
    queue_join: f64,
    total_wait: f64,
}

struct ResourceState {
    busy: u32,
    down: u32,
    pending_failures: u32,
    schedule_pos: usize,
    busy_integral: TimeWeighted,
    ratio_integral: TimeWeighted,
    uses: u64,
    service_src: usize,
    failure_src: Option<usize>,
    repair_src: Option<usize>,
}

struct Engine<'m> {
    model: &'m Model,
    calendar: EventCalendar,
    clock: f64,
    streams: StreamSet,
    arrival_src: usize,
    routing_src: Option<usize>,
    entities: Vec<EntityState>,
    queues: Vec<VecDeque<usize>>,
    resources: Vec<ResourceState>,
    trunk_busy: u32,
    in_system: u64,
    created: u64,
    disposed: u64,
    balked: u64,
    wip_integral: TimeWeighted,
    total_time: Tally,
    wait_time: Tally,
    // Cumulative intensity already consumed by schedule-driven arrivals.
    intensity_used: f64,
    arrivals_exhausted: bool,
    stats_start: f64,
    horizon: f64,
    stop_rule: StopRule,
    events_processed: u64,
    max_events: u64,
}

/// Runs one replication of `model` under `manifest` until the stop rule is
/// satisfied, then finalizes every accumulator.
pub fn run_replication(
    model: &Model,
    manifest: &SeedManifest,
    options: &RunOptions,
) -> Result<ReplicationOutput, SimError> {
    for source in model.randomness_sources() {
        if manifest.get(source).is_none() {
            return Err(SimError::UnsynchronizedSource(source.clone()));
        }
    }
    let streams = StreamSet::from_manifest(manifest);
    let mut engine = Engine::new(model, streams, options);
    engine.init()?;
    let end = engine.run()?;
    engine.finish(manifest.clone(), end)
}

impl<'m> Engine<'m> {
    fn new(model: &'m Model, streams: StreamSet, options: &RunOptions) -> Self {
        let horizon = options.horizon.unwrap_or(model.horizon);
        let stop_rule = options.stop_rule.unwrap_or(model.stop_rule);
        let arrival_src = streams
            .source_index("arrivals")
            .expect("manifest coverage checked");
        let routing_src = model
            .routing_source()
            .map(|name| streams.source_index(name).expect("manifest coverage checked"));
        let resources = model
            .resources()
            .iter()
            .map(|r| ResourceState {
                busy: 0,
                down: 0,
                pending_failures: 0,
                schedule_pos: 0,
                busy_integral: TimeWeighted::new(0.0, 0.0),
                ratio_integral: TimeWeighted::new(0.0, 0.0),
                uses: 0,
                service_src: streams
                    .source_index(&format!("service.{}", r.name))
                    .expect("manifest coverage checked"),
                failure_src: r
                    .failure
                    .as_ref()
                    .map(|_| streams.source_index(&format!("failure.{}", r.name)).unwrap()),
                repair_src: r
                    .failure
                    .as_ref()
                    .map(|_| streams.source_index(&format!("repair.{}", r.name)).unwrap()),
            })
            .collect();
        Engine {
            model,
            calendar: EventCalendar::new(),
            clock: 0.0,
            streams,
            arrival_src,
            routing_src,
            entities: Vec::new(),
            queues: model.stations().iter().map(|_| VecDeque::new()).collect(),
            resources,
            trunk_busy: 0,
            in_system: 0,
            created: 0,
            disposed: 0,
            balked: 0,
            wip_integral: TimeWeighted::new(0.0, 0.0),
            total_time: Tally::default(),
            wait_time: Tally::default(),
            intensity_used: 0.0,
            arrivals_exhausted: false,
            stats_start: options.warm_up.max(0.0),
            horizon,
            stop_rule,
            events_processed: 0,
            max_events: options.max_events,
        }
    }

    fn init(&mut self) -> Result<(), SimError> {
        match self.model.arrivals() {
            ArrivalProcess::Expo { first_at_zero, .. } => {
                if *first_at_zero {
                    self.schedule(0.0, Action::Arrival)?;
                } else {
                    self.schedule_next_expo_arrival()?;
                }
            }
            ArrivalProcess::Schedule { .. } => {
                self.schedule_next_nhpp_arrival()?;
            }
            ArrivalProcess::Batch { times } => {
                for &t in times {
                    self.schedule(t, Action::Arrival)?;
                }
                self.arrivals_exhausted = true;
            }
        }
        for (idx, resource) in self.model.resources().iter().enumerate() {
            for &(from, _) in &resource.capacity[1..] {
                self.schedule(from, Action::CapacityChange { resource: idx })?;
            }
            if resource.failure.is_some() {
                let uptime = self.sample_failure_uptime(idx);
                self.schedule(uptime, Action::FailureStrike { resource: idx })?;
            }
        }
        if self.stats_start > 0.0 {
            self.schedule(self.stats_start, Action::StatsReset)?;
        }
        Ok(())
    }

    fn schedule(&mut self, fire_time: f64, action: Action) -> Result<(), SimError> {
        self.calendar.schedule(Event { fire_time, action })
    }

    fn sample_failure_uptime(&mut self, resource: usize) -> f64 {
        let src = self.resources[resource].failure_src.expect("has failure spec");
        let dist = &self.model.resources()[resource].failure.as_ref().unwrap().uptime;
        let u = self.streams.draw(src);
        self.clock + dist.inverse_cdf(u).expect("uniform in range")
    }

    fn sample_repair(&mut self, resource: usize) -> f64 {
        let src = self.resources[resource].repair_src.expect("has failure spec");
        let dist = &self.model.resources()[resource].failure.as_ref().unwrap().downtime;
        let u = self.streams.draw(src);
        self.clock + dist.inverse_cdf(u).expect("uniform in range")
    }

    fn schedule_next_expo_arrival(&mut self) -> Result<(), SimError> {
        let ArrivalProcess::Expo { mean, .. } = self.model.arrivals() else {
            unreachable!()
        };
        let dist = Distribution::Expo { mean: *mean };
        let gap = dist
            .inverse_cdf(self.streams.draw(self.arrival_src))
            .expect("uniform in range");
        self.schedule(self.clock + gap, Action::Arrival)
    }

    /// Inverts the cumulative intensity of the piecewise-constant arrival
    /// schedule: one exponential draw maps to the next arrival instant, so
    /// synchronization is one draw per arrival here too.
    fn schedule_next_nhpp_arrival(&mut self) -> Result<(), SimError> {
        let ArrivalProcess::Schedule { segments } = self.model.arrivals() else {
            unreachable!()
        };
        let u = self.streams.draw(self.arrival_src);
        let exp_draw = -(1.0 - u).ln();
        let target = self.intensity_used + exp_draw;
        let mut cumulative = 0.0;
        let mut seg_start = 0.0;
        for &(duration, rate) in segments {
            let seg_mass = rate * duration;
            if target <= cumulative + seg_mass && rate > 0.0 {
                let t = seg_start + (target - cumulative) / rate;
                self.intensity_used = target;
                return self.schedule(t, Action::Arrival);
            }
            cumulative += seg_mass;
            seg_start += duration;
        }
        // Remaining intensity exhausted: the schedule stops creating
        // arrivals. The draw is still consumed, keeping streams aligned.
        self.arrivals_exhausted = true;
        Ok(())
    }

    fn set_wip(&mut self, delta: i64) -> Result<(), SimError> {
        self.in_system = self.in_system.checked_add_signed(delta).expect("wip underflow");
        self.wip_integral.accumulate(self.in_system as f64, self.clock)
    }

    fn touch_resource_integrals(&mut self, resource: usize) -> Result<(), SimError> {
        let cap = self.scheduled_capacity(resource);
        let state = &mut self.resources[resource];
        state.busy_integral.accumulate(state.busy as f64, self.clock)?;
        let ratio = if cap == 0 {
            0.0
        } else {
            // Clamped: a capacity drop lets in-service work drain, so busy
            // can transiently exceed the scheduled count.
            (state.busy as f64 / cap as f64).min(1.0)
        };
        state.ratio_integral.accumulate(ratio, self.clock)
    }

    fn scheduled_capacity(&self, resource: usize) -> u32 {
        let schedule = &self.model.resources()[resource].capacity;
        let pos = self.resources[resource].schedule_pos;
        schedule[pos].1
    }

    fn free_units(&self, resource: usize) -> u32 {
        let cap = self.scheduled_capacity(resource);
        let state = &self.resources[resource];
        cap.saturating_sub(state.busy + state.down)
    }

    fn run(&mut self) -> Result<f64, SimError> {
        loop {
            let Some(event) = self.calendar.pop() else {
                // Nothing left to do. A drained system idles out to the
                // horizon; undrained entities mean the model can never
                // finish.
                if self.stop_rule == StopRule::HorizonThenDrain && self.in_system > 0 {
                    return Err(SimError::RunawayModel(format!(
                        "calendar exhausted at t={} with {} entities still in system",
                        self.clock, self.in_system
                    )));
                }
                return Ok(self.horizon.max(self.clock));
            };
            if self.stop_rule == StopRule::AtHorizon && event.fire_time > self.horizon {
                return Ok(self.horizon);
            }
            self.clock = event.fire_time;
            self.events_processed += 1;
            if self.events_processed > self.max_events {
                return Err(SimError::RunawayModel(format!(
                    "event budget of {} exceeded at t={}",
                    self.max_events, self.clock
                )));
            }
            self.dispatch_event(event.action)?;
            if self.stop_rule == StopRule::HorizonThenDrain
                && self.arrivals_exhausted
                && self.in_system == 0
                && self.clock >= self.horizon
            {
                return Ok(self.clock);
            }
        }
    }

    fn dispatch_event(&mut self, action: Action) -> Result<(), SimError> {
        match action {
            Action::Arrival => self.on_arrival(),
            Action::ServiceDone { entity, station, resource } => {
                self.on_service_done(entity, station, resource)
            }
            Action::TransferDone { entity, station } => self.enter_station(entity, station),
            Action::CapacityChange { resource } => self.on_capacity_change(resource),
            Action::FailureStrike { resource } => self.on_failure_strike(resource),
            Action::RepairDone { resource } => self.on_repair_done(resource),
            Action::StatsReset => self.on_stats_reset(),
        }
    }

    fn on_arrival(&mut self) -> Result<(), SimError> {
        // Schedule the successor first so the arrival stream is consumed in
        // arrival order even when this entity cascades zero-delay events.
        match self.model.arrivals() {
            ArrivalProcess::Expo { .. } => self.schedule_next_expo_arrival()?,
            ArrivalProcess::Schedule { .. } => self.schedule_next_nhpp_arrival()?,
            ArrivalProcess::Batch { .. } => {}
        }
        self.created += 1;
        let class = match self.routing_src {
            Some(src) => {
                let u = self.streams.draw(src);
                self.model.pick_class(u)
            }
            None => 0,
        };
        let entity = self.entities.len();
        self.entities.push(EntityState {
            class,
            created_at: self.clock,
            route_pos: 0,
            queue_join: self.clock,
            total_wait: 0.0,
        });
        if let Some(trunk) = self.model.trunk() {
            if self.trunk_busy >= trunk.capacity {
                self.balked += 1;
                return Ok(());
            }
            self.trunk_busy += 1;
        }
        self.set_wip(1)?;
        let first_station = self.model.classes()[class].route[0].station;
        self.enter_station(entity, first_station)
    }

    fn enter_station(&mut self, entity: usize, station: usize) -> Result<(), SimError> {
        self.entities[entity].queue_join = self.clock;
        self.queues[station].push_back(entity);
        self.try_dispatch(station)
    }

    fn try_dispatch(&mut self, station: usize) -> Result<(), SimError> {
        while !self.queues[station].is_empty() {
            let Some(resource) = self
                .model
                .stations()[station]
                .members
                .iter()
                .copied()
                .find(|&r| self.free_units(r) > 0)
            else {
                return Ok(());
            };
            let entity = self.queues[station].pop_front().expect("checked non-empty");
            self.seize(entity, station, resource)?;
        }
        Ok(())
    }

    fn seize(&mut self, entity: usize, station: usize, resource: usize) -> Result<(), SimError> {
        let state = &mut self.entities[entity];
        let wait = self.clock - state.queue_join;
        state.total_wait += wait;
        let route_pos = state.route_pos;
        let class = state.class;
        self.resources[resource].busy += 1;
        self.resources[resource].uses += 1;
        self.touch_resource_integrals(resource)?;
        let service = &self.model.classes()[class].route[route_pos].service;
        let u = self.streams.draw(self.resources[resource].service_src);
        let duration =
            service.inverse_cdf(u).expect("uniform in range") * self.model.resources()[resource].multiplier;
        self.schedule(
            self.clock + duration,
            Action::ServiceDone { entity, station, resource },
        )
    }

    fn on_service_done(&mut self, entity: usize, station: usize, resource: usize) -> Result<(), SimError> {
        self.resources[resource].busy -= 1;
        self.touch_resource_integrals(resource)?;
        // A failure that struck mid-service steals the freed unit before any
        // queued work can claim it.
        if self.resources[resource].pending_failures > 0 {
            self.resources[resource].pending_failures -= 1;
            self.begin_downtime(resource)?;
        }
        let state = &mut self.entities[entity];
        state.route_pos += 1;
        let route_len = self.model.classes()[state.class].route.len();
        if state.route_pos < route_len {
            let next_station = self.model.classes()[state.class].route[state.route_pos].station;
            let delay = self.model.transfer_delay();
            if delay > 0.0 {
                self.schedule(
                    self.clock + delay,
                    Action::TransferDone { entity, station: next_station },
                )?;
            } else {
                self.enter_station(entity, next_station)?;
            }
        } else {
            self.dispose(entity)?;
        }
        self.try_dispatch(station)
    }

    fn dispose(&mut self, entity: usize) -> Result<(), SimError> {
        let state = &self.entities[entity];
        self.total_time.add(self.clock - state.created_at);
        self.wait_time.add(state.total_wait);
        self.disposed += 1;
        if self.model.trunk().is_some() {
            self.trunk_busy -= 1;
        }
        self.set_wip(-1)
    }

    fn on_capacity_change(&mut self, resource: usize) -> Result<(), SimError> {
        let schedule = &self.model.resources()[resource].capacity;
        let mut pos = self.resources[resource].schedule_pos;
        while pos + 1 < schedule.len() && schedule[pos + 1].0 <= self.clock {
            pos += 1;
        }
        self.resources[resource].schedule_pos = pos;
        self.touch_resource_integrals(resource)?;
        self.try_dispatch(self.model.resources()[resource].station)
    }

    fn on_failure_strike(&mut self, resource: usize) -> Result<(), SimError> {
        let state = &self.resources[resource];
        let cap = self.scheduled_capacity(resource);
        if state.busy > 0 && state.busy + state.down >= cap {
            // Every scheduled unit is working: the machine finishes its
            // current piece before going down.
            self.resources[resource].pending_failures += 1;
            Ok(())
        } else {
            self.begin_downtime(resource)
        }
    }

    fn begin_downtime(&mut self, resource: usize) -> Result<(), SimError> {
        self.resources[resource].down += 1;
        let repair_done = self.sample_repair(resource);
        self.schedule(repair_done, Action::RepairDone { resource })
    }

    fn on_repair_done(&mut self, resource: usize) -> Result<(), SimError> {
        self.resources[resource].down -= 1;
        let next_strike = self.sample_failure_uptime(resource);
        self.schedule(next_strike, Action::FailureStrike { resource })?;
        self.try_dispatch(self.model.resources()[resource].station)
    }

    fn on_stats_reset(&mut self) -> Result<(), SimError> {
        self.total_time.reset();
        self.wait_time.reset();
        self.wip_integral.accumulate(self.in_system as f64, self.clock)?;
        self.wip_integral.reset(self.clock);
        for idx in 0..self.resources.len() {
            self.touch_resource_integrals(idx)?;
            let state = &mut self.resources[idx];
            state.busy_integral.reset(self.clock);
            state.ratio_integral.reset(self.clock);
            state.uses = 0;
        }
        Ok(())
    }

    fn finish(mut self, manifest: SeedManifest, end: f64) -> Result<ReplicationOutput, SimError> {
        let window = end - self.stats_start;
        let wip_integral = self.wip_integral.finalize(end)?;
        let mut busy_integrals = Vec::with_capacity(self.resources.len());
        let mut ratio_integrals = Vec::with_capacity(self.resources.len());
        for state in &mut self.resources {
            busy_integrals.push(state.busy_integral.finalize(end)?);
            ratio_integrals.push(state.ratio_integral.finalize(end)?);
        }

        let measured: Vec<usize> = self
            .model
            .resources()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.measured)
            .map(|(i, _)| i)
            .collect();

        let mut measures = Vec::with_capacity(self.model.measures().len());
        for spec in self.model.measures() {
            let value = match spec.stat {
                MeasureStat::EntityTotalTime => self.total_time.mean(),
                MeasureStat::EntityWaitTime => self.wait_time.mean(),
                MeasureStat::Wip => (window > 0.0).then(|| wip_integral / window),
                MeasureStat::UtilizationInstantaneous => {
                    if measured.is_empty() || window <= 0.0 {
                        None
                    } else {
                        Some(
                            measured.iter().map(|&i| ratio_integrals[i] / window).sum::<f64>()
                                / measured.len() as f64,
                        )
                    }
                }
                MeasureStat::UtilizationScheduled => {
                    let mut total = 0.0;
                    let mut defined = !measured.is_empty();
                    for &i in &measured {
                        let cap = capacity_time_integral(
                            &self.model.resources()[i].capacity,
                            self.stats_start,
                            end,
                        );
                        if cap <= 0.0 {
                            defined = false;
                            break;
                        }
                        total += busy_integrals[i] / cap;
                    }
                    defined.then(|| total / measured.len() as f64)
                }
                MeasureStat::ResourceCost => {
                    let mut cost = 0.0;
                    for &i in &measured {
                        let r = &self.model.resources()[i];
                        let cap = capacity_time_integral(&r.capacity, self.stats_start, end);
                        let busy_hours = busy_integrals[i] / 60.0;
                        let idle_hours = ((cap - busy_integrals[i]) / 60.0).max(0.0);
                        cost += busy_hours * r.cost.busy_per_hour
                            + idle_hours * r.cost.idle_per_hour
                            + self.resources[i].uses as f64 * r.cost.per_use;
                    }
                    (!measured.is_empty()).then_some(cost)
                }
            };
            measures.push((spec.name.clone(), value));
        }

        debug_assert_eq!(
            self.created,
            self.disposed + self.balked + self.in_system,
            "entity conservation"
        );
        Ok(ReplicationOutput {
            measures,
            manifest,
            horizon: end,
            created: self.created,
            disposed: self.disposed,
            balked: self.balked,
            in_system_at_end: self.in_system,
            draw_counts: self.streams.draw_counts(),
            events_processed: self.events_processed,
        })
    }
}

/// Integral of the scheduled capacity over [start, end], in unit-minutes.
fn capacity_time_integral(schedule: &[(f64, u32)], start: f64, end: f64) -> f64 {
    let mut total = 0.0;
    for (idx, &(from, units)) in schedule.iter().enumerate() {
        let to = schedule.get(idx + 1).map_or(f64::INFINITY, |&(t, _)| t);
        let lo = from.max(start);
        let hi = to.min(end);
        if hi > lo {
            total += units as f64 * (hi - lo);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests_support::{batch_model, zero_arrival_model};
    use crate::model::{mm1_config, ModelConfig};
    use crate::rng::{manifest_for_scenario, StreamSeed, VrtScenario};

    fn crn_manifest(model: &Model, seed: u64, rep: u64) -> SeedManifest {
        manifest_for_scenario(model.randomness_sources(), VrtScenario::Crn, StreamSeed(seed), rep)
            .unwrap()
    }

    #[test]
    fn calendar_fifo_tie_break() {
        let mut cal = EventCalendar::new();
        cal.schedule(Event { fire_time: 5.0, action: Action::Arrival }).unwrap();
        cal.schedule(Event {
            fire_time: 5.0,
            action: Action::StatsReset,
        })
        .unwrap();
        assert_eq!(cal.pop().unwrap().action, Action::Arrival);
        assert_eq!(cal.pop().unwrap().action, Action::StatsReset);
    }

    #[test]
    fn calendar_time_order() {
        let mut cal = EventCalendar::new();
        cal.schedule(Event { fire_time: 5.0, action: Action::Arrival }).unwrap();
        cal.schedule(Event {
            fire_time: 3.0,
            action: Action::StatsReset,
        })
        .unwrap();
        let first = cal.pop().unwrap();
        assert_eq!(first.fire_time, 3.0);
        assert_eq!(cal.pop().unwrap().fire_time, 5.0);
    }

    #[test]
    fn calendar_rejects_past_events() {
        let mut cal = EventCalendar::new();
        cal.schedule(Event { fire_time: 4.0, action: Action::Arrival }).unwrap();
        cal.pop().unwrap();
        let err = cal
            .schedule(Event { fire_time: 3.0, action: Action::Arrival })
            .unwrap_err();
        assert!(err.to_string().contains("causality violation"));
    }

    #[test]
    fn time_weighted_rectangles() {
        let mut acc = TimeWeighted::new(0.0, 1.0);
        acc.accumulate(0.0, 2.0).unwrap();
        let integral = acc.finalize(4.0).unwrap();
        assert_eq!(integral / 4.0, 0.5);
    }

    #[test]
    fn time_weighted_constant_identity() {
        let mut acc = TimeWeighted::new(0.0, 7.25);
        let integral = acc.finalize(10.0).unwrap();
        assert_eq!(integral / 10.0, 7.25);
    }

    #[test]
    fn time_weighted_hand_integral() {
        let mut acc = TimeWeighted::new(0.0, 2.0);
        acc.accumulate(4.0, 1.0).unwrap();
        let integral = acc.finalize(3.0).unwrap();
        assert!((integral / 3.0 - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn time_weighted_rejects_regression() {
        let mut acc = TimeWeighted::new(0.0, 1.0);
        acc.accumulate(2.0, 5.0).unwrap();
        assert!(acc.accumulate(3.0, 4.0).is_err());
    }

    #[test]
    fn tally_empty_is_undefined() {
        let tally = Tally::default();
        assert_eq!(tally.mean(), None);
    }

    #[test]
    fn fifo_service_hand_trace() {
        // Two arrivals at t=0, one server, constant 5-minute service.
        let model = batch_model(vec![0.0, 0.0], vec![(0.0, 1)], "CONST(5)");
        let manifest = crn_manifest(&model, 1, 0);
        let out = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
        assert_eq!(out.disposed, 2);
        // First entity waits 0 and leaves at 5; second waits 5, leaves at 10.
        assert_eq!(out.measure("Entity Total Time").unwrap(), Some(7.5));
        assert_eq!(out.measure("Entity Wait Time").unwrap(), Some(2.5));
    }

    #[test]
    fn two_servers_no_queueing() {
        let model = batch_model(vec![0.0, 0.0], vec![(0.0, 2)], "CONST(5)");
        let manifest = crn_manifest(&model, 1, 0);
        let out = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
        assert_eq!(out.measure("Entity Total Time").unwrap(), Some(5.0));
        assert_eq!(out.measure("Entity Wait Time").unwrap(), Some(0.0));
    }

    #[test]
    fn capacity_schedule_gates_service() {
        // No capacity until t=10, then one unit; arrival at 0, 2-minute job
        // departs at 12.
        let model = batch_model(vec![0.0], vec![(0.0, 0), (10.0, 1)], "CONST(2)");
        let manifest = crn_manifest(&model, 1, 0);
        let out = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
        assert_eq!(out.measure("Entity Total Time").unwrap(), Some(12.0));
        assert_eq!(out.measure("Entity Wait Time").unwrap(), Some(10.0));
    }

    #[test]
    fn zero_arrivals_empty_system() {
        let model = zero_arrival_model();
        let manifest = crn_manifest(&model, 1, 0);
        let out = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
        assert_eq!(out.created, 0);
        assert_eq!(out.disposed, 0);
        assert_eq!(out.measure("Utilization").unwrap(), Some(0.0));
        assert_eq!(out.measure("WIP").unwrap(), Some(0.0));
        assert_eq!(out.measure("Entity Total Time").unwrap(), None);
    }

    #[test]
    fn utilization_and_cost_hand_cases() {
        // Three back-to-back 40-minute jobs on a 240-minute horizon: the
        // server is busy 2h and idle 2h.
        let model = batch_model(vec![0.0, 0.0, 0.0], vec![(0.0, 1)], "CONST(40)");
        let manifest = crn_manifest(&model, 1, 0);
        let out = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
        assert_eq!(out.measure("Utilization").unwrap(), Some(0.5));
        // busy 2h * 10 + idle 2h * 2 + 3 uses * 1 = 27.
        assert_eq!(out.measure("Resource Cost").unwrap(), Some(27.0));
    }

    #[test]
    fn replication_is_deterministic() {
        let config: ModelConfig = mm1_config(2.0, 1.0, 5_000.0);
        let model = config.build().unwrap();
        let manifest = crn_manifest(&model, 42, 3);
        let a = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
        let b = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_source_is_unsynchronized() {
        let model = batch_model(vec![0.0], vec![(0.0, 1)], "CONST(1)");
        let manifest = manifest_for_scenario(
            &["arrivals".to_string()],
            VrtScenario::Crn,
            StreamSeed(1),
            0,
        )
        .unwrap();
        let err = run_replication(&model, &manifest, &RunOptions::default()).unwrap_err();
        assert!(err.to_string().contains("unsynchronized source"));
    }

    #[test]
    fn event_budget_guard() {
        let config = mm1_config(2.0, 1.0, 50_000.0);
        let model = config.build().unwrap();
        let manifest = crn_manifest(&model, 7, 0);
        let options = RunOptions {
            max_events: 100,
            ..RunOptions::default()
        };
        let err = run_replication(&model, &manifest, &options).unwrap_err();
        assert!(err.to_string().contains("runaway model"));
    }

    #[test]
    fn mm1_matches_queueing_theory() {
        // M/M/1 with lambda = 0.5/min, mu = 1/min: rho = 0.5, Wq = 1 minute.
        let config = mm1_config(2.0, 1.0, 50_000.0);
        let model = config.build().unwrap();
        let mut utils = Vec::new();
        let mut waits = Vec::new();
        for rep in 0..4 {
            let manifest = crn_manifest(&model, 97, rep);
            let out = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
            utils.push(out.measure("Server Utilization").unwrap().unwrap());
            waits.push(out.measure("Mean Queue Wait").unwrap().unwrap());
        }
        let mean_util = utils.iter().sum::<f64>() / utils.len() as f64;
        let mean_wait = waits.iter().sum::<f64>() / waits.len() as f64;
        assert!((mean_util - 0.5).abs() < 0.02, "{mean_util}");
        assert!((mean_wait - 1.0).abs() < 0.1, "{mean_wait}");
    }

    #[test]
    fn conservation_holds_at_horizon_cut() {
        let config = mm1_config(2.0, 1.0, 2_000.0);
        let model = config.build().unwrap();
        for rep in 0..5 {
            let manifest = crn_manifest(&model, 11, rep);
            let out = run_replication(&model, &manifest, &RunOptions::default()).unwrap();
            assert_eq!(out.created, out.disposed + out.balked + out.in_system_at_end);
        }
    }

    #[test]
    fn warm_up_resets_statistics() {
        let model = batch_model(vec![0.0, 0.0], vec![(0.0, 1)], "CONST(5)");
        let manifest = crn_manifest(&model, 1, 0);
        let options = RunOptions {
            warm_up: 6.0,
            ..RunOptions::default()
        };
        let out = run_replication(&model, &manifest, &options).unwrap();
        // Only the second entity (departing at t=10) lands after the reset.
        assert_eq!(out.measure("Entity Total Time").unwrap(), Some(10.0));
    }

    #[test]
    fn capacity_integral_respects_window() {
        let schedule = vec![(0.0, 2), (10.0, 0), (20.0, 1)];
        assert_eq!(capacity_time_integral(&schedule, 0.0, 30.0), 30.0);
        assert_eq!(capacity_time_integral(&schedule, 5.0, 25.0), 15.0);
        assert_eq!(capacity_time_integral(&schedule, 12.0, 18.0), 0.0);
    }
}
