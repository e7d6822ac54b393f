//! The stepped world: one robot, one carriage, one timeline.
//!
//! [`World::step`] applies one script action and returns the trace records
//! it produced. Jam/unjam macros expand through
//! [`canonical_sequence`](crate::pneumatics::canonical_sequence). Whenever a
//! pouch becomes jammed its joint locks at the current angle; when it
//! becomes compliant the joint unlocks.

pub mod experiment;
pub mod scenario;
pub mod trace;

use thiserror::Error;

use crate::carriage::{self, CarriageError, CarriagePose};
use crate::kinematics::{shape_of, BodyState, KinematicsError, PouchStrength, PullOutcome};
use crate::mechanics::{critical_moment, BeamSection, MomentModel};
use crate::pneumatics::{
    canonical_sequence, EventRecord, JamTarget, PneumaticError, PneumaticEvent, PneumaticNetwork, PouchState, ValveId,
};
use crate::script::{Action, ActionScript};

pub use scenario::{load_scenario, parse_action, RobotSpec, Scenario, ScenarioError};
pub use trace::{JointRecord, PouchStatus, Snapshot, Trace, TraceRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Pneumatic(#[from] PneumaticError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Carriage(#[from] CarriageError),
    #[error("carriage at {carriage_m} m is {distance_m} m from the pouch {pouch} {role:?} valve (range {range_m} m)")]
    OutOfMagnetRange {
        pouch: usize,
        role: crate::script::ValveRole,
        carriage_m: f64,
        distance_m: f64,
        range_m: f64,
    },
    #[error("moving to {target_m} m would drop the held valve at {valve_m} m; release the magnet first")]
    MagnetHeldWhileMoving { target_m: f64, valve_m: f64 },
}

impl EngineError {
    /// Action field the error is about, when there is one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            EngineError::Pneumatic(PneumaticError::NotEverted(_) | PneumaticError::OutOfRange { .. })
            | EngineError::OutOfMagnetRange { .. } => Some("pouch"),
            EngineError::Pneumatic(_) => Some("valve"),
            EngineError::Kinematics(_) => Some("length_m"),
            EngineError::Carriage(_) | EngineError::MagnetHeldWhileMoving { .. } => Some("x_m"),
            EngineError::Scenario(_) => None,
        }
    }
}

/// An engine error tagged with the script position that caused it.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("action {index} ({kind}): {source}")]
pub struct RunError {
    pub index: usize,
    pub kind: &'static str,
    #[source]
    pub source: EngineError,
}

/// Complete simulated state.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub spec: RobotSpec,
    pub network: PneumaticNetwork,
    pub body: BodyState,
    pub carriage: CarriagePose,
    pub clock_s: f64,
}

impl World {
    pub fn new(spec: RobotSpec) -> Result<Self, EngineError> {
        spec.validate()?;
        let body = BodyState::new(
            spec.everted_length(),
            spec.length_m,
            spec.num_pouches,
            spec.cable_offset(),
        )?;
        let network = PneumaticNetwork::new(
            spec.pressure_pa,
            spec.length_m,
            spec.num_pouches,
            body.growth.everted_pouches(),
            spec.pneumatics.clone(),
        );
        Ok(World {
            spec,
            network,
            body,
            carriage: CarriagePose { x_m: 0.0 },
            clock_s: 0.0,
        })
    }

    /// `None` for pouches that are not everted yet.
    pub fn pouch_states(&self) -> Vec<Option<PouchState>> {
        (0..self.network.pouches.len())
            .map(|i| self.network.pouch_state(i).ok())
            .collect()
    }

    /// Buckling strength of every everted pouch at the current pressure.
    pub fn strengths(&self) -> Vec<PouchStrength> {
        let model = MomentModel::new(self.network.beam_pressure_pa, self.spec.radius_m, &self.spec.mechanics);
        self.pouch_states()
            .into_iter()
            .enumerate()
            .map_while(|(i, s)| {
                s.map(|state| {
                    let jammed = state == PouchState::Jammed;
                    let span = self.network.pouches[i].span;
                    let section = BeamSection::new(span, jammed, self.spec.radius_m, &self.spec.mechanics);
                    PouchStrength {
                        jammed,
                        critical_moment_nm: critical_moment(&model, &section),
                    }
                })
            })
            .collect()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            time_s: self.clock_s,
            carriage_x_m: self.carriage.x_m,
            pressure_pa: self.network.beam_pressure_pa,
            everted_length_m: self.body.growth.everted_length_m,
            pouch_states: self.pouch_states().into_iter().map(PouchStatus::from).collect(),
            pouch_pressures_pa: self.network.pouches.iter().map(|p| p.pressure_pa).collect(),
            joints: self
                .body
                .chain
                .joints
                .iter()
                .map(|(&pouch, j)| JointRecord {
                    pouch,
                    angle_rad: j.angle,
                    locked: j.locked,
                })
                .collect(),
            left_retraction_m: self.body.left.retraction_m,
            right_retraction_m: self.body.right.retraction_m,
            chain: self.body.chain.clone(),
            shape: shape_of(&self.body.chain),
        }
    }

    /// Apply one action atomically: on error the world is unchanged.
    pub fn step(&mut self, index: usize, action: &Action) -> Result<Vec<TraceRecord>, EngineError> {
        scenario::validate_action(action, &self.spec, "action")?;
        let mut next = self.clone();
        let mut records = vec![TraceRecord::Action {
            time_s: next.clock_s,
            index,
            step: None,
            action: action.clone(),
        }];
        match *action {
            Action::JamPouch { pouch } | Action::UnjamPouch { pouch } => {
                let target = if matches!(action, Action::JamPouch { .. }) {
                    JamTarget::Jam
                } else {
                    JamTarget::Unjam
                };
                let expanded = canonical_sequence(&next.network, pouch, target, next.spec.carriage.dwell_s)?;
                for (k, prim) in expanded.iter().enumerate() {
                    records.push(TraceRecord::Action {
                        time_s: next.clock_s,
                        index,
                        step: Some(k),
                        action: prim.clone(),
                    });
                    next.primitive(prim, &mut records)?;
                }
            }
            _ => next.primitive(action, &mut records)?,
        }
        *self = next;
        Ok(records)
    }

    fn push_events(&self, events: Vec<PneumaticEvent>, records: &mut Vec<TraceRecord>) {
        records.extend(
            events
                .iter()
                .map(|e| TraceRecord::Pneumatic(EventRecord::new(self.clock_s, e))),
        );
    }

    /// Settle the network and lock or unlock joints whose pouch changed state.
    fn settle(&mut self, dt: f64, records: &mut Vec<TraceRecord>) -> Result<(), EngineError> {
        let before = self.pouch_states();
        let events = self.network.settle(dt);
        self.push_events(events, records);
        self.sync_joints(&before, records)
    }

    fn sync_joints(
        &mut self,
        before: &[Option<PouchState>],
        records: &mut Vec<TraceRecord>,
    ) -> Result<(), EngineError> {
        let after = self.pouch_states();
        for (i, (b, a)) in before.iter().zip(&after).enumerate() {
            if b == a {
                continue;
            }
            match a {
                Some(PouchState::Jammed) => {
                    self.body.lock_joint(i, PouchState::Jammed)?;
                    records.push(TraceRecord::JointLocked {
                        time_s: self.clock_s,
                        pouch_index: i,
                        angle_rad: self.body.chain.joint_angle(i),
                    });
                }
                Some(PouchState::Compliant) => {
                    self.body.unlock_joint(i);
                    records.push(TraceRecord::JointUnlocked {
                        time_s: self.clock_s,
                        pouch_index: i,
                        angle_rad: self.body.chain.joint_angle(i),
                    });
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn primitive(&mut self, action: &Action, records: &mut Vec<TraceRecord>) -> Result<(), EngineError> {
        match *action {
            Action::MoveCarriage { x_m } => {
                if let Some(held) = self.network.held_valve() {
                    let valve_m = self.network.valve(held)?.position_m;
                    if (valve_m - x_m).abs() > self.spec.pneumatics.magnet_range_m {
                        return Err(EngineError::MagnetHeldWhileMoving { target_m: x_m, valve_m });
                    }
                }
                let from_m = self.carriage.x_m;
                let t = carriage::advance(
                    &mut self.carriage,
                    x_m,
                    self.body.growth.everted_length_m,
                    &self.spec.carriage,
                    self.clock_s,
                )?;
                let travel_s = t - self.clock_s;
                self.clock_s = t;
                records.push(TraceRecord::CarriageLeg {
                    time_s: self.clock_s,
                    from_m,
                    to_m: x_m,
                    travel_s,
                });
                self.settle(travel_s, records)?;
            }
            Action::HoldMagnet { pouch, valve } => {
                let id = ValveId { pouch, role: valve };
                let p = self.network.pouch(pouch)?;
                if !p.everted {
                    return Err(PneumaticError::NotEverted(pouch).into());
                }
                let valve_m = p.valve(valve).position_m;
                let distance_m = (valve_m - self.carriage.x_m).abs();
                let range_m = self.spec.pneumatics.magnet_range_m;
                if distance_m > range_m {
                    return Err(EngineError::OutOfMagnetRange {
                        pouch,
                        role: valve,
                        carriage_m: self.carriage.x_m,
                        distance_m,
                        range_m,
                    });
                }
                self.network.set_magnet(id, true)?;
                self.settle(0.0, records)?;
            }
            Action::ReleaseMagnet => {
                if let Some(held) = self.network.held_valve() {
                    self.network.set_magnet(held, false)?;
                }
                self.settle(0.0, records)?;
            }
            Action::Dwell { seconds } => {
                self.clock_s += seconds;
                self.settle(seconds, records)?;
            }
            Action::PullCable { side, length_m } => {
                let strengths = self.strengths();
                let outcome =
                    self.body
                        .apply_pull(side, length_m, &strengths, self.spec.mechanics.tension_gain_n_per_m)?;
                match outcome {
                    PullOutcome::Buckle { pouch, angle, .. } => records.push(TraceRecord::Buckle {
                        time_s: self.clock_s,
                        pouch_index: pouch,
                        x_m: pouch as f64 * self.spec.pitch(),
                        angle_rad: angle,
                    }),
                    PullOutcome::Arc { bend } => records.push(TraceRecord::Arc {
                        time_s: self.clock_s,
                        bend_rad: bend,
                    }),
                    PullOutcome::Stored { .. } | PullOutcome::Unchanged => {}
                }
            }
            Action::ReleaseCable { side, length_m } => {
                self.body.release(side, length_m)?;
            }
            Action::Grow { length_m } => {
                let before = self.pouch_states();
                let new_pouches = self.body.grow(length_m)?;
                for &i in &new_pouches {
                    self.network.pouches[i].everted = true;
                }
                records.push(TraceRecord::Grown {
                    time_s: self.clock_s,
                    everted_length_m: self.body.growth.everted_length_m,
                    new_pouches,
                });
                let events = self.network.settle(0.0);
                self.push_events(events, records);
                // newly everted pouches appear with whatever state they carry
                let mut known = before;
                for (i, s) in self.pouch_states().into_iter().enumerate() {
                    if known[i].is_none() {
                        known[i] = s;
                    }
                }
                self.sync_joints(&known, records)?;
            }
            Action::SetPressure { pressure_pa } => {
                let before = self.pouch_states();
                let events = self.network.set_beam_pressure(pressure_pa);
                self.push_events(events, records);
                self.sync_joints(&before, records)?;
            }
            Action::JamPouch { .. } | Action::UnjamPouch { .. } => {
                unreachable!("macros are expanded by step")
            }
        }
        Ok(())
    }
}

/// Execute `script` from the initial state of `spec`.
///
/// The trace starts with an initial snapshot and has one snapshot after
/// every action.
pub fn run(spec: &RobotSpec, script: &[Action]) -> Result<Trace, RunError> {
    let mut world = World::new(spec.clone()).map_err(|source| RunError {
        index: 0,
        kind: "spec",
        source,
    })?;
    let mut trace = Trace::default();
    trace.records.push(TraceRecord::Snapshot {
        after_action: None,
        snapshot: world.snapshot(),
    });
    for (i, action) in script.iter().enumerate() {
        let recs = world.step(i, action).map_err(|source| RunError {
            index: i,
            kind: action.kind(),
            source,
        })?;
        trace.records.extend(recs);
        trace.records.push(TraceRecord::Snapshot {
            after_action: Some(i),
            snapshot: world.snapshot(),
        });
    }
    Ok(trace)
}

/// Expand macros into the primitives the engine would execute.
pub fn expand_script(spec: &RobotSpec, script: &[Action]) -> Result<ActionScript, RunError> {
    let mut world = World::new(spec.clone()).map_err(|source| RunError {
        index: 0,
        kind: "spec",
        source,
    })?;
    let mut flat = Vec::new();
    for (i, action) in script.iter().enumerate() {
        let recs = world.step(i, action).map_err(|source| RunError {
            index: i,
            kind: action.kind(),
            source,
        })?;
        let prims: Vec<_> = recs
            .into_iter()
            .filter_map(|r| match r {
                TraceRecord::Action { step, action, .. } if step.is_some() || !action.is_macro() => Some(action),
                _ => None,
            })
            .collect();
        flat.extend(prims);
    }
    Ok(flat)
}
