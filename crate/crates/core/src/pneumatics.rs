//! Passive bi-state valves and two-valve jamming pouches.
//!
//! Pressures are gauge pascals. The beam interior is a boundary condition
//! held by the regulator; the atmosphere is 0. Each pouch has an inner valve
//! (beam → pouch) and an outer valve (pouch → atmosphere). An unheld valve
//! whose ball sees flow is pushed into an O-ring and seals; the carriage
//! electromagnet pulls the ball free and holds the valve open.
//!
//! A pouch vented to atmosphere is squeezed by the beam pressure and its
//! layers jam. A pouch equalized with the beam is compliant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::script::{Action, ActionScript, ValveRole};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PneumaticError {
    #[error("unknown valve: pouch {pouch} {role:?}")]
    UnknownValve { pouch: usize, role: ValveRole },
    #[error("magnet already holding pouch {held_pouch} {held_role:?}; release it first")]
    MagnetBusy { held_pouch: usize, held_role: ValveRole },
    #[error("pouch {0} is not everted")]
    NotEverted(usize),
    #[error("pouch index {index} out of range ({count} pouches)")]
    OutOfRange { index: usize, count: usize },
}

/// Pressure node in the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Beam,
    Pouch(usize),
    Atmosphere,
}

/// Position of the magnetic ball.
///
/// `SealedTowardB` means the ball sits in the O-ring on the port-B side,
/// which is where flow from A to B pushes it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ball {
    Loose,
    SealedTowardA,
    SealedTowardB,
}

impl Ball {
    pub fn is_sealed(self) -> bool {
        self != Ball::Loose
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValveId {
    pub pouch: usize,
    pub role: ValveRole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Valve {
    pub id: ValveId,
    pub port_a: Node,
    pub port_b: Node,
    pub ball: Ball,
    pub magnet_held: bool,
    pub position_m: f64,
}

impl Valve {
    fn new(pouch: usize, role: ValveRole, position_m: f64) -> Self {
        let (port_a, port_b) = match role {
            ValveRole::Inner => (Node::Beam, Node::Pouch(pouch)),
            ValveRole::Outer => (Node::Pouch(pouch), Node::Atmosphere),
        };
        Valve {
            id: ValveId { pouch, role },
            port_a,
            port_b,
            ball: Ball::Loose,
            magnet_held: false,
            position_m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pouch {
    pub index: usize,
    pub inner_valve: Valve,
    pub outer_valve: Valve,
    pub pressure_pa: f64,
    pub span: (f64, f64),
    pub everted: bool,
}

impl Pouch {
    pub fn valve(&self, role: ValveRole) -> &Valve {
        match role {
            ValveRole::Inner => &self.inner_valve,
            ValveRole::Outer => &self.outer_valve,
        }
    }

    fn valve_mut(&mut self, role: ValveRole) -> &mut Valve {
        match role {
            ValveRole::Inner => &mut self.inner_valve,
            ValveRole::Outer => &mut self.outer_valve,
        }
    }
}

/// Jam status of an everted pouch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PouchState {
    Jammed,
    Compliant,
    Transitional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettleMode {
    /// Held-open paths equalize in zero time.
    Instantaneous,
    /// Held-open paths relax exponentially with `vent_time_constant_s`.
    FirstOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PneumaticParams {
    pub seal_threshold_pa: f64,
    pub vent_time_constant_s: f64,
    pub mode: SettleMode,
    pub jam_fraction: f64,
    /// How close the carriage must be to a valve to hold it.
    pub magnet_range_m: f64,
}

impl Default for PneumaticParams {
    fn default() -> Self {
        Self {
            seal_threshold_pa: 50.0,
            vent_time_constant_s: 1.0,
            mode: SettleMode::Instantaneous,
            jam_fraction: 0.1,
            magnet_range_m: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PneumaticEventKind {
    ValveSealed,
    ValveOpened,
    PouchEqualized,
    PouchVented,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PneumaticEvent {
    pub kind: PneumaticEventKind,
    pub pouch: usize,
    pub role: Option<ValveRole>,
    pub pressure_pa: f64,
}

/// Newline-delimited event trace row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time_s: f64,
    pub event_kind: PneumaticEventKind,
    pub pouch_index: usize,
    pub valve_role: Option<ValveRole>,
    pub pressure_pa: f64,
}

impl EventRecord {
    pub fn new(time_s: f64, ev: &PneumaticEvent) -> Self {
        EventRecord {
            time_s,
            event_kind: ev.kind,
            pouch_index: ev.pouch,
            valve_role: ev.role,
            pressure_pa: ev.pressure_pa,
        }
    }
}

/// Serialize records one JSON object per line.
pub fn write_event_trace<W: std::io::Write>(mut w: W, records: &[EventRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PneumaticNetwork {
    pub beam_pressure_pa: f64,
    pub pouches: Vec<Pouch>,
    pub params: PneumaticParams,
}

impl PneumaticNetwork {
    /// Pouches tiling `length_m`, all vented (jammed) with settled valves.
    /// The first `everted_count` pouches are everted.
    pub fn new(
        beam_pressure_pa: f64,
        length_m: f64,
        num_pouches: usize,
        everted_count: usize,
        params: PneumaticParams,
    ) -> Self {
        let pitch = length_m / num_pouches as f64;
        let pouches = (0..num_pouches)
            .map(|i| {
                let x0 = i as f64 * pitch;
                Pouch {
                    index: i,
                    inner_valve: Valve::new(i, ValveRole::Inner, x0 + pitch / 3.0),
                    outer_valve: Valve::new(i, ValveRole::Outer, x0 + 2.0 * pitch / 3.0),
                    pressure_pa: 0.0,
                    span: (x0, x0 + pitch),
                    everted: i < everted_count,
                }
            })
            .collect();
        let mut net = PneumaticNetwork {
            beam_pressure_pa,
            pouches,
            params,
        };
        net.settle(0.0);
        net
    }

    pub fn pouch(&self, index: usize) -> Result<&Pouch, PneumaticError> {
        self.pouches.get(index).ok_or(PneumaticError::OutOfRange {
            index,
            count: self.pouches.len(),
        })
    }

    pub fn valve(&self, id: ValveId) -> Result<&Valve, PneumaticError> {
        self.pouches
            .get(id.pouch)
            .map(|p| p.valve(id.role))
            .ok_or(PneumaticError::UnknownValve {
                pouch: id.pouch,
                role: id.role,
            })
    }

    /// The valve currently held by the electromagnet, if any.
    pub fn held_valve(&self) -> Option<ValveId> {
        self.pouches.iter().find_map(|p| {
            [&p.inner_valve, &p.outer_valve]
                .into_iter()
                .find(|v| v.magnet_held)
                .map(|v| v.id)
        })
    }

    /// Hold or release a valve with the carriage magnet.
    ///
    /// Holding pulls a sealed ball off its O-ring. Only one valve can be
    /// held at a time.
    pub fn set_magnet(&mut self, id: ValveId, held: bool) -> Result<(), PneumaticError> {
        self.valve(id)?;
        if held {
            if let Some(h) = self.held_valve() {
                if h != id {
                    return Err(PneumaticError::MagnetBusy {
                        held_pouch: h.pouch,
                        held_role: h.role,
                    });
                }
            }
        }
        let v = self.pouches[id.pouch].valve_mut(id.role);
        v.magnet_held = held;
        if held {
            v.ball = Ball::Loose;
        }
        Ok(())
    }

    fn node_pressure(&self, node: Node) -> f64 {
        match node {
            Node::Beam => self.beam_pressure_pa,
            Node::Atmosphere => 0.0,
            Node::Pouch(i) => self.pouches[i].pressure_pa,
        }
    }

    fn gradient(&self, v: &Valve) -> f64 {
        self.node_pressure(v.port_a) - self.node_pressure(v.port_b)
    }

    /// Apply a new regulator setpoint. Pouches above the new beam pressure
    /// bleed back into the beam until equal.
    pub fn set_beam_pressure(&mut self, pressure_pa: f64) -> Vec<PneumaticEvent> {
        self.beam_pressure_pa = pressure_pa;
        let mut events = Vec::new();
        for p in &mut self.pouches {
            if p.pressure_pa > pressure_pa {
                p.pressure_pa = pressure_pa;
                events.push(PneumaticEvent {
                    kind: PneumaticEventKind::PouchEqualized,
                    pouch: p.index,
                    role: None,
                    pressure_pa,
                });
            }
        }
        events.extend(self.settle(0.0));
        events
    }

    /// Advance the network by `dt` seconds and return what happened.
    ///
    /// Held valves pass flow. In `Instantaneous` mode the pouch jumps to the
    /// source pressure; in `FirstOrder` mode it relaxes toward it with the
    /// vent time constant (`dt` of zero only updates valve seals). Unheld
    /// valves seal as soon as they see a gradient above the threshold and
    /// unseal when the gradient disappears.
    pub fn settle(&mut self, dt: f64) -> Vec<PneumaticEvent> {
        let mut events = Vec::new();
        let beam = self.beam_pressure_pa;
        let thr = self.params.seal_threshold_pa;
        for i in 0..self.pouches.len() {
            let before = self.pouches[i].pressure_pa;
            let source = {
                let p = &self.pouches[i];
                if p.inner_valve.magnet_held {
                    Some(beam)
                } else if p.outer_valve.magnet_held {
                    Some(0.0)
                } else {
                    None
                }
            };
            if let Some(target) = source {
                let next = match self.params.mode {
                    SettleMode::Instantaneous => target,
                    SettleMode::FirstOrder => {
                        let tau = self.params.vent_time_constant_s;
                        let relax = if tau > 0.0 { 1.0 - (-dt / tau).exp() } else { 1.0 };
                        before + (target - before) * relax
                    }
                };
                self.pouches[i].pressure_pa = next.clamp(0.0, beam.max(0.0));
            }
            let after = self.pouches[i].pressure_pa;
            if after != before {
                if (after - beam).abs() <= thr && (before - beam).abs() > thr {
                    events.push(PneumaticEvent {
                        kind: PneumaticEventKind::PouchEqualized,
                        pouch: i,
                        role: None,
                        pressure_pa: after,
                    });
                } else if after <= thr && before > thr {
                    events.push(PneumaticEvent {
                        kind: PneumaticEventKind::PouchVented,
                        pouch: i,
                        role: None,
                        pressure_pa: after,
                    });
                }
            }
            for role in [ValveRole::Inner, ValveRole::Outer] {
                let v = self.pouches[i].valve(role);
                if v.magnet_held {
                    continue;
                }
                let dp = self.gradient(v);
                let ball = if dp.abs() <= thr {
                    Ball::Loose
                } else if dp > 0.0 {
                    Ball::SealedTowardB
                } else {
                    Ball::SealedTowardA
                };
                let old = v.ball;
                let new = ball;
                if new != old {
                    let kind = if new.is_sealed() {
                        PneumaticEventKind::ValveSealed
                    } else {
                        PneumaticEventKind::ValveOpened
                    };
                    events.push(PneumaticEvent {
                        kind,
                        pouch: i,
                        role: Some(role),
                        pressure_pa: after,
                    });
                    self.pouches[i].valve_mut(role).ball = new;
                }
            }
        }
        events
    }

    /// Ternary jam status of an everted pouch.
    pub fn pouch_state(&self, index: usize) -> Result<PouchState, PneumaticError> {
        let p = self.pouch(index)?;
        pouch_state(p, self.beam_pressure_pa, self.params.jam_fraction)
    }

    /// Everted pouches whose valves would leak: loose, unheld, under gradient.
    pub fn loose_under_gradient(&self) -> Vec<ValveId> {
        let thr = self.params.seal_threshold_pa;
        self.pouches
            .iter()
            .flat_map(|p| [&p.inner_valve, &p.outer_valve])
            .filter(|v| !v.magnet_held && v.ball == Ball::Loose && self.gradient(v).abs() > thr)
            .map(|v| v.id)
            .collect()
    }

    /// Dwell that lets a held path settle into the jam or compliant band.
    pub fn settle_dwell(&self, carriage_dwell_s: f64) -> f64 {
        match self.params.mode {
            SettleMode::Instantaneous => carriage_dwell_s,
            SettleMode::FirstOrder => carriage_dwell_s.max(5.0 * self.params.vent_time_constant_s),
        }
    }
}

/// Jammed at or below `jam_fraction` of beam pressure, compliant at or above
/// `1 - jam_fraction`, transitional in between.
pub fn pouch_state(pouch: &Pouch, beam_pressure_pa: f64, jam_fraction: f64) -> Result<PouchState, PneumaticError> {
    if !pouch.everted {
        return Err(PneumaticError::NotEverted(pouch.index));
    }
    let p = pouch.pressure_pa;
    Ok(if p <= jam_fraction * beam_pressure_pa {
        PouchState::Jammed
    } else if p >= (1.0 - jam_fraction) * beam_pressure_pa {
        PouchState::Compliant
    } else {
        PouchState::Transitional
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JamTarget {
    Jam,
    Unjam,
}

impl JamTarget {
    /// Valve that connects the pouch to the pressure the target needs.
    pub fn valve_role(self) -> ValveRole {
        match self {
            JamTarget::Jam => ValveRole::Outer,
            JamTarget::Unjam => ValveRole::Inner,
        }
    }

    pub fn state(self) -> PouchState {
        match self {
            JamTarget::Jam => PouchState::Jammed,
            JamTarget::Unjam => PouchState::Compliant,
        }
    }
}

/// Move to the valve, hold it, dwell until settled, release.
pub fn canonical_sequence(
    network: &PneumaticNetwork,
    pouch_index: usize,
    target: JamTarget,
    carriage_dwell_s: f64,
) -> Result<ActionScript, PneumaticError> {
    let pouch = network.pouch(pouch_index)?;
    if !pouch.everted {
        return Err(PneumaticError::NotEverted(pouch_index));
    }
    let role = target.valve_role();
    Ok(vec![
        Action::MoveCarriage {
            x_m: pouch.valve(role).position_m,
        },
        Action::HoldMagnet {
            pouch: pouch_index,
            valve: role,
        },
        Action::Dwell {
            seconds: network.settle_dwell(carriage_dwell_s),
        },
        Action::ReleaseMagnet,
    ])
}
