//! One client session, independent of the transport.
//!
//! Client messages only queue work; queued commands and mode switches are
//! applied together at the start of the next [`Session::tick`], so nothing
//! ever lands mid-tick.

use std::path::PathBuf;

use shadowcue_core::sim::{
    Command, ControlMode, Metrics, Scenario, ScenarioFile, Simulation, TickRecord,
};

use crate::protocol::{
    decode_client, ClientBody, ClientMessage, ErrorCode, ServerBody, ServerMessage, SessionInfo,
    PROTOCOL_VERSION,
};

#[derive(Debug, Clone)]
pub struct SessionConfig {
    /// Directory holding the `<name>.toml` presets; also the base for
    /// relative environment paths in inline scenarios.
    pub presets: PathBuf,
    /// Overrides every scenario's tick rate when set.
    pub tick_rate: Option<f64>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            presets: shadowcue_core::benchmarks::scenario_dir(),
            tick_rate: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    Command(Command),
    Mode(ControlMode),
}

pub struct Session {
    id: String,
    config: SessionConfig,
    next_seq: u64,
    last_client_seq: Option<u64>,
    sim: Option<Simulation>,
    remaining: u64,
    records: Vec<TickRecord>,
    pending: Vec<Pending>,
    finished: bool,
}

impl Session {
    pub fn new(id: impl Into<String>, config: SessionConfig) -> Self {
        Self {
            id: id.into(),
            config,
            next_seq: 0,
            last_client_seq: None,
            sim: None,
            remaining: 0,
            records: Vec::new(),
            pending: Vec::new(),
            finished: false,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Tick rate of the running scenario.
    pub fn tick_rate(&self) -> Option<f64> {
        self.sim.as_ref().map(|s| s.scenario().tick_rate)
    }

    /// Initialized and still owes ticks or its final metrics.
    pub fn is_running(&self) -> bool {
        self.sim.is_some() && !self.finished
    }

    fn send(&mut self, body: ServerBody) -> ServerMessage {
        let msg = ServerMessage {
            v: PROTOCOL_VERSION,
            session: Some(self.id.clone()),
            seq: self.next_seq,
            body,
        };
        self.next_seq += 1;
        msg
    }

    pub fn error(&mut self, code: ErrorCode, detail: impl Into<String>) -> Vec<ServerMessage> {
        vec![self.send(ServerBody::Error {
            code,
            detail: detail.into(),
        })]
    }

    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match decode_client(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => self.error(ErrorCode::Malformed, e.to_string()),
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        if msg.v != PROTOCOL_VERSION {
            return self.error(
                ErrorCode::UnsupportedVersion,
                format!(
                    "protocol version {} is not supported, expected {PROTOCOL_VERSION}",
                    msg.v
                ),
            );
        }
        if let Some(s) = &msg.session {
            if *s != self.id {
                let detail = format!("message for session {s} sent to {}", self.id);
                return self.error(ErrorCode::WrongSession, detail);
            }
        }
        if let Some(last) = self.last_client_seq {
            if msg.seq <= last {
                return self.error(
                    ErrorCode::OutOfOrder,
                    format!("seq {} after {last}", msg.seq),
                );
            }
        }
        self.last_client_seq = Some(msg.seq);

        match msg.body {
            ClientBody::Init { preset, scenario } => self.init(preset, scenario),
            ClientBody::Command(c) => self.enqueue(Pending::Command(c)),
            ClientBody::Mode { mode } => self.enqueue(Pending::Mode(mode)),
        }
    }

    fn enqueue(&mut self, p: Pending) -> Vec<ServerMessage> {
        if self.sim.is_none() {
            return self.error(ErrorCode::NotInitialized, "send init first");
        }
        self.pending.push(p);
        Vec::new()
    }

    fn load(
        &self,
        preset: Option<String>,
        file: Option<Box<ScenarioFile>>,
    ) -> Result<Scenario, String> {
        let mut scenario = match (preset, file) {
            (Some(name), None) => {
                if name.is_empty()
                    || !name
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                {
                    return Err(format!("bad preset name {name:?}"));
                }
                Scenario::load(self.config.presets.join(format!("{name}.toml")))
                    .map_err(|e| e.to_string())?
            }
            (None, Some(file)) => file
                .into_scenario(Some(&self.config.presets))
                .map_err(|e| e.to_string())?,
            _ => return Err("init needs exactly one of preset or scenario".into()),
        };
        if let Some(rate) = self.config.tick_rate {
            scenario.tick_rate = rate;
        }
        Ok(scenario)
    }

    fn init(
        &mut self,
        preset: Option<String>,
        file: Option<Box<ScenarioFile>>,
    ) -> Vec<ServerMessage> {
        if self.sim.is_some() {
            return self.error(
                ErrorCode::AlreadyInitialized,
                "session already has a scenario",
            );
        }
        let sim = match self
            .load(preset, file)
            .and_then(|s| Simulation::new(s).map_err(|e| e.to_string()))
        {
            Ok(sim) => sim,
            Err(detail) => return self.error(ErrorCode::InvalidScenario, detail),
        };
        let s = sim.scenario();
        let info = SessionInfo {
            scenario: s.name.clone(),
            tick_rate: s.tick_rate,
            ticks: s.tick_count(),
            mode: sim.control_mode(),
            frame: s.frame,
            robot: s.robot,
        };
        self.remaining = info.ticks;
        self.sim = Some(sim);
        vec![self.send(ServerBody::Init(info))]
    }

    /// Applies queued messages, advances one tick and reports it. The tick
    /// after the last one carries the run's metrics instead.
    pub fn tick(&mut self) -> Vec<ServerMessage> {
        if !self.is_running() {
            return Vec::new();
        }
        if self.remaining == 0 {
            self.finished = true;
            let metrics = Metrics::from_records(&self.records);
            return vec![self.send(ServerBody::Metrics { metrics })];
        }
        let sim = self.sim.as_mut().expect("running session has a simulation");
        for p in self.pending.drain(..) {
            match p {
                Pending::Command(c) => sim.command(c),
                Pending::Mode(m) => sim.set_control_mode(m),
            }
        }
        match sim.step() {
            Ok(record) => {
                self.remaining -= 1;
                self.records.push(record.clone());
                vec![self.send(ServerBody::Tick {
                    record: Box::new(record),
                })]
            }
            Err(e) => {
                self.finished = true;
                self.error(ErrorCode::Runtime, e.to_string())
            }
        }
    }
}
