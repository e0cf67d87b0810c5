//! Session wire messages.
//!
//! Every message is one JSON object per WebSocket text frame:
//!
//! ```json
//! {"v": 1, "session": "s1", "seq": 4, "type": "command", "speed": 0.5}
//! ```
//!
//! `type` selects the body; the body's fields sit next to the envelope
//! fields. Angles on the wire are radians, except inside an inline scenario,
//! which uses the scenario file schema.

use serde::{Deserialize, Serialize};
use shadowcue_core::geometry::FrameConfig;
use shadowcue_core::projection::RobotGeometry;
use shadowcue_core::sim::{Command, ControlMode, Metrics, ScenarioFile, TickRecord};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub v: u32,
    /// Assigned by the server on connect. Clients may omit it on `init`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    pub seq: u64,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientBody {
    /// Start the session from a bundled preset or an inline scenario.
    Init {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scenario: Option<Box<ScenarioFile>>,
    },
    Command(Command),
    Mode {
        mode: ControlMode,
    },
}

/// Reply to `init`: what the client needs to draw the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub scenario: String,
    pub tick_rate: f64,
    /// Ticks the run will emit before its `metrics` message.
    pub ticks: u64,
    pub mode: ControlMode,
    pub frame: FrameConfig,
    pub robot: RobotGeometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerBody {
    Init(SessionInfo),
    Tick { record: Box<TickRecord> },
    Metrics { metrics: Metrics },
    Error { code: ErrorCode, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not JSON, or not a known message.
    Malformed,
    UnsupportedVersion,
    /// `session` does not name this connection's session.
    WrongSession,
    /// `seq` did not increase.
    OutOfOrder,
    NotInitialized,
    AlreadyInitialized,
    InvalidScenario,
    /// The simulation failed mid-run; ticking stops.
    Runtime,
}

pub type ClientMessage = Envelope<ClientBody>;
pub type ServerMessage = Envelope<ServerBody>;

pub fn encode<T: Serialize>(msg: &Envelope<T>) -> String {
    serde_json::to_string(msg).expect("messages always serialize")
}

pub fn decode_client(text: &str) -> Result<ClientMessage, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn decode_server(text: &str) -> Result<ServerMessage, serde_json::Error> {
    serde_json::from_str(text)
}
