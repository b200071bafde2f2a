//! Line-delimited JSON protocol for agents running outside the harness.
//!
//! ```text
//! harness -> {"type":"init","game_id":"g0","actions":["up","down"],...}
//! harness -> {"type":"obs","tick":0,"phase":"learn",...}
//! agent   -> {"type":"switch"}
//! harness -> {"type":"obs","tick":0,"phase":"eval",...}
//! agent   -> {"type":"act","action":"up"}
//! ...
//! harness -> {"type":"result","v":0.5,"switched":true,"episodes":3}
//! ```
//!
//! Every `obs` is answered by exactly one `act`, `switch` or `pass`.

mod external;
mod message;
mod record;

pub use external::{ExternalAgent, ExternalConfig, RATE_ENV};
pub use message::{decode, encode, ErrorCode, Message, ProtocolError};
pub use record::Recorder;
