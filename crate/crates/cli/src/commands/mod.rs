pub mod calibrate;
pub mod cost;
pub mod simulate;
pub mod skr;
pub mod sweep;

/// Whether a command completed cleanly or tripped a security monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Alarm,
}

pub type CmdResult = Result<Outcome, Box<dyn std::error::Error>>;
