//! External-watchdog state machine and wire protocol.
//!
//! The watchdog mirrors a small companion board wired to the DUT's
//! serial console and power button: it is told when a run starts and
//! how long it nominally takes, pings the DUT for responsiveness, and
//! power-cycles it when the run overruns its timeout or pings stop
//! answering. Once the DUT is back up it signals the orchestrator to
//! resume.
//!
//! The state machine is purely event-driven: `on_message` and `tick`
//! take a state and return the successor plus the actions to perform.
//! It owns no campaign knowledge; resumption content lives in the
//! orchestrator journal.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WatchdogError {
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("nominal duration must be positive")]
    NonPositiveDuration,
}

#[derive(Debug, Error, PartialEq)]
#[error("unparseable watchdog line: {0:?}")]
pub struct WireError(pub String);

/// Line-encoded protocol messages. ASCII, newline-terminated; the run
/// id is an opaque whitespace-free token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Start { run_id: String, nominal_ms: u64 },
    Done { run_id: String },
    Ping,
    Pong,
    PowerCycle,
    Booted,
    Resume,
}

impl Message {
    /// Bit-exact wire rendering, including the terminating newline.
    pub fn encode(&self) -> String {
        match self {
            Message::Start { run_id, nominal_ms } => format!("START {run_id} {nominal_ms}\n"),
            Message::Done { run_id } => format!("DONE {run_id}\n"),
            Message::Ping => "PING\n".to_string(),
            Message::Pong => "PONG\n".to_string(),
            Message::PowerCycle => "POWER_CYCLE\n".to_string(),
            Message::Booted => "BOOTED\n".to_string(),
            Message::Resume => "RESUME\n".to_string(),
        }
    }

    pub fn decode(line: &str) -> Result<Message, WireError> {
        let line = line.trim_end_matches(['\n', '\r']);
        let mut parts = line.split(' ');
        let msg = match parts.next() {
            Some("START") => {
                let run_id = parts.next().ok_or_else(|| WireError(line.into()))?;
                let nominal_ms = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| WireError(line.into()))?;
                Message::Start { run_id: run_id.to_string(), nominal_ms }
            }
            Some("DONE") => Message::Done {
                run_id: parts.next().ok_or_else(|| WireError(line.into()))?.to_string(),
            },
            Some("PING") => Message::Ping,
            Some("PONG") => Message::Pong,
            Some("POWER_CYCLE") => Message::PowerCycle,
            Some("BOOTED") => Message::Booted,
            Some("RESUME") => Message::Resume,
            _ => return Err(WireError(line.into())),
        };
        if parts.next().is_some() {
            return Err(WireError(line.into()));
        }
        Ok(msg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    /// A run is armed and being pinged against its deadline.
    Pinging,
    /// Power-cycle issued; transitioning to boot wait.
    Cycling,
    AwaitBoot,
}

/// Effects the surrounding transport must carry out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// Press the power button: hard-reset the DUT.
    PowerCycle,
    /// Tell the orchestrator the DUT is back up.
    SendResume,
    /// Answer an incoming PING.
    SendPong,
    Warn(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PingResult {
    Responsive,
    Unresponsive,
    /// No probe result this tick.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WatchdogState {
    pub phase: Phase,
    pub run_id: Option<String>,
    /// Absolute time the armed run times out; only set while Pinging.
    pub deadline_ms: Option<u64>,
    pub ping_interval_ms: u64,
    pub nominal_ms: Option<u64>,
}

/// Timeout for a run of the given nominal duration; default multiplier
/// is 2 (a run is declared hung once it exceeds twice its normal
/// execution time).
pub fn timeout_for(nominal_ms: u64, multiplier: u64) -> Result<u64, WatchdogError> {
    if nominal_ms == 0 {
        return Err(WatchdogError::NonPositiveDuration);
    }
    Ok(nominal_ms * multiplier)
}

pub const DEFAULT_TIMEOUT_MULTIPLIER: u64 = 2;
pub const DEFAULT_PING_INTERVAL_MS: u64 = 1_000;

impl WatchdogState {
    pub fn new(ping_interval_ms: u64) -> Self {
        WatchdogState {
            phase: Phase::Idle,
            run_id: None,
            deadline_ms: None,
            ping_interval_ms,
            nominal_ms: None,
        }
    }

    pub fn on_message(
        &self,
        msg: &Message,
        now_ms: u64,
        timeout_multiplier: u64,
    ) -> Result<(WatchdogState, Vec<Action>), WatchdogError> {
        let mut next = self.clone();
        let mut actions = Vec::new();
        match msg {
            Message::Start { run_id, nominal_ms } => {
                if self.phase != Phase::Idle {
                    return Err(WatchdogError::ProtocolViolation(format!(
                        "START {run_id} while {:?}",
                        self.phase
                    )));
                }
                let timeout = timeout_for(*nominal_ms, timeout_multiplier)?;
                next.phase = Phase::Pinging;
                next.run_id = Some(run_id.clone());
                next.nominal_ms = Some(*nominal_ms);
                next.deadline_ms = Some(now_ms + timeout);
            }
            Message::Done { run_id } => {
                if self.phase == Phase::Pinging && self.run_id.as_deref() == Some(run_id) {
                    next = WatchdogState::new(self.ping_interval_ms);
                } else {
                    // Stale or unexpected completion; ignore.
                    actions.push(Action::Warn(format!("ignoring DONE {run_id}")));
                }
            }
            Message::Booted => match self.phase {
                Phase::AwaitBoot | Phase::Cycling => {
                    next = WatchdogState::new(self.ping_interval_ms);
                    actions.push(Action::SendResume);
                }
                _ => actions.push(Action::Warn("ignoring BOOTED".into())),
            },
            Message::Ping => actions.push(Action::SendPong),
            Message::Pong => {}
            other => actions.push(Action::Warn(format!("ignoring {other:?}"))),
        }
        Ok((next, actions))
    }

    /// Periodic clock tick carrying the latest probe result. In
    /// Pinging, a failed probe or a reached deadline fires the
    /// power-cycle; a kernel self-reset observed as a reboot shows up
    /// as an unresponsive probe and takes the same path, earlier than
    /// the timeout would.
    pub fn tick(&self, now_ms: u64, ping: PingResult) -> (WatchdogState, Vec<Action>) {
        let mut next = self.clone();
        let mut actions = Vec::new();
        match self.phase {
            Phase::Idle => {}
            Phase::Pinging => {
                let timed_out = self.deadline_ms.is_some_and(|d| now_ms >= d);
                if ping == PingResult::Unresponsive || timed_out {
                    next.phase = Phase::Cycling;
                    next.deadline_ms = None;
                    actions.push(Action::PowerCycle);
                }
            }
            Phase::Cycling => {
                next.phase = Phase::AwaitBoot;
            }
            Phase::AwaitBoot => {
                if ping == PingResult::Responsive {
                    next = WatchdogState::new(self.ping_interval_ms);
                    actions.push(Action::SendResume);
                }
            }
        }
        (next, actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn start(run: &str, nominal_ms: u64) -> Message {
        Message::Start { run_id: run.into(), nominal_ms }
    }

    fn armed(run: &str, now: u64, nominal_ms: u64) -> WatchdogState {
        let (s, a) = WatchdogState::new(1000)
            .on_message(&start(run, nominal_ms), now, 2)
            .unwrap();
        assert!(a.is_empty());
        s
    }

    #[test]
    fn timeout_is_twice_nominal() {
        assert_eq!(timeout_for(10_000, 2).unwrap(), 20_000);
        assert_eq!(timeout_for(1, 2).unwrap(), 2);
        assert_eq!(timeout_for(0, 2), Err(WatchdogError::NonPositiveDuration));
    }

    #[test]
    fn start_arms_deadline() {
        let s = armed("r1", 0, 10_000);
        assert_eq!(s.phase, Phase::Pinging);
        assert_eq!(s.deadline_ms, Some(20_000));
        assert_eq!(s.run_id.as_deref(), Some("r1"));
    }

    #[test]
    fn done_returns_to_idle() {
        let s = armed("r1", 0, 10_000);
        let (s, a) = s.on_message(&Message::Done { run_id: "r1".into() }, 5_000, 2).unwrap();
        assert_eq!(s.phase, Phase::Idle);
        assert!(a.is_empty());
    }

    #[test]
    fn stale_done_is_ignored() {
        let s = armed("r2", 0, 10_000);
        let (s2, a) = s.on_message(&Message::Done { run_id: "r1".into() }, 5_000, 2).unwrap();
        assert_eq!(s2.phase, Phase::Pinging);
        assert!(matches!(a.as_slice(), [Action::Warn(_)]));
    }

    #[test]
    fn start_while_armed_is_a_protocol_violation() {
        let s = armed("r1", 0, 10_000);
        assert!(matches!(
            s.on_message(&start("r2", 5_000), 1_000, 2),
            Err(WatchdogError::ProtocolViolation(_))
        ));
    }

    #[test]
    fn deadline_tick_fires_power_cycle_exactly_once() {
        let mut s = armed("r1", 0, 10_000);
        let mut cycles = 0;
        for t in (1_000..=30_000).step_by(1_000) {
            let (next, actions) = s.tick(t, PingResult::Responsive);
            for a in &actions {
                if *a == Action::PowerCycle {
                    cycles += 1;
                    assert_eq!(t, 20_000, "cycle must fire exactly at the deadline");
                }
            }
            s = next;
        }
        assert_eq!(cycles, 1);
        // the responsive post-reboot pings walk Cycling -> AwaitBoot -> Idle
        assert_eq!(s.phase, Phase::Idle);
    }

    #[test]
    fn unresponsive_ping_cycles_before_deadline() {
        let s = armed("r1", 0, 10_000);
        let (s, a) = s.tick(3_000, PingResult::Unresponsive);
        assert_eq!(a, vec![Action::PowerCycle]);
        assert_eq!(s.phase, Phase::Cycling);
    }

    #[test]
    fn booted_resumes() {
        let s = armed("r1", 0, 10_000);
        let (s, _) = s.tick(3_000, PingResult::Unresponsive);
        let (s, _) = s.tick(4_000, PingResult::None);
        assert_eq!(s.phase, Phase::AwaitBoot);
        let (s, a) = s.on_message(&Message::Booted, 40_000, 2).unwrap();
        assert_eq!(s.phase, Phase::Idle);
        assert_eq!(a, vec![Action::SendResume]);
    }

    #[test]
    fn await_boot_responsive_tick_resumes() {
        let s = armed("r1", 0, 10_000);
        let (s, _) = s.tick(20_000, PingResult::None);
        let (s, _) = s.tick(21_000, PingResult::Unresponsive);
        assert_eq!(s.phase, Phase::AwaitBoot);
        let (s, _) = s.tick(22_000, PingResult::Unresponsive);
        assert_eq!(s.phase, Phase::AwaitBoot);
        let (s, a) = s.tick(51_000, PingResult::Responsive);
        assert_eq!(s.phase, Phase::Idle);
        assert_eq!(a, vec![Action::SendResume]);
    }

    #[test]
    fn quiet_tick_in_pinging_does_nothing() {
        let s = armed("r1", 0, 10_000);
        let (s2, a) = s.tick(5_000, PingResult::Responsive);
        assert!(a.is_empty());
        assert_eq!(s2, s);
    }

    #[test]
    fn ping_is_answered_with_pong() {
        let s = WatchdogState::new(1000);
        let (_, a) = s.on_message(&Message::Ping, 0, 2).unwrap();
        assert_eq!(a, vec![Action::SendPong]);
    }

    #[test]
    fn wire_round_trip() {
        let msgs = [
            start("r42", 10_000),
            Message::Done { run_id: "r42".into() },
            Message::Ping,
            Message::Pong,
            Message::PowerCycle,
            Message::Booted,
            Message::Resume,
        ];
        for m in msgs {
            let line = m.encode();
            assert!(line.ends_with('\n'));
            assert!(line.is_ascii());
            assert_eq!(Message::decode(&line).unwrap(), m);
        }
        assert_eq!(Message::encode(&start("r1", 5)), "START r1 5\n");
        assert!(Message::decode("NONSENSE\n").is_err());
        assert!(Message::decode("START r1\n").is_err());
    }
}
