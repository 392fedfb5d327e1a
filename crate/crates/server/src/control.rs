//! The control loop: one thread owns the sequencer and the simulated arm.
//! Network code talks to it only through the command queue and the
//! snapshot hub.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{mpsc, Arc};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use tokio::sync::oneshot;

use choreo_core::robot_model::forward_kinematics;
use choreo_core::sequencer::{SeqEvent, Show};
use choreo_core::sim::{ForceScripts, SimConfig, SimSession};

use crate::hub::SnapshotHub;
use crate::protocol::{Ack, CommandKind, OperatorCommand, StateSnapshot};

pub const DEFAULT_SNAPSHOT_HZ: f64 = 30.0;
const DEDUP_MEMORY: usize = 4096;

fn event_for(kind: CommandKind) -> SeqEvent {
    match kind {
        CommandKind::Start => SeqEvent::Start,
        CommandKind::Pause => SeqEvent::Pause,
        CommandKind::Next => SeqEvent::Next,
        CommandKind::ResetStop => SeqEvent::Reset,
        CommandKind::EnterTeach => SeqEvent::EnterTeach,
        CommandKind::ExitTeach => SeqEvent::ExitTeach,
        CommandKind::SimulateTap => SeqEvent::TapDetected,
    }
}

/// Sequencer plus simulator, stepped by the caller.
pub struct ControlCore {
    session: SimSession,
    seen: HashMap<(String, String), Ack>,
    order: VecDeque<(String, String)>,
    published: u64,
}

impl ControlCore {
    pub fn new(show: Arc<Show>, scripts: ForceScripts, sim: SimConfig) -> Self {
        ControlCore { session: SimSession::new(show, scripts, sim), seen: HashMap::new(), order: VecDeque::new(), published: 0 }
    }

    pub fn session(&self) -> &SimSession {
        &self.session
    }

    pub fn dt(&self) -> f64 {
        self.session.robot().dt()
    }

    pub fn clock(&self) -> f64 {
        self.session.robot().clock()
    }

    /// Applies an operator command once per `(issuer, id)`.
    pub fn handle(&mut self, cmd: &OperatorCommand) -> Ack {
        let key = (cmd.issuer.clone(), cmd.id.clone());
        if let Some(prev) = self.seen.get(&key) {
            return Ack { duplicate: true, ..prev.clone() };
        }
        let out = self.session.apply(event_for(cmd.command));
        let ack = Ack {
            id: cmd.id.clone(),
            issuer: cmd.issuer.clone(),
            command: cmd.command,
            ok: out.rejected.is_none(),
            phase: self.session.state().phase().name().to_string(),
            reason: out.rejected,
            duplicate: false,
        };
        if self.order.len() == DEDUP_MEMORY {
            if let Some(old) = self.order.pop_front() {
                self.seen.remove(&old);
            }
        }
        self.order.push_back(key.clone());
        self.seen.insert(key, ack.clone());
        ack
    }

    pub fn tick(&mut self) {
        self.session.step();
    }

    pub fn snapshot(&mut self) -> StateSnapshot {
        let s = &self.session;
        let state = s.state();
        let q = s.robot().q;
        let link_points = forward_kinematics(&s.show().profile, &q).map(|p| p.0).unwrap_or([[f64::NAN; 3]; 7]);
        let mode = state.mode();
        let snap = StateSnapshot {
            seq: self.published,
            timestamp: s.robot().clock(),
            q,
            link_points,
            mode: mode.name().to_string(),
            damping: mode.compliance_damping(),
            phase: state.phase().name().to_string(),
            paused: state.paused(),
            finished: state.finished(),
            cue: state.current_cue(s.show()),
            force: s.last_force(),
            force_avg: state.trigger().running_average(),
            force_threshold: state.trigger().threshold(),
            triggered: state.trigger().triggered(),
        };
        self.published += 1;
        snap
    }
}

const BUCKET_NS: u64 = 50_000;
const BUCKETS: usize = 400;

/// Tick timing observed by the paced loop: how far each tick started
/// behind its schedule.
#[derive(Debug)]
pub struct LoopStats {
    ticks: AtomicU64,
    max_lateness_ns: AtomicU64,
    total_lateness_ns: AtomicU64,
    late_ticks: AtomicU64,
    /// 50 us buckets; the last one collects everything beyond 20 ms.
    histogram: Vec<AtomicU64>,
}

impl Default for LoopStats {
    fn default() -> Self {
        LoopStats {
            ticks: AtomicU64::new(0),
            max_lateness_ns: AtomicU64::new(0),
            total_lateness_ns: AtomicU64::new(0),
            late_ticks: AtomicU64::new(0),
            histogram: (0..BUCKETS).map(|_| AtomicU64::new(0)).collect(),
        }
    }
}

impl LoopStats {
    fn record(&self, lateness: Duration, period: Duration) {
        let ns = lateness.as_nanos() as u64;
        self.ticks.fetch_add(1, Ordering::Relaxed);
        self.histogram[((ns / BUCKET_NS) as usize).min(BUCKETS - 1)].fetch_add(1, Ordering::Relaxed);
        self.max_lateness_ns.fetch_max(ns, Ordering::Relaxed);
        self.total_lateness_ns.fetch_add(ns, Ordering::Relaxed);
        if lateness >= period {
            self.late_ticks.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn ticks(&self) -> u64 {
        self.ticks.load(Ordering::Relaxed)
    }

    /// Worst delay of a tick start behind its schedule.
    pub fn max_lateness(&self) -> Duration {
        Duration::from_nanos(self.max_lateness_ns.load(Ordering::Relaxed))
    }

    pub fn mean_lateness(&self) -> Duration {
        let n = self.ticks().max(1);
        Duration::from_nanos(self.total_lateness_ns.load(Ordering::Relaxed) / n)
    }

    /// Upper edge of the histogram bucket holding the `p` quantile, `0 < p <= 1`.
    pub fn lateness_quantile(&self, p: f64) -> Duration {
        let total = self.ticks();
        let want = ((p * total as f64).ceil() as u64).max(1);
        let mut seen = 0;
        for (i, b) in self.histogram.iter().enumerate() {
            seen += b.load(Ordering::Relaxed);
            if seen >= want {
                return Duration::from_nanos((i as u64 + 1) * BUCKET_NS);
            }
        }
        self.max_lateness()
    }

    /// Ticks that started a full period or more behind schedule.
    pub fn late_ticks(&self) -> u64 {
        self.late_ticks.load(Ordering::Relaxed)
    }
}

enum Request {
    Command(OperatorCommand, oneshot::Sender<Ack>),
}

#[derive(Debug, thiserror::Error)]
#[error("control loop is not running")]
pub struct LoopGone;

/// Cloneable sender side of the control loop.
#[derive(Clone)]
pub struct ControlHandle {
    tx: mpsc::Sender<Request>,
    hub: Arc<SnapshotHub>,
    stats: Arc<LoopStats>,
}

impl ControlHandle {
    /// Queues a command; resolves once the loop has handled it.
    pub async fn submit(&self, cmd: OperatorCommand) -> Result<Ack, LoopGone> {
        let (tx, rx) = oneshot::channel();
        self.tx.send(Request::Command(cmd, tx)).map_err(|_| LoopGone)?;
        rx.await.map_err(|_| LoopGone)
    }

    pub fn hub(&self) -> &Arc<SnapshotHub> {
        &self.hub
    }

    pub fn stats(&self) -> &Arc<LoopStats> {
        &self.stats
    }
}

/// Asks for a real-time scheduling class so the tick wakes on time even when
/// network threads share the CPU. Without the privilege this is a no-op.
#[cfg(target_os = "linux")]
fn raise_priority() -> bool {
    let param = libc::sched_param { sched_priority: 10 };
    // SAFETY: plain syscall on the calling thread with a valid parameter block.
    unsafe { libc::pthread_setschedparam(libc::pthread_self(), libc::SCHED_FIFO, &param) == 0 }
}

#[cfg(not(target_os = "linux"))]
fn raise_priority() -> bool {
    false
}

/// The paced control thread. Stops when dropped.
pub struct ControlLoop {
    handle: ControlHandle,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ControlLoop {
    pub fn spawn(mut core: ControlCore, hub: Arc<SnapshotHub>, snapshot_hz: f64) -> ControlLoop {
        let (tx, rx) = mpsc::channel::<Request>();
        let stats = Arc::new(LoopStats::default());
        let stop = Arc::new(AtomicBool::new(false));
        let handle = ControlHandle { tx, hub: hub.clone(), stats: stats.clone() };
        let flag = stop.clone();
        let thread = std::thread::Builder::new()
            .name("control-loop".into())
            .spawn(move || {
                if !raise_priority() {
                    tracing::debug!("control loop runs without real-time priority");
                }
                let period = Duration::from_secs_f64(core.dt());
                let publish_every = 1.0 / snapshot_hz;
                let mut next_publish = 0.0;
                let start = Instant::now();
                let mut k: u32 = 0;
                while !flag.load(Ordering::Relaxed) {
                    let deadline = start + period * k;
                    let now = Instant::now();
                    if now < deadline {
                        std::thread::sleep(deadline - now);
                    }
                    stats.record(Instant::now().saturating_duration_since(deadline), period);
                    while let Ok(req) = rx.try_recv() {
                        match req {
                            Request::Command(cmd, reply) => {
                                let _ = reply.send(core.handle(&cmd));
                            }
                        }
                    }
                    core.tick();
                    if core.clock() + 1e-9 >= next_publish {
                        hub.publish(Arc::new(core.snapshot()));
                        next_publish += publish_every;
                    }
                    k += 1;
                }
            })
            .expect("spawn control thread");
        ControlLoop { handle, stop, thread: Some(thread) }
    }

    pub fn handle(&self) -> ControlHandle {
        self.handle.clone()
    }

    pub fn shutdown(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ControlLoop {
    fn drop(&mut self) {
        self.shutdown();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_come_from_the_histogram() {
        let s = LoopStats::default();
        let period = Duration::from_millis(2);
        for _ in 0..95 {
            s.record(Duration::from_micros(10), period);
        }
        for _ in 0..5 {
            s.record(Duration::from_millis(8), period);
        }
        assert_eq!(s.lateness_quantile(0.95), Duration::from_micros(50));
        assert_eq!(s.lateness_quantile(0.99), Duration::from_micros(8050));
        assert_eq!(s.late_ticks(), 5);
        assert_eq!(s.max_lateness(), Duration::from_millis(8));
    }
}
