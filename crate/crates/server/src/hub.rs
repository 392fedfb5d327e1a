use std::sync::{Arc, Mutex};

use tokio::sync::mpsc;

use crate::protocol::StateSnapshot;

pub const DEFAULT_BACKLOG: usize = 90;

/// Fan-out of snapshots to subscribers. Publishing never blocks: a client
/// whose queue is full is unsubscribed, and its receiver then ends.
#[derive(Debug)]
pub struct SnapshotHub {
    backlog: usize,
    inner: Mutex<Inner>,
}

#[derive(Debug, Default)]
struct Inner {
    next_id: u64,
    clients: Vec<(u64, mpsc::Sender<Arc<StateSnapshot>>)>,
    latest: Option<Arc<StateSnapshot>>,
    published: u64,
    dropped: u64,
}

#[derive(Debug)]
pub struct Subscription {
    pub id: u64,
    pub rx: mpsc::Receiver<Arc<StateSnapshot>>,
}

impl SnapshotHub {
    pub fn new(backlog: usize) -> Self {
        SnapshotHub { backlog: backlog.max(1), inner: Mutex::new(Inner::default()) }
    }

    pub fn backlog(&self) -> usize {
        self.backlog
    }

    pub fn subscribe(&self) -> Subscription {
        let (tx, rx) = mpsc::channel(self.backlog);
        let mut inner = self.inner.lock().unwrap();
        let id = inner.next_id;
        inner.next_id += 1;
        inner.clients.push((id, tx));
        Subscription { id, rx }
    }

    pub fn unsubscribe(&self, id: u64) {
        self.inner.lock().unwrap().clients.retain(|(c, _)| *c != id);
    }

    /// Offers `snap` to every client and returns how many accepted it.
    pub fn publish(&self, snap: Arc<StateSnapshot>) -> usize {
        let mut inner = self.inner.lock().unwrap();
        let before = inner.clients.len();
        inner.clients.retain(|(_, tx)| tx.try_send(snap.clone()).is_ok());
        let kept = inner.clients.len();
        inner.dropped += (before - kept) as u64;
        inner.published += 1;
        inner.latest = Some(snap);
        kept
    }

    pub fn latest(&self) -> Option<Arc<StateSnapshot>> {
        self.inner.lock().unwrap().latest.clone()
    }

    pub fn client_count(&self) -> usize {
        self.inner.lock().unwrap().clients.len()
    }

    pub fn published(&self) -> u64 {
        self.inner.lock().unwrap().published
    }

    /// Clients removed for a full queue or a closed receiver.
    pub fn dropped(&self) -> u64 {
        self.inner.lock().unwrap().dropped
    }
}

impl Default for SnapshotHub {
    fn default() -> Self {
        SnapshotHub::new(DEFAULT_BACKLOG)
    }
}
