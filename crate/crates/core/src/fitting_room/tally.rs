use std::collections::VecDeque;

use super::{CustomerDraws, CustomerRecord, QueueHeads, QueueId};

/// Queue contents and per-customer bookkeeping shared by both paradigms.
/// It records what happened; the model logic lives in `des` and `abs`.
pub(crate) struct Tally {
    pub(crate) records: Vec<CustomerRecord>,
    pub(crate) draws: Vec<CustomerDraws>,
    queues: [VecDeque<usize>; 3],
    waiting: usize,
    last_change: f64,
    area: f64,
    pub(crate) busy: [f64; 3],
}

impl Tally {
    pub(crate) fn new() -> Self {
        Tally {
            records: Vec::new(),
            draws: Vec::new(),
            queues: Default::default(),
            waiting: 0,
            last_change: 0.0,
            area: 0.0,
            busy: [0.0; 3],
        }
    }

    fn accumulate(&mut self, now: f64) {
        self.area += self.waiting as f64 * (now - self.last_change);
        self.last_change = now;
    }

    pub(crate) fn arrive(&mut self, now: f64, draws: CustomerDraws) -> usize {
        let idx = self.records.len();
        self.records.push(CustomerRecord::new(idx as u64, now, &draws));
        self.draws.push(draws);
        idx
    }

    pub(crate) fn join(&mut self, q: QueueId, idx: usize, now: f64) {
        self.accumulate(now);
        self.waiting += 1;
        self.records[idx].join(q, now);
        self.queues[q.index()].push_back(idx);
    }

    pub(crate) fn heads(&self) -> QueueHeads {
        let head = |q: QueueId| {
            self.queues[q.index()]
                .front()
                .and_then(|&i| self.records[i].stage(q))
                .map(|s| s.join)
        };
        [head(QueueId::Entry), head(QueueId::Help), head(QueueId::Return)]
    }

    /// Removes the head of `q` and marks its service as started.
    pub(crate) fn take_head(&mut self, q: QueueId, now: f64) -> Option<usize> {
        let idx = self.queues[q.index()].pop_front()?;
        self.accumulate(now);
        self.waiting -= 1;
        self.records[idx].start(q, now);
        Some(idx)
    }

    pub(crate) fn finish(&mut self, q: QueueId, idx: usize, started: f64, now: f64) {
        self.records[idx].end(q, now);
        self.busy[q.index()] += now - started;
    }

    pub(crate) fn depart(&mut self, idx: usize, now: f64) {
        self.records[idx].departure = Some(now);
    }

    /// Time integral of the number of waiting customers over `[0, end]`.
    pub(crate) fn waiting_area(&mut self, end: f64) -> f64 {
        self.accumulate(end);
        self.area
    }
}
