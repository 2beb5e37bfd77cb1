use std::collections::BTreeMap;

use super::{KernelError, SimTime};

/// Identifies a scheduled event. Ordered by `(fire_time, sequence)`, which is
/// exactly the order events leave the calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventHandle {
    fire_time: SimTime,
    sequence: u64,
}

impl EventHandle {
    pub fn fire_time(&self) -> SimTime {
        self.fire_time
    }

    pub fn sequence(&self) -> u64 {
        self.sequence
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event<P> {
    pub fire_time: SimTime,
    pub sequence: u64,
    pub payload: P,
}

/// Future-event list plus clock.
///
/// Pending events are keyed by `(fire_time, sequence)`; sequence numbers are
/// handed out in scheduling order, so equal-time events pop FIFO.
#[derive(Debug, Clone)]
pub struct EventCalendar<P> {
    pending: BTreeMap<EventHandle, P>,
    clock: SimTime,
    next_sequence: u64,
    executed: u64,
}

impl<P> Default for EventCalendar<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventCalendar<P> {
    pub fn new() -> Self {
        EventCalendar {
            pending: BTreeMap::new(),
            clock: SimTime::ZERO,
            next_sequence: 0,
            executed: 0,
        }
    }

    #[inline]
    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Total number of events popped over the calendar's lifetime.
    pub fn executed(&self) -> u64 {
        self.executed
    }

    pub fn schedule(&mut self, at: SimTime, payload: P) -> Result<EventHandle, KernelError> {
        if at < self.clock {
            return Err(KernelError::SchedulingInPast {
                at: at.minutes(),
                clock: self.clock.minutes(),
            });
        }
        let handle = EventHandle {
            fire_time: at,
            sequence: self.next_sequence,
        };
        self.next_sequence += 1;
        self.pending.insert(handle, payload);
        Ok(handle)
    }

    /// Schedules `delay` minutes after the current clock.
    pub fn schedule_in(&mut self, delay: f64, payload: P) -> Result<EventHandle, KernelError> {
        let at = self.clock.after(delay)?;
        self.schedule(at, payload)
    }

    /// Removes a pending event. Returns its payload, or `None` if it already
    /// fired or was cancelled before.
    pub fn cancel(&mut self, handle: EventHandle) -> Option<P> {
        self.pending.remove(&handle)
    }

    pub fn is_pending(&self, handle: EventHandle) -> bool {
        self.pending.contains_key(&handle)
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.pending.keys().next().map(|h| h.fire_time)
    }

    /// Pops the earliest event and advances the clock to its fire time.
    pub fn pop_next(&mut self) -> Option<Event<P>> {
        let (handle, payload) = self.pending.pop_first()?;
        self.clock = handle.fire_time;
        self.executed += 1;
        Some(Event {
            fire_time: handle.fire_time,
            sequence: handle.sequence,
            payload,
        })
    }

    /// Pops the earliest event only if it fires at or before `t_end`.
    pub fn pop_due(&mut self, t_end: SimTime) -> Option<Event<P>> {
        match self.peek_time() {
            Some(t) if t <= t_end => self.pop_next(),
            _ => None,
        }
    }

    /// Moves the clock forward to `t`. Never moves it backwards.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.clock {
            self.clock = t;
        }
    }

    /// Executes every event with `fire_time <= t_end` in calendar order, then
    /// leaves the clock at `t_end`. Events the handler schedules inside the
    /// window are executed too. A `t_end` behind the clock executes nothing.
    pub fn run_until<E, F>(&mut self, t_end: SimTime, mut handler: F) -> Result<u64, E>
    where
        F: FnMut(&mut Self, Event<P>) -> Result<(), E>,
    {
        let mut count = 0;
        while let Some(event) = self.pop_due(t_end) {
            handler(self, event)?;
            count += 1;
        }
        self.advance_to(t_end);
        Ok(count)
    }
}
