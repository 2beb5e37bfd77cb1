use super::{JobSelectionPolicy, QueueId};

/// Join time of each queue's head customer, indexed by [`QueueId::index`];
/// `None` for an empty queue.
pub type QueueHeads = [Option<f64>; 3];

const PRIORITY: [QueueId; 3] = [QueueId::Return, QueueId::Entry, QueueId::Help];

/// Picks the queue an idle member of staff serves next.
///
/// Global FIFO takes the head that joined earliest, breaking ties by the
/// fixed priority order (return, entry, help), which is also the whole rule
/// under [`JobSelectionPolicy::FixedPriority`].
pub fn staff_select_next_job(heads: &QueueHeads, policy: JobSelectionPolicy) -> Option<QueueId> {
    let candidates = PRIORITY
        .into_iter()
        .filter_map(|q| heads[q.index()].map(|joined| (q, joined)));
    match policy {
        JobSelectionPolicy::FixedPriority => candidates.map(|(q, _)| q).next(),
        JobSelectionPolicy::GlobalFifo => candidates
            .fold(None, |best: Option<(QueueId, f64)>, (q, joined)| match best {
                Some((_, t)) if t <= joined => best,
                _ => Some((q, joined)),
            })
            .map(|(q, _)| q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use JobSelectionPolicy::*;

    #[test]
    fn earliest_head_wins() {
        let heads = [Some(5.0), None, Some(3.0)];
        assert_eq!(staff_select_next_job(&heads, GlobalFifo), Some(QueueId::Return));
        let heads = [Some(1.0), Some(0.5), Some(3.0)];
        assert_eq!(staff_select_next_job(&heads, GlobalFifo), Some(QueueId::Help));
    }

    #[test]
    fn all_empty() {
        assert_eq!(staff_select_next_job(&[None; 3], GlobalFifo), None);
        assert_eq!(staff_select_next_job(&[None; 3], FixedPriority), None);
    }

    #[test]
    fn ties_fall_back_to_priority() {
        let heads = [Some(4.0), None, Some(4.0)];
        assert_eq!(staff_select_next_job(&heads, GlobalFifo), Some(QueueId::Return));
        let heads = [Some(4.0), Some(4.0), None];
        assert_eq!(staff_select_next_job(&heads, GlobalFifo), Some(QueueId::Entry));
    }

    #[test]
    fn fixed_priority_ignores_join_times() {
        let heads = [Some(1.0), Some(0.0), Some(9.0)];
        assert_eq!(staff_select_next_job(&heads, FixedPriority), Some(QueueId::Return));
        let heads = [Some(1.0), Some(0.0), None];
        assert_eq!(staff_select_next_job(&heads, FixedPriority), Some(QueueId::Entry));
        let heads = [None, Some(0.0), None];
        assert_eq!(staff_select_next_job(&heads, FixedPriority), Some(QueueId::Help));
    }
}
