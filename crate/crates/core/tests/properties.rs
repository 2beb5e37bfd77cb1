use proptest::prelude::*;

use fitroom::event_core::{EventCalendar, SimTime};
use fitroom::stats_suite::{
    histogram, mann_whitney_u, sample_variance, variance_comparison, Sample,
};

fn values(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..100.0, len)
}

fn sample(v: &[f64]) -> Sample {
    Sample::new("s", v.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn mann_whitney_is_symmetric(a in values(1..30), b in values(1..30)) {
        let ab = mann_whitney_u(&sample(&a), &sample(&b), 0.05).unwrap();
        let ba = mann_whitney_u(&sample(&b), &sample(&a), 0.05).unwrap();
        prop_assert!((ab.p_two_sided - ba.p_two_sided).abs() < 1e-12);
        prop_assert!((ab.u_statistic + ba.u_statistic - (a.len() * b.len()) as f64).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&ab.p_two_sided));
    }

    #[test]
    fn mann_whitney_depends_only_on_ranks(a in values(1..25), b in values(1..25)) {
        let cube = |v: &[f64]| v.iter().map(|x| x.powi(3)).collect::<Vec<_>>();
        let plain = mann_whitney_u(&sample(&a), &sample(&b), 0.05).unwrap();
        let cubed = mann_whitney_u(&sample(&cube(&a)), &sample(&cube(&b)), 0.05).unwrap();
        prop_assert_eq!(plain.u_statistic, cubed.u_statistic);
        prop_assert!((plain.p_two_sided - cubed.p_two_sided).abs() < 1e-12);
    }

    #[test]
    fn variance_percent_is_scale_free(a in values(2..40), b in values(2..40), c in 0.1f64..10.0) {
        prop_assume!(sample_variance(&b).unwrap() > 1e-6);
        let scale = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
        let base = variance_comparison(&sample(&a), &sample(&b), 10.0).unwrap();
        let scaled = variance_comparison(&sample(&scale(&a)), &sample(&scale(&b)), 10.0).unwrap();
        prop_assert!((scaled.variance_model - c * c * base.variance_model).abs() <= 1e-8 * (1.0 + scaled.variance_model));
        prop_assert!((scaled.percent_difference - base.percent_difference).abs() <= 1e-6 * (1.0 + base.percent_difference));
    }

    #[test]
    fn histogram_counts_every_value(v in values(0..200), width in 0.05f64..10.0) {
        let bins = histogram(&v, width, 0.0).unwrap();
        prop_assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), v.len());
        for w in bins.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
        }
        for &x in &v {
            prop_assert!(bins.iter().any(|b| b.start <= x && x < b.end && b.count > 0));
        }
    }

    #[test]
    fn calendar_pops_in_time_then_insertion_order(times in prop::collection::vec(0u8..5, 0..40)) {
        let mut cal: EventCalendar<usize> = EventCalendar::new();
        for (i, &t) in times.iter().enumerate() {
            cal.schedule(SimTime::new(t as f64).unwrap(), i).unwrap();
        }
        let mut popped = Vec::new();
        while let Some(e) = cal.pop_next() {
            prop_assert_eq!(cal.clock(), e.fire_time);
            popped.push(e.payload);
        }
        let mut expected: Vec<usize> = (0..times.len()).collect();
        expected.sort_by_key(|&i| (times[i], i));
        prop_assert_eq!(popped, expected);
    }

    #[test]
    fn cancelled_events_never_fire(times in prop::collection::vec(0u8..5, 1..30), mask in any::<u32>()) {
        let mut cal: EventCalendar<usize> = EventCalendar::new();
        let handles: Vec<_> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| cal.schedule(SimTime::new(t as f64).unwrap(), i).unwrap())
            .collect();
        for (i, h) in handles.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prop_assert_eq!(cal.cancel(*h), Some(i));
                prop_assert_eq!(cal.cancel(*h), None);
            }
        }
        let mut fired = Vec::new();
        cal.run_until(SimTime::new(10.0).unwrap(), |_, e| -> Result<(), ()> {
            fired.push(e.payload);
            Ok(())
        })
        .unwrap();
        prop_assert!(fired.iter().all(|&i| mask & (1 << i) == 0));
        prop_assert_eq!(fired.len(), (0..times.len()).filter(|i| mask & (1 << i) == 0).count());
    }
}
