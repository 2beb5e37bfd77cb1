//! Acceptance criteria, one check per criterion. Prints a PASS/FAIL line
//! for each and exits non-zero if any fail.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use fitroom::agent_core::{
    AgentContext, AgentError, AgentInstance, AgentWorld, Delay, Message, Population, StateChart, StateSpec,
    TransitionSpec,
};
use fitroom::event_core::{CountDistribution, Distribution, EventCalendar, RngStream, SimTime};
use fitroom::fitting_room::{
    run_replication, ClosePolicy, JobSelectionPolicy, Paradigm, QueueId, ReplicationResult, ScenarioConfig,
    WaitingMetric,
};
use fitroom::harness::{
    calibrate, replication_seeds, run_batch, run_experiment, CalibrationSettings, CalibrationTargets,
    ExperimentSpec,
};
use fitroom::queueing_oracle::{littles_law_check, mm1_metrics, MM1Params};
use fitroom::stats_suite::{
    compare_variances, mann_whitney_u, mann_whitney_u_with, Sample, TestMethod, VarianceVerdict,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pooled(results: &[ReplicationResult]) -> Vec<f64> {
    results.iter().flat_map(|r| r.waiting_time_sample.iter().copied()).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

// 1. M/M/1 analytical equivalence

fn mm1_equivalence() -> Outcome {
    let start = Instant::now();
    let config = ScenarioConfig::mm1(0.8, 1.0);
    let wq = mm1_metrics(MM1Params { lambda: 0.8, mu: 1.0 }).unwrap().wq;
    let seeds = replication_seeds(1, 100);
    let mut parts = Vec::new();
    let mut pass = true;
    for p in [Paradigm::Des, Paradigm::Abs] {
        let m = mean(&pooled(&run_batch(p, &config, &seeds).unwrap()));
        let rel = (m - wq).abs() / wq;
        pass &= rel <= 0.10;
        parts.push(format!("{} {:.4} ({:+.1}%)", p.label(), m, (m - wq) / wq * 100.0));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    outcome(pass, format!("Wq = {wq:.4}; {}; {secs:.2}s", parts.join(", ")))
}

// 2. Paradigm equivalence under common random numbers

fn paradigm_equivalence() -> Outcome {
    let mut kept = 0;
    for k in 0..100u64 {
        let spec = ExperimentSpec {
            base_seed: 1 + 100 * k,
            ..Default::default()
        };
        let report = run_experiment(&spec).unwrap();
        if !report.cross_paradigm.unwrap().reject_null {
            kept += 1;
        }
    }
    outcome(kept >= 95, format!("{kept}/100 experiments fail to reject DES = ABS at alpha 0.05"))
}

// 3. Mann-Whitney correctness

/// Number of (x in a, y in b) pairs with x > y.
fn pair_count_u(a: &[f64], b: &[f64]) -> u64 {
    a.iter().map(|x| b.iter().filter(|y| x > y).count() as u64).sum()
}

fn split(mask: u32, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..n {
        if mask & (1 << i) != 0 {
            a.push((i + 1) as f64);
        } else {
            b.push((i + 1) as f64);
        }
    }
    (a, b)
}

fn masks(n: usize, k: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << n).filter(move |m| m.count_ones() as usize == k)
}

fn sample(v: Vec<f64>) -> Sample {
    Sample::new("s", v).unwrap()
}

fn mann_whitney_correctness() -> Outcome {
    // exact p against brute-force enumeration of every rank assignment
    let mut checked = 0;
    let mut mismatches = 0;
    for n1 in 1..=5 {
        for n2 in 1..=5 {
            let n = n1 + n2;
            let all: Vec<u64> = masks(n, n1)
                .map(|m| {
                    let (a, b) = split(m, n);
                    pair_count_u(&a, &b)
                })
                .collect();
            let centre = (n1 * n2) as f64 / 2.0;
            for m in masks(n, n1) {
                let (a, b) = split(m, n);
                let u = pair_count_u(&a, &b);
                let dev = (u as f64 - centre).abs();
                let hits = all.iter().filter(|&&v| (v as f64 - centre).abs() >= dev).count();
                let oracle = hits as f64 / all.len() as f64;
                let r = mann_whitney_u(&sample(a), &sample(b), 0.05).unwrap();
                checked += 1;
                if r.method != TestMethod::ExactPermutation || r.u_statistic != u as f64 || r.p_two_sided != oracle {
                    mismatches += 1;
                }
            }
        }
    }

    // exact against approximate for 8 <= N <= 16, one sample per reachable U
    let mut worst = 0.0f64;
    let mut worst_singleton = 0.0f64;
    for n in 8..=16usize {
        for n1 in 1..n {
            let mut seen: HashMap<u64, u32> = HashMap::new();
            for m in masks(n, n1) {
                let (a, b) = split(m, n);
                seen.entry(pair_count_u(&a, &b)).or_insert(m);
            }
            for &m in seen.values() {
                let (a, b) = split(m, n);
                let (a, b) = (sample(a), sample(b));
                let exact = mann_whitney_u_with(&a, &b, 0.05, TestMethod::ExactPermutation).unwrap();
                let approx = mann_whitney_u_with(&a, &b, 0.05, TestMethod::NormalApproximation).unwrap();
                let d = (exact.p_two_sided - approx.p_two_sided).abs();
                if n1.min(n - n1) == 1 {
                    worst_singleton = worst_singleton.max(d);
                } else {
                    worst = worst.max(d);
                }
            }
        }
    }

    // rejection rate under the null
    let exp = Distribution::Exponential { rate: 1.0 };
    let mut rng = RngStream::new(20_260_101, 0);
    let trials = 1000;
    let mut rejections = 0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..200).map(|_| rng.draw(&exp).unwrap()).collect();
        let b: Vec<f64> = (0..200).map(|_| rng.draw(&exp).unwrap()).collect();
        if mann_whitney_u(&sample(a), &sample(b), 0.05).unwrap().reject_null {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;

    let pass = mismatches == 0 && worst <= 0.05 && (0.03..=0.08).contains(&rate);
    outcome(
        pass,
        format!(
            "{checked} tie-free pairs, {mismatches} exact mismatches; max |p_exact - p_approx| = {worst:.4} \
             (both samples >= 2; single-observation samples reach {worst_singleton:.4}); \
             null rejection rate {rate:.3}"
        ),
    )
}

// 4. Variance-comparison arithmetic

fn variance_arithmetic() -> Outcome {
    let a = compare_variances(1.96, 3.01, 10.0).unwrap();
    let b = compare_variances(2.89, 3.01, 10.0).unwrap();
    let pass = (a.percent_difference - 34.9).abs() <= 0.05
        && a.verdict == VarianceVerdict::Different
        && (b.percent_difference - 4.0).abs() <= 0.05
        && b.verdict == VarianceVerdict::Similar;
    outcome(
        pass,
        format!(
            "(1.96, 3.01) -> {:.4}% {:?}; (2.89, 3.01) -> {:.4}% {:?}",
            a.percent_difference, a.verdict, b.percent_difference, b.verdict
        ),
    )
}

// 5. Calibration

fn mean_fractions(results: &[ReplicationResult]) -> [f64; 3] {
    let mut m = [0.0; 3];
    for r in results {
        let b = r.staff_busy_minutes_by_job;
        let total: f64 = b.iter().sum();
        for j in 0..3 {
            m[j] += b[j] / total / results.len() as f64;
        }
    }
    m
}

fn calibration() -> Outcome {
    let start = Instant::now();
    let target = [0.45, 0.10, 0.45];
    let targets = CalibrationTargets {
        mean_wait: 1.68,
        workload_fractions: target,
    };
    let out = calibrate(&targets, &CalibrationSettings::default());
    let secs = start.elapsed().as_secs_f64();
    let Ok(out) = out else {
        return outcome(false, format!("calibration failed: {}", out.unwrap_err()));
    };

    // recompute from scratch with the returned config
    let seeds = replication_seeds(1, 100);
    let results = run_batch(Paradigm::Des, &out.config, &seeds).unwrap();
    let wait = mean(&pooled(&results));
    let fr = mean_fractions(&results);
    let near = |f: [f64; 3]| f.iter().zip(target).all(|(a, t)| (a - t).abs() <= 0.03);

    // the shipped default carries the calibrated rate
    let shipped = run_batch(Paradigm::Des, &ScenarioConfig::default(), &seeds).unwrap();
    let shipped_wait = mean(&pooled(&shipped));
    let shipped_fr = mean_fractions(&shipped);

    let pass = (wait - 1.68).abs() <= 0.05
        && near(fr)
        && (shipped_wait - 1.68).abs() <= 0.05
        && near(shipped_fr)
        && secs < 300.0;
    outcome(
        pass,
        format!(
            "arrival rate {:.5}: mean wait {wait:.4}, split {:.3}/{:.3}/{:.3}; shipped default {shipped_wait:.4}, \
             {:.3}/{:.3}/{:.3}; {} iterations, {secs:.2}s",
            out.config.arrival_rate, fr[0], fr[1], fr[2], shipped_fr[0], shipped_fr[1], shipped_fr[2], out.iterations
        ),
    )
}

// 6. Invariant suite over randomized configs

fn uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

fn random_distribution(rng: &mut RngStream, lo: f64, hi: f64) -> Distribution {
    let mean = uniform(rng, lo, hi);
    if rng.bernoulli(0.3) {
        Distribution::Deterministic { value: mean }
    } else {
        Distribution::exponential_mean(mean)
    }
}

fn random_config(rng: &mut RngStream) -> ScenarioConfig {
    let rho = uniform(rng, 0.05, 0.95);
    if rng.bernoulli(0.3) {
        let mu = uniform(rng, 0.2, 3.0);
        let mut c = ScenarioConfig::mm1(rho * mu, mu);
        c.horizon_minutes = uniform(rng, 30.0, 480.0);
        return c;
    }
    let mut c = ScenarioConfig {
        entry_service: random_distribution(rng, 0.1, 2.0),
        help_service: random_distribution(rng, 0.1, 3.0),
        return_service: random_distribution(rng, 0.1, 2.0),
        fitting_duration: random_distribution(rng, 0.0, 15.0),
        help_probability: uniform(rng, 0.0, 0.6),
        garment_count: CountDistribution::ShiftedGeometric {
            mean: uniform(rng, 1.0, 5.0),
        },
        per_garment_minutes: rng.bernoulli(0.3).then(|| uniform(rng, 0.0, 0.3)),
        staff_count: 1 + (rng.uniform() * 3.0) as u32,
        horizon_minutes: uniform(rng, 30.0, 480.0),
        close_policy: if rng.bernoulli(0.3) {
            ClosePolicy::HardCut
        } else {
            ClosePolicy::FinishInSystem
        },
        job_selection_policy: if rng.bernoulli(0.5) {
            JobSelectionPolicy::GlobalFifo
        } else {
            JobSelectionPolicy::FixedPriority
        },
        waiting_metric: if rng.bernoulli(0.3) {
            WaitingMetric::PerQueue
        } else {
            WaitingMetric::PerCustomerTotal
        },
        ..ScenarioConfig::default()
    };
    let work: f64 = c.expected_service_by_job().iter().sum();
    c.arrival_rate = rho * c.staff_count as f64 / work;
    if rng.bernoulli(0.2) {
        c.interarrival = Some(Distribution::Deterministic {
            value: 1.0 / c.arrival_rate,
        });
    }
    c
}

/// Violations found in one replication, as readable strings.
fn invariant_violations(r: &ReplicationResult) -> Vec<String> {
    let mut v = Vec::new();
    if r.customers_arrived != r.customers_completed + r.customers_in_system_at_close
        || r.customers.len() as u64 != r.customers_arrived
    {
        v.push("conservation".to_string());
    }
    for q in QueueId::ALL {
        let mut visits: Vec<(f64, Option<f64>)> = r
            .customers
            .iter()
            .filter_map(|c| c.stage(q).map(|s| (s.join, s.start)))
            .collect();
        visits.sort_by(|a, b| a.0.total_cmp(&b.0));
        // everyone who joined strictly earlier must have started no later
        let mut i = 0;
        let mut earlier_latest_start = f64::NEG_INFINITY;
        let mut earlier_unstarted = false;
        while i < visits.len() {
            let mut j = i;
            while j < visits.len() && visits[j].0 == visits[i].0 {
                j += 1;
            }
            for &(_, start) in &visits[i..j] {
                if let Some(s) = start {
                    if earlier_unstarted || s < earlier_latest_start {
                        v.push(format!("{q:?} FIFO"));
                    }
                }
            }
            for &(_, start) in &visits[i..j] {
                match start {
                    Some(s) => earlier_latest_start = earlier_latest_start.max(s),
                    None => earlier_unstarted = true,
                }
            }
            i = j;
        }
    }
    for c in &r.customers {
        for q in QueueId::ALL {
            if let Some(s) = c.stage(q) {
                let bad_start = s.start.is_some_and(|t| t < s.join);
                let bad_end = matches!((s.start, s.end), (Some(a), Some(b)) if b < a);
                if bad_start || bad_end || s.join < c.arrival_time {
                    v.push("negative wait".into());
                }
            }
        }
    }
    if r.waiting_time_sample.iter().any(|&w| w < 0.0) {
        v.push("negative sample".into());
    }
    v
}

fn invariant_suite() -> Outcome {
    let mut rng = RngStream::new(424_242, 0);
    let mut violations = Vec::new();
    let mut littles_checked = 0;
    let mut worst_littles = 0.0f64;
    let mut report_checks = 0;
    for i in 0..1000 {
        let config = random_config(&mut rng);
        let rho = config.offered_load() / config.staff_count as f64;
        assert!(rho < 0.95, "generator produced rho {rho}");
        let seed = (rng.uniform() * 1e12) as u64;
        for p in [Paradigm::Des, Paradigm::Abs] {
            let r = run_replication(p, &config, seed).unwrap();
            for v in invariant_violations(&r) {
                violations.push(format!("config {i} {}: {v}", p.label()));
            }
            let again = run_replication(p, &config, seed).unwrap();
            let same = serde_json::to_string(&r.without_timing()).unwrap()
                == serde_json::to_string(&again.without_timing()).unwrap();
            if !same {
                violations.push(format!("config {i} {}: not reproducible", p.label()));
            }
            if config.close_policy == ClosePolicy::FinishInSystem && r.customers_completed > 0 {
                let err = littles_law_check(&r, r.observed_arrival_rate()).unwrap();
                littles_checked += 1;
                worst_littles = worst_littles.max(err);
                if err > 0.05 {
                    violations.push(format!("config {i} {}: Little's law error {err:.4}", p.label()));
                }
            }
        }
        if i % 100 == 0 {
            let spec = ExperimentSpec {
                scenario: config.clone(),
                replications: 3,
                base_seed: seed,
                ..Default::default()
            };
            let a = run_experiment(&spec).unwrap().without_timestamps();
            let b = run_experiment(&spec).unwrap().without_timestamps();
            report_checks += 1;
            if serde_json::to_vec(&a).unwrap() != serde_json::to_vec(&b).unwrap() {
                violations.push(format!("config {i}: reports differ"));
            }
        }
    }
    let shown: Vec<&String> = violations.iter().take(3).collect();
    outcome(
        violations.is_empty(),
        format!(
            "1000 configs x 2 paradigms; {} violations {shown:?}; Little's law on {littles_checked} runs, \
             worst relative error {worst_littles:.2e}; {report_checks} byte-identical report pairs",
            violations.len()
        ),
    )
}

// 7. Kernel determinism

/// Schedules events at the given times, cancels those flagged, and runs to
/// the end. Event `i` with `spawn[i]` set schedules a same-time child when
/// handled. Returns labels in handling order.
fn calendar_script(times: &[u32], cancelled: u32, spawn: u32) -> Vec<usize> {
    let mut cal: EventCalendar<usize> = EventCalendar::new();
    let handles: Vec<_> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| cal.schedule(SimTime::new(t as f64).unwrap(), i).unwrap())
        .collect();
    for (i, h) in handles.iter().enumerate() {
        if cancelled & (1 << i) != 0 {
            cal.cancel(*h);
        }
    }
    let n = times.len();
    let mut order = Vec::new();
    cal.run_until(SimTime::new(100.0).unwrap(), |cal, ev| -> Result<(), ()> {
        order.push(ev.payload);
        if ev.payload < n && spawn & (1 << ev.payload) != 0 {
            cal.schedule_in(0.0, ev.payload + 100).unwrap();
        }
        Ok(())
    })
    .unwrap();
    order
}

/// Independent model: a list scanned for the smallest (time, insertion
/// counter) on every step.
fn calendar_oracle(times: &[u32], cancelled: u32, spawn: u32) -> Vec<usize> {
    let mut pending: Vec<(u32, usize, usize)> = times
        .iter()
        .enumerate()
        .filter(|(i, _)| cancelled & (1 << i) == 0)
        .map(|(i, &t)| (t, i, i))
        .collect();
    let mut counter = times.len();
    let mut order = Vec::new();
    while let Some(k) = (0..pending.len()).min_by_key(|&k| (pending[k].0, pending[k].1)) {
        let (t, _, label) = pending.remove(k);
        order.push(label);
        if label < times.len() && spawn & (1 << label) != 0 {
            pending.push((t, counter, label + 100));
            counter += 1;
        }
    }
    order
}

struct Inert;

impl AgentWorld<()> for Inert {
    fn guard(&self, _: &str, _: &AgentInstance<()>) -> bool {
        false
    }

    fn apply(&mut self, _: &(), _: &mut AgentContext<'_, ()>) -> Result<(), AgentError> {
        Ok(())
    }
}

/// A --timeout(delay)--> B, A --message m--> C. Each agent gets a delay and
/// an optional message time; returns (final states, timeouts fired, drops).
fn preemption_script(chart: &Arc<StateChart<()>>, agents: &[(u32, Option<u32>)]) -> (Vec<String>, u64, usize) {
    let mut pop = Population::new(0);
    let mut world = Inert;
    let ids: Vec<_> = agents
        .iter()
        .map(|&(d, _)| {
            pop.spawn_agent(&mut world, chart, BTreeMap::from([("d".to_string(), d as f64)]))
                .unwrap()
        })
        .collect();
    for (&id, &(_, msg)) in ids.iter().zip(agents) {
        if let Some(t) = msg {
            let m = Message {
                tag: "m".into(),
                sender: id,
                recipient: id,
                payload: None,
            };
            pop.send_message(m, SimTime::new(t as f64).unwrap()).unwrap();
        }
    }
    pop.run_to_completion(&mut world).unwrap();
    let states = ids.iter().map(|&id| pop.state_name(id).unwrap().to_string()).collect();
    (states, pop.timeouts_fired(), pop.dropped_messages().len())
}

fn kernel_determinism() -> Outcome {
    let mut failures = Vec::new();
    let mut calendar_scripts = 0;
    for n in 1..=6usize {
        for code in 0..3u32.pow(n as u32) {
            let times: Vec<u32> = (0..n).map(|i| code / 3u32.pow(i as u32) % 3).collect();
            for cancelled in 0..1u32 << n {
                let spawn = cancelled.rotate_left(1) ^ code;
                let got = calendar_script(&times, cancelled, spawn);
                calendar_scripts += 1;
                if got != calendar_oracle(&times, cancelled, spawn) || got != calendar_script(&times, cancelled, spawn) {
                    failures.push(format!("calendar times {times:?} cancelled {cancelled:b}"));
                }
            }
        }
    }
    // ten-event scripts: every time pattern over {0, 1}
    for code in 0..1u32 << 10 {
        let times: Vec<u32> = (0..10).map(|i| (code >> i) & 1).collect();
        calendar_scripts += 1;
        if calendar_script(&times, 0, code) != calendar_oracle(&times, 0, code) {
            failures.push(format!("calendar times {times:?}"));
        }
    }

    let chart = Arc::new(
        StateChart::new(
            "probe",
            vec![StateSpec::new("A"), StateSpec::new("B"), StateSpec::new("C")],
            "A",
            vec![
                TransitionSpec::timeout("A", "B", Delay::Attribute("d".into())),
                TransitionSpec::message("A", "C", "m"),
            ],
        )
        .unwrap(),
    );
    let choices: Vec<(u32, Option<u32>)> = (1..=3)
        .flat_map(|d| [None, Some(1), Some(2), Some(3)].map(|m| (d, m)))
        .collect();
    let mut agent_scripts = 0;
    for k in 1..=3usize {
        for code in 0..choices.len().pow(k as u32) {
            let agents: Vec<_> = (0..k).map(|i| choices[code / choices.len().pow(i as u32) % choices.len()]).collect();
            // message strictly before the timeout preempts it; at a tie the
            // timeout, armed first, wins and the message is dropped
            let expected: Vec<String> = agents
                .iter()
                .map(|&(d, m)| if m.is_some_and(|t| t < d) { "C" } else { "B" }.to_string())
                .collect();
            let fired = expected.iter().filter(|s| *s == "B").count() as u64;
            let dropped = agents.iter().filter(|&&(d, m)| m.is_some_and(|t| t >= d)).count();
            let got = preemption_script(&chart, &agents);
            agent_scripts += 1;
            if got != (expected, fired, dropped) || got != preemption_script(&chart, &agents) {
                failures.push(format!("agents {agents:?}: {got:?}"));
            }
        }
    }
    let shown: Vec<&String> = failures.iter().take(3).collect();
    outcome(
        failures.is_empty(),
        format!(
            "{calendar_scripts} calendar scripts, {agent_scripts} timeout/message scripts; {} failures {shown:?}",
            failures.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 M/M/1 analytical equivalence", mm1_equivalence),
        ("2 paradigm equivalence", paradigm_equivalence),
        ("3 Mann-Whitney correctness", mann_whitney_correctness),
        ("4 variance-comparison arithmetic", variance_arithmetic),
        ("5 calibration", calibration),
        ("6 invariant suite", invariant_suite),
        ("7 kernel determinism", kernel_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{verdict}] criterion {name}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
