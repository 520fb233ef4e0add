//! Acceptance suite: seven independently verifiable criteria, each
//! printing a single `ACCEPTANCE <n> <name>: PASS|FAIL` line. Oracles
//! here are deliberately naive reimplementations, never calls back into
//! the code under test.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use uvlab_core::analysis::{aggregate, classify_regions, parse_output_tree, Region};
use uvlab_core::model::{
    power_gain, severity, Effect, EffectCounts, EffectSet, SeverityWeights,
};
use uvlab_core::orchestrator::config::{BenchmarkConfig, CampaignConfig, SelectionConfig};
use uvlab_core::orchestrator::journal::{Journal, RunStatus};
use uvlab_core::orchestrator::runner::CampaignRunner;
use uvlab_core::rng::CounterRng;
use uvlab_core::sim::{
    expected_severity, sample_observed, CharacterizationSetup, FaultModel, FaultModelConfig,
    RunKey,
};
use uvlab_core::model::{CoreSelection, VFPoint};
use uvlab_core::watchdog::{Action, Message, Phase, PingResult, WatchdogState};

/// Runs one criterion, enforcing its runtime budget and printing the
/// verdict line.
fn criterion(n: u32, name: &str, budget: Duration, body: impl FnOnce()) {
    let t0 = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = t0.elapsed();
    let ok = result.is_ok() && elapsed <= budget;
    println!(
        "ACCEPTANCE {n} {name}: {} ({:.2?})",
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    if let Err(e) = result {
        resume_unwind(e);
    }
    assert!(
        elapsed <= budget,
        "criterion {n} exceeded its {budget:?} budget: {elapsed:?}"
    );
}

// ---------------------------------------------------------------- 1 --

/// Independent oracle: materialize the N runs implied by the counts
/// (run i carries effect e iff i < count_e), then sum weights per
/// occurrence and normalize by N.
fn severity_oracle(counts: &EffectCounts, w: &SeverityWeights) -> f64 {
    let mut total = 0.0;
    for i in 0..counts.n_runs {
        for e in Effect::ALL {
            if i < counts.count(e) {
                total += w.weight(e);
            }
        }
    }
    total / counts.n_runs as f64
}

#[test]
fn acceptance_1_severity_formula() {
    criterion(1, "severity-formula", Duration::from_secs(1), || {
        let w = SeverityWeights::default();

        // Hand cases: all-normal, all-crash, and a small mixed table.
        let quiet = EffectCounts { n_runs: 10, ..Default::default() };
        assert_eq!(severity(&quiet, &w), 0.0);
        let crashed = EffectCounts { n_runs: 10, sc: 10, ..Default::default() };
        assert_eq!(severity(&crashed, &w), 16.0);
        let mixed = EffectCounts { n_runs: 2, ce: 1, ue: 1, ..Default::default() };
        assert!((severity(&mixed, &w) - 1.5).abs() < 1e-15);

        let mut rng = CounterRng::from_parts(&[0xACCE]);
        for _ in 0..1000 {
            let n = 1 + rng.next_range(20) as u32;
            let mut counts = EffectCounts { n_runs: n, ..Default::default() };
            for e in Effect::ALL {
                *counts.count_mut(e) = rng.next_range(n as u64 + 1) as u32;
            }
            let got = severity(&counts, &w);
            let want = severity_oracle(&counts, &w);
            assert!(
                (got - want).abs() <= 1e-12,
                "{counts:?}: {got} vs oracle {want}"
            );
        }
    });
}

// ---------------------------------------------------------------- 2 --

#[test]
fn acceptance_2_power_gain() {
    criterion(2, "power-gain", Duration::from_secs(1), || {
        // 980 -> 870 mV is an 11.2% reduction; gain must land in
        // (21.0%, 21.5%).
        let g = power_gain(870, 980).unwrap();
        assert!(g > 0.210 && g < 0.215, "gain at 870 mV: {g}");
        // 40 mV further down: 28.3% +- 0.5 pp.
        let g = power_gain(830, 980).unwrap();
        assert!((g - 0.283).abs() <= 0.005, "gain at 830 mV: {g}");
    });
}

// ---------------------------------------------------------------- 3 --

/// Abstract node for the exhaustive watchdog search: the machine state
/// plus how many power-cycles the currently armed run has caused.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Node {
    state: WatchdogState,
    now_ms: u64,
    cycles_this_run: u32,
}

fn watchdog_events() -> Vec<Message> {
    vec![
        Message::Start { run_id: "r".into(), nominal_ms: 2_000 },
        Message::Done { run_id: "r".into() },
        Message::Done { run_id: "stale".into() },
        Message::Booted,
        Message::Ping,
        Message::Pong,
    ]
}

#[test]
fn acceptance_3_watchdog_timing() {
    criterion(3, "watchdog-timing", Duration::from_secs(10), || {
        // Timed path: nominal 10 s, never DONE, responsive pings; the
        // cycle must fire exactly at the 20 s tick.
        let (mut s, _) = WatchdogState::new(1_000)
            .on_message(&Message::Start { run_id: "r1".into(), nominal_ms: 10_000 }, 0, 2)
            .unwrap();
        let mut fired_at = None;
        for t in (1_000..=25_000).step_by(1_000) {
            let (next, actions) = s.tick(t, PingResult::Responsive);
            if actions.contains(&Action::PowerCycle) {
                assert!(fired_at.is_none(), "second power cycle at {t}");
                fired_at = Some(t);
            }
            s = next;
        }
        assert_eq!(fired_at, Some(20_000));

        // Responsiveness path: an unresponsive ping at 3 s cycles at
        // that tick, well before the deadline.
        let (s, _) = WatchdogState::new(1_000)
            .on_message(&Message::Start { run_id: "r2".into(), nominal_ms: 10_000 }, 0, 2)
            .unwrap();
        let (s, a) = s.tick(3_000, PingResult::Unresponsive);
        assert_eq!(a, vec![Action::PowerCycle]);
        assert_eq!(s.phase, Phase::Cycling);

        // Exhaustive interleaving search to depth 12: every message and
        // every tick/ping-result combination at every reachable state,
        // deduplicated. Safety: at most one power cycle per armed run.
        // Liveness: Idle stays reachable from every reachable state.
        let root = Node {
            state: WatchdogState::new(1_000),
            now_ms: 0,
            cycles_this_run: 0,
        };
        let successors = |node: &Node| -> Vec<Node> {
            let mut out = Vec::new();
            for msg in watchdog_events() {
                if let Ok((state, actions)) = node.state.on_message(&msg, node.now_ms, 2) {
                    let mut next = Node { state, now_ms: node.now_ms, cycles_this_run: node.cycles_this_run };
                    if matches!(msg, Message::Start { .. }) {
                        next.cycles_this_run = 0;
                    }
                    assert!(!actions.contains(&Action::PowerCycle), "messages never cycle");
                    out.push(next);
                }
            }
            for ping in [PingResult::Responsive, PingResult::Unresponsive, PingResult::None] {
                let now_ms = node.now_ms + 1_000;
                let (state, actions) = node.state.tick(now_ms, ping);
                let cycles = node.cycles_this_run
                    + actions.iter().filter(|a| **a == Action::PowerCycle).count() as u32;
                assert!(cycles <= 1, "safety violated: {cycles} cycles for one run");
                out.push(Node { state, now_ms, cycles_this_run: cycles });
            }
            out
        };
        // Time only matters relative to the armed deadline; cap the
        // clock by folding states whose deadline already passed.
        let canon = |mut n: Node| -> Node {
            if let Some(d) = n.state.deadline_ms {
                if n.now_ms >= d {
                    let shift = n.now_ms - d;
                    n.now_ms -= shift;
                    n.state.deadline_ms = Some(d - shift.min(d));
                }
            } else {
                n.now_ms = 0;
            }
            n
        };
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        let fp = |n: &Node| -> u64 {
            use std::hash::{Hash, Hasher};
            let mut h = std::collections::hash_map::DefaultHasher::new();
            (
                n.state.phase as u8,
                n.state.run_id.clone(),
                n.state.deadline_ms.map(|d| d.saturating_sub(n.now_ms)),
                n.state.nominal_ms,
                n.cycles_this_run,
            )
                .hash(&mut h);
            h.finish()
        };
        let mut frontier = VecDeque::from([canon(root)]);
        seen.insert(fp(&frontier[0]));
        let mut reachable = Vec::new();
        for _depth in 0..12 {
            let mut next_frontier = VecDeque::new();
            while let Some(node) = frontier.pop_front() {
                reachable.push(node.clone());
                for succ in successors(&node) {
                    let succ = canon(succ);
                    if seen.insert(fp(&succ)) {
                        next_frontier.push_back(succ);
                    }
                }
            }
            frontier = next_frontier;
        }
        reachable.extend(frontier);
        // Distinct abstract states: Idle, four Pinging deadline
        // distances, Cycling, AwaitBoot, and post-cycle variants.
        assert!(reachable.len() >= 8, "search space unexpectedly trivial: {}", reachable.len());

        // Liveness: from every reachable state, some path returns to
        // Idle (bounded inner search).
        for node in &reachable {
            let mut inner_seen = BTreeSet::new();
            let mut q = VecDeque::from([node.clone()]);
            inner_seen.insert(fp(node));
            let mut found = node.state.phase == Phase::Idle;
            while let Some(n) = q.pop_front() {
                if found {
                    break;
                }
                for succ in successors(&n).into_iter().map(canon) {
                    if succ.state.phase == Phase::Idle {
                        found = true;
                        break;
                    }
                    if inner_seen.insert(fp(&succ)) {
                        q.push_back(succ);
                    }
                }
            }
            assert!(found, "state cannot recover to Idle: {:?}", node.state.phase);
        }
    });
}

// ---------------------------------------------------------------- 4 --

fn campaign_config(root: &Path, seed: u64) -> CampaignConfig {
    CampaignConfig {
        benchmarks: vec![BenchmarkConfig {
            id: "matmul".into(),
            command: "./matmul".into(),
            input: None,
            golden_output_path: None,
            nominal_duration_ms: 1000,
        }],
        v_start_mv: 980,
        v_floor_mv: 885, // 20 levels
        v_step_mv: None,
        frequencies_mhz: vec![2400],
        selections: vec![SelectionConfig::SingleCore { core: 0 }],
        repeats: 3, // 60 runs
        seed,
        output_root: root.to_path_buf(),
        chip: None,
        fault_model: Default::default(),
        weights: Default::default(),
        virtual_clock: true,
        ping_interval_ms: 1000,
        timeout_multiplier: 2,
    }
}

fn severity_csv_of(root: &Path) -> String {
    let (runs, warnings) = parse_output_tree(root).unwrap();
    assert!(warnings.is_empty(), "parse warnings: {warnings:?}");
    let aggs = aggregate(&runs, &Default::default()).unwrap();
    uvlab_core::analysis::report::severity_csv(&aggs)
}

#[test]
fn acceptance_4_crash_safe_resume() {
    criterion(4, "crash-safe-resume", Duration::from_secs(30), || {
        let seed = 1234;
        let reference = tempfile::tempdir().unwrap();
        let mut runner =
            CampaignRunner::from_config(campaign_config(reference.path(), seed)).unwrap();
        let summary = runner.run(None).unwrap();
        assert_eq!(summary.executed, 60);
        let want = severity_csv_of(reference.path());

        let dir = tempfile::tempdir().unwrap();
        let mut rng = CounterRng::from_parts(&[0x4444]);
        // 20 uniformly random kill points: each iteration executes a
        // random number of runs, then the process "dies" (the runner is
        // dropped with the journal mid-campaign) and a fresh runner
        // resumes from disk.
        for _ in 0..20 {
            let mut runner =
                CampaignRunner::from_config(campaign_config(dir.path(), seed)).unwrap();
            let kill_after = rng.next_range(6) as usize; // 0..=5 runs
            runner.run(Some(kill_after)).unwrap();
        }
        let mut runner = CampaignRunner::from_config(campaign_config(dir.path(), seed)).unwrap();
        runner.run(None).unwrap();

        let records = Journal::load(&dir.path().join("journal.log")).unwrap();
        for id in 0..60u64 {
            let completed = records
                .iter()
                .filter(|r| r.run_id == id && r.status == RunStatus::Completed)
                .count();
            assert_eq!(completed, 1, "run {id} must be COMPLETED exactly once");
        }
        let got = severity_csv_of(dir.path());
        assert_eq!(got, want, "severity.csv differs from uninterrupted reference");
    });
}

// ---------------------------------------------------------------- 5 --

/// Literal region oracle: crash at and below the highest voltage with
/// any SC; safe on the contiguous all-normal prefix above it; unsafe
/// elsewhere.
fn region_oracle(levels: &[(u32, EffectCounts)]) -> Vec<(u32, Region)> {
    let ceiling = levels
        .iter()
        .filter(|(_, c)| c.sc > 0)
        .map(|(v, _)| *v)
        .max();
    let mut out = Vec::new();
    let mut prefix_normal = true;
    for (v, c) in levels {
        let abnormal = c.sdc + c.ce + c.ue + c.ac + c.sc > 0;
        let region = if ceiling.is_some_and(|ceil| *v <= ceil) {
            Region::Crash
        } else if prefix_normal && !abnormal {
            Region::Safe
        } else {
            Region::Unsafe
        };
        if abnormal || region != Region::Safe {
            prefix_normal = false;
        }
        out.push((*v, region));
    }
    out
}

fn aggregate_from_counts(
    levels: &[(u32, EffectCounts)],
) -> Vec<uvlab_core::analysis::VoltageLevelAggregate> {
    levels
        .iter()
        .map(|(v, counts)| uvlab_core::analysis::VoltageLevelAggregate {
            key: uvlab_core::analysis::LevelKey {
                benchmark: "b".into(),
                selection: "core0".into(),
                freq_mhz: 2400,
                voltage_mv: *v,
            },
            severity: severity(counts, &SeverityWeights::default()),
            counts: *counts,
            event_totals: BTreeMap::new(),
        })
        .collect()
}

#[test]
fn acceptance_5_region_classification() {
    criterion(5, "region-classification", Duration::from_secs(5), || {
        let mut rng = CounterRng::from_parts(&[0x5555]);
        for case in 0..500 {
            let n_levels = 2 + rng.next_range(11) as u32;
            let start = 900 + 5 * rng.next_range(17) as u32;
            let mut levels = Vec::new();
            for i in 0..n_levels {
                let v = start - 5 * i;
                let mut counts = EffectCounts { n_runs: 5, ..Default::default() };
                // Push abnormality probability up as voltage drops so
                // all three regions occur often; keep pure-random cases
                // too (including zero-width-safe and non-monotone SC).
                let bias = i as u64 + 1;
                for e in Effect::ALL {
                    let p_num = match case % 3 {
                        0 => bias,                    // depth-biased
                        1 => 2,                       // uniform sparse
                        _ => 5 * (e == Effect::Sc) as u64 + 1, // SC-heavy
                    };
                    if rng.next_range(4 * n_levels as u64) < p_num {
                        *counts.count_mut(e) = 1 + rng.next_range(5) as u32;
                    }
                }
                levels.push((v, counts));
            }
            // Force the special shapes periodically.
            if case % 50 == 0 {
                levels[0].1.ce = 1; // zero-width safe region
            }
            if case % 70 == 0 && levels.len() >= 3 {
                levels[1].1.sc = 2; // non-monotone: SC above an SC-free level
                levels.last_mut().unwrap().1.sc = 0;
            }

            let aggs = aggregate_from_counts(&levels);
            let refs: Vec<_> = aggs.iter().collect();
            let row = classify_regions("b", "core0", 2400, &refs, 980).unwrap();
            let want = region_oracle(&levels);
            assert_eq!(row.per_voltage, want, "case {case}: {levels:?}");

            // Cross-check the summary fields against the oracle map.
            let oracle_floor = want
                .iter()
                .filter(|(_, r)| *r == Region::Safe)
                .map(|(v, _)| *v)
                .min();
            let oracle_ceiling = levels
                .iter()
                .filter(|(_, c)| c.sc > 0)
                .map(|(v, _)| *v)
                .max();
            assert_eq!(row.safe_floor_mv, oracle_floor, "case {case}");
            assert_eq!(row.crash_ceiling_mv, oracle_ceiling, "case {case}");
        }
    });
}

// ---------------------------------------------------------------- 6 --

#[test]
fn acceptance_6_simulator_fidelity() {
    criterion(6, "simulator-fidelity", Duration::from_secs(60), || {
        let model = FaultModel::new(FaultModelConfig { seed: 9, ..Default::default() }, 8);
        let w = SeverityWeights::default();
        let setup_at = |v: u32| CharacterizationSetup {
            benchmark_id: "matmul".into(),
            selection: CoreSelection::single(2),
            vf: VFPoint::new(v, 2400),
        };

        // Monte Carlo agreement at 10 voltage points spanning the band.
        for (pi, v) in (865..=955).step_by(10).enumerate() {
            let setup = setup_at(v);
            let analytic = expected_severity(&model, &setup, &w);
            let n = 100_000u64;
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for i in 0..n {
                let key = RunKey { seed: 77, campaign: pi as u64, run_index: i };
                let sv: f64 = sample_observed(&model, &setup, key)
                    .iter()
                    .map(|e| w.weight(e))
                    .sum();
                sum += sv;
                sumsq += sv * sv;
            }
            let mean = sum / n as f64;
            let var = (sumsq / n as f64 - mean * mean).max(0.0);
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - analytic).abs() <= 3.0 * se + 1e-9,
                "v={v}: analytic {analytic}, mc {mean}, se {se}"
            );
        }

        // Monotonicity: the sampled per-effect frequency (before
        // masking) never increases as voltage increases.
        for (ei, e) in Effect::ALL.into_iter().enumerate() {
            let mut prev = f64::INFINITY;
            for v in (850..=980).step_by(5) {
                let setup = setup_at(v);
                let hits = (0..20_000u64)
                    .filter(|&i| {
                        model
                            .sample_raw(&setup, RunKey { seed: 13, campaign: ei as u64, run_index: i })
                            .contains(e)
                    })
                    .count();
                let freq = hits as f64 / 20_000.0;
                assert!(
                    freq <= prev,
                    "{} frequency rose from {prev} to {freq} at {v} mV",
                    e.name()
                );
                prev = freq;
            }
        }
    });
}

// ---------------------------------------------------------------- 7 --

#[test]
fn acceptance_7_end_to_end_figure_shape() {
    criterion(7, "end-to-end-figure-shape", Duration::from_secs(120), || {
        let dir = tempfile::tempdir().unwrap();
        let cfg = CampaignConfig {
            benchmarks: vec![BenchmarkConfig {
                id: "matmul".into(),
                command: "./matmul".into(),
                input: None,
                golden_output_path: None,
                nominal_duration_ms: 1000,
            }],
            v_start_mv: 980,
            v_floor_mv: 860,
            v_step_mv: None,
            frequencies_mhz: vec![2400],
            selections: (0..8).map(|c| SelectionConfig::SingleCore { core: c }).collect(),
            repeats: 3,
            seed: 2024,
            output_root: dir.path().to_path_buf(),
            chip: None,
            fault_model: Default::default(),
            weights: Default::default(),
            virtual_clock: true,
            ping_interval_ms: 1000,
            timeout_multiplier: 2,
        };
        let mut runner = CampaignRunner::from_config(cfg).unwrap();
        runner.run(None).unwrap();

        let (runs, warnings) = parse_output_tree(dir.path()).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(runs.len(), 8 * 25 * 3);
        let aggs = aggregate(&runs, &Default::default()).unwrap();

        // Every core shows the SAFE -> UNSAFE -> CRASH ordering.
        let mut ceilings = BTreeSet::new();
        for core in 0..8 {
            let sel = format!("core{core}");
            let refs: Vec<_> = aggs.iter().filter(|a| a.key.selection == sel).collect();
            let row = classify_regions("matmul", &sel, 2400, &refs, 980).unwrap();
            let floor = row.safe_floor_mv.unwrap_or_else(|| panic!("{sel}: no safe region"));
            let ceiling = row
                .crash_ceiling_mv
                .unwrap_or_else(|| panic!("{sel}: no crash region"));
            assert!(
                row.per_voltage.iter().any(|(_, r)| *r == Region::Unsafe),
                "{sel}: no unsafe region"
            );
            assert!(floor > ceiling, "{sel}: regions out of order");
            // Ordering along the descending grid must be monotone:
            // Safe block, then Unsafe block, then Crash block.
            let ranks: Vec<u8> = row
                .per_voltage
                .iter()
                .map(|(_, r)| match r {
                    Region::Safe => 0,
                    Region::Unsafe => 1,
                    Region::Crash => 2,
                })
                .collect();
            assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{sel}: {ranks:?}");
            ceilings.insert(ceiling);
        }
        assert!(
            ceilings.len() >= 2,
            "core-to-core variation missing: all crash ceilings equal"
        );

        // The independently parsed effect sets agree with what the
        // orchestrator journaled, for 100% of runs.
        let records = Journal::load(&dir.path().join("journal.log")).unwrap();
        let journaled: BTreeMap<u64, EffectSet> = records
            .iter()
            .filter(|r| r.status == RunStatus::Completed)
            .map(|r| (r.run_id, r.effects))
            .collect();
        assert_eq!(journaled.len(), runs.len());
        for run in &runs {
            let id = run.run_id.expect("run id in watchdog log");
            assert_eq!(
                run.effects,
                journaled[&id],
                "run {id}: parsed effects disagree with the journal"
            );
        }
    });
}
