//! Acceptance run. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails. Sizes, limits and tolerances are
//! the constants below.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bt_explain::batch::{run_batch, BatchConfig, InstanceRecord, Mode};
use bt_explain::bounds::{forest_bound, tree_bound, Direction};
use bt_explain::domain::Restriction;
use bt_explain::fixtures::*;
use bt_explain::io::{instances, native, xgboost};
use bt_explain::oracle::DEFAULT_BRUTEFORCE_CAP;
use bt_explain::synth::{random_instance, random_model, SynthConfig};
use bt_explain::*;

const GOLDEN_RUNTIME: Duration = Duration::from_secs(1);

const DISCREPANCY_SIZES: [usize; 3] = [1, 3, 8];
const DISCREPANCY_SEEDS: u64 = 100;
const DISCREPANCY_RUNTIME: Duration = Duration::from_secs(5);

const CORPUS_MODELS: u64 = 1000;
const CORPUS_MAX_PER_KIND: usize = 5;
const CORPUS_MAX_ATTRIBUTES: usize = 7;
const CORPUS_MAX_TREES: usize = 6;
const CORPUS_MAX_DEPTH: usize = 4;
const INSTANCES_PER_MODEL: usize = 10;
const MIN_TRIPLES: usize = 10_000;

const DOMINANCE_MODELS: u64 = 50;
const DOMINANCE_ATTRIBUTES: usize = 50;
const DOMINANCE_TREES: usize = 200;
const DOMINANCE_DEPTH: usize = 3;
const DOMINANCE_INSTANCE_LIMIT: Duration = Duration::from_secs(10);
const DOMINANCE_RUNTIME: Duration = Duration::from_secs(600);

const SCALING_TRIALS: u64 = 20;
const SCALING_ATTRIBUTES: usize = 50;
const SCALING_INSTANCES: usize = 10;
const SCALING_REPEATS: usize = 5;
const SCALING_MAX_RATIO: f64 = 2.5;

const XGB_MARGIN_TOLERANCE: f64 = 1e-4;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(name: &'static str, failures: Vec<String>, summary: String) -> Self {
        let pass = failures.is_empty();
        let detail = if pass {
            summary
        } else {
            format!("{summary}; {}", failures.join("; "))
        };
        Outcome { name, pass, detail }
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn tree_order_sum(ws: &[f64]) -> f64 {
    ws.iter().fold(0.0, |acc, w| acc + w)
}

fn running_instance(bt: &BoostedTree, a1: f64, a2: f64, a3: usize, a4: bool) -> Instance {
    Instance::new(
        bt.schema(),
        vec![Value::Number(a1), Value::Number(a2), Value::Category(a3), Value::Bool(a4)],
    )
    .unwrap()
}

fn golden_running_example() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let bt = running_example();
    match native::load(fixture("running_example.json")) {
        Ok(loaded) if loaded == bt => {}
        Ok(_) => fails.push("running_example.json differs from the built-in model".into()),
        Err(e) => fails.push(format!("running_example.json: {e}")),
    }
    let x = running_example_instance(&bt);
    let per_tree: Vec<f64> = bt.forests()[0].trees.iter().map(|t| t.eval(&x)).collect();
    if per_tree != [0.3, 0.5, 0.1] {
        fails.push(format!("tree weights {per_tree:?}"));
    }
    let w = bt.forests()[0].eval(&x);
    if w.to_bits() != tree_order_sum(&[0.3, 0.5, 0.1]).to_bits() {
        fails.push(format!("forest weight {w}"));
    }
    if bt.classify(&x) != 1 {
        fails.push("class of x".into());
    }
    // Extensions of {A1 = 4, A4 = 1}: A2 <= 1 or > 1, A3 = b or not.
    let cells: [((f64, usize), [f64; 3], f64); 4] = [
        ((1.0, 1), [0.4, 0.3, 0.2], 0.9),
        ((1.0, 0), [0.4, 0.3, -0.4], 0.3),
        ((3.0, 1), [-0.3, 0.5, 0.3], 0.5),
        ((3.0, 0), [0.3, 0.5, 0.1], 0.9),
    ];
    let mut forest = Vec::new();
    let mut max_ulps = 0u64;
    for ((a2, a3), trees, decimal) in cells {
        let z = running_instance(&bt, 4.0, a2, a3, true);
        let got: Vec<f64> = bt.forests()[0].trees.iter().map(|t| t.eval(&z)).collect();
        if got != trees {
            fails.push(format!("cell ({a2}, {a3}) tree weights {got:?}"));
        }
        let w = bt.forests()[0].eval(&z);
        if w.to_bits() != tree_order_sum(&trees).to_bits() {
            fails.push(format!("cell ({a2}, {a3}) forest weight {w}"));
        }
        max_ulps = max_ulps.max(w.to_bits().abs_diff(f64::to_bits(decimal)));
        forest.push(w);
    }
    let t = Term::from_indices([0, 3]);
    match is_abductive_bruteforce(&bt, &x, &t, DEFAULT_BRUTEFORCE_CAP) {
        Ok(v) if v.status == OracleStatus::Proved
            && v.optimal_margin == forest.iter().copied().reduce(f64::min) => {}
        other => fails.push(format!("enumeration of the four cells: {other:?}")),
    }
    let elapsed = start.elapsed();
    if elapsed >= GOLDEN_RUNTIME {
        fails.push(format!("runtime {elapsed:?}"));
    }
    Outcome::new(
        "1 running-example goldens",
        fails,
        format!(
            "tree weights (0.3, 0.5, 0.1), class 1, cell weights {forest:?} \
             (tree-order f64 sums; {max_ulps} ulp from the decimal values), {elapsed:?}"
        ),
    )
}

fn golden_bounds() -> Outcome {
    let mut fails = Vec::new();
    let bt = running_example();
    let x = running_example_instance(&bt);
    let forest = &bt.forests()[0];
    let mut summary = Vec::new();
    for (t, expected) in [
        (Term::from_indices([0, 3]), [-0.3, 0.3, -0.4]),
        (Term::from_indices([1, 3]), [-0.3, 0.5, 0.1]),
    ] {
        let r = Restriction::of_term(bt.schema(), &x, &t);
        let got: Vec<f64> = forest.trees.iter().map(|tr| tree_bound(tr, &r, Direction::Min).weight).collect();
        let reference: Vec<f64> = (0..forest.trees.len())
            .map(|k| common::reference_tree_range(&bt, 0, k, &x, &t).0)
            .collect();
        if got != expected || reference != expected {
            fails.push(format!("t = {:?}: bounds {got:?}, enumerated {reference:?}", t.to_vec()));
        }
        let sum = forest_bound(forest, &r, Direction::Min);
        if sum.to_bits() != tree_order_sum(&expected).to_bits() {
            fails.push(format!("t = {:?}: sum {sum}", t.to_vec()));
        }
        summary.push(format!("{:?} -> {got:?} sum {sum}", t.to_vec()));
    }
    Outcome::new("2 bounds goldens", fails, summary.join(", "))
}

fn discrepancy() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    for n in DISCREPANCY_SIZES {
        let bt = discrepancy_model(n);
        let x = discrepancy_instance(&bt);
        for seed in 0..DISCREPANCY_SEEDS {
            let t = ts_explain(&bt, &x, &EliminationOrder::random(n, seed, 0));
            if t != Term::full(n) {
                fails.push(format!("n = {n}, seed {seed}: TS kept {:?}", t.to_vec()));
            }
        }
        let ts = TsConfig {
            runs: DISCREPANCY_SEEDS as usize,
            ..TsConfig::default()
        };
        match ts_sr_pipeline(&bt, &x, &ts, &SrConfig::default()) {
            Ok(out) if out.sr.term.is_empty() && out.sr.minimal_proved => {}
            other => fails.push(format!("n = {n}: pipeline {other:?}")),
        }
        if !common::reference_check(&bt, &x, &Term::empty()).abductive {
            fails.push(format!("n = {n}: empty term not abductive by enumeration"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= DISCREPANCY_RUNTIME {
        fails.push(format!("runtime {elapsed:?}"));
    }
    Outcome::new(
        "3 discrepancy",
        fails,
        format!(
            "n in {DISCREPANCY_SIZES:?}: TS keeps all n over {DISCREPANCY_SEEDS} orderings, \
             pipeline returns the empty term with minimality proved, {elapsed:?}"
        ),
    )
}

fn corpus_config(rng: &mut ChaCha8Rng) -> SynthConfig {
    let (numerical, categorical, boolean) = loop {
        let k = [0; 3].map(|_| rng.random_range(0..=CORPUS_MAX_PER_KIND));
        let total: usize = k.iter().sum();
        if (1..=CORPUS_MAX_ATTRIBUTES).contains(&total) {
            break (k[0], k[1], k[2]);
        }
    };
    SynthConfig {
        numerical,
        categorical,
        boolean,
        categories: rng.random_range(2..=4),
        classes: if rng.random_bool(0.3) { 3 } else { 2 },
        trees_per_forest: rng.random_range(1..=CORPUS_MAX_TREES),
        max_depth: rng.random_range(1..=CORPUS_MAX_DEPTH),
        ..SynthConfig::small()
    }
}

#[derive(Default)]
struct CorpusStats {
    ts_checked: usize,
    ts_failures: Vec<String>,
    triples: usize,
    proved: usize,
    disproved: usize,
    margins_compared: usize,
    oracle_failures: Vec<String>,
    sr_results: usize,
    sr_minimal: usize,
    sr_failures: Vec<String>,
}

impl CorpusStats {
    fn merge(mut self, o: CorpusStats) -> CorpusStats {
        self.ts_checked += o.ts_checked;
        self.ts_failures.extend(o.ts_failures);
        self.triples += o.triples;
        self.proved += o.proved;
        self.disproved += o.disproved;
        self.margins_compared += o.margins_compared;
        self.oracle_failures.extend(o.oracle_failures);
        self.sr_results += o.sr_results;
        self.sr_minimal += o.sr_minimal;
        self.sr_failures.extend(o.sr_failures);
        self
    }
}

fn corpus_model(seed: u64) -> CorpusStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = corpus_config(&mut rng);
    let bt = random_model(&cfg, &mut rng);
    let n = bt.schema().len();
    let mut s = CorpusStats::default();
    let brute = |x: &Instance, t: &Term| {
        is_abductive_bruteforce(&bt, x, t, DEFAULT_BRUTEFORCE_CAP).expect("within the cap")
    };
    for i in 0..INSTANCES_PER_MODEL {
        let tag = format!("model {seed} instance {i}");
        let x = random_instance(&cfg, bt.schema(), &mut rng);
        let class = bt.classify(&x);

        let order = EliminationOrder::random(n, seed, i as u64);
        let ts = ts_explain(&bt, &x, &order);
        s.ts_checked += 1;
        if brute(&x, &ts).status != OracleStatus::Proved
            || !common::reference_check(&bt, &x, &ts).abductive
        {
            s.ts_failures.push(format!("{tag}: TS term {:?}", ts.to_vec()));
        }

        let t = Term::from_indices((0..n).filter(|_| rng.random_bool(0.5)));
        let b = brute(&x, &t);
        let reference = common::reference_check(&bt, &x, &t);
        let decide = is_abductive(&bt, &x, &t, &OracleConfig::unlimited()).unwrap();
        let minimize = is_abductive(&bt, &x, &t, &OracleConfig::unlimited().minimize()).unwrap();
        s.triples += 1;
        let mut bad = Vec::new();
        if b.abductive() != Some(reference.abductive) {
            bad.push("enumeration disagrees with the reference");
        }
        if decide.status != b.status || minimize.status != b.status {
            bad.push("verdict");
        }
        for v in [&decide, &minimize] {
            if let Some(z) = &v.counterexample {
                if !common::extends(z, &x, &t) || bt.classify(z) == class {
                    bad.push("counterexample");
                }
            }
        }
        match b.status {
            OracleStatus::Proved => s.proved += 1,
            _ => s.disproved += 1,
        }
        if b.status == OracleStatus::Proved && bt.is_binary() && class == 1 {
            s.margins_compared += 1;
            if minimize.optimal_margin != b.optimal_margin
                || b.optimal_margin != Some(reference.min_margin)
            {
                bad.push("optimal margin");
            }
        }
        if !bad.is_empty() {
            s.oracle_failures.push(format!("{tag} t {:?}: {}", t.to_vec(), bad.join(", ")));
        }

        let sr = sr_explain(&bt, &x, &Term::full(n), order.as_slice(), &SrConfig::default()).unwrap();
        s.sr_results += 1;
        if sr.minimal_proved {
            s.sr_minimal += 1;
            let removable = sr
                .term
                .iter()
                .filter(|&j| brute(&x, &sr.term.without(j)).status != OracleStatus::Disproved)
                .count();
            if brute(&x, &sr.term).status != OracleStatus::Proved || removable > 0 {
                s.sr_failures.push(format!("{tag}: SR term {:?}", sr.term.to_vec()));
            }
        }
    }
    s
}

fn corpus() -> [Outcome; 3] {
    let start = Instant::now();
    let s = (0..CORPUS_MODELS)
        .into_par_iter()
        .map(corpus_model)
        .reduce(CorpusStats::default, CorpusStats::merge);
    let elapsed = start.elapsed();
    let first = |v: &[String]| v.iter().take(5).cloned().collect::<Vec<_>>();
    let mut ts_fails = first(&s.ts_failures);
    if s.ts_checked < CORPUS_MODELS as usize {
        ts_fails.push(format!("only {} outputs", s.ts_checked));
    }
    let mut oracle_fails = first(&s.oracle_failures);
    if s.triples < MIN_TRIPLES {
        oracle_fails.push(format!("only {} triples", s.triples));
    }
    let mut sr_fails = first(&s.sr_failures);
    if s.sr_minimal == 0 {
        sr_fails.push("no result with minimality proved".into());
    }
    [
        Outcome::new(
            "4 tree-specific explanations are abductive",
            ts_fails,
            format!(
                "{} outputs over {CORPUS_MODELS} models, {} failures, {elapsed:?} for the corpus",
                s.ts_checked,
                s.ts_failures.len()
            ),
        ),
        Outcome::new(
            "5 oracle equivalence",
            oracle_fails,
            format!(
                "{} triples ({} proved, {} disproved), {} optimal margins compared, {} disagreements",
                s.triples,
                s.proved,
                s.disproved,
                s.margins_compared,
                s.oracle_failures.len()
            ),
        ),
        Outcome::new(
            "6 minimality certificate",
            sr_fails,
            format!(
                "{} of {} SR results proved minimal, {} failures",
                s.sr_minimal,
                s.sr_results,
                s.sr_failures.len()
            ),
        ),
    ]
}

fn batch_record(bt: &BoostedTree, x: &Instance, mode: Mode, base: &BatchConfig) -> InstanceRecord {
    let cfg = BatchConfig { mode, ..base.clone() };
    let mut report = run_batch(bt, std::slice::from_ref(x), None, &cfg).unwrap();
    report.records.remove(0)
}

fn dominance() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let cfg = SynthConfig::boosting_like(DOMINANCE_ATTRIBUTES, DOMINANCE_TREES, DOMINANCE_DEPTH);
    let (mut sr_calls, mut sr_time, mut ts_sr_calls, mut ts_sr_time) = (0usize, 0.0, 0usize, 0.0);
    let (mut sr_size, mut ts_sr_size, mut ts_size, mut timeouts) = (0usize, 0usize, 0usize, 0usize);
    let mut faster = 0;
    for seed in 0..DOMINANCE_MODELS {
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + seed);
        let bt = random_model(&cfg, &mut rng);
        let x = random_instance(&cfg, bt.schema(), &mut rng);
        let mut sr = SrConfig {
            time_limit: Some(DOMINANCE_INSTANCE_LIMIT),
            ordering: OrderingPolicy::Random,
            seed,
            ..SrConfig::default()
        };
        sr.oracle.time_limit = Some(DOMINANCE_INSTANCE_LIMIT);
        let base = BatchConfig {
            mode: Mode::Sr,
            ts: TsConfig {
                seed,
                ..TsConfig::default()
            },
            sr,
            parallel: false,
        };
        let a = batch_record(&bt, &x, Mode::Sr, &base);
        let b = batch_record(&bt, &x, Mode::TsSr, &base);
        let c = batch_record(&bt, &x, Mode::Ts, &base);
        for r in [&a, &b, &c] {
            if let Some(e) = &r.error {
                fails.push(format!("model {seed}: {e}"));
            }
        }
        sr_calls += a.oracle.as_ref().map_or(0, |o| o.calls);
        ts_sr_calls += b.oracle.as_ref().map_or(0, |o| o.calls);
        sr_time += a.elapsed_secs;
        ts_sr_time += b.elapsed_secs;
        faster += usize::from(b.elapsed_secs <= a.elapsed_secs);
        timeouts += usize::from(a.timed_out) + usize::from(b.timed_out);
        sr_size += a.size;
        ts_sr_size += b.size;
        ts_size += c.size;
        if c.size < b.size || c.reduction_rate < 0.0 {
            fails.push(format!("model {seed}: TS size {} below pipeline size {}", c.size, b.size));
        }
    }
    let m = DOMINANCE_MODELS as f64;
    let (sr_calls, ts_sr_calls) = (sr_calls as f64 / m, ts_sr_calls as f64 / m);
    let (sr_time, ts_sr_time) = (sr_time / m, ts_sr_time / m);
    if ts_sr_calls > sr_calls {
        fails.push("mean oracle calls of ts-sr exceed sr".into());
    }
    if ts_sr_time > sr_time {
        fails.push("mean wall time of ts-sr exceeds sr".into());
    }
    let elapsed = start.elapsed();
    if elapsed >= DOMINANCE_RUNTIME {
        fails.push(format!("runtime {elapsed:?}"));
    }
    Outcome::new(
        "7 pipeline dominance",
        fails,
        format!(
            "{DOMINANCE_MODELS} models of {DOMINANCE_TREES} trees x {DOMINANCE_ATTRIBUTES} attributes: \
             mean calls sr {sr_calls:.1} / ts-sr {ts_sr_calls:.1}, \
             mean time sr {sr_time:.3}s / ts-sr {ts_sr_time:.3}s (ts-sr not slower on {faster}), \
             mean size sr {:.2} / ts-sr {:.2} / ts {:.2}, {timeouts} timed-out runs, {elapsed:?}",
            sr_size as f64 / m,
            ts_sr_size as f64 / m,
            ts_size as f64 / m
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

fn ts_time(trees: usize, seed: u64) -> (f64, usize) {
    let cfg = SynthConfig::boosting_like(SCALING_ATTRIBUTES, trees, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bt = random_model(&cfg, &mut rng);
    let xs: Vec<Instance> = (0..SCALING_INSTANCES)
        .map(|_| random_instance(&cfg, bt.schema(), &mut rng))
        .collect();
    let order = EliminationOrder::identity(SCALING_ATTRIBUTES);
    let best = (0..SCALING_REPEATS)
        .map(|_| {
            let start = Instant::now();
            for x in &xs {
                std::hint::black_box(ts_explain(&bt, x, &order));
            }
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min);
    (best, bt.size())
}

fn scaling() -> Outcome {
    let (mut small, mut large, mut small_nodes, mut large_nodes) = (Vec::new(), Vec::new(), 0, 0);
    for trial in 0..SCALING_TRIALS {
        let (t, s) = ts_time(100, 8_000 + trial);
        small.push(t);
        small_nodes += s;
        let (t, s) = ts_time(200, 9_000 + trial);
        large.push(t);
        large_nodes += s;
    }
    let (a, b) = (median(small), median(large));
    let ratio = b / a;
    let fails = if ratio <= SCALING_MAX_RATIO {
        Vec::new()
    } else {
        vec![format!("ratio above {SCALING_MAX_RATIO}")]
    };
    Outcome::new(
        "8 TS scaling",
        fails,
        format!(
            "median time 100 trees {:.3}ms, 200 trees {:.3}ms, ratio {ratio:.2} \
             (node ratio {:.2}) over {SCALING_TRIALS} trials",
            a * 1e3,
            b * 1e3,
            large_nodes as f64 / small_nodes as f64
        ),
    )
}

fn xgboost_interop() -> Outcome {
    let mut fails = Vec::new();
    let mut summary = Vec::new();
    for name in ["iris", "breast_cancer"] {
        let bt = match xgboost::load(fixture(&format!("xgboost/{name}.model.json")), &xgboost::XgbOptions::default()) {
            Ok(bt) => bt,
            Err(e) => {
                fails.push(format!("{name}: {e}"));
                continue;
            }
        };
        let xs = instances::load(bt.schema(), fixture(&format!("xgboost/{name}.instances.csv"))).unwrap();
        let mut reader = csv::Reader::from_path(fixture(&format!("xgboost/{name}.predictions.csv"))).unwrap();
        let rows: Vec<Vec<f64>> = reader
            .records()
            .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
            .collect();
        if rows.len() != xs.len() {
            fails.push(format!("{name}: {} predictions for {} instances", rows.len(), xs.len()));
            continue;
        }
        let mut agree = 0;
        let mut max_err: f64 = 0.0;
        for (x, row) in xs.iter().zip(&rows) {
            agree += usize::from(bt.classify(x) as f64 == row[0]);
            for (w, m) in bt.forest_weights(x).iter().zip(&row[1..]) {
                max_err = max_err.max((w - m).abs());
            }
        }
        if agree != xs.len() {
            fails.push(format!("{name}: {} disagreements", xs.len() - agree));
        }
        if max_err > XGB_MARGIN_TOLERANCE {
            fails.push(format!("{name}: margin error {max_err:e}"));
        }
        summary.push(format!("{name} {agree}/{} (max margin error {max_err:.1e})", xs.len()));
    }
    Outcome::new("9 XGBoost interop", fails, summary.join(", "))
}

fn report(o: &Outcome) -> bool {
    println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    o.pass
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    for run in [golden_running_example, golden_bounds, discrepancy] {
        results.push(report(&run()));
    }
    for o in corpus() {
        results.push(report(&o));
    }
    for run in [dominance, scaling, xgboost_interop] {
        results.push(report(&run()));
    }
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
