//! Release gate: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::time::Instant;

use cbrne_core::geo::EnuPoint;
use cbrne_core::inference::{build_model, Category, Evidence, ModelConfig, SubstanceConfig};
use cbrne_core::protocol::{
    decode, encode, validate, AgentStatus, DetectionBody, Envelope, EvidenceBody, HeartbeatBody, MessageType, MsgIdGen,
    SensorReadingBody, StatusBody, HUB,
};
use cbrne_core::retrieval::{expand_query, index_corpus, load_corpus, rank, rerank_on_event, tokenize, Document, KeywordStream};
use cbrne_core::retrieval::WeightedQuery as Query;
use cbrne_core::scene::{build_scene, Cell, HazardKind, HazardSource, SceneConfig, TerrainCell, TerrainClass, TerrainGrid};
use cbrne_core::survey::{optimal_routes_bruteforce, plan_greedy_routes, plan_ground_path, GridIndex, GridPoint, PlanError, RoutePlan};
use cbrne_core::{BeliefState, GeoPoint, Index, Scene, SynonymSet};
use cbrne_hub::log::read_log;
use cbrne_hub::{run_headless, Hub, RunOptions};
use cbrne_testkit::{
    greedy_routes, joint_table_posterior, random_costs, random_distribution, random_points, random_starts,
    relaxed_path_cost, workspace_root, PlainModel, PlainPoint,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn to_grid(points: &[PlainPoint]) -> Vec<GridPoint<f64>> {
    points
        .iter()
        .map(|&(row, col, p)| GridPoint { index: GridIndex { row, col }, position: EnuPoint::new(p[0], p[1], p[2]) })
        .collect()
}

fn to_starts(starts: &[[f64; 3]]) -> Vec<EnuPoint<f64>> {
    starts.iter().map(|s| EnuPoint::new(s[0], s[1], s[2])).collect()
}

fn indices(plan: &RoutePlan<f64>) -> Vec<Vec<(u32, u32)>> {
    plan.routes.iter().map(|r| r.points.iter().map(|p| (p.index.row, p.index.col)).collect()).collect()
}

fn exact_cover(plan: &RoutePlan<f64>, points: &[GridPoint<f64>]) -> bool {
    let mut seen = BTreeSet::new();
    let unique = plan.routes.iter().flat_map(|r| &r.points).all(|p| seen.insert(p.index));
    unique && seen == points.iter().map(|p| p.index).collect()
}

fn greedy_planner() -> Outcome {
    let t0 = Instant::now();
    let mut rng = cbrne_testkit::rng(2024);
    for case in 0..100 {
        let n = rng.random_range(0..=50);
        let agents = rng.random_range(1..=5);
        let pts = random_points(&mut rng, n, 300.0);
        let starts = random_starts(&mut rng, agents, 300.0);
        let grid = to_grid(&pts);
        let plan = plan_greedy_routes(&grid, &to_starts(&starts)).map_err(|e| format!("case {case}: {e}"))?;
        check(exact_cover(&plan, &grid), || format!("case {case}: not an exact cover"))?;
        check(indices(&plan) == greedy_routes(&pts, &starts), || format!("case {case}: differs from stepwise oracle"))?;
    }
    let secs = t0.elapsed().as_secs_f64();
    check(secs < 1.0, || format!("took {secs:.3} s"))?;
    Ok(format!("100 instances equal to oracle in {secs:.3} s"))
}

fn greedy_vs_optimal() -> Outcome {
    let mut rng = cbrne_testkit::rng(77);
    let mut worst: f64 = 1.0;
    for case in 0..50 {
        let n = rng.random_range(1..=8);
        let agents = rng.random_range(1..=3);
        let pts = to_grid(&random_points(&mut rng, n, 100.0));
        let starts = to_starts(&random_starts(&mut rng, agents, 100.0));
        let greedy = plan_greedy_routes(&pts, &starts).map_err(|e| e.to_string())?;
        let best = optimal_routes_bruteforce(&pts, &starts).map_err(|e| e.to_string())?;
        check(greedy.makespan_m >= best.makespan_m, || {
            format!("case {case}: greedy {} below optimal {}", greedy.makespan_m, best.makespan_m)
        })?;
        worst = worst.max(greedy.makespan_m / best.makespan_m);
    }
    let pts = [(10.0, 0), (20.0, 1), (90.0, 2), (80.0, 3)]
        .map(|(e, col)| GridPoint { index: GridIndex { row: 0, col }, position: EnuPoint::new(e, 0.0, 0.0) });
    let starts = [EnuPoint::origin(), EnuPoint::new(100.0, 0.0, 0.0)];
    let plan = plan_greedy_routes(&pts, &starts).map_err(|e| e.to_string())?;
    let routes = indices(&plan);
    check(routes == vec![vec![(0, 0), (0, 1)], vec![(0, 2), (0, 3)]], || format!("worked example routes {routes:?}"))?;
    check(plan.makespan_m == 20.0, || format!("worked example makespan {}", plan.makespan_m))?;
    Ok(format!("50 instances, worst ratio {worst:.4}; worked example A:[P1,P2] B:[P3,P4] makespan 20"))
}

fn random_model(rng: &mut ChaCha8Rng) -> (ModelConfig<f64>, PlainModel, Vec<String>) {
    let n_cat = rng.random_range(1..=4);
    let mut used: Vec<Category> = Category::ALL.to_vec();
    used.shuffle(rng);
    used.truncate(n_cat);
    used.sort();
    let weights = random_distribution(rng, n_cat);
    let mut priors = [0.0; 4];
    for (c, w) in used.iter().zip(&weights) {
        priors[c.index()] = *w;
    }
    let total: f64 = priors.iter().sum();
    priors[used[0].index()] += 1.0 - total;

    let mut substances = Vec::new();
    let mut plain_subs = Vec::new();
    for c in Category::ALL {
        let k = rng.random_range(0..=2usize);
        if k == 0 {
            plain_subs.push((c.index(), 1.0));
            continue;
        }
        let mut dist = random_distribution(rng, k);
        let s: f64 = dist.iter().sum();
        dist[0] += 1.0 - s;
        for (i, p) in dist.into_iter().enumerate() {
            substances.push(SubstanceConfig { id: format!("{c}-{i}"), category: c, prior: p });
            plain_subs.push((c.index(), p));
        }
    }

    let n_vars = rng.random_range(0..=6);
    let names: Vec<String> = (0..n_vars).map(|i| format!("var{i}")).collect();
    let likelihoods: Vec<Vec<f64>> = (0..n_vars).map(|_| (0..4).map(|_| rng.random_range(0.01..0.99)).collect()).collect();
    let evidence = names
        .iter()
        .zip(&likelihoods)
        .map(|(n, row)| (n.clone(), Category::ALL.into_iter().map(|c| (c, row[c.index()])).collect()))
        .collect();
    let config = ModelConfig { categories: Category::ALL.into_iter().map(|c| (c, priors[c.index()])).collect(), substances, evidence };
    (config, PlainModel { priors: priors.to_vec(), substances: plain_subs, likelihoods }, names)
}

fn inference() -> Outcome {
    let mut rng = cbrne_testkit::rng(200);
    let mut worst = 0.0_f64;
    for case in 0..200 {
        let (config, plain, names) = random_model(&mut rng);
        let model = build_model(&config).map_err(|e| e.to_string())?;
        let m = if names.is_empty() { 0 } else { rng.random_range(0..=8) };
        let obs: Vec<(usize, bool)> = (0..m).map(|_| (rng.random_range(0..names.len()), rng.random_bool(0.5))).collect();
        let mut evidence: Vec<Evidence> =
            obs.iter().enumerate().map(|(t, (v, b))| Evidence::new(names[*v].clone(), *b, "r", t as f64)).collect();
        let belief = model.posterior(&evidence).map_err(|e| e.to_string())?;
        let (cats, _) = joint_table_posterior(&plain, &obs);
        for c in Category::ALL {
            worst = worst.max((belief.category(c) - cats[c.index()]).abs());
        }
        check(worst < 1e-9, || format!("case {case}: deviation {worst:e}"))?;
        evidence.reverse();
        check(model.posterior(&evidence).map_err(|e| e.to_string())? == belief, || format!("case {case}: order matters"))?;
        let mut state = BeliefState::new(&model);
        for e in &evidence {
            state = state.update(&model, e).map_err(|e| e.to_string())?;
        }
        check(state.belief() == &belief, || format!("case {case}: incremental differs"))?;
    }
    let cfg: ModelConfig<f64> = ModelConfig {
        categories: Category::ALL.into_iter().map(|c| (c, 0.25)).collect(),
        substances: vec![],
        evidence: [(
            "handheld_rad_positive".to_string(),
            [(Category::Radiological, 0.9), (Category::Chemical, 0.05), (Category::Biological, 0.05), (Category::None, 0.02)]
                .into_iter()
                .collect(),
        )]
        .into_iter()
        .collect(),
    };
    let model = build_model(&cfg).map_err(|e| e.to_string())?;
    let b = model
        .posterior(&[Evidence::new("handheld_rad_positive", true, "sector-b", 2.0)])
        .map_err(|e| e.to_string())?;
    let err = (b.category(Category::Radiological) - 0.9 / 1.02).abs();
    check(err < 1e-12, || format!("worked example off by {err:e}"))?;
    Ok(format!("200 pairs, worst deviation {worst:e}; worked example off by {err:e}"))
}

fn rad(e: f64, n: f64, strength: f64) -> HazardSource<f64> {
    HazardSource { kind: HazardKind::Radiological, position: EnuPoint::new(e, n, 0.0), strength, substance_id: "cs137".into() }
}

fn scene(background: f64, sources: Vec<HazardSource<f64>>) -> Result<Scene, String> {
    let mut cfg = SceneConfig::empty(GeoPoint::new(53.28, -9.05, 0.0).map_err(|e| e.to_string())?, background);
    cfg.sources = sources;
    build_scene(cfg).map_err(|e| e.to_string())
}

fn radiation_field() -> Outcome {
    let src = rad(0.0, 0.0, 100.0);
    let mut rng = cbrne_testkit::rng(11);
    let mut probes = 0;
    while probes < 1000 {
        let dir: EnuPoint<f64> = EnuPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if dir.norm_squared() < 1e-6 {
            continue;
        }
        let p = dir.scale(rng.random_range(1.0..500.0) / dir.norm_squared().sqrt());
        if p.norm_squared() < 1.0 {
            continue;
        }
        let near = Scene::source_contribution(&src, &p);
        let far = Scene::source_contribution(&src, &p.scale(2.0));
        check(far == near / 4.0, || format!("quartering fails at {p:?}"))?;
        probes += 1;
    }
    let a = rad(0.0, 0.0, 64.0);
    let b = rad(8.0, 0.0, 32.0);
    let both = scene(0.5, vec![a.clone(), b.clone()])?;
    let only_a = scene(0.5, vec![a])?;
    let only_b = scene(0.5, vec![b])?;
    for p in [EnuPoint::new(4.0, 0.0, 0.0), EnuPoint::new(0.0, 4.0, 0.0), EnuPoint::new(16.0, 0.0, 0.0)] {
        let sum = only_a.radiation_at(&p) + only_b.radiation_at(&p) - 0.5;
        check(both.radiation_at(&p) == sum, || format!("superposition fails at {p:?}"))?;
    }
    let worked = scene(0.1, vec![rad(0.0, 0.0, 100.0)])?.radiation_at(&EnuPoint::new(10.0, 0.0, 0.0));
    check(worked == 1.1, || format!("dose at 10 m is {worked}"))?;
    Ok(format!("quartering exact on {probes} probes; superposition exact; dose at 10 m = {worked}"))
}

fn relative_close(got: f64, want: f64, tol: f64) -> bool {
    if want == 0.0 {
        got == 0.0
    } else {
        ((got - want) / want).abs() <= tol
    }
}

fn tf_idf() -> Outcome {
    let docs = [
        Document::from_text("d1", "radiation source detected"),
        Document::from_text("d2", "chemical spill response"),
        Document::from_text("d3", "radiation protective equipment guidance"),
    ];
    let index: Index = index_corpus(&docs).map_err(|e| e.to_string())?;
    let path = workspace_root().join("crates/core/tests/fixtures/tfidf_oracle.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let want: f64 = cols[4].parse().map_err(|_| format!("bad row {line}"))?;
        let got = match cols[0] {
            "idf" => index.idf(cols[3]),
            "norm" => index.norm(cols[2]).ok_or_else(|| format!("no norm for {}", cols[2]))?,
            "score" => {
                let query = Query(
                    cols[1]
                        .split(';')
                        .filter_map(|p| p.split_once(':'))
                        .map(|(t, w)| (t.to_string(), w.parse().unwrap_or(f64::NAN)))
                        .collect(),
                );
                index.score(&query, cols[2])
            }
            other => return Err(format!("unknown row kind {other}")),
        };
        check(relative_close(got, want, 1e-9), || format!("{line}: got {got}"))?;
        rows += 1;
    }
    let idf_err = (index.idf("radiation") - ((4.0_f64 / 3.0).ln() + 1.0)).abs();
    check(idf_err < 1e-12, || format!("idf(radiation) off by {idf_err:e}"))?;

    let corpus = load_corpus(&workspace_root().join("corpus")).map_err(|e| e.to_string())?;
    let index: Index = index_corpus(&corpus).map_err(|e| e.to_string())?;
    let synonyms = SynonymSet::load(&workspace_root().join("synonyms.json")).map_err(|e| e.to_string())?;
    let vocab: Vec<String> = corpus.iter().flat_map(|d| tokenize(&d.body)).take(400).collect();
    let mut rng = cbrne_testkit::rng(50);
    for stream_no in 0..50 {
        let len = rng.random_range(1..20);
        let stream: Vec<String> = (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect();
        let batch = rank(&index, &expand_query(&stream, &synonyms), 10);
        let mut state = KeywordStream::default();
        let mut last = Vec::new();
        let mut rest = stream.as_slice();
        while !rest.is_empty() {
            let cut = rng.random_range(1..=rest.len());
            last = rerank_on_event(&index, &synonyms, &mut state, &rest[..cut], 10);
            rest = &rest[cut..];
        }
        check(last == batch, || format!("stream {stream_no}: incremental differs from batch"))?;
    }
    Ok(format!("{rows} oracle rows within 1e-9; 50 streams batch = incremental; idf(radiation) off by {idf_err:e}"))
}

fn random_envelope(rng: &mut ChaCha8Rng) -> Envelope {
    let position = GeoPoint { lat_deg: rng.random_range(-90.0..=90.0), lon_deg: rng.random_range(-180.0..=180.0), alt_m: rng.random_range(0.0..5000.0) };
    let label: String = (0..rng.random_range(1..12)).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
    let status = AgentStatus::ALL[rng.random_range(0..AgentStatus::ALL.len())].as_str().to_string();
    let (kind, body) = match rng.random_range(0..5) {
        0 => (
            MessageType::Heartbeat,
            serde_json::to_value(HeartbeatBody { battery_pct: rng.random_range(0.0..=100.0), position, status }),
        ),
        1 => (
            MessageType::SensorReading,
            serde_json::to_value(SensorReadingBody { kind: "radiation_dose".into(), value: rng.random_range(0.0..1e6), seq: rng.random(), position }),
        ),
        2 => {
            let (x, y) = (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
            let bbox = [x, y, x + rng.random_range(0.5..24.0), y + rng.random_range(0.5..24.0)];
            let confidence = rng.random_range(0.001..=1.0);
            (MessageType::Detection, serde_json::to_value(DetectionBody { capture_id: "rav-1-cap-0".into(), label, confidence, bbox, position }))
        }
        3 => (MessageType::Evidence, serde_json::to_value(EvidenceBody { variable: label, value: rng.random(), region_id: "r".into() })),
        _ => (
            MessageType::Status,
            serde_json::to_value(StatusBody { status, battery_pct: rng.random_range(0.0..=100.0), reason: label }),
        ),
    };
    let id = MsgIdGen::new(rng.random()).next_id();
    Envelope::new(id, rng.random_range(0.0..1e7), format!("rav-{}", rng.random_range(1..50)), HUB, kind, &body.unwrap_or(Value::Null))
}

fn mutate(rng: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    let mut out = seed.to_vec();
    for _ in 0..rng.random_range(1..8) {
        if out.is_empty() {
            out.push(rng.random());
            continue;
        }
        let at = rng.random_range(0..out.len());
        match rng.random_range(0..4) {
            0 => out[at] = rng.random(),
            1 => {
                out.remove(at);
            }
            2 => out.insert(at, b"{}[]\",:0-e.9"[rng.random_range(0..12)]),
            _ => out.truncate(at),
        }
    }
    out
}

fn protocol() -> Outcome {
    let dir = workspace_root().join("protocol/golden");
    let mut goldens = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.to_string_lossy().ends_with(".golden.json") {
            goldens.push((path.clone(), std::fs::read(&path).map_err(|e| e.to_string())?));
        }
    }
    check(goldens.len() == MessageType::ALL.len(), || format!("{} golden files", goldens.len()))?;
    for (path, bytes) in &goldens {
        let msg = decode(bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        let again = encode(&msg).map_err(|e| format!("{}: {e}", path.display()))?;
        check(&again == bytes, || format!("{} does not round-trip", path.display()))?;
    }

    let mut rng = cbrne_testkit::rng(10_000);
    for case in 0..10_000 {
        let msg = random_envelope(&mut rng);
        check(validate(&msg).is_ok(), || format!("case {case}: generated message invalid"))?;
        let bytes = encode(&msg).map_err(|e| format!("case {case}: {e}"))?;
        let back = decode(&bytes).map_err(|e| format!("case {case}: {e}"))?;
        check(back == msg, || format!("case {case}: structure changed"))?;
    }

    let seeds: Vec<Vec<u8>> = goldens.into_iter().map(|(_, b)| b).collect();
    let mut rng = cbrne_testkit::rng(0xF022);
    for i in 0..100_000 {
        let input: Vec<u8> = if i % 4 == 0 {
            (0..rng.random_range(0..64)).map(|_| rng.random()).collect()
        } else {
            let pick = rng.random_range(0..seeds.len());
            mutate(&mut rng, &seeds[pick])
        };
        let outcome = std::panic::catch_unwind(|| {
            if let Ok(msg) = decode(&input) {
                let _ = validate(&msg);
                let _ = encode(&msg);
            }
        });
        check(outcome.is_ok(), || format!("fuzz input {i} panicked"))?;
    }
    Ok(format!("{} goldens byte-identical; 10000 structural round trips; 100000 fuzz inputs without panic", seeds.len()))
}

fn grid_from(costs: &[Vec<Option<f64>>]) -> Result<TerrainGrid<f64>, String> {
    let cells = costs
        .iter()
        .flat_map(|row| {
            row.iter().map(|c| match c {
                Some(v) => TerrainCell { class: TerrainClass::Grass, cost: Some(*v) },
                None => TerrainCell { class: TerrainClass::Water, cost: None },
            })
        })
        .collect();
    let origin = GeoPoint::new(53.28, -9.05, 0.0).map_err(|e| e.to_string())?;
    TerrainGrid::from_cells(origin, 10.0, costs[0].len(), costs.len(), cells).map_err(|e| e.to_string())
}

fn ground_path() -> Outcome {
    let mut rng = cbrne_testkit::rng(7);
    let (mut reachable, mut unreachable) = (0, 0);
    for case in 0..50 {
        let mut costs = random_costs(&mut rng, 20, 20, 0.2);
        costs[0][0] = Some(1.0);
        costs[19][19] = Some(1.0);
        let oracle = relaxed_path_cost(&costs, (0, 0), (19, 19));
        match plan_ground_path(&grid_from(&costs)?, Cell::new(0, 0), Cell::new(19, 19)) {
            Ok(path) => {
                check(Some(path.cost) == oracle, || format!("case {case}: cost {} vs oracle {oracle:?}", path.cost))?;
                reachable += 1;
            }
            Err(PlanError::NoPath { .. }) => {
                check(oracle.is_none(), || format!("case {case}: no path but oracle found {oracle:?}"))?;
                unreachable += 1;
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    let walled = vec![vec![Some(1.0), Some(1.0), Some(1.0)], vec![Some(1.0), Some(1.0), None], vec![Some(1.0), None, Some(1.0)]];
    let blocked = plan_ground_path(&grid_from(&walled)?, Cell::new(0, 0), Cell::new(2, 2));
    check(matches!(blocked, Err(PlanError::NoPath { .. })), || format!("walled goal gave {blocked:?}"))?;
    Ok(format!("50 grids equal to oracle ({reachable} reachable, {unreachable} unreachable); walled goal errors"))
}

/// Compares two JSON trees; integers and strings exactly, other numbers to `tol` relative.
fn compare(path: &str, got: &Value, want: &Value, tol: f64, out: &mut Vec<String>) {
    match (got, want) {
        (Value::Object(g), Value::Object(w)) => {
            let keys: BTreeSet<&String> = g.keys().chain(w.keys()).collect();
            for key in keys {
                match (g.get(key), w.get(key)) {
                    (Some(a), Some(b)) => compare(&format!("{path}.{key}"), a, b, tol, out),
                    _ => out.push(format!("{path}.{key} present on one side only")),
                }
            }
        }
        (Value::Array(g), Value::Array(w)) if g.len() == w.len() => {
            for (i, (a, b)) in g.iter().zip(w).enumerate() {
                compare(&format!("{path}[{i}]"), a, b, tol, out);
            }
        }
        (Value::Number(g), Value::Number(w)) if w.is_u64() || w.is_i64() => {
            if g != w {
                out.push(format!("{path}: {g} vs {w}"));
            }
        }
        (Value::Number(g), Value::Number(w)) => {
            let (a, b) = (g.as_f64().unwrap_or(f64::NAN), w.as_f64().unwrap_or(f64::NAN));
            if !relative_close(a, b, tol) {
                out.push(format!("{path}: {a} vs {b}"));
            }
        }
        _ if got == want => {}
        _ => out.push(format!("{path}: {got} vs {want}")),
    }
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("events.ndjson");
    let scenario = workspace_root().join("scenarios/rail_radiological.scenario");
    let options = RunOptions { steps: 100_000, seed: Some(7), log: Some(log.clone()), config: None };
    let t0 = Instant::now();
    let (report, hub) = run_headless(&scenario, &options).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    check(secs < 30.0, || format!("run took {secs:.2} s"))?;
    check(report.coverage_pct == 100.0 && report.all_missions_complete(), || format!("coverage {}%", report.coverage_pct))?;
    let p_rad = report.belief[&Category::Radiological];
    check(report.most_probable.category == Category::Radiological && p_rad > 0.9, || {
        format!("most probable {:?} with P(radiological) = {p_rad}", report.most_probable.category)
    })?;

    let golden_path = workspace_root().join("crates/hub/tests/fixtures/rail_radiological_seed7.report.json");
    let golden: Value = serde_json::from_slice(&std::fs::read(&golden_path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let got = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    let mut diffs = Vec::new();
    compare("report", &got, &golden, 1e-9, &mut diffs);
    check(diffs.is_empty(), || format!("golden report differs: {}", diffs.join("; ")))?;

    let knowledge = hub.knowledge().clone();
    let replayed = Hub::replay(knowledge, read_log(&log).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    check(replayed.snapshot() == hub.snapshot(), || "replayed snapshot differs".into())?;
    Ok(format!(
        "{secs:.2} s, {} steps, coverage 100%, P(radiological) = {p_rad}, golden report matches, replay identical over {} events",
        report.steps, report.event_count
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("greedy planner vs stepwise oracle", greedy_planner),
        ("greedy vs exhaustive optimum", greedy_vs_optimal),
        ("inference vs joint table", inference),
        ("radiation field", radiation_field),
        ("tf-idf ranking", tf_idf),
        ("wire protocol", protocol),
        ("ground path vs relaxation oracle", ground_path),
        ("end-to-end rail radiological run", end_to_end),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
