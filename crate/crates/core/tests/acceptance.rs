//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taz::community::{
    adjusted_rand_index, detect_characteristic_scales, ensemble_membership, log_grid, modularity, resolution_sweep,
    HardPartition,
};
use taz::graph::{InteractionGraph, LayerKind};
use taz::kernel::{PartitionScheme, SchemeParams};
use taz::multilevel::{aggregate_study, check_nesting, multilevel_method1, multilevel_method2};
use taz::objectives::{dominates, morans_i, pareto_front, semantic_objective, Axis, ObjectiveVector, SpatialWeights};
use taz::pipeline::{run_sweep, sweep_points, PipelineConfig};
use taz::regionalize::{DetectParams, PrepareOptions, Prepared};
use taz::spatial::{region_adjacency, SemanticField, SizeBounds};
use taz::synth::{generate_city, nested_cliques, planted_partition, CityConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> InteractionGraph {
    let mut e = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random::<f64>() < density {
                e.push((a, b, rng.random_range(0.01..10.0)));
            }
        }
    }
    if e.is_empty() {
        e.push((0, 1, 1.0));
    }
    InteractionGraph::from_edges(LayerKind::Od, ids(n), e).unwrap()
}

/// Ordered-pair summation over a dense matrix.
fn brute_modularity(g: &InteractionGraph, labels: &[usize], gamma: f64) -> f64 {
    let n = g.n_nodes();
    let mut m = vec![vec![0.0; n]; n];
    for &(a, b, w) in g.edges() {
        m[a][b] += w;
        m[b][a] += w;
    }
    let d: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = d.iter().sum();
    let mut q = 0.0;
    for a in 0..n {
        for b in 0..n {
            if labels[a] == labels[b] {
                q += m[a][b] - gamma * d[a] * d[b] / total;
            }
        }
    }
    q / total
}

fn c1_modularity_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=50);
        let density = rng.random_range(0.05..0.9);
        let g = random_graph(&mut rng, n, density);
        let q = modularity(&g, &HardPartition::all_in_one(n), 1.0).map_err(|e| e.to_string())?;
        worst = worst.max(q.abs());
    }
    let t = start.elapsed();
    if worst < 1e-12 && t < Duration::from_secs(5) {
        Ok(format!("max |Q| = {worst:.1e} over 200 graphs in {t:.2?}"))
    } else {
        Err(format!("max |Q| = {worst:.1e}, runtime {t:.2?}"))
    }
}

fn c2_modularity_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=12);
        let density = rng.random_range(0.1..1.0);
        let g = random_graph(&mut rng, n, density);
        let k = rng.random_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let p = HardPartition::from_labels(&labels);
        let gamma = rng.random_range(0.1..5.0);
        let q = modularity(&g, &p, gamma).map_err(|e| e.to_string())?;
        worst = worst.max((q - brute_modularity(&g, p.assignment(), gamma)).abs());
    }
    if worst <= 1e-12 {
        Ok(format!("max deviation {worst:.1e} over 100 graphs"))
    } else {
        Err(format!("max deviation {worst:.1e}"))
    }
}

fn c3_louvain_recovery() -> Outcome {
    let start = Instant::now();
    let mut good = 0;
    let mut aris = Vec::new();
    for seed in 0..20 {
        let (g, truth) = planted_partition(4, 10, 0.9, 0.05, seed);
        let (_, consensus) = ensemble_membership(&g, 1.0, 10, seed).map_err(|e| e.to_string())?;
        let ari = adjusted_rand_index(consensus.assignment(), &truth);
        aris.push(ari);
        if ari >= 0.9 {
            good += 1;
        }
    }
    let t = start.elapsed();
    let min = aris.iter().copied().fold(f64::INFINITY, f64::min);
    let msg = format!("{good}/20 seeds with ARI >= 0.9 (min {min:.3}) in {t:.2?}");
    if good >= 18 && t < Duration::from_secs(30) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Direct double sum of Moran's I from unit-level inputs.
fn brute_moran(assignment: &[usize], values: &[f64], areas: &[f64], k: usize, w: &[Vec<f64>]) -> f64 {
    let mut sum = vec![0.0; k];
    let mut area = vec![0.0; k];
    for i in 0..assignment.len() {
        sum[assignment[i]] += values[i];
        area[assignment[i]] += areas[i];
    }
    let x: Vec<f64> = (0..k).map(|r| sum[r] / area[r]).collect();
    let mean = x.iter().sum::<f64>() / k as f64;
    let (mut num, mut wsum, mut den) = (0.0, 0.0, 0.0);
    for a in 0..k {
        den += (x[a] - mean).powi(2);
        for b in 0..k {
            num += w[a][b] * (x[a] - mean) * (x[b] - mean);
            wsum += w[a][b];
        }
    }
    k as f64 / wsum * num / den
}

fn c4_moran_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..=8);
        let n_units = k + rng.random_range(0..3 * k);
        // Every region gets at least one unit.
        let assignment: Vec<usize> = (0..n_units)
            .map(|i| if i < k { i } else { rng.random_range(0..k) })
            .collect();
        let values: Vec<f64> = (0..n_units).map(|_| rng.random_range(0.0..100.0)).collect();
        let areas: Vec<f64> = (0..n_units).map(|_| rng.random_range(0.5..5.0)).collect();
        let mut pairs = BTreeSet::new();
        for a in 0..k {
            for b in (a + 1)..k {
                if rng.random::<f64>() < 0.5 {
                    pairs.insert((a, b));
                }
            }
        }
        if pairs.is_empty() {
            pairs.insert((0, 1));
        }
        let mut dense = vec![vec![0.0; k]; k];
        for &(a, b) in &pairs {
            dense[a][b] = 1.0;
            dense[b][a] = 1.0;
        }
        let w = SpatialWeights::new(k, pairs).unwrap();
        let r = morans_i(&assignment, &values, &areas, &w).map_err(|e| e.to_string())?;
        worst = worst.max((r.value - brute_moran(&assignment, &values, &areas, k, &dense)).abs());
    }
    let w2 = SpatialWeights::new(2, [(0, 1)]).unwrap();
    let anti = morans_i(&[0, 1], &[3.0, 1.0], &[1.0, 1.0], &w2).map_err(|e| e.to_string())?;
    let flat = morans_i(
        &[0, 1, 2],
        &[2.0, 4.0, 6.0],
        &[1.0, 2.0, 3.0],
        &SpatialWeights::new(3, [(0, 1), (1, 2)]).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let msg = format!(
        "max deviation {worst:.1e}; antithetic I = {}; constant field I = {} (degenerate {})",
        anti.value, flat.value, flat.degenerate
    );
    if worst <= 1e-12 && (anti.value + 1.0).abs() <= 1e-9 && flat.value == 0.0 && flat.degenerate {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_semantic_cases() -> Outcome {
    // Uniform semantics on a synthetic city.
    let mut study = generate_city(&CityConfig::with_grid(3, 3, 5)).map_err(|e| e.to_string())?;
    study.semantics = SemanticField::new(study.semantics.categories.clone(), vec![0; study.units.len()]).unwrap();
    let p = Prepared::new(&study, PrepareOptions::default()).map_err(|e| e.to_string())?;
    let scheme = p
        .regionalize(&DetectParams::default(), 0)
        .map_err(|e| e.to_string())?
        .scheme;
    let areas: Vec<f64> = study.units.iter().map(|u| u.area).collect();
    let adj = region_adjacency(&scheme.assignment, &p.adjacency).unwrap();
    let uniform = semantic_objective(&scheme.assignment, &study.semantics, &areas, &adj).map_err(|e| e.to_string())?;

    let two = SemanticField::new(vec!["a".into(), "b".into()], vec![0, 1]).unwrap();
    let root2 = semantic_objective(&[0, 1], &two, &[3.0, 3.0], &BTreeSet::from([(0, 1)])).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_perm: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for _ in 0..50 {
        let t = rng.random_range(1..=5);
        let n = rng.random_range(2..=30);
        let k = rng.random_range(1..=n.min(8));
        let assignment: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..t)).collect();
        let areas: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let mut adj = BTreeSet::new();
        for a in 0..k {
            for b in (a + 1)..k {
                if rng.random::<f64>() < 0.6 {
                    adj.insert((a, b));
                }
            }
        }
        let cats: Vec<String> = (0..t).map(|i| format!("c{i}")).collect();
        let base = semantic_objective(
            &assignment,
            &SemanticField::new(cats.clone(), labels.clone()).unwrap(),
            &areas,
            &adj,
        )
        .map_err(|e| e.to_string())?;
        // Reverse the category order.
        let permuted: Vec<usize> = labels.iter().map(|&c| t - 1 - c).collect();
        let p = semantic_objective(
            &assignment,
            &SemanticField::new(cats.clone(), permuted).unwrap(),
            &areas,
            &adj,
        )
        .map_err(|e| e.to_string())?;
        let c = rng.random_range(0.01..100.0);
        let scaled: Vec<f64> = areas.iter().map(|a| a * c).collect();
        let s = semantic_objective(&assignment, &SemanticField::new(cats, labels).unwrap(), &scaled, &adj)
            .map_err(|e| e.to_string())?;
        worst_perm = worst_perm.max((p - base).abs());
        worst_scale = worst_scale.max((s - base).abs());
    }
    let msg = format!(
        "uniform f_sem = {uniform:e}; two-region f_sem - sqrt2 = {:.1e}; permutation dev {worst_perm:.1e}, scale dev {worst_scale:.1e}",
        root2 - 2f64.sqrt()
    );
    if uniform.abs() <= 1e-12 && (root2 - 2f64.sqrt()).abs() <= 1e-9 && worst_perm <= 1e-12 && worst_scale <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn vector(s: f64, q: f64, i: f64) -> ObjectiveVector {
    ObjectiveVector::from_objectives([s, q, q, i, i], 1, SchemeParams::named("random", 0))
}

fn c6_pareto() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for batch in 0..50 {
        // Coarse grid values force ties and duplicates.
        let levels = if batch % 2 == 0 { 10.0 } else { 1000.0 };
        let vs: Vec<ObjectiveVector> = (0..500)
            .map(|_| {
                let mut r = || (rng.random::<f64>() * levels).floor() / levels;
                vector(r(), r(), r())
            })
            .collect();
        let front = pareto_front(&vs, &Axis::ALL).map_err(|e| e.to_string())?;
        let pts: Vec<[f64; 3]> = vs
            .iter()
            .map(|v| [v.groups.semantics, v.groups.quantity, v.groups.interaction])
            .collect();
        let oracle: Vec<ObjectiveVector> = (0..vs.len())
            .filter(|&i| !(0..vs.len()).any(|j| dominates(&pts[j], &pts[i])))
            .map(|i| vs[i].clone())
            .collect();
        if front != oracle {
            return Err(format!(
                "batch {batch}: front of {} vs oracle {}",
                front.len(),
                oracle.len()
            ));
        }
        for a in &front {
            for b in &front {
                let pa = [a.groups.semantics, a.groups.quantity, a.groups.interaction];
                let pb = [b.groups.semantics, b.groups.quantity, b.groups.interaction];
                if dominates(&pa, &pb) {
                    return Err(format!("batch {batch}: front member dominated"));
                }
            }
        }
    }
    Ok("50 batches of 500 match the O(n^2) oracle".into())
}

fn c7_characteristic_scales() -> Outcome {
    let (g, _, _) = nested_cliques(4, 0.05);
    let grid = log_grid(0.05, 20.0, 40);
    let mut ok = 0;
    let mut last = String::new();
    for seed in 0..10 {
        let rec = resolution_sweep(&g, &grid, 10, seed).map_err(|e| e.to_string())?;
        let scales = detect_characteristic_scales(&rec, 0.1, 1.5f64.ln()).map_err(|e| e.to_string())?;
        let counts: Vec<usize> = scales.iter().map(|s| s.stable_count).collect();
        if counts == [2, 4] {
            ok += 1;
        } else {
            last = format!("seed {seed}: counts {counts:?}");
        }
    }
    if ok == 10 {
        Ok("10/10 seeds find plateaus with 2 and 4 communities".into())
    } else {
        Err(format!("{ok}/10 seeds; {last}"))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn c8_kernel_contract() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut filtered_units = 0;
    for seed in 0..50u64 {
        let mut cfg = CityConfig::with_grid(3, 3, 1000 + seed);
        cfg.jitter = 0.2;
        let study = generate_city(&cfg).map_err(|e| e.to_string())?;
        let opts = PrepareOptions {
            size_bounds: Some(SizeBounds::new(7_000.0, 9_300.0).unwrap()),
            ..Default::default()
        };
        let p = Prepared::new(&study, opts.clone()).map_err(|e| format!("seed {seed}: {e}"))?;
        filtered_units += p.filtered.singletons.len() + p.filtered.absorbed.len();
        for (f, field) in study.fields.iter().enumerate() {
            let kept: f64 = p.filtered.eligible.iter().map(|e| e.values[f]).sum::<f64>()
                + p.filtered.singletons.iter().map(|&s| field.values[s]).sum::<f64>();
            worst = worst.max(rel(kept, field.total()));
        }
        let params = DetectParams {
            resolution: [0.5, 1.0, 2.0][seed as usize % 3],
            seed,
            ..Default::default()
        };
        let scheme = p
            .regionalize(&params, 0)
            .map_err(|e| format!("seed {seed}: {e}"))?
            .scheme;
        scheme.validate(&p.adjacency).map_err(|e| format!("seed {seed}: {e}"))?;
        if scheme.n_regions() >= 3 {
            let coarse = aggregate_study(&study, &scheme).map_err(|e| e.to_string())?;
            for (a, b) in study.fields.iter().zip(&coarse.fields) {
                worst = worst.max(rel(a.total(), b.total()));
            }
            let step = multilevel_method1(
                &study,
                &scheme,
                &opts,
                &DetectParams {
                    resolution: 0.5,
                    ..params
                },
            )
            .map_err(|e| format!("seed {seed}: {e}"))?;
            step.scheme
                .validate(&p.adjacency)
                .map_err(|e| format!("seed {seed} level 1: {e}"))?;
        }
    }
    let t = start.elapsed();
    let msg = format!(
        "50 cities contiguous and covering; {filtered_units} units size-filtered; max mass error {worst:.1e} ({t:.2?})"
    );
    if worst <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_scenario_pattern() -> Outcome {
    // Each scenario's pick must beat the other two picks strictly on its own
    // objective, so the three picks are necessarily distinct schemes.
    let study = generate_city(&CityConfig::with_grid(3, 6, 2024)).map_err(|e| e.to_string())?;
    let mut held = 0;
    let mut detail = Vec::new();
    for seed in 0..10u64 {
        let config = PipelineConfig {
            synth: true,
            seed,
            sweep_resolutions: Some(vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]),
            sweep_w_od: Some(vec![0.1, 0.5, 0.9]),
            sweep_w_attr: Some(vec![0.0, 0.5]),
            sweep_membership_thresholds: Some(vec![0.6, 0.9]),
            ..Default::default()
        };
        let p = Prepared::new(&study, config.prepare_options().unwrap()).map_err(|e| e.to_string())?;
        let o = sweep_points(&config, &p).map_err(|e| e.to_string())?;
        let picked: Vec<&ObjectiveVector> = o.selections.iter().map(|(_, i)| &o.points[*i].2).collect();
        let ok = o.selections.iter().enumerate().all(|(k, (sc, _))| {
            picked
                .iter()
                .enumerate()
                .all(|(j, other)| j == k || sc.objective(picked[k]) > sc.objective(other))
        });
        held += usize::from(ok);
        detail.push(
            picked
                .iter()
                .map(|v| v.n_regions.to_string())
                .collect::<Vec<_>>()
                .join("/"),
        );
    }
    let msg = format!(
        "{held}/10 seeds with strict per-scenario maxima (regions pop/od/sem: {})",
        detail.join(" ")
    );
    if held >= 9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_nesting() -> Outcome {
    let mut checked = 0;
    for seed in 0..10u64 {
        let study = generate_city(&CityConfig::with_grid(3, 3, 500 + seed)).map_err(|e| e.to_string())?;
        let m2 = multilevel_method2(&study).map_err(|e| e.to_string())?;
        check_nesting(&m2.iter().map(|s| s.assignment.clone()).collect::<Vec<_>>())
            .map_err(|e| format!("method 2: {e}"))?;
        let p = Prepared::new(&study, PrepareOptions::default()).map_err(|e| e.to_string())?;
        let params = DetectParams {
            seed,
            ..Default::default()
        };
        let mut levels: Vec<PartitionScheme> = vec![p.regionalize(&params, 0).map_err(|e| e.to_string())?.scheme];
        for res in [0.5, 0.25] {
            let step = multilevel_method1(
                &study,
                levels.last().unwrap(),
                &PrepareOptions::default(),
                &DetectParams {
                    resolution: res,
                    ..params
                },
            )
            .map_err(|e| e.to_string())?;
            if step.notice.is_some() {
                break;
            }
            levels.push(step.scheme);
        }
        check_nesting(&levels.iter().map(|s| s.assignment.clone()).collect::<Vec<_>>())
            .map_err(|e| format!("method 1: {e}"))?;
        checked += 1;
    }
    Ok(format!("methods 1 and 2 strictly nested on {checked} cities"))
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = |out: &str| PipelineConfig {
        synth: true,
        seed: 17,
        out: dir.path().join(out),
        sweep_resolutions: Some(vec![0.5, 1.0, 2.0]),
        sweep_w_attr: Some(vec![0.0, 0.4]),
        resolution_count: 12,
        ..Default::default()
    };
    run_sweep(&config("a")).map_err(|e| e.to_string())?;
    run_sweep(&config("b")).map_err(|e| e.to_string())?;
    let mut n = 0;
    for f in ["objectives.csv", "sweep.csv", "scales.csv", "partition.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.path().join("b").join(f)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{f} differs between runs"));
        }
        n += 1;
    }
    Ok(format!("{n} CSV outputs byte-identical across two sweeps"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("modularity identity", c1_modularity_identity),
        ("modularity oracle", c2_modularity_oracle),
        ("louvain recovery", c3_louvain_recovery),
        ("moran oracle", c4_moran_oracle),
        ("semantic objective", c5_semantic_cases),
        ("pareto correctness", c6_pareto),
        ("characteristic scales", c7_characteristic_scales),
        ("kernel extension contract", c8_kernel_contract),
        ("scenario pattern", c9_scenario_pattern),
        ("nesting", c10_nesting),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
