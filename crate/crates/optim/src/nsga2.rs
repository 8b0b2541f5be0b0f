//! NSGA-II for two maximized objectives.

use std::cmp::Ordering;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{OptimError, Result};

pub type Objectives = [f64; 2];

/// `a` dominates `b` under maximization.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1])
}

/// Fronts of indices, best first.
pub fn fast_nondominated_sort(objs: &[Objectives]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    let mut fronts = vec![Vec::new()];
    for p in 0..n {
        for q in 0..n {
            if dominates(&objs[p], &objs[q]) {
                dominated_by[p].push(q);
            } else if dominates(&objs[q], &objs[p]) {
                count[p] += 1;
            }
        }
        if count[p] == 0 {
            fronts[0].push(p);
        }
    }
    let mut i = 0;
    while !fronts[i].is_empty() {
        let mut next = Vec::new();
        for &p in &fronts[i] {
            for &q in &dominated_by[p] {
                count[q] -= 1;
                if count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(next);
        i += 1;
    }
    fronts.pop();
    fronts
}

/// Crowding distance of each member of `front` (same order); boundary
/// points get `+∞`.
pub fn crowding_distance(objs: &[Objectives], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for m in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objs[front[a]][m].total_cmp(&objs[front[b]][m]));
        let lo = objs[front[order[0]]][m];
        let hi = objs[front[order[n - 1]]][m];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for k in 1..n - 1 {
                let gap = objs[front[order[k + 1]]][m] - objs[front[order[k - 1]]][m];
                dist[order[k]] += gap / (hi - lo);
            }
        }
    }
    dist
}

/// Area dominated by `points` and dominating `reference` (maximization).
pub fn hypervolume(points: &[Objectives], reference: Objectives) -> f64 {
    let mut pts: Vec<Objectives> = points
        .iter()
        .copied()
        .filter(|p| p[0] > reference[0] && p[1] > reference[1])
        .collect();
    pts.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut hv = 0.0;
    let mut top = reference[1];
    for p in pts {
        if p[1] > top {
            hv += (p[0] - reference[0]) * (p[1] - top);
            top = p[1];
        }
    }
    hv
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    /// Per-variable mutation probability; `None` means `1/dim`.
    pub mutation_prob: Option<f64>,
    pub seed: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 100,
            crossover_prob: 0.9,
            eta_crossover: 15.0,
            eta_mutation: 20.0,
            mutation_prob: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub design: Vec<f64>,
    pub objectives: Objectives,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSet {
    pub points: Vec<ParetoPoint>,
    pub config: Nsga2Config,
    pub bounds: Vec<(f64, f64)>,
    pub evaluations: usize,
    /// Reference point used for `hypervolume_history`.
    pub reference: Objectives,
    /// Hypervolume of the archive's first front after each generation
    /// (index 0 is the initial population).
    pub hypervolume_history: Vec<f64>,
}

impl ParetoSet {
    pub fn objectives(&self) -> Vec<Objectives> {
        self.points.iter().map(|p| p.objectives).collect()
    }

    pub fn hypervolume(&self, reference: Objectives) -> f64 {
        hypervolume(&self.objectives(), reference)
    }

    /// CSV with one column per design variable, then `energy,accuracy`.
    pub fn write_csv(&self, path: &Path, design_names: &[&str]) -> Result<()> {
        let dim = self.bounds.len();
        if design_names.len() != dim {
            return Err(OptimError::Domain(format!("{} names for {dim} variables", design_names.len())));
        }
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = design_names.iter().map(|s| s.to_string()).collect();
        header.extend(["energy".into(), "accuracy".into()]);
        w.write_record(&header)?;
        for p in &self.points {
            let mut row: Vec<String> = p.design.iter().map(|v| format!("{v:e}")).collect();
            row.push(format!("{:e}", p.objectives[0]));
            row.push(format!("{:e}", p.objectives[1]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Individual {
    x: Vec<f64>,
    f: Objectives,
    rank: usize,
    crowd: f64,
}

fn better(a: &Individual, b: &Individual) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowd > b.crowd)
}

fn sbx(rng: &mut ChaCha8Rng, a: f64, b: f64, lo: f64, hi: f64, eta: f64) -> (f64, f64) {
    if (a - b).abs() < 1e-14 || hi <= lo {
        return (a, b);
    }
    let (y1, y2) = if a < b { (a, b) } else { (b, a) };
    let u: f64 = rng.random();
    let child = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let bq1 = child(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
    let c1 = 0.5 * ((y1 + y2) - bq1 * (y2 - y1));
    let bq2 = child(1.0 + 2.0 * (hi - y2) / (y2 - y1));
    let c2 = 0.5 * ((y1 + y2) + bq2 * (y2 - y1));
    let (c1, c2) = (c1.clamp(lo, hi), c2.clamp(lo, hi));
    if rng.random::<bool>() {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

fn poly_mutation(rng: &mut ChaCha8Rng, y: f64, lo: f64, hi: f64, eta: f64) -> f64 {
    let w = hi - lo;
    if w <= 0.0 {
        return y;
    }
    let d1 = (y - lo) / w;
    let d2 = (hi - y) / w;
    let u: f64 = rng.random();
    let p = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        v.powf(p) - 1.0
    } else {
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - v.powf(p)
    };
    (y + dq * w).clamp(lo, hi)
}

fn assign_ranks(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let objs: Vec<Objectives> = pop.iter().map(|i| i.f).collect();
    let fronts = fast_nondominated_sort(&objs);
    for (r, front) in fronts.iter().enumerate() {
        let cd = crowding_distance(&objs, front);
        for (k, &i) in front.iter().enumerate() {
            pop[i].rank = r;
            pop[i].crowd = cd[k];
        }
    }
    fronts
}

/// Maximizes both objectives returned by `evaluate` over the box `bounds`.
/// The result is the first front of every design evaluated during the run.
pub fn nsga2<F>(mut evaluate: F, bounds: &[(f64, f64)], cfg: &Nsga2Config) -> Result<ParetoSet>
where
    F: FnMut(&[f64]) -> std::result::Result<Objectives, String>,
{
    if cfg.population < 8 || cfg.population % 2 != 0 {
        return Err(OptimError::Config(format!("population must be even and ≥ 8, got {}", cfg.population)));
    }
    if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(OptimError::Config(format!("invalid bounds {bounds:?}")));
    }
    let dim = bounds.len();
    let pm = cfg.mutation_prob.unwrap_or(1.0 / dim as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut archive: Vec<(Vec<f64>, Objectives)> = Vec::new();
    let mut eval = |x: Vec<f64>, generation: usize, archive: &mut Vec<(Vec<f64>, Objectives)>| -> Result<Individual> {
        let f = evaluate(&x).map_err(|message| OptimError::Evaluation {
            generation,
            design: x.clone(),
            message,
        })?;
        if !f.iter().all(|v| v.is_finite()) {
            return Err(OptimError::Evaluation {
                generation,
                design: x,
                message: format!("non-finite objectives {f:?}"),
            });
        }
        archive.push((x.clone(), f));
        Ok(Individual {
            x,
            f,
            rank: 0,
            crowd: 0.0,
        })
    };

    let mut pop = Vec::with_capacity(cfg.population);
    for _ in 0..cfg.population {
        let x: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo })
            .collect();
        pop.push(eval(x, 0, &mut archive)?);
    }
    assign_ranks(&mut pop);

    let reference = [
        archive.iter().map(|a| a.1[0]).fold(f64::INFINITY, f64::min),
        archive.iter().map(|a| a.1[1]).fold(f64::INFINITY, f64::min),
    ];
    let archive_hv = |archive: &[(Vec<f64>, Objectives)]| {
        let objs: Vec<Objectives> = archive.iter().map(|a| a.1).collect();
        hypervolume(&objs, reference)
    };
    let mut history = vec![archive_hv(&archive)];

    for gen in 1..=cfg.generations {
        let tournament = |pop: &[Individual], rng: &mut ChaCha8Rng| {
            let a = rng.random_range(0..pop.len());
            let b = rng.random_range(0..pop.len());
            if better(&pop[b], &pop[a]) {
                b
            } else {
                a
            }
        };
        let mut offspring = Vec::with_capacity(cfg.population);
        while offspring.len() < cfg.population {
            let p1 = pop[tournament(&pop, &mut rng)].x.clone();
            let p2 = pop[tournament(&pop, &mut rng)].x.clone();
            let (mut c1, mut c2) = (p1.clone(), p2.clone());
            if rng.random::<f64>() < cfg.crossover_prob {
                for d in 0..dim {
                    if rng.random::<f64>() < 0.5 {
                        let (lo, hi) = bounds[d];
                        (c1[d], c2[d]) = sbx(&mut rng, p1[d], p2[d], lo, hi, cfg.eta_crossover);
                    }
                }
            }
            for c in [&mut c1, &mut c2] {
                for d in 0..dim {
                    if rng.random::<f64>() < pm {
                        let (lo, hi) = bounds[d];
                        c[d] = poly_mutation(&mut rng, c[d], lo, hi, cfg.eta_mutation);
                    }
                }
            }
            offspring.push(c1);
            offspring.push(c2);
        }
        for x in offspring {
            pop.push(eval(x, gen, &mut archive)?);
        }

        // Elitist (μ + λ) truncation.
        let fronts = assign_ranks(&mut pop);
        let mut keep = Vec::with_capacity(cfg.population);
        for front in fronts {
            if keep.len() + front.len() <= cfg.population {
                keep.extend(front);
            } else {
                let mut f = front;
                f.sort_by(|&a, &b| pop[b].crowd.partial_cmp(&pop[a].crowd).unwrap_or(Ordering::Equal));
                keep.extend(f.into_iter().take(cfg.population - keep.len()));
                break;
            }
        }
        keep.sort_unstable();
        let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("unique index")).collect();
        assign_ranks(&mut pop);
        history.push(archive_hv(&archive));
    }

    let objs: Vec<Objectives> = archive.iter().map(|a| a.1).collect();
    let mut points: Vec<ParetoPoint> = Vec::new();
    for &i in &fast_nondominated_sort(&objs)[0] {
        let (x, f) = &archive[i];
        if !points.iter().any(|p| &p.design == x) {
            points.push(ParetoPoint {
                design: x.clone(),
                objectives: *f,
            });
        }
    }
    points.sort_by(|a, b| a.objectives[0].total_cmp(&b.objectives[0]));
    Ok(ParetoSet {
        points,
        config: cfg.clone(),
        bounds: bounds.to_vec(),
        evaluations: archive.len(),
        reference,
        hypervolume_history: history,
    })
}
