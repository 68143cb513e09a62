//! Scalability sweeps over frame size, space count, policy length and user count.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::house::{house_registry, tour_rooms, HOUSE_POLICIES};
use crate::engine::{DecisionCache, DecisionEngine, PolicyStore};
use crate::formula::AccessRequest;
use crate::lang::{parse_policies, Action, CondExpr, Effect, PolicyAst, SpaceExpr, TimeOfDay};
use crate::space::{Box3, Point3, SpaceRecord, SpaceRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sweep {
    /// Time per frame against the number of points in it.
    PointsPerFrame,
    /// Time per request against the number of disjoint unit-cube spaces.
    NumSpaces,
    /// Time per request against the number of clauses in the only relevant policy.
    PolicyLength,
    /// Time per request against the number of relevant single-user policies.
    NumUsers,
}

impl Sweep {
    pub const ALL: [Sweep; 4] = [Sweep::PointsPerFrame, Sweep::NumSpaces, Sweep::PolicyLength, Sweep::NumUsers];

    pub fn as_str(self) -> &'static str {
        match self {
            Sweep::PointsPerFrame => "points_per_frame",
            Sweep::NumSpaces => "num_spaces",
            Sweep::PolicyLength => "policy_length",
            Sweep::NumUsers => "num_users",
        }
    }

    /// Whether time is expected to grow linearly with the swept value
    /// rather than stay roughly flat.
    pub fn is_linear(self) -> bool {
        self != Sweep::NumSpaces
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sweep::ALL
            .into_iter()
            .find(|w| w.as_str() == s)
            .ok_or_else(|| format!("unknown sweep `{s}` (expected one of points_per_frame, num_spaces, policy_length, num_users)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub sweep: Sweep,
    pub values: Vec<usize>,
    pub reps: usize,
    pub cache: bool,
    pub seed: u64,
}

impl BenchConfig {
    /// Desk-scale defaults. Only the frame sweep runs with the cache.
    pub fn default_for(sweep: Sweep) -> Self {
        let values = match sweep {
            Sweep::PointsPerFrame => vec![100, 200, 400, 600, 800, 1000],
            Sweep::NumSpaces => vec![100, 1_000, 10_000, 100_000],
            Sweep::PolicyLength => vec![50, 100, 200, 400, 800],
            Sweep::NumUsers => vec![10, 50, 100, 200, 400, 800],
        };
        BenchConfig {
            sweep,
            values,
            reps: 11,
            cache: sweep == Sweep::PointsPerFrame,
            seed: 7,
        }
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("sweep values must be positive")]
    NonPositiveValue,
    #[error("at least one sweep value and one repetition are required")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub value: usize,
    pub mean_us: f64,
    pub stddev_us: f64,
    pub median_us: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    /// Fit of median time on the swept value.
    pub fit: LinearFit,
    /// Largest median over smallest median.
    pub spread: f64,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,mean_us,stddev_us,median_us\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.4},{:.4},{:.4}\n", r.value, r.mean_us, r.stddev_us, r.median_us));
        }
        out
    }

    pub fn summary(&self) -> String {
        let unit = if self.config.sweep == Sweep::PointsPerFrame { "frame" } else { "request" };
        if self.config.sweep.is_linear() {
            format!(
                "{}: time per {unit} = {:.4} us x value + {:.2} us, R^2 = {:.4}",
                self.config.sweep, self.fit.slope, self.fit.intercept, self.fit.r_squared
            )
        } else {
            format!(
                "{}: time per {unit} varies {:.2}x across the sweep",
                self.config.sweep, self.spread
            )
        }
    }
}

/// A prepared engine plus the requests of one measured batch.
struct Workload {
    engine: DecisionEngine,
    requests: Vec<AccessRequest>,
    /// Requests per measured unit: the frame size, or one.
    per_unit: usize,
}

impl Workload {
    fn run(&self) -> f64 {
        let start = Instant::now();
        let mut allowed = 0usize;
        for r in &self.requests {
            allowed += usize::from(self.engine.decide(r).is_allow());
        }
        std::hint::black_box(allowed);
        let units = (self.requests.len() / self.per_unit).max(1) as f64;
        start.elapsed().as_secs_f64() * 1e6 / units
    }
}

fn engine(registry: SpaceRegistry, policies: Vec<PolicyAst>, cache: bool) -> DecisionEngine {
    let store = PolicyStore::with_policies(Arc::new(registry), policies).expect("bench policies resolve");
    DecisionEngine::new(store, cache.then(DecisionCache::default))
}

fn midday() -> TimeOfDay {
    TimeOfDay::new(1200).unwrap()
}

fn sample_in(rng: &mut ChaCha8Rng, b: &Box3) -> Point3 {
    std::array::from_fn(|i| rng.gen_range(b.min[i] + 0.01..b.max[i] - 0.01))
}

/// `n` unit cubes on a grid with unit gaps, named `c0..`.
pub fn cube_spaces(n: usize) -> Vec<SpaceRecord> {
    let side = (n as f64).cbrt().ceil() as usize;
    (0..n)
        .map(|i| {
            let (x, y, z) = (i % side, (i / side) % side, i / (side * side));
            SpaceRecord::new(
                format!("c{i}"),
                Box3::unit_cube([2.0 * x as f64, 2.0 * y as f64, 2.0 * z as f64]),
                None,
            )
        })
        .collect()
}

fn frames_workload(n: usize, cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> Workload {
    let registry = house_registry();
    let rooms = tour_rooms();
    let visible: Vec<Box3> = (0..3)
        .map(|_| registry.box_of(rooms[rng.gen_range(0..rooms.len())]).unwrap())
        .collect();
    let user = visible[0].center();
    let points: Vec<Point3> = (0..n)
        .map(|_| {
            let room = visible[rng.gen_range(0..3)];
            sample_in(rng, &room)
        })
        .collect();
    let policies = parse_policies(HOUSE_POLICIES).expect("house policies parse");
    let engine = engine(registry, policies, cfg.cache);
    const FRAMES: usize = 100;
    let requests = (0..FRAMES)
        .flat_map(|k| {
            let principal = if k % 2 == 0 { "Alice" } else { "Bob" };
            points
                .iter()
                .map(move |p| AccessRequest::new(principal, Action::Read, *p, user, midday()))
        })
        .collect();
    Workload {
        engine,
        requests,
        per_unit: n,
    }
}

fn spaces_workload(n: usize, cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> Workload {
    let spaces = cube_spaces(n);
    let boxes: Vec<Box3> = spaces.iter().map(|s| s.bbox).collect();
    let policies = (0..n)
        .map(|i| PolicyAst::new(format!("p{i}"), Effect::Allow, SpaceExpr::id(format!("c{i}"))).with_principal("Alice"))
        .collect();
    let registry = SpaceRegistry::load(spaces).expect("cubes are disjoint");
    let requests = (0..4000)
        .map(|k| {
            let cube = boxes[rng.gen_range(0..n)];
            let p = sample_in(rng, &cube);
            let who = if k % 2 == 0 { "Alice" } else { "Bob" };
            AccessRequest::new(who, Action::Read, p, [-5.0; 3], midday())
        })
        .collect();
    Workload {
        engine: engine(registry, policies, cfg.cache),
        requests,
        per_unit: 1,
    }
}

fn policy_length_workload(n: usize, cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> Workload {
    let spaces = cube_spaces(n + 1);
    let target = spaces[0].bbox;
    let condition = (1..=n)
        .map(|i| CondExpr::WhenInside(format!("c{i}")))
        .reduce(CondExpr::or)
        .expect("n is positive");
    let policy = PolicyAst::new("long", Effect::Allow, SpaceExpr::id("c0"))
        .with_principal("Alice")
        .with_condition(condition);
    let registry = SpaceRegistry::load(spaces).expect("cubes are disjoint");
    let requests = (0..5000)
        .map(|_| AccessRequest::new("Alice", Action::Read, sample_in(rng, &target), [-5.0; 3], midday()))
        .collect();
    Workload {
        engine: engine(registry, vec![policy], cfg.cache),
        requests,
        per_unit: 1,
    }
}

fn users_workload(n: usize, cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> Workload {
    let spaces = cube_spaces(1);
    let target = spaces[0].bbox;
    let policies = (0..n)
        .map(|i| PolicyAst::new(format!("u{i}"), Effect::Allow, SpaceExpr::id("c0")).with_principal(format!("user{i}")))
        .collect();
    let registry = SpaceRegistry::load(spaces).expect("one cube");
    let requests = (0..5000)
        .map(|_| AccessRequest::new("stranger", Action::Read, sample_in(rng, &target), [-5.0; 3], midday()))
        .collect();
    Workload {
        engine: engine(registry, policies, cfg.cache),
        requests,
        per_unit: 1,
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    if cfg.values.is_empty() || cfg.reps == 0 {
        return Err(BenchError::Empty);
    }
    if cfg.values.contains(&0) {
        return Err(BenchError::NonPositiveValue);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.values.len());
    for &value in &cfg.values {
        let workload = match cfg.sweep {
            Sweep::PointsPerFrame => frames_workload(value, cfg, &mut rng),
            Sweep::NumSpaces => spaces_workload(value, cfg, &mut rng),
            Sweep::PolicyLength => policy_length_workload(value, cfg, &mut rng),
            Sweep::NumUsers => users_workload(value, cfg, &mut rng),
        };
        // Warm-up: translates the touched policies and fills the cache.
        workload.run();
        let times: Vec<f64> = (0..cfg.reps).map(|_| workload.run()).collect();
        let (mean_us, stddev_us) = mean_std(&times);
        rows.push(BenchRow {
            value,
            mean_us,
            stddev_us,
            median_us: median(&times),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.value as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_us).collect();
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(0.0, f64::max);
    Ok(BenchReport {
        config: cfg.clone(),
        fit: linear_fit(&xs, &ys),
        spread: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        rows,
    })
}
