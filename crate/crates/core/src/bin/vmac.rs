use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};

use vmac_core::audit::{export_smtlib, Auditor, RegionSolver};
use vmac_core::engine::{DecisionCache, DecisionEngine, PolicyStore, DEFAULT_CACHE_CAPACITY};
use vmac_core::formula::Formula;
use vmac_core::harness::{self, BenchConfig, Sweep};
use vmac_core::lang::{self, parse_policies, PolicyAst, TimeOfDay};
use vmac_core::space::SpaceRegistry;

#[derive(Parser)]
#[command(name = "vmac", version, about = "Spatial access control for shared AR maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide every point of every request frame.
    Check(CheckArgs),
    /// Answer one configuration audit query as a JSON report.
    Audit(AuditArgs),
    /// Write the synthetic house dataset.
    GenHouse {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the end-to-end scenario suite.
    Scenarios,
    /// Time one scalability sweep and write CSV.
    Bench(BenchArgs),
    /// Parse a policy file and resolve it against a spaces file.
    Validate {
        #[arg(long)]
        spaces: Option<PathBuf>,
        #[arg(long)]
        policies: PathBuf,
    },
    /// Export the formula of a space or a policy as an SMT-LIB script.
    #[command(group(ArgGroup::new("target").required(true).args(["space", "policy"])))]
    ExportSmt {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Inputs {
    /// Spaces JSON file.
    #[arg(long)]
    spaces: PathBuf,
    /// Policy file in the `.vmac` language.
    #[arg(long)]
    policies: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Request frames, one JSON object per line.
    #[arg(long)]
    requests: PathBuf,
    /// Decisions output; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    #[arg(long, env = "VMAC_CACHE_CAPACITY", default_value_t = DEFAULT_CACHE_CAPACITY)]
    cache_capacity: usize,
}

#[derive(Clone, Debug)]
struct WhoSpec {
    space: String,
    time: Option<TimeOfDay>,
    user_in: Option<String>,
}

#[derive(Clone, Debug)]
struct StrongSpec {
    space: String,
    owner: String,
}

fn key_values(s: &str) -> Result<Vec<(String, String)>, String> {
    s.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| format!("expected key=value, got `{kv}`"))
        })
        .collect()
}

fn parse_who(s: &str) -> Result<WhoSpec, String> {
    let mut spec = WhoSpec {
        space: String::new(),
        time: None,
        user_in: None,
    };
    for (k, v) in key_values(s)? {
        match k.as_str() {
            "space" => spec.space = v,
            "time" => {
                let t = v
                    .parse::<u16>()
                    .ok()
                    .filter(|_| v.len() == 4)
                    .and_then(TimeOfDay::new)
                    .ok_or_else(|| format!("`{v}` is not an HHMM time"))?;
                spec.time = Some(t);
            }
            "user-in" => spec.user_in = Some(v),
            other => return Err(format!("unknown key `{other}` (expected space, time, user-in)")),
        }
    }
    if spec.space.is_empty() {
        return Err("missing space=ID".into());
    }
    Ok(spec)
}

fn parse_strong(s: &str) -> Result<StrongSpec, String> {
    let (mut space, mut owner) = (None, None);
    for (k, v) in key_values(s)? {
        match k.as_str() {
            "space" => space = Some(v),
            "owner" => owner = Some(v),
            other => return Err(format!("unknown key `{other}` (expected space, owner)")),
        }
    }
    Ok(StrongSpec {
        space: space.ok_or("missing space=ID")?,
        owner: owner.ok_or("missing owner=NAME")?,
    })
}

#[derive(Args)]
#[command(group(
    ArgGroup::new("query")
        .required(true)
        .args(["who", "too_weak", "too_strong", "new_allow", "conflicts", "more_permissive"])
))]
struct AuditArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Who can access a space: `space=ID[,time=HHMM][,user-in=ID]`.
    #[arg(long, value_parser = parse_who)]
    who: Option<WhoSpec>,
    /// Whether everyone may do everything in a space.
    #[arg(long, value_name = "SPACE")]
    too_weak: Option<String>,
    /// Whether even the owner is locked out: `space=ID,owner=NAME`.
    #[arg(long, value_parser = parse_strong)]
    too_strong: Option<StrongSpec>,
    /// Whether the allow policy in FILE would change any decision.
    #[arg(long, value_name = "FILE")]
    new_allow: Option<PathBuf>,
    /// Principals caught between an allow and a deny in a space.
    #[arg(long, value_name = "SPACE")]
    conflicts: Option<String>,
    /// Whether a space's own policies allow more than its enclosing spaces'.
    #[arg(long, value_name = "SPACE")]
    more_permissive: Option<String>,
    #[arg(long, default_value_t = vmac_core::audit::DEFAULT_ATOM_BUDGET)]
    atom_budget: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = |s: &str| s.parse::<Sweep>())]
    sweep: Sweep,
    /// Comma-separated positive sweep values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Force the decision cache off.
    #[arg(long, conflicts_with = "cache")]
    no_cache: bool,
    /// Force the decision cache on.
    #[arg(long)]
    cache: bool,
    /// CSV output; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_registry(path: &Path) -> Result<SpaceRegistry> {
    SpaceRegistry::from_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_policies(path: &Path) -> Result<Vec<PolicyAst>> {
    parse_policies(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn load_store(inputs: &Inputs) -> Result<PolicyStore> {
    let registry = Arc::new(load_registry(&inputs.spaces)?);
    let policies = load_policies(&inputs.policies)?;
    let diags = lang::validate_against_registry(&policies, &registry);
    if !diags.is_empty() {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", inputs.policies.display())).collect();
        bail!("{}", lines.join("\n"));
    }
    Ok(PolicyStore::with_policies(registry, policies)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn check(args: CheckArgs) -> Result<()> {
    let store = load_store(&args.inputs)?;
    let cache = (!args.no_cache).then(|| DecisionCache::new(args.cache_capacity));
    let engine = DecisionEngine::new(store, cache);
    let file = fs::File::open(&args.requests).with_context(|| format!("cannot read {}", args.requests.display()))?;
    let frames = harness::read_frames(BufReader::new(file)).with_context(|| format!("{}", args.requests.display()))?;
    let decisions: Vec<_> = frames.iter().map(|f| harness::decide_frame(&engine, f)).collect();
    let mut buf = Vec::new();
    harness::write_decisions(&mut buf, &decisions)?;
    emit(args.out.as_deref(), &String::from_utf8(buf)?)
}

fn audit(args: AuditArgs) -> Result<()> {
    let store = load_store(&args.inputs)?;
    let auditor = Auditor::with_backend(&store, RegionSolver::new(args.atom_budget));
    let report = if let Some(who) = &args.who {
        let mut ctx = Vec::new();
        if let Some(t) = who.time {
            ctx.push(Formula::time_in(t, t));
        }
        if let Some(id) = &who.user_in {
            let b = store.registry().box_of(id).ok_or_else(|| anyhow!("unknown space \"{id}\""))?;
            ctx.push(Formula::user_in(b));
        }
        let ctx = (!ctx.is_empty()).then(|| Formula::and(ctx));
        auditor.list_principals_with_access(&who.space, ctx.as_ref())?
    } else if let Some(space) = &args.too_weak {
        auditor.check_too_weak(space)?
    } else if let Some(s) = &args.too_strong {
        auditor.check_too_strong(&s.space, &s.owner)?
    } else if let Some(path) = &args.new_allow {
        let mut ps = load_policies(path)?;
        if ps.len() != 1 {
            bail!("{}: expected exactly one policy, found {}", path.display(), ps.len());
        }
        auditor.check_new_allow_effective(&ps.remove(0))?
    } else if let Some(space) = &args.conflicts {
        auditor.find_allow_deny_conflicts(space)?
    } else if let Some(space) = &args.more_permissive {
        auditor.check_more_permissive_than_parent(space)?
    } else {
        unreachable!("clap requires one query")
    };
    println!("{}", report.to_json());
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::default_for(args.sweep);
    if let Some(v) = args.values {
        cfg.values = v;
    }
    if let Some(r) = args.reps {
        cfg.reps = r;
    }
    if args.no_cache {
        cfg.cache = false;
    }
    if args.cache {
        cfg.cache = true;
    }
    let report = harness::run_bench(&cfg)?;
    emit(args.out.as_deref(), &report.to_csv())?;
    eprintln!("{}", report.summary());
    Ok(())
}

fn validate(spaces: Option<PathBuf>, policies: PathBuf) -> Result<()> {
    let ps = load_policies(&policies)?;
    if let Some(spaces) = spaces {
        let registry = load_registry(&spaces)?;
        let diags = lang::validate_against_registry(&ps, &registry);
        if !diags.is_empty() {
            let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", policies.display())).collect();
            bail!("{}", lines.join("\n"));
        }
    }
    println!("ok: {} policies", ps.len());
    Ok(())
}

fn export_smt(inputs: Inputs, space: Option<String>, policy: Option<String>, out: Option<PathBuf>) -> Result<()> {
    let store = load_store(&inputs)?;
    let f = match (space, policy) {
        (Some(id), _) => {
            let b = store.registry().box_of(&id).ok_or_else(|| anyhow!("unknown space \"{id}\""))?;
            Formula::and([Auditor::new(&store).space_formula(&id)?, Formula::point_in(b)])
        }
        (None, Some(name)) => (*store.formula(&name).ok_or_else(|| anyhow!("no policy named \"{name}\""))?).clone(),
        (None, None) => unreachable!("clap requires a target"),
    };
    emit(out.as_deref(), &export_smtlib(&f))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check(args) => check(args)?,
        Command::Audit(args) => audit(args)?,
        Command::GenHouse { seed, out } => {
            harness::generate_house(seed)
                .write_to(&out)
                .with_context(|| format!("cannot write {}", out.display()))?;
        }
        Command::Scenarios => {
            let results = harness::run_scenarios();
            let passed = results.iter().filter(|r| r.passed).count();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.expected);
                for f in &r.failures {
                    println!("    {f}");
                }
            }
            println!("{passed}/{} scenarios passed", results.len());
            if passed != results.len() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench(args) => bench(args)?,
        Command::Validate { spaces, policies } => validate(spaces, policies)?,
        Command::ExportSmt {
            inputs,
            space,
            policy,
            out,
        } => export_smt(inputs, space, policy, out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
