use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;

use treecut::budget::{Budgets, BUDGET_ENV};
use treecut::decomposition::{exact_decomposition, validate, TreeDecomposition};
use treecut::format::{
    parse_decomposition, parse_instance, parse_maxcut, parse_ulc, write_decomposition, write_instance,
};
use treecut::generators::{
    block_decomposition, block_sparsity_formula, building_block, fano_ulc, lifted_cut_prediction, power,
    ug_gadget, MaxCutInstance, BLOCK_S, BLOCK_T,
};
use treecut::graph::{evaluate_cut, SparsestCutInstance};
use treecut::lp::{Arithmetic, SolverOptions};
use treecut::oracle::{audit_cuts, exact_maxcut, exact_sparsest_cut};
use treecut::pipeline::{prepare_decomposition, solve};
use treecut::rational::{format_rational, int, parse_rational, Rational};
use treecut::rounding::{embed_l1, Sampler};
use treecut::sa::{ratio_search, AlphaMode, SearchOptions};
use treecut::sa_gap::{check_lift_consistency, gap_experiment, lifted_value, GapReport, LiftContext};
use treecut::Error;

#[derive(Parser)]
#[command(name = "treecut", version, about = "Sparsest Cut on bounded-treewidth graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the primary output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Budget overrides, e.g. `oracle_vertices=24,lp_set_size=20`.
    #[arg(long, env = BUDGET_ENV, global = true)]
    budget: Option<String>,
    /// Sets every vertex-count budget at once.
    #[arg(long, global = true)]
    budget_vertices: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphaArg {
    Dinkelbach,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArithArg {
    Rational,
    Float,
}

#[derive(Args)]
struct LpArgs {
    #[arg(long, value_enum, default_value_t = AlphaArg::Dinkelbach)]
    alpha_mode: AlphaArg,
    #[arg(long, value_enum, default_value_t = ArithArg::Rational)]
    arith: ArithArg,
    /// Write every LP solved during the search to this file (last one wins).
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

impl LpArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            mode: match self.alpha_mode {
                AlphaArg::Dinkelbach => AlphaMode::Dinkelbach,
                AlphaArg::Grid => AlphaMode::Grid,
            },
            solver: solver(self.arith),
            dump_lp: self.dump_lp.clone(),
            ..SearchOptions::default()
        }
    }
}

fn solver(arith: ArithArg) -> SolverOptions {
    match arith {
        ArithArg::Rational => SolverOptions::with_arithmetic(Arithmetic::Rational),
        ArithArg::Float => SolverOptions::float(),
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (`p ssc` format).
    instance: PathBuf,
    /// Tree decomposition file; computed exactly when omitted.
    #[arg(long)]
    td: Option<PathBuf>,
}

#[derive(Args)]
struct BaseArgs {
    /// Named base graph: k2..k9, p2..p9, c3..c9.
    #[arg(long, conflicts_with = "maxcut")]
    base: Option<String>,
    /// Base graph file (`p tw n m` edge list).
    #[arg(long)]
    maxcut: Option<PathBuf>,
}

impl BaseArgs {
    fn load(&self) -> Result<(String, MaxCutInstance), Error> {
        match (&self.base, &self.maxcut) {
            (Some(name), _) => Ok((name.clone(), MaxCutInstance::named(name)?)),
            (None, Some(path)) => {
                let name = path.file_stem().map_or("base".into(), |s| s.to_string_lossy().into_owned());
                Ok((name, parse_maxcut(&read(path)?)?))
            }
            (None, None) => Err(Error::Invalid("give --base or --maxcut".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Minimum-width tree decomposition (exact, small instances).
    Decompose {
        instance: PathBuf,
    },
    /// LP, ratio search and derandomized rounding.
    Solve {
        #[command(flatten)]
        input: InstanceArgs,
        #[command(flatten)]
        lp: LpArgs,
    },
    /// Randomized rounding: sample cuts from the LP solution.
    Round {
        #[command(flatten)]
        input: InstanceArgs,
        #[command(flatten)]
        lp: LpArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
    },
    /// Exact sparsest cut by enumeration.
    Oracle {
        instance: PathBuf,
        /// Also report admissible/inadmissible cut extremes (needs `t s t`).
        #[arg(long)]
        audit: bool,
    },
    /// Generate instances.
    #[command(visible_alias = "gen", subcommand)]
    Generate(Generate),
    /// Lift a MaxCut Sherali-Adams solution to a fractal instance.
    Gap {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = ArithArg::Rational)]
        arith: ArithArg,
    },
    /// Monte-Carlo l1 embedding; CSV with one row per vertex.
    Embed {
        #[command(flatten)]
        input: InstanceArgs,
        #[command(flatten)]
        lp: LpArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Replay the exact checks on a named base graph.
    Verify {
        name: String,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 2)]
        levels: usize,
    },
}

#[derive(Subcommand)]
enum Generate {
    /// Building block of a MaxCut base graph.
    Block {
        #[command(flatten)]
        base: BaseArgs,
        /// Add the unit terminal demand.
        #[arg(long)]
        st_demand: bool,
    },
    /// Recursive composition of the building block.
    Power {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        st_demand: bool,
        #[arg(long, default_value_t = 2)]
        levels: usize,
    },
    /// Hypercube gadget of a label-cover instance.
    Gadget {
        /// Label-cover file (`p ulc n d`).
        #[arg(long, conflicts_with = "fano")]
        ulc: Option<PathBuf>,
        /// Use the 3-nice Fano-plane instance with this many labels.
        #[arg(long)]
        fano: Option<usize>,
        /// Cube-edge weight, decimal or `p/q`.
        #[arg(long, default_value = "1")]
        alpha: String,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn load_input(input: &InstanceArgs, budgets: &Budgets) -> Result<(SparsestCutInstance, TreeDecomposition), Error> {
    let instance = parse_instance(&read(&input.instance)?)?;
    let td = match &input.td {
        Some(p) => parse_decomposition(&read(p)?)?,
        None => exact_decomposition(&instance, budgets.decomposition_vertices)?,
    };
    validate(&instance, &td).into_result()?;
    Ok((instance, td))
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Picks the rendering for the requested format; CSV falls back to JSON.
fn render(format: Format, json: impl FnOnce() -> String, text: impl FnOnce() -> String, csv: Option<String>) -> String {
    match format {
        Format::Json => json(),
        Format::Text => text(),
        Format::Csv => csv.unwrap_or_else(json),
    }
}

fn r(x: &Rational) -> String {
    format_rational(x)
}

fn opt(x: &Option<Rational>) -> String {
    x.as_ref().map_or("-".into(), r)
}

fn side_list(side: &[treecut::VertexId]) -> String {
    side.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

struct Output {
    primary: String,
    /// Extra files written next to `--output`: (suffix, content).
    sidecars: Vec<(&'static str, String)>,
    /// Exit code 4 when a verification failed.
    failed: bool,
}

impl Output {
    fn new(primary: String) -> Self {
        Output { primary, sidecars: Vec::new(), failed: false }
    }
}

fn run(cli: &Cli, budgets: &Budgets) -> Result<Output, Error> {
    let fmt = cli.global.format;
    match &cli.command {
        Command::Decompose { instance } => {
            let inst = parse_instance(&read(instance)?)?;
            let td = exact_decomposition(&inst, budgets.decomposition_vertices)?;
            let n = inst.vertices().last().map_or(0, |v| v.0);
            let json = || json_string(&json!({ "width": td.width(), "bags": td.bags(), "tree_edges": td.tree_edges() }));
            Ok(Output::new(render(fmt, json, || write_decomposition(&td, n), None)))
        }
        Command::Solve { input, lp } => {
            let (inst, td) = load_input(input, budgets)?;
            let solved = solve(&inst, Some(&td), &lp.options(), budgets)?;
            let rep = &solved.report;
            let text = || {
                let mut s = String::new();
                let _ = writeln!(s, "cut: {}", side_list(&rep.cut));
                let _ = writeln!(s, "capacity: {}", r(&rep.cut_capacity));
                let _ = writeln!(s, "demand: {}", r(&rep.cut_demand));
                let _ = writeln!(s, "sparsity: {}", opt(&rep.sparsity));
                let _ = writeln!(s, "lp ratio: {}", r(&rep.lp_ratio));
                let _ = writeln!(s, "alpha: {}", r(&rep.alpha));
                let _ = writeln!(s, "width: {} (input {}), depth: {}", rep.width, rep.input_width, rep.depth);
                let _ = writeln!(s, "within factor 2: {}", rep.within_factor_two);
                s
            };
            let csv = format!(
                "vertices,width,lp_ratio,sparsity,within_factor_two\n{},{},{},{},{}\n",
                rep.vertices,
                rep.width,
                r(&rep.lp_ratio),
                opt(&rep.sparsity),
                rep.within_factor_two
            );
            let mut out = Output::new(render(fmt, || json_string(rep), text, Some(csv)));
            out.failed = !rep.within_factor_two;
            Ok(out)
        }
        Command::Round { input, lp, seed, samples } => {
            let (inst, td) = load_input(input, budgets)?;
            let td = prepare_decomposition(&inst, &td)?;
            let search = ratio_search(&inst, &td, &lp.options(), budgets)?;
            let sampler = Sampler::new(&search.solution, &td)?;
            let mut best: Option<(treecut::Cut, treecut::Sparsity)> = None;
            let mut useful = 0u64;
            for i in 0..*samples {
                let cut = sampler.sample_indexed(*seed, i)?.canonical(&inst);
                let sp = evaluate_cut(&inst, &cut)?;
                if sp.ratio.is_some() {
                    useful += 1;
                }
                if best.as_ref().is_none_or(|(_, b)| sp.at_most(b) && (b.ratio.is_none() || sp.ratio != b.ratio)) {
                    best = Some((cut, sp));
                }
            }
            let (cut, sp) = best.ok_or_else(|| Error::Invalid("--samples must be positive".into()))?;
            let side: Vec<_> = cut.side().iter().copied().collect();
            let value = json!({
                "samples": samples,
                "seed": seed,
                "separating_samples": useful,
                "lp_ratio": r(&search.ratio),
                "best_cut": side,
                "capacity": r(&sp.cut_capacity),
                "demand": r(&sp.cut_demand),
                "sparsity": sp.ratio.as_ref().map(r),
            });
            let text = || {
                format!(
                    "best cut: {}\nsparsity: {}\nlp ratio: {}\nseparating samples: {useful}/{samples}\n",
                    side_list(&side),
                    opt(&sp.ratio),
                    r(&search.ratio)
                )
            };
            Ok(Output::new(render(fmt, || json_string(&value), text, None)))
        }
        Command::Oracle { instance, audit } => {
            let inst = parse_instance(&read(instance)?)?;
            let (cut, sp) = exact_sparsest_cut(&inst, budgets)?;
            let side: Vec<_> = cut.side().iter().copied().collect();
            let audit = if *audit { Some(audit_cuts(&inst, budgets)?) } else { None };
            let value = json!({
                "cut": side,
                "capacity": r(&sp.cut_capacity),
                "demand": r(&sp.cut_demand),
                "sparsity": sp.ratio.as_ref().map(r),
                "audit": audit,
            });
            let text = || {
                let mut s = format!(
                    "cut: {}\ncapacity: {}\ndemand: {}\nsparsity: {}\n",
                    side_list(&side),
                    r(&sp.cut_capacity),
                    r(&sp.cut_demand),
                    opt(&sp.ratio)
                );
                if let Some(a) = &audit {
                    let _ = writeln!(s, "cuts: {} (admissible {})", a.cuts, a.admissible_cuts);
                    if let Some(w) = &a.min_admissible_capacity {
                        let _ = writeln!(s, "min admissible capacity: {}", r(&w.capacity));
                    }
                    if let Some(w) = &a.max_admissible_ratio {
                        let _ = writeln!(s, "max admissible demand/capacity: {}", opt(&w.demand_per_capacity()));
                    }
                    if let Some(w) = &a.max_inadmissible_ratio {
                        let _ = writeln!(s, "max inadmissible demand/capacity: {}", opt(&w.demand_per_capacity()));
                    }
                }
                s
            };
            Ok(Output::new(render(fmt, || json_string(&value), text, None)))
        }
        Command::Generate(g) => generate(g, budgets),
        Command::Gap { base, rounds, levels, arith } => {
            let (name, h) = base.load()?;
            let rep = gap_experiment(&name, &h, *rounds, *levels, budgets, &solver(*arith));
            let csv = format!("{}\n{}\n", GapReport::csv_header(), rep.csv_row());
            let text = || {
                let mut s = String::new();
                let _ = writeln!(s, "base {name}, r = {rounds}, levels = {levels}");
                let _ = writeln!(s, "c = {}, mc = {:?}, s = {}", opt(&rep.c), rep.mc, opt(&rep.s));
                if let Some(l) = &rep.lifted {
                    let _ = writeln!(s, "lifted capacity {}, demand {}, sparsity {}", r(&l.capacity), r(&l.demand), r(&l.sparsity));
                }
                let _ = writeln!(s, "phi: oracle {}, formula {}", opt(&rep.phi_oracle), opt(&rep.phi_formula));
                let _ = writeln!(s, "gap ratio {}, formula {}", opt(&rep.gap_ratio), opt(&rep.gap_formula));
                for st in &rep.stages {
                    let _ = writeln!(s, "stage {}: {}", st.name, st.message.as_deref().unwrap_or("ok"));
                }
                s
            };
            Ok(Output::new(render(fmt, || json_string(&rep), text, Some(csv))))
        }
        Command::Embed { input, lp, seed, samples } => {
            let (inst, td) = load_input(input, budgets)?;
            let td = prepare_decomposition(&inst, &td)?;
            let search = ratio_search(&inst, &td, &lp.options(), budgets)?;
            let emb = embed_l1(&search.solution, &td, *samples, *seed)?;
            let json = || {
                let verts = &emb.vertices;
                let mut pairs = Vec::new();
                for (i, &u) in verts.iter().enumerate() {
                    for &v in &verts[i + 1..] {
                        pairs.push(json!({ "u": u, "v": v, "distance": emb.distance(u, v) }));
                    }
                }
                json_string(&json!({ "samples": samples, "seed": seed, "pairs": pairs }))
            };
            let csv = emb.to_csv();
            Ok(Output::new(render(fmt, json, || csv.clone(), Some(csv.clone()))))
        }
        Command::Verify { name, rounds, levels } => verify(name, *rounds, *levels, budgets),
    }
}

fn sidecar(output: &mut Output, td: &TreeDecomposition, n: u32, meta: serde_json::Value) {
    output.sidecars.push(("td", write_decomposition(td, n)));
    output.sidecars.push(("json", json_string(&meta)));
}

fn generate(g: &Generate, budgets: &Budgets) -> Result<Output, Error> {
    let last = |i: &SparsestCutInstance| i.vertices().last().map_or(0, |v| v.0);
    match g {
        Generate::Block { base, st_demand } => {
            let (name, h) = base.load()?;
            let inst = building_block(&h, *st_demand)?;
            let td = block_decomposition(&h);
            let mc = exact_maxcut(&h, budgets)?.1;
            let m = h.num_edges();
            let mut out = Output::new(write_instance(&inst));
            sidecar(
                &mut out,
                &td,
                last(&inst),
                json!({
                    "kind": "block",
                    "base": name,
                    "st_demand": st_demand,
                    "m": m,
                    "mc": mc,
                    "vertices": inst.num_vertices(),
                    "total_capacity": r(&inst.total_capacity()),
                    "total_demand": r(&inst.total_demand()),
                    "predicted_sparsity": st_demand.then(|| r(&block_sparsity_formula(m, mc))),
                    "width": td.width(),
                }),
            );
            Ok(out)
        }
        Generate::Power { base, st_demand, levels } => {
            let (name, h) = base.load()?;
            let block = building_block(&h, *st_demand)?;
            let p = power(&block, &block_decomposition(&h), *levels, budgets)?;
            let mc = exact_maxcut(&h, budgets)?.1;
            let caps = block.supply_edges().len();
            // Dictator lift of the best base cut.
            let side: std::collections::BTreeSet<_> = exact_maxcut(&h, budgets)?.0;
            let base_cut = treecut::generators::block_cut(&side);
            let base_sp = evaluate_cut(&block, &base_cut)?;
            let (pc, pd) = lifted_cut_prediction(&base_sp.cut_capacity, &base_sp.cut_demand, *levels);
            let mut out = Output::new(write_instance(&p.instance));
            sidecar(
                &mut out,
                &p.decomposition,
                last(&p.instance),
                json!({
                    "kind": "power",
                    "base": name,
                    "st_demand": st_demand,
                    "levels": levels,
                    "m": h.num_edges(),
                    "mc": mc,
                    "vertices": p.instance.num_vertices(),
                    "capacity_edges": p.num_capacity_edges(),
                    "predicted_capacity_edges": (caps as u128).pow(*levels as u32).to_string(),
                    "lifted_cut_capacity": r(&pc),
                    "lifted_cut_demand": r(&pd),
                    "width": p.decomposition.width(),
                }),
            );
            Ok(out)
        }
        Generate::Gadget { ulc, fano, alpha } => {
            let alpha = parse_rational(alpha).map_err(Error::Invalid)?;
            let ulc = match (ulc, fano) {
                (Some(p), _) => parse_ulc(&read(p)?)?,
                (None, Some(d)) => fano_ulc(*d),
                (None, None) => return Err(Error::Invalid("give --ulc or --fano".into())),
            };
            let g = ug_gadget(&ulc, alpha.clone(), budgets)?;
            let mut out = Output::new(write_instance(&g.instance));
            sidecar(
                &mut out,
                &g.decomposition,
                last(&g.instance),
                json!({
                    "kind": "gadget",
                    "n": ulc.n,
                    "d": ulc.d,
                    "alpha": r(&alpha),
                    "nice_delta": ulc.nice_delta(),
                    "vertices": g.instance.num_vertices(),
                    "total_capacity": r(&g.instance.total_capacity()),
                    "predicted_capacity": r(&g.predicted_capacity()),
                    "total_demand": r(&g.instance.total_demand()),
                    "dictator_capacity": r(&(Rational::one() + &alpha / int(2))),
                    "width": g.decomposition.width(),
                }),
            );
            Ok(out)
        }
    }
}

fn verify(name: &str, rounds: usize, levels: usize, budgets: &Budgets) -> Result<Output, Error> {
    let h = MaxCutInstance::named(name)?;
    let m = h.num_edges();
    let (_, mc) = exact_maxcut(&h, budgets)?;
    let mut lines = Vec::new();
    let mut check = |label: String, ok: bool| lines.push((label, ok));

    let block = building_block(&h, true)?;
    let td = block_decomposition(&h);
    let (_, phi) = exact_sparsest_cut(&block, budgets)?;
    let want = block_sparsity_formula(m, mc);
    check(format!("block sparsity {} = m/(m+mc) = {}", opt(&phi.ratio), r(&want)), phi.ratio.as_ref() == Some(&want));

    let solved = solve(&block, Some(&td), &SearchOptions::default(), budgets)?;
    let rep = &solved.report;
    check(
        format!("lp ratio {} <= phi {}", r(&rep.lp_ratio), opt(&phi.ratio)),
        phi.ratio.as_ref().is_some_and(|p| rep.lp_ratio <= *p),
    );
    check(
        format!("rounded sparsity {} <= 2 * lp ratio", opt(&rep.sparsity)),
        rep.within_factor_two,
    );
    check(
        format!("final potential {} <= 0", r(&rep.final_potential)),
        !(rep.final_potential > Rational::zero()),
    );
    let trace = solved.rounding.trace();
    check(
        "potential non-increasing along the greedy trace".into(),
        trace.windows(2).all(|w| w[1] <= w[0]),
    );

    let ctx = LiftContext::new(&h, rounds, levels, budgets, &SolverOptions::default())?;
    let lv = lifted_value(&ctx)?;
    let lc = int(levels as i64) * ctx.c();
    check(format!("lifted capacity {} = 1", r(&lv.capacity)), lv.capacity.is_one());
    check(format!("lifted demand {} = levels * c = {}", r(&lv.demand), r(&lc)), lv.demand == lc);
    if ctx.powered.instance.num_vertices() <= 30 {
        let cons = check_lift_consistency(&ctx, 2)?;
        check(
            format!("lift consistency on {} sets of size <= 2", cons.sets_checked),
            cons.violation.is_none(),
        );
    }
    let terminals = block.terminals().unwrap();
    debug_assert_eq!(terminals, (BLOCK_S, BLOCK_T));

    let failed = lines.iter().any(|(_, ok)| !ok);
    let mut text = String::new();
    for (label, ok) in &lines {
        let _ = writeln!(text, "{} {label}", if *ok { "PASS" } else { "FAIL" });
    }
    let mut out = Output::new(text);
    out.failed = failed;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let mut budgets = Budgets::default();
        if let Some(spec) = &cli.global.budget {
            budgets.apply(spec)?;
        }
        if let Some(v) = cli.global.budget_vertices {
            budgets.apply(&v.to_string())?;
        }
        if let Some(t) = cli.global.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Error::Invalid(e.to_string()))?;
        }
        let out = run(&cli, &budgets)?;
        match &cli.global.output {
            Some(path) => {
                std::fs::write(path, &out.primary)?;
                for (ext, content) in &out.sidecars {
                    std::fs::write(path.with_extension(ext), content)?;
                }
            }
            None => print!("{}", out.primary),
        }
        Ok::<_, Error>(out.failed)
    })();
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(4),
        Err(e) => {
            eprintln!("treecut: {} ({})", e, e.class());
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
