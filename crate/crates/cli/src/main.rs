//! `tsl`: command-line front end for synthesis, localization, transformational
//! localization, equivalence checking and the tower benchmark.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, parse or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand};

use tsl_core::automaton::{sync_product, Automaton, EventTable};
use tsl_core::bench::{bench_systems, BenchOptions, BenchReport, ControlledSystem, TimingMode};
use tsl_core::cmt::{gen_cmt, CmtConfig, Variant};
use tsl_core::context::{build_context, AgentSpec};
use tsl_core::cover::Cover;
use tsl_core::equivalence::check_control_equivalence;
use tsl_core::format::{parse_automaton, parse_automaton_with, write_automaton};
use tsl_core::localization::{build_local_supervisor, localize};
use tsl_core::synthesis::{plant_state_names, synthesize_monolithic};
use tsl_core::transformational::{isolate_detailed, tsl_with_context, AgentMapping};
use tsl_core::Error;

#[derive(Parser)]
#[command(name = "tsl", version, about = "Supervisor localization for discrete-event systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the plant and requirement automata of a cat-and-mouse tower.
    GenCmt(GenCmtArgs),
    /// Synthesize the monolithic supervisor of plants under requirements.
    Synthesize(SynthesizeArgs),
    /// Localize a supervisor: one cover and local supervisor per agent.
    Localize(LocalizeArgs),
    /// Turn a base cover into a cover of a variant supervisor.
    Isolate(IsolateArgs),
    /// Localize a variant supervisor starting from base covers.
    Tsl(TslArgs),
    /// Check local supervisors against a monolithic supervisor.
    CheckEquiv(CheckEquivArgs),
    /// Compare localization from scratch with transformational localization.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenCmtArgs {
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Cats, and mice.
    #[arg(long, default_value_t = 1)]
    animals: usize,
    /// base, v1, v2, v3, v4 or v5.
    #[arg(long, default_value = "base")]
    variant: Variant,
    #[arg(long, visible_alias = "out", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Plant component; repeat for several.
    #[arg(long = "plant", required = true)]
    plants: Vec<PathBuf>,
    /// Requirement automaton; repeat for several.
    #[arg(long = "req")]
    requirements: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the product of the plant components.
    #[arg(long)]
    plant_out: Option<PathBuf>,
    /// Name supervisor states by their plant part only, so supervisors of
    /// edited models match by plant configuration.
    #[arg(long)]
    plant_names: bool,
}

#[derive(Args)]
struct LocalizeArgs {
    #[arg(long)]
    plant: PathBuf,
    #[arg(long)]
    sup: PathBuf,
    /// Agent to localize for; repeat for several, omit for all.
    #[arg(long = "agent")]
    agents: Vec<usize>,
    /// Initial cover (a control congruence); only with a single agent.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Receives cover_<k>.txt and loc_<k>.aut.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct IsolateArgs {
    #[arg(long)]
    base_sup: PathBuf,
    #[arg(long)]
    base_cover: PathBuf,
    /// Variant plant.
    #[arg(long)]
    plant: PathBuf,
    /// Variant supervisor.
    #[arg(long)]
    sup: PathBuf,
    #[arg(long)]
    agent: usize,
    /// Output cover; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TslArgs {
    #[arg(long)]
    base_sup: PathBuf,
    /// Cover of base agent 1, 2, ... in order.
    #[arg(long = "base-cover", required = true)]
    base_covers: Vec<PathBuf>,
    /// Variant plant.
    #[arg(long)]
    plant: PathBuf,
    /// Variant supervisor.
    #[arg(long)]
    sup: PathBuf,
    /// Lines `<variant agent> <base agent or 0>`; identity if omitted.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Receives cover_<k>.txt and loc_<k>.aut.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CheckEquivArgs {
    #[arg(long)]
    plant: PathBuf,
    #[arg(long)]
    sup: PathBuf,
    /// Local supervisor; repeat for several.
    #[arg(long = "loc")]
    locs: Vec<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// v1 .. v5, base, or all.
    #[arg(long, default_value = "all")]
    variant: String,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Overridden by the DES_SEED environment variable.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 1)]
    animals: usize,
    /// Per-run CSV; standard output if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Mean table; standard output if omitted.
    #[arg(long)]
    markdown: Option<PathBuf>,
    /// strict (sequential agents) or parallel.
    #[arg(long, default_value = "strict")]
    timing: TimingMode,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load(path: &Path) -> anyhow::Result<Automaton> {
    parse_automaton(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_with(path: &Path, events: &Arc<EventTable>) -> anyhow::Result<Automaton> {
    parse_automaton_with(&read(path)?, events).with_context(|| format!("in {}", path.display()))
}

fn load_cover(path: &Path, s: &Automaton) -> anyhow::Result<Cover> {
    Cover::parse(&read(path)?, s).with_context(|| format!("in {}", path.display()))
}

fn out_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn gen_cmt_cmd(a: GenCmtArgs) -> anyhow::Result<()> {
    let model = gen_cmt(&CmtConfig::new(a.levels, a.animals, a.variant))?;
    out_dir(&a.out_dir)?;
    let animals = model.config.animal_names();
    for ((_, name), p) in animals.iter().zip(&model.plants) {
        write(&a.out_dir.join(format!("plant_{name}.aut")), &write_automaton(p))?;
    }
    for (i, r) in model.requirements.iter().enumerate() {
        write(&a.out_dir.join(format!("req_{}.aut", i + 1)), &write_automaton(r))?;
    }
    // One line per agent: its locally controllable events.
    let mut agents = String::new();
    for spec in &model.agents {
        agents.push_str(&spec.agent_index.to_string());
        for e in spec.controllable.ones() {
            agents.push(' ');
            agents.push_str(model.events.name(e));
        }
        agents.push('\n');
    }
    write(&a.out_dir.join("agents.txt"), &agents)?;
    println!(
        "wrote {} plant and {} requirement automata and agents.txt to {}",
        model.plants.len(),
        model.requirements.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn synthesize_cmd(a: SynthesizeArgs) -> anyhow::Result<()> {
    let first = load(&a.plants[0])?;
    let events = first.events().clone();
    let mut plants = vec![first];
    for p in &a.plants[1..] {
        plants.push(load_with(p, &events)?);
    }
    let reqs = a
        .requirements
        .iter()
        .map(|r| load_with(r, &events))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut sup = synthesize_monolithic(&plants, &reqs)?;
    if a.plant_names {
        sup = plant_state_names(&sup).context("plant parts do not identify supervisor states")?;
    }
    write(&a.out, &write_automaton(&sup))?;
    if let Some(path) = &a.plant_out {
        let refs: Vec<&Automaton> = plants.iter().collect();
        write(path, &write_automaton(&sync_product(&refs)?))?;
    }
    println!("supervisor: {} states, {} transitions", sup.num_states(), sup.num_transitions());
    Ok(())
}

fn agents_of(events: &EventTable, wanted: &[usize]) -> anyhow::Result<Vec<AgentSpec>> {
    let all = AgentSpec::from_table(events);
    if wanted.is_empty() {
        return Ok(all);
    }
    wanted
        .iter()
        .map(|&k| {
            all.iter()
                .find(|a| a.agent_index == k)
                .cloned()
                .ok_or_else(|| anyhow!(Error::UnknownAgent(k)))
        })
        .collect()
}

fn write_local(dir: &Path, s: &Automaton, k: usize, cover: &Cover) -> anyhow::Result<usize> {
    let loc = build_local_supervisor(s, cover, k)?;
    write(&dir.join(format!("cover_{k}.txt")), &cover.to_text(s))?;
    write(&dir.join(format!("loc_{k}.aut")), &write_automaton(&loc.automaton))?;
    Ok(loc.automaton.num_states())
}

fn localize_cmd(a: LocalizeArgs) -> anyhow::Result<()> {
    let g = load(&a.plant)?;
    let s = load_with(&a.sup, g.events())?;
    let agents = agents_of(g.events(), &a.agents)?;
    if a.init.is_some() && agents.len() != 1 {
        return Err(anyhow!(Error::InvalidConfig("--init needs exactly one --agent".into())));
    }
    let init = match &a.init {
        Some(p) => load_cover(p, &s)?,
        None => Cover::singleton(s.num_states()),
    };
    let ctx = build_context(&g, &s, &AgentSpec::from_table(g.events()))?;
    out_dir(&a.out_dir)?;
    for agent in &agents {
        let k = agent.agent_index;
        let cover = localize(&s, &ctx, k, &init)?;
        let n = write_local(&a.out_dir, &s, k, &cover)?;
        println!("agent {k}: {n} cells");
    }
    Ok(())
}

fn isolate_cmd(a: IsolateArgs) -> anyhow::Result<()> {
    let g = load(&a.plant)?;
    let s = load_with(&a.sup, g.events())?;
    let s_base = load(&a.base_sup)?;
    let base_cover = load_cover(&a.base_cover, &s_base)?;
    let ctx = build_context(&g, &s, &AgentSpec::from_table(g.events()))?;
    let iso = isolate_detailed(&base_cover, &s_base, &s, &ctx, a.agent)?;
    let text = iso.cover.to_text(&s);
    match &a.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    let names: Vec<&str> = iso.isolated.iter().map(|&x| s.state_name(x)).collect();
    eprintln!(
        "initial guess {} cells, {} isolated: {}",
        iso.initial_guess.num_cells(),
        names.len(),
        names.join(" ")
    );
    Ok(())
}

fn tsl_cmd(a: TslArgs) -> anyhow::Result<()> {
    let g = load(&a.plant)?;
    let s = load_with(&a.sup, g.events())?;
    let s_base = load(&a.base_sup)?;
    let covers = a
        .base_covers
        .iter()
        .map(|p| load_cover(p, &s_base))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let agents = AgentSpec::from_table(g.events());
    let mapping = match &a.mapping {
        Some(p) => AgentMapping::parse(&read(p)?).with_context(|| format!("in {}", p.display()))?,
        None => AgentMapping::identity(agents.len()),
    };
    let ctx = build_context(&g, &s, &agents)?;
    let out = tsl_with_context(&covers, &s_base, &s, &ctx, &mapping)?;
    out_dir(&a.out_dir)?;
    for (agent, cover) in agents.iter().zip(&out.covers) {
        let n = write_local(&a.out_dir, &s, agent.agent_index, cover)?;
        println!("agent {}: {n} cells", agent.agent_index);
    }
    Ok(())
}

fn check_equiv_cmd(a: CheckEquivArgs) -> anyhow::Result<bool> {
    let g = load(&a.plant)?;
    let s = load_with(&a.sup, g.events())?;
    let locs = a
        .locs
        .iter()
        .map(|p| load_with(p, g.events()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let refs: Vec<&Automaton> = locs.iter().collect();
    let verdict = check_control_equivalence(&g, &s, &refs)?;
    println!("{verdict}");
    Ok(verdict.equivalent)
}

fn bench_cmd(a: BenchArgs) -> anyhow::Result<()> {
    let seed = match std::env::var("DES_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow!(Error::InvalidConfig(format!("DES_SEED `{v}` is not an integer"))))?,
        Err(_) => a.seed,
    };
    let variants: Vec<Variant> = if a.variant == "all" {
        Variant::ALL_EDITS.to_vec()
    } else {
        vec![a.variant.parse()?]
    };
    let opts = BenchOptions {
        runs: a.runs,
        seed,
        timing: a.timing,
    };
    let base = ControlledSystem::cmt(&CmtConfig::new(a.levels, a.animals, Variant::Base))?;
    let mut reports = Vec::new();
    for v in variants {
        let sys = if v == Variant::Base {
            base.clone()
        } else {
            ControlledSystem::cmt(&CmtConfig::new(a.levels, a.animals, v))?
        };
        reports.push(bench_systems(&v.to_string(), &base, &sys, &opts)?);
    }
    let report = BenchReport::merge(reports)?;
    match &a.csv {
        Some(p) => write(p, &report.to_csv())?,
        None => print!("{}", report.to_csv()),
    }
    let md = format!(
        "{}\nmean change over all agents: {:+.1}%\n",
        report.to_markdown(),
        report.mean_percent_change()
    );
    match &a.markdown {
        Some(p) => write(p, &md)?,
        None => {
            if a.csv.is_none() {
                println!();
            }
            print!("{md}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::GenCmt(a) => gen_cmt_cmd(a).map(|_| true),
        Command::Synthesize(a) => synthesize_cmd(a).map(|_| true),
        Command::Localize(a) => localize_cmd(a).map(|_| true),
        Command::Isolate(a) => isolate_cmd(a).map(|_| true),
        Command::Tsl(a) => tsl_cmd(a).map(|_| true),
        Command::CheckEquiv(a) => check_equiv_cmd(a),
        Command::Bench(a) => bench_cmd(a).map(|_| true),
    }
}

fn is_verification_failure(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<Error>(),
            Some(Error::NotEquivalent(_) | Error::EmptySupervisor)
        )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_verification_failure(&e) { 1 } else { 2 })
        }
    }
}
