//! SL-versus-TSL benchmark over seeded random state orders.
//!
//! State orders come from SplitMix64 (state `s += 0x9E3779B97F4A7C15`, output
//! mixed by `z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9`,
//! `z = (z ^ z >> 27) * 0x94D049BB133111EB`, `z ^ z >> 31`) seeded directly
//! with the user seed, and a Fisher-Yates shuffle that for `i = n-1 .. 1`
//! swaps position `i` with `next_u64() % (i + 1)`.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::automaton::{apply_state_order, Automaton, StateOrder};
use crate::cmt::{gen_cmt, CmtConfig, Variant};
use crate::context::{build_context, AgentSpec, ControlContext};
use crate::cover::Cover;
use crate::equivalence::check_control_equivalence;
use crate::error::{Error, Result};
use crate::localization::{build_local_supervisor, localize, LocalSupervisor};
use crate::transformational::isolate_detailed;

pub const CSV_HEADER: &str = "variant,agent,run,sl_seconds,isolate_seconds,init_localize_seconds,tsl_seconds,cells_sl,cells_initial_guess,cells_isolated,cells_tsl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimingMode {
    /// Agents run one after another.
    #[default]
    Strict,
    /// Agents of one run execute on separate threads.
    Parallel,
}

impl FromStr for TimingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(TimingMode::Strict),
            "parallel" => Ok(TimingMode::Parallel),
            other => Err(Error::InvalidConfig(format!("unknown timing mode `{other}`"))),
        }
    }
}

/// A plant, its monolithic supervisor and its agents.
#[derive(Debug, Clone)]
pub struct ControlledSystem {
    pub plant: Automaton,
    pub supervisor: Automaton,
    pub agents: Vec<AgentSpec>,
}

impl ControlledSystem {
    pub fn cmt(cfg: &CmtConfig) -> Result<Self> {
        let model = gen_cmt(cfg)?;
        Ok(Self {
            plant: model.plant()?,
            supervisor: model.supervisor()?,
            agents: model.agents,
        })
    }
}

/// Pseudo-random permutation of `0..n`.
pub fn random_order(rng: &mut SplitMix64, n: usize) -> StateOrder {
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(rng, &mut order);
    StateOrder::new(order).expect("shuffle yields a permutation")
}

fn shuffle<T>(rng: &mut SplitMix64, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Variant order induced by a permuted base: retained states in base order,
/// then added states in shuffled order.
pub fn variant_order(
    rng: &mut SplitMix64,
    permuted_base: &Automaton,
    variant: &Automaton,
) -> StateOrder {
    let mut order: Vec<usize> = permuted_base
        .states()
        .iter()
        .filter_map(|name| variant.state_index(name))
        .collect();
    let mut added: Vec<usize> = (0..variant.num_states())
        .filter(|&x| permuted_base.state_index(variant.state_name(x)).is_none())
        .collect();
    shuffle(rng, &mut added);
    order.extend(added);
    StateOrder::new(order).expect("retained and added states partition the variant")
}

/// Measurements of one agent in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub variant: String,
    pub agent: usize,
    pub run: usize,
    pub sl_seconds: f64,
    pub isolate_seconds: f64,
    pub init_localize_seconds: f64,
    pub tsl_seconds: f64,
    pub cells_sl: usize,
    pub cells_initial_guess: usize,
    pub cells_isolated: usize,
    pub cells_tsl: usize,
}

/// Per-agent means over all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub variant: String,
    pub agent: usize,
    pub sl_seconds: f64,
    pub isolate_seconds: f64,
    pub init_localize_seconds: f64,
    pub tsl_seconds: f64,
    /// `(tsl - sl) / sl * 100`; negative means TSL is faster.
    pub percent_change: f64,
    pub cells_sl: f64,
    pub cells_initial_guess: f64,
    pub cells_isolated: f64,
    pub cells_tsl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub runs: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    pub summary: Vec<AgentSummary>,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub runs: usize,
    pub seed: u64,
    pub timing: TimingMode,
}

struct AgentResult {
    row: BenchRow,
    sl: LocalSupervisor,
    tsl: LocalSupervisor,
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

#[allow(clippy::too_many_arguments)]
fn run_agent(
    label: &str,
    run: usize,
    k: usize,
    base_cover: &Cover,
    s_base: &Automaton,
    s_var: &Automaton,
    ctx: &ControlContext,
) -> Result<AgentResult> {
    let singleton = Cover::singleton(s_var.num_states());
    let (sl_cover, sl_seconds) = timed(|| localize(s_var, ctx, k, &singleton))?;
    let (iso, isolate_seconds) = timed(|| isolate_detailed(base_cover, s_base, s_var, ctx, k))?;
    let (tsl_cover, init_localize_seconds) = timed(|| localize(s_var, ctx, k, &iso.cover))?;
    Ok(AgentResult {
        row: BenchRow {
            variant: label.to_owned(),
            agent: k,
            run,
            sl_seconds,
            isolate_seconds,
            init_localize_seconds,
            tsl_seconds: isolate_seconds + init_localize_seconds,
            cells_sl: sl_cover.num_cells(),
            cells_initial_guess: iso.initial_guess.num_cells(),
            cells_isolated: iso.cover.num_cells(),
            cells_tsl: tsl_cover.num_cells(),
        },
        sl: build_local_supervisor(s_var, &sl_cover, k)?,
        tsl: build_local_supervisor(s_var, &tsl_cover, k)?,
    })
}

fn require_equivalent(sys: &ControlledSystem, locs: &[LocalSupervisor], what: &str) -> Result<()> {
    let refs: Vec<&Automaton> = locs.iter().map(|l| &l.automaton).collect();
    let verdict = check_control_equivalence(&sys.plant, &sys.supervisor, &refs)?;
    if verdict.equivalent {
        Ok(())
    } else {
        Err(Error::NotEquivalent(format!("{what}: {verdict}")))
    }
}

/// Runs SL and TSL on `variant` for every agent, reusing SL covers of `base`
/// under the same random order, with agent `k` of the variant mapped to
/// agent `k` of the base.
///
/// Fails if any produced set of local supervisors is not control
/// equivalent to the variant supervisor.
pub fn bench_systems(
    label: &str,
    base: &ControlledSystem,
    variant: &ControlledSystem,
    opts: &BenchOptions,
) -> Result<BenchReport> {
    if opts.runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    let mut rng = SplitMix64::seed_from_u64(opts.seed);
    let agents: Vec<usize> = variant.agents.iter().map(|a| a.agent_index).collect();
    let mut rows = Vec::new();
    for run in 1..=opts.runs {
        let base_order = random_order(&mut rng, base.supervisor.num_states());
        let s_base = apply_state_order(&base.supervisor, &base_order)?;
        let var_order = variant_order(&mut rng, &s_base, &variant.supervisor);
        let s_var = apply_state_order(&variant.supervisor, &var_order)?;

        let base_ctx = build_context(&base.plant, &s_base, &base.agents)?;
        let base_covers: Vec<Cover> = base
            .agents
            .iter()
            .map(|a| localize(&s_base, &base_ctx, a.agent_index, &Cover::singleton(s_base.num_states())))
            .collect::<Result<_>>()?;
        let base_cover = |k: usize| {
            base.agents
                .iter()
                .position(|a| a.agent_index == k)
                .map(|i| &base_covers[i])
                .ok_or(Error::UnknownAgent(k))
        };
        let ctx = build_context(&variant.plant, &s_var, &variant.agents)?;

        let results: Vec<AgentResult> = match opts.timing {
            TimingMode::Strict => agents
                .iter()
                .map(|&k| run_agent(label, run, k, base_cover(k)?, &s_base, &s_var, &ctx))
                .collect::<Result<_>>()?,
            TimingMode::Parallel => std::thread::scope(|scope| {
                let handles: Vec<_> = agents
                    .iter()
                    .map(|&k| {
                        let (s_base, s_var, ctx) = (&s_base, &s_var, &ctx);
                        let cover = base_cover(k);
                        scope.spawn(move || run_agent(label, run, k, cover?, s_base, s_var, ctx))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("agent thread panicked"))
                    .collect::<Result<Vec<_>>>()
            })?,
        };

        let sl: Vec<LocalSupervisor> = results.iter().map(|r| r.sl.clone()).collect();
        let tsl: Vec<LocalSupervisor> = results.iter().map(|r| r.tsl.clone()).collect();
        let variant_sys = ControlledSystem {
            plant: variant.plant.clone(),
            supervisor: s_var.clone(),
            agents: variant.agents.clone(),
        };
        require_equivalent(&variant_sys, &sl, &format!("{label} run {run} SL"))?;
        require_equivalent(&variant_sys, &tsl, &format!("{label} run {run} TSL"))?;
        rows.extend(results.into_iter().map(|r| r.row));
    }
    let summary = summarize(&rows);
    Ok(BenchReport {
        runs: opts.runs,
        seed: opts.seed,
        rows,
        summary,
    })
}

/// Benchmarks one tower variant against the base tower of the same size.
pub fn bench(levels: usize, animals: usize, variant: Variant, opts: &BenchOptions) -> Result<BenchReport> {
    let base = ControlledSystem::cmt(&CmtConfig::new(levels, animals, Variant::Base))?;
    let var = if variant == Variant::Base {
        base.clone()
    } else {
        ControlledSystem::cmt(&CmtConfig::new(levels, animals, variant))?
    };
    bench_systems(&variant.to_string(), &base, &var, opts)
}

fn summarize(rows: &[BenchRow]) -> Vec<AgentSummary> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in rows {
        let key = (r.variant.clone(), r.agent);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(variant, agent)| {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.variant == variant && r.agent == agent)
                .collect();
            let mean = |f: &dyn Fn(&BenchRow) -> f64| {
                group.iter().map(|r| f(r)).sum::<f64>() / group.len() as f64
            };
            let sl = mean(&|r| r.sl_seconds);
            let tsl = mean(&|r| r.tsl_seconds);
            AgentSummary {
                sl_seconds: sl,
                isolate_seconds: mean(&|r| r.isolate_seconds),
                init_localize_seconds: mean(&|r| r.init_localize_seconds),
                tsl_seconds: tsl,
                percent_change: percent_change(sl, tsl),
                cells_sl: mean(&|r| r.cells_sl as f64),
                cells_initial_guess: mean(&|r| r.cells_initial_guess as f64),
                cells_isolated: mean(&|r| r.cells_isolated as f64),
                cells_tsl: mean(&|r| r.cells_tsl as f64),
                variant,
                agent,
            }
        })
        .collect()
}

pub fn percent_change(sl: f64, tsl: f64) -> f64 {
    if sl == 0.0 {
        0.0
    } else {
        (tsl - sl) / sl * 100.0
    }
}

impl BenchReport {
    /// Concatenates reports, e.g. of several variants, recomputing the summary.
    pub fn merge(reports: Vec<BenchReport>) -> Result<BenchReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::InvalidConfig("no reports to merge".into()))?;
        let (runs, seed) = (first.runs, first.seed);
        let rows: Vec<BenchRow> = reports.into_iter().flat_map(|r| r.rows).collect();
        Ok(BenchReport {
            runs,
            seed,
            summary: summarize(&rows),
            rows,
        })
    }

    /// Mean of the per-agent percent changes.
    pub fn mean_percent_change(&self) -> f64 {
        if self.summary.is_empty() {
            return 0.0;
        }
        self.summary.iter().map(|s| s.percent_change).sum::<f64>() / self.summary.len() as f64
    }

    /// One line per (variant, agent, run).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
                r.variant,
                r.agent,
                r.run,
                r.sl_seconds,
                r.isolate_seconds,
                r.init_localize_seconds,
                r.tsl_seconds,
                r.cells_sl,
                r.cells_initial_guess,
                r.cells_isolated,
                r.cells_tsl
            );
        }
        out
    }

    /// Aligned table of per-agent means.
    pub fn to_markdown(&self) -> String {
        let header = [
            "variant",
            "agent",
            "SL [s]",
            "isolate [s]",
            "init. localize [s]",
            "TSL [s]",
            "% change",
            "cells SL",
            "cells initial guess",
            "cells isolated",
            "cells TSL",
        ];
        let body: Vec<Vec<String>> = self
            .summary
            .iter()
            .map(|s| {
                vec![
                    s.variant.clone(),
                    s.agent.to_string(),
                    format!("{:.4}", s.sl_seconds),
                    format!("{:.4}", s.isolate_seconds),
                    format!("{:.4}", s.init_localize_seconds),
                    format!("{:.4}", s.tsl_seconds),
                    format!("{:+.0}%", s.percent_change),
                    format!("{:.1}", s.cells_sl),
                    format!("{:.1}", s.cells_initial_guess),
                    format!("{:.1}", s.cells_isolated),
                    format!("{:.1}", s.cells_tsl),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| body.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let mut s = String::from("|");
            for (c, cell) in cells.iter().enumerate() {
                if c < 2 {
                    let _ = write!(s, " {:<w$} |", cell, w = widths[c]);
                } else {
                    let _ = write!(s, " {:>w$} |", cell, w = widths[c]);
                }
            }
            s.push('\n');
            s
        };
        let mut out = format!("runs: {}, seed: {}\n\n", self.runs, self.seed);
        out += &line(&header.map(String::from));
        let mut sep = String::from("|");
        for (c, w) in widths.iter().enumerate() {
            if c < 2 {
                let _ = write!(sep, " {} |", "-".repeat(*w));
            } else {
                let _ = write!(sep, " {}: |", "-".repeat(w - 1));
            }
        }
        out += &sep;
        out.push('\n');
        for r in &body {
            out += &line(r);
        }
        out
    }
}
