use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use depeg_core::cit::CitParams;
use depeg_core::code::{read_alist, write_alist, TannerGraph};
use depeg_core::cost::{
    fig2, table1, table2, to_gb, total_cost, Bytes, KStarCache, SweepBase, SweepRow, Table1Row, Table2Input, Table2Row,
    REFERENCE_DE_PEG_TUPLES, REFERENCE_PEG_TUPLES,
};
use depeg_core::dispersal::{
    check_ss_valid, d_threshold, k_star, plan_dispersal, relabel_sets, DispersalPlan, Holdings, Phases,
    ValidityVerdict,
};
use depeg_core::peg::ConstructionMeta;
use depeg_core::sim::{adversarial_worst_case_search, run_round, AdversaryModel, RoundOutcome, SearchOutcome, Transcript};
use depeg_core::stopping::{enumerate_stopping_sets, EnumerateOptions, StoppingSetReport};
use depeg_core::{build_de_peg, build_peg, Fraction};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{config_hash, AdversarySpec, Algorithm, RunConfig};
use crate::error::CliError;
use crate::output::{read_json, read_text, write_csv, write_json, write_text, Provenance};

/// Independent random stream per pipeline stage.
fn stage_rng(seed: u64, stage: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng
}

const STAGE_ANALYZE: u64 = 1;
const STAGE_PLAN: u64 = 2;
const STAGE_SIMULATE: u64 = 3;

fn code_path(out: &Path, layer: usize) -> PathBuf {
    out.join("codes").join(format!("layer{layer}.alist"))
}

fn report_path(out: &Path, layer: usize) -> PathBuf {
    out.join("reports").join(format!("layer{layer}.txt"))
}

pub fn construct(c: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let prov = Provenance::new(config_hash(c));
    let metas = c
        .layer_params()
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let (g, meta) = match c.construction.algorithm {
                Algorithm::Peg => {
                    let g = build_peg(p)?;
                    let m = ConstructionMeta::new("peg", p, &g, None);
                    (g, m)
                }
                Algorithm::DePeg => {
                    let (g, ledger) = build_de_peg(p)?;
                    let m = ConstructionMeta::new("de-peg", p, &g, Some(&ledger));
                    (g, m)
                }
            };
            write_text(&code_path(out, j + 1), &format!("{}{}", write_alist(&g), prov.comment()))?;
            Ok(meta)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_json(&out.join("construction.json"), &prov, &metas)?;
    Ok(json!({ "command": "construct", "layers": metas.len(), "girth": metas.iter().map(|m| m.girth).collect::<Vec<_>>() }))
}

fn load_codes(c: &RunConfig, out: &Path) -> Result<Vec<TannerGraph>, CliError> {
    (1..=c.cit.layers).map(|j| Ok(read_alist(&read_text(&code_path(out, j))?)?)).collect()
}

fn load_reports(c: &RunConfig, out: &Path) -> Result<Vec<StoppingSetReport>, CliError> {
    (1..=c.cit.layers).map(|j| Ok(StoppingSetReport::from_text(&read_text(&report_path(out, j))?)?)).collect()
}

/// Stopping-set size bound per layer for the configured mu.
fn thresholds(c: &RunConfig) -> Result<Vec<u64>, CliError> {
    let m = c.cit.base_size;
    Ok(c.cit.shapes()?.iter().map(|s| d_threshold(s.n as u64, m, c.mu)).collect::<Result<_, _>>()?)
}

#[derive(Serialize, Deserialize)]
struct LayerAnalysis {
    layer: usize,
    bound: usize,
    exhaustive: bool,
    expansions: u64,
    sets: usize,
    min_size: String,
    cover_size: usize,
}

pub fn analyze(c: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let prov = Provenance::new(config_hash(c));
    let codes = load_codes(c, out)?;
    let d = thresholds(c)?;
    let opts = EnumerateOptions { budget: c.analysis.budget, minimal_only: c.analysis.minimal_only };
    let mut rng = stage_rng(c.seed, STAGE_ANALYZE);
    let mut summary = Vec::new();
    for (j, (g, &dj)) in codes.iter().zip(&d).enumerate() {
        let r = enumerate_stopping_sets(g, dj as usize, &opts, &mut rng)?;
        write_text(&report_path(out, j + 1), &format!("{}{}", prov.comment(), r.to_text()))?;
        summary.push(LayerAnalysis {
            layer: j + 1,
            bound: r.size_bound,
            exhaustive: r.exhaustive,
            expansions: r.expansions,
            sets: r.sets.len(),
            min_size: r.min_size.to_string(),
            cover_size: r.greedy_cover.len(),
        });
    }
    write_json(&out.join("analysis.json"), &prov, &summary)?;
    Ok(json!({ "command": "analyze", "layers": summary }))
}

#[derive(Serialize, Deserialize)]
pub struct PlanResult {
    pub plan: DispersalPlan,
    pub secure_phase: bool,
    /// Per layer, whether every `ceil(gamma N)` nodes jointly hold more than `n_j - d_j` chunks.
    pub validity: Vec<ValidityVerdict>,
    pub accepted: bool,
}

pub fn plan(c: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let prov = Provenance::new(config_hash(c));
    let codes = load_codes(c, out)?;
    let reports = load_reports(c, out)?;
    let mut rng = stage_rng(c.seed, STAGE_PLAN);
    let mut plan = plan_dispersal(&codes, &reports, &c.cit, &c.oracle, c.mu, c.k, c.analysis.allow_partial, &mut rng)?;
    if !c.secure_phase {
        plan = plan.without_secure_phase();
    }
    let holdings = Holdings::from_plan(&plan, Phases::Both)?;
    let d = thresholds(c)?;
    let mode = c.validity.mode(c.seed);
    let validity = c
        .cit
        .shapes()?
        .iter()
        .enumerate()
        .map(|(j, s)| check_ss_valid(&holdings, j + 1, s.n, d[j] as usize, c.oracle.draws() as usize, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let accepted = validity.iter().all(ValidityVerdict::is_valid);
    let summary = json!({ "command": "plan", "k": plan.k, "fresh": plan.fresh, "accepted": accepted });
    write_json(&out.join("plan.json"), &prov, &PlanResult { plan, secure_phase: c.secure_phase, validity, accepted })?;
    Ok(summary)
}

const COST_HEADER: [&str; 10] = ["N", "beta", "f", "mu", "k", "cover_sizes", "C_root", "C_s", "C_v", "C_T"];

fn gb(x: &Bytes) -> String {
    format!("{:.6}", to_gb(x))
}

pub fn cost(c: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let prov = Provenance::new(config_hash(c));
    let vgr = match &c.cover_sizes {
        Some(v) => v.clone(),
        None => load_reports(c, out)?.iter().map(|r| r.greedy_cover.len()).collect(),
    };
    let n = c.oracle.num_nodes;
    let f = c.oracle.max_faulty();
    let k = match c.k {
        Some(k) => Ok(k),
        None => match k_star(c.mu, n, c.cit.base_size, c.oracle.gamma.to_f64(), c.oracle.draws(), c.oracle.p_th) {
            Ok(k) => Ok(k.k),
            Err(depeg_core::Error::Infeasible(e)) => Err(e),
            Err(e) => return Err(e.into()),
        },
    };
    let tuple = format!("({})", vgr.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    let mut row = vec![n.to_string(), c.oracle.beta.to_string(), f.to_string(), c.mu.to_string()];
    let summary = match &k {
        Ok(k) => {
            let b = total_cost(&c.cit, n, f, *k, &vgr)?;
            row.extend([k.to_string(), tuple, gb(&b.root), gb(&b.secure), gb(&b.valid), gb(&b.total), String::new()]);
            json!({ "command": "cost", "k": k, "C_T_GB": to_gb(&b.total) })
        }
        Err(e) => {
            row.extend([String::new(), tuple, String::new(), String::new(), String::new(), String::new()]);
            row.push(format!("infeasible: {e}"));
            json!({ "command": "cost", "infeasible": e })
        }
    };
    let mut header = COST_HEADER.to_vec();
    header.push("note");
    write_csv(&out.join("cost.csv"), &prov, &header, &[row])?;
    Ok(summary)
}

#[derive(Serialize)]
struct RoundSummary {
    round: u64,
    malicious: Vec<usize>,
    search: Option<SearchOutcome>,
    outcome: RoundOutcome,
}

pub fn simulate(c: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let prov = Provenance::new(config_hash(c));
    let codes = load_codes(c, out)?;
    let doc = read_json::<PlanResult>(&out.join("plan.json"))?;
    let plan = doc.result.plan;
    let codes = plan.permuted_codes(&codes)?;
    let mut rng = stage_rng(c.seed, STAGE_SIMULATE);
    let mut transcript = if c.simulation.transcript { Transcript::recording() } else { Transcript::off() };
    let n = c.oracle.num_nodes as usize;
    let f = c.oracle.max_faulty() as usize;
    let mut rounds = Vec::new();
    for round in 0..c.simulation.rounds {
        let block: Vec<u8> = (0..c.cit.block_size).map(|_| rng.random()).collect();
        let (adversary, search) = match &c.simulation.adversary {
            AdversarySpec::Honest => (AdversaryModel::honest(), None),
            AdversarySpec::Nodes { malicious, vote, withhold } => (
                AdversaryModel {
                    malicious: malicious.iter().copied().collect(),
                    vote: *vote,
                    withhold: withhold.clone(),
                    starved: BTreeSet::new(),
                },
                None,
            ),
            AdversarySpec::WorstCase { budget } => {
                let reports = load_reports(c, out)?;
                let targets: Vec<Vec<Vec<usize>>> =
                    reports.iter().zip(&plan.permutations).map(|(r, p)| relabel_sets(&r.sets, p)).collect();
                let s = adversarial_worst_case_search(&plan, &codes, &targets, *budget, &mut rng)?;
                let malicious: Vec<usize> = match &s {
                    SearchOutcome::Witness(w) => w.malicious.clone(),
                    SearchOutcome::NoneFound { .. } => sample(&mut rng, n, f).into_vec(),
                };
                (AdversaryModel::withholding(malicious), Some(s))
            }
        };
        let outcome = run_round(&block, &codes, &plan, &adversary, &mut transcript)?;
        rounds.push(RoundSummary { round, malicious: adversary.malicious.into_iter().collect(), search, outcome });
    }
    let committed = rounds.iter().filter(|r| r.outcome.committed).count();
    let broken = rounds.iter().filter(|r| r.outcome.committed && !r.outcome.available).count();
    if c.simulation.transcript {
        let mut buf = serde_json::to_vec(&json!({ "provenance": prov })).map_err(depeg_core::Error::from)?;
        buf.push(b'\n');
        transcript.write_jsonl(&mut buf)?;
        let path = out.join("transcript.jsonl");
        std::fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
    }
    let summary = json!({
        "command": "simulate",
        "rounds": rounds.len(),
        "committed": committed,
        "committed_but_unavailable": broken,
    });
    write_json(&out.join("simulation.json"), &prov, &json!({ "summary": summary, "rounds": rounds }))?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Target {
    Table1,
    Table2,
    Fig2,
}

#[derive(Serialize)]
struct Table1Input {
    cit: CitParams,
    num_nodes: u64,
    beta: Fraction,
    p_th: f64,
    rows: Vec<(u64, Vec<usize>, Vec<usize>)>,
}

#[derive(Serialize)]
struct Fig2Input<'a> {
    base: &'a SweepBase,
    nodes: &'a [u64],
    betas: &'a [Fraction],
}

pub struct ReproduceOptions {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub nodes: Vec<u64>,
    pub betas: Vec<Fraction>,
}

pub fn reproduce(target: Target, opts: &ReproduceOptions, out: &Path) -> Result<Value, CliError> {
    let cache = KStarCache::new();
    match target {
        Target::Table1 => {
            let input = Table1Input {
                cit: CitParams::reference(),
                num_nodes: 9000,
                beta: Fraction::new(49, 100),
                p_th: 1e-8,
                rows: (17..=21u64)
                    .zip(REFERENCE_PEG_TUPLES.iter().zip(&REFERENCE_DE_PEG_TUPLES))
                    .map(|(mu, (a, b))| (mu, a.to_vec(), b.to_vec()))
                    .collect(),
            };
            let prov = Provenance::new(config_hash(&input));
            let rows = table1(&input.cit, input.num_nodes, input.beta, input.p_th, &input.rows, &cache)?;
            let records: Vec<Vec<String>> = rows.iter().map(Table1Row::record).collect();
            write_csv(&out.join("table1.csv"), &prov, &Table1Row::HEADER, &records)?;
            Ok(json!({ "command": "reproduce table1", "k_star": rows.iter().map(|r| r.k).collect::<Vec<_>>() }))
        }
        Target::Table2 => {
            let mut input = Table2Input::reference();
            if let Some(t) = opts.trials {
                input.trials = t;
            }
            if let Some(s) = opts.seed {
                input.seed = s;
            }
            let prov = Provenance::new(config_hash(&input));
            let rows = table2(&input, &cache)?;
            let records: Vec<Vec<String>> = rows.iter().map(Table2Row::record).collect();
            write_csv(&out.join("table2.csv"), &prov, &Table2Row::HEADER, &records)?;
            Ok(json!({ "command": "reproduce table2", "N": rows.iter().map(|r| r.n_nodes).collect::<Vec<_>>() }))
        }
        Target::Fig2 => {
            let base = SweepBase::reference();
            let input = Fig2Input { base: &base, nodes: &opts.nodes, betas: &opts.betas };
            let prov = Provenance::new(config_hash(&input));
            let rows = fig2(&base, &opts.nodes, &opts.betas, &cache)?;
            let records: Vec<Vec<String>> = rows.iter().map(SweepRow::record).collect();
            write_csv(&out.join("fig2.csv"), &prov, &SweepRow::HEADER, &records)?;
            Ok(json!({ "command": "reproduce fig2", "rows": rows.len() }))
        }
    }
}
