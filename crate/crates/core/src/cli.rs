//! Command-line harness: spec files, simulated repair runs, bandwidth tables
//! and verification reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grs_code::CodeSpec;
use crate::repair_engine::{make_plan, plan_downloads, Bandwidth, HelperPayload, RepairPlan};
use crate::repair_sets::{is_legal, legal_pairs};
use crate::tower_field::{build_tower, pack_residues, FieldElement, Mode, TowerSpec};
use crate::verifier::{
    check_claim1, check_duality, check_lemma_ints, check_lemma_ish, check_propositions, render_table, CheckReport,
};

#[derive(Debug, Parser)]
#[command(name = "rsrepair", version, about = "Reed-Solomon multi-erasure repair at the cut-set bound")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a tower and write its code spec as JSON.
    Build(BuildArgs),
    /// Run repair experiments on a simulated cluster and write a transcript.
    Repair(RepairArgs),
    /// Tabulate planned bandwidth for every legal (h, d) as CSV.
    Table(TableArgs),
    /// Run the dimension, basis and duality checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    Universal,
    TwoErasure,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, value_enum)]
    pub mode: ModeKind,
    /// Largest number of erasures (universal mode).
    #[arg(long)]
    pub r: Option<usize>,
    /// Number of helpers (two-erasure mode).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Comma-separated 1-based nodes, or `all` for every subset of size `--h`.
    #[arg(long)]
    pub failed: NodeSelector,
    /// Comma-separated 1-based nodes, or `all` for every subset of size `--d`
    /// of the surviving nodes. Defaults to all survivors.
    #[arg(long)]
    pub helpers: Option<NodeSelector>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    All,
    Ints,
    Ish,
    Props,
    Claim1,
    Duality,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = Which::All)]
    pub which: Which,
    /// Restrict span checks to this failed set (1-based, comma-separated).
    #[arg(long)]
    pub failed: Option<NodeSelector>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Explicit 1-based node list, or every subset of a given size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeSelector {
    Explicit(Vec<usize>),
    All,
}

impl FromStr for NodeSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "all" {
            return Ok(Self::All);
        }
        s.split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(0) => Err("nodes are numbered from 1".to_string()),
                Ok(j) => Ok(j - 1),
                Err(e) => Err(format!("bad node `{t}`: {e}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::Explicit)
    }
}

/// Tower and code parameters as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecFile {
    pub p: u32,
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub beta_degree: usize,
    pub primes: Vec<usize>,
    pub beta_poly: Vec<u32>,
    pub alpha_polys: Vec<Vec<u32>>,
    pub sub_packetization: u128,
}

impl SpecFile {
    pub fn from_tower(t: &TowerSpec) -> Self {
        Self {
            p: t.p(),
            mode: t.mode(),
            n: t.n(),
            k: t.k(),
            beta_degree: t.beta_degree(),
            primes: t.primes().to_vec(),
            beta_poly: t.beta_poly().coeffs().to_vec(),
            alpha_polys: (0..t.n()).map(|j| t.alpha_poly(j).coeffs().to_vec()).collect(),
            sub_packetization: t.sub_packetization(),
        }
    }

    /// Rebuilds the tower and checks it against the stored parameters.
    pub fn tower(&self) -> anyhow::Result<TowerSpec> {
        let t = build_tower(self.p, self.mode, self.n, self.k)?;
        if Self::from_tower(&t) != *self {
            bail!("spec file does not match the tower rebuilt from its parameters");
        }
        Ok(t)
    }
}

pub fn mode_from(kind: ModeKind, r: Option<usize>, d: Option<usize>) -> anyhow::Result<Mode> {
    match kind {
        ModeKind::Universal => Ok(Mode::Universal { r: r.context("--r is required in universal mode")? }),
        ModeKind::TwoErasure => Ok(Mode::TwoErasure { d: d.context("--d is required in two-erasure mode")? }),
    }
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Writes to `out`, or returns the text for standard output.
fn emit(out: Option<&Path>, text: String) -> anyhow::Result<Option<String>> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

pub fn load_spec(path: &Path) -> anyhow::Result<TowerSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: SpecFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.tower()
}

pub fn subsets(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(pool: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, size, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(pool, size, 0, &mut cur, &mut out);
    out
}

pub fn cmd_build(args: &BuildArgs) -> anyhow::Result<Option<String>> {
    let mode = mode_from(args.mode, args.r, args.d)?;
    let tower = build_tower(args.p, mode, args.n, args.k)?;
    emit(args.out.as_deref(), to_json(&SpecFile::from_tower(&tower))?)
}

/// The `n` storage nodes of a simulated cluster with a traffic meter.
struct Cluster {
    nodes: Vec<Option<FieldElement>>,
    metered: u128,
}

impl Cluster {
    fn store(codeword: Vec<FieldElement>) -> Self {
        Self { nodes: codeword.into_iter().map(Some).collect(), metered: 0 }
    }

    fn erase(&mut self, failed: &[usize]) {
        for &j in failed {
            self.nodes[j] = None;
        }
    }

    /// Each helper computes its payload from its own content only.
    fn collect(&mut self, plan: &RepairPlan) -> anyhow::Result<Vec<HelperPayload>> {
        let mut out = Vec::new();
        for &j in plan.download().helpers() {
            let content = self.nodes[j].as_ref().with_context(|| format!("helper {} holds no data", j + 1))?;
            let payload = plan.helper_payload(j, content)?;
            self.metered += payload.symbols.len() as u128;
            out.push(payload);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PayloadRecord {
    pub helper: usize,
    pub hex: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub exact: bool,
    pub metered: u128,
    pub payloads: Vec<PayloadRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub failed: Vec<usize>,
    pub helpers: Vec<usize>,
    pub planned: Bandwidth,
    pub trials: Vec<TrialRecord>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub spec: SpecFile,
    pub seed: u64,
    pub rng: &'static str,
    pub runs: Vec<RunRecord>,
    pub pass: bool,
}

fn one_based(nodes: &[usize]) -> Vec<usize> {
    nodes.iter().map(|j| j + 1).collect()
}

/// Resolves the selectors into concrete `(failed, helpers)` pairs.
pub fn experiments(spec: &TowerSpec, args: &RepairArgs) -> anyhow::Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = spec.n();
    let all: Vec<usize> = (0..n).collect();
    let failed_sets = match &args.failed {
        NodeSelector::Explicit(v) => vec![v.clone()],
        NodeSelector::All => subsets(&all, args.h.context("--failed all needs --h")?),
    };
    let mut out = Vec::new();
    for failed in failed_sets {
        let rest: Vec<usize> = all.iter().copied().filter(|j| !failed.contains(j)).collect();
        match (&args.helpers, args.d) {
            (Some(NodeSelector::Explicit(v)), _) => out.push((failed, v.clone())),
            (Some(NodeSelector::All), None) => bail!("--helpers all needs --d"),
            (Some(NodeSelector::All), Some(d)) | (None, Some(d)) => {
                out.extend(subsets(&rest, d).into_iter().map(|r| (failed.clone(), r)));
            }
            (None, None) => out.push((failed, rest)),
        }
    }
    Ok(out)
}

/// Runs every experiment; the transcript reports exactness and metered traffic.
pub fn run_repairs(
    spec: &TowerSpec,
    experiments: &[(Vec<usize>, Vec<usize>)],
    trials: usize,
    seed: u64,
) -> anyhow::Result<Transcript> {
    let code = Arc::new(CodeSpec::new(spec)?);
    let field = code.field().clone();
    let p = spec.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::new();
    for (failed, helpers) in experiments {
        let plan = make_plan(spec, code.clone(), failed, helpers)?;
        let planned = plan.bandwidth()?;
        let failed = plan.download().failed().to_vec();
        let mut records = Vec::with_capacity(trials);
        for trial in 0..trials {
            let msg: Vec<FieldElement> = (0..spec.k()).map(|_| field.random(&mut rng)).collect();
            let codeword = code.encode(&msg)?;
            let mut cluster = Cluster::store(codeword.clone());
            cluster.erase(&failed);
            let payloads = cluster.collect(&plan)?;
            let recovered = plan.reconstruct(&payloads)?;
            let exact = failed.iter().zip(&recovered).all(|(&f, c)| *c == codeword[f]);
            records.push(TrialRecord {
                trial,
                exact,
                metered: cluster.metered,
                payloads: payloads
                    .iter()
                    .map(|x| PayloadRecord { helper: x.helper + 1, hex: hex::encode(pack_residues(&x.symbols, p)) })
                    .collect(),
            });
        }
        let pass = records.iter().all(|t| t.exact && t.metered == planned.total) && planned.total == planned.cutset;
        runs.push(RunRecord {
            failed: one_based(&failed),
            helpers: one_based(plan.download().helpers()),
            planned,
            trials: records,
            pass,
        });
    }
    let pass = runs.iter().all(|r| r.pass);
    Ok(Transcript { spec: SpecFile::from_tower(spec), seed, rng: "ChaCha8", runs, pass })
}

pub fn cmd_repair(args: &RepairArgs) -> anyhow::Result<(bool, String)> {
    let spec = load_spec(&args.spec)?;
    let transcript = run_repairs(&spec, &experiments(&spec, args)?, args.trials, args.seed)?;
    let mut summary = String::new();
    for r in &transcript.runs {
        let exact = r.trials.iter().filter(|t| t.exact).count();
        writeln!(
            summary,
            "failed={} helpers={} exact={exact}/{} total={} cutset={} naive={} {}",
            brace(&r.failed),
            brace(&r.helpers),
            r.trials.len(),
            r.planned.total,
            r.planned.cutset,
            r.planned.naive,
            if r.pass { "pass" } else { "FAIL" }
        )?;
    }
    let json = to_json(&transcript)?;
    if let Some(s) = emit(args.out.as_deref(), json)? {
        summary.push_str(&s);
    }
    Ok((transcript.pass, summary))
}

fn brace(nodes: &[usize]) -> String {
    let inner: Vec<String> = nodes.iter().map(|j| j.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `a / b` in lowest terms.
pub fn ratio(a: u128, b: u128) -> String {
    let g = gcd(a, b).max(1);
    if b / g == 1 {
        (a / g).to_string()
    } else {
        format!("{}/{}", a / g, b / g)
    }
}

/// CSV of planned bandwidth for every legal `(h, d)`, from plan construction alone.
pub fn bandwidth_table(spec: &TowerSpec) -> anyhow::Result<String> {
    let mut csv = String::from("h,d,per_helper,total,cutset,ratio,naive,whole_helpers\n");
    for (h, d) in legal_pairs(spec.mode(), spec.n(), spec.k()) {
        let failed: Vec<usize> = (0..h).collect();
        let helpers: Vec<usize> = (h..h + d).collect();
        let bw = plan_downloads(spec, &failed, &helpers)?.bandwidth()?;
        writeln!(
            csv,
            "{h},{d},{},{},{},{},{},{}",
            bw.per_helper,
            bw.total,
            bw.cutset,
            ratio(bw.total, bw.cutset),
            bw.naive,
            bw.whole_helpers
        )?;
    }
    Ok(csv)
}

pub fn cmd_table(args: &TableArgs) -> anyhow::Result<Option<String>> {
    let spec = load_spec(&args.spec)?;
    emit(args.out.as_deref(), bandwidth_table(&spec)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub spec: SpecFile,
    pub reports: Vec<CheckReport>,
    pub pass: bool,
}

/// Runs the selected checks over every legal instance of the spec.
pub fn run_checks(
    spec: &TowerSpec,
    which: Which,
    failed: Option<&[usize]>,
    trials: usize,
    seed: u64,
) -> anyhow::Result<Vec<CheckReport>> {
    let (n, k) = (spec.n(), spec.k());
    let all: Vec<usize> = (0..n).collect();
    let wants = |w: Which| which == Which::All || which == w;
    let mut reports = Vec::new();

    if wants(Which::Ints) {
        match spec.mode() {
            Mode::TwoErasure { .. } => {
                let pairs = match failed {
                    Some(f) => vec![f.to_vec()],
                    None => subsets(&all, 2),
                };
                for f in pairs {
                    reports.extend(check_lemma_ints(spec, &f)?);
                }
            }
            Mode::Universal { .. } if which == Which::Ints => {
                bail!("the intersection check applies to two-erasure specs only")
            }
            Mode::Universal { .. } => {}
        }
    }

    if wants(Which::Ish) || wants(Which::Props) || wants(Which::Claim1) {
        for (h, d) in legal_pairs(spec.mode(), n, k) {
            let sets = match failed {
                Some(f) if f.len() == h => vec![f.to_vec()],
                Some(_) => continue,
                None => subsets(&all, h),
            };
            for f in sets {
                if !is_legal(spec.mode(), n, k, h, d) {
                    continue;
                }
                if wants(Which::Ish) {
                    reports.extend(check_lemma_ish(spec, &f, d)?);
                }
                if wants(Which::Props) {
                    for a in 0..h {
                        reports.push(check_propositions(spec, &f, d, a)?);
                    }
                }
                if wants(Which::Claim1) {
                    reports.extend(check_claim1(spec, &f, d)?);
                }
            }
        }
    }

    if wants(Which::Duality) {
        let code = CodeSpec::new(spec)?;
        reports.extend(check_duality(spec, &code, trials, seed)?);
    }
    Ok(reports)
}

pub fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<(bool, String)> {
    let spec = load_spec(&args.spec)?;
    let failed = match &args.failed {
        None => None,
        Some(NodeSelector::Explicit(v)) => Some(v.clone()),
        Some(NodeSelector::All) => None,
    };
    let reports = run_checks(&spec, args.which, failed.as_deref(), args.trials, args.seed)?;
    let pass = reports.iter().all(|r| r.pass);
    let mut text = render_table(&reports);
    let json = to_json(&VerifyReport { spec: SpecFile::from_tower(&spec), reports, pass })?;
    if let Some(s) = emit(args.out.as_deref(), json)? {
        text.push_str(&s);
    }
    Ok((pass, text))
}

/// Runs a parsed command; returns whether every verdict passed and the text for standard output.
pub fn run(cli: &Cli) -> anyhow::Result<(bool, String)> {
    match &cli.command {
        Command::Build(a) => Ok((true, cmd_build(a)?.unwrap_or_default())),
        Command::Repair(a) => cmd_repair(a),
        Command::Table(a) => Ok((true, cmd_table(a)?.unwrap_or_default())),
        Command::Verify(a) => cmd_verify(a),
    }
}
