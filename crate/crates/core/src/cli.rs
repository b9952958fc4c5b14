//! Command-line front end. Every subcommand prints a text report, or a single
//! JSON object with `--json`; logs go to standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::enumerate_characters;
use crate::dual::{assemble_dual_with, group_structure, DualError, DualGroup, DualOptions, GroupStructure, PrimeStatus};
use crate::eta::{eta_table, lemma6_property_scan, EtaRow, Lemma6Witness};
use crate::family::{modulus_bounds, refine_prime_support, FamilyError, FractionFamily, Mode, ModulusBounds};
use crate::finder::{
    bounded_search, build_basis, certificate_product, verify, FinderError, RepresentationCertificate, SearchOptions,
    SearchStats, DEFAULT_MAX_TERMS, DEFAULT_N0, DEFAULT_NMAX, DEFAULT_PRIME_BOUND,
};
use crate::membership::{classify, criterion_table, CriterionTable, MembershipError, MembershipVerdict, Target};
use crate::rational::PositiveRational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NON_MEMBER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNDETERMINED: i32 = 3;
pub const EXIT_EXHAUSTED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qdual", version, about = "Dual groups of Q*/Γ for fraction families (an+b)/(An+B)")]
pub struct Cli {
    /// Emit one JSON object instead of the text report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble and print the dual group.
    Analyze(AnalyzeArgs),
    /// Tabulate η(β, γ) for one prime power.
    Eta(EtaArgs),
    /// Classify a rational (or pair) against the dual group.
    Member(MemberArgs),
    /// Search for an explicit product representation.
    Find(FindArgs),
    /// Check the constancy lemma on random quadruples.
    #[command(name = "scan-lemma6")]
    ScanLemma6(ScanArgs),
    /// List the characters modulo q.
    Characters(CharactersArgs),
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Family as "a,b,A,B".
    #[arg(long, allow_hyphen_values = true)]
    pub family: String,
    /// Generator index bound: generators are taken for n > n0.
    #[arg(long)]
    pub n0: Option<i64>,
}

impl FamilyArgs {
    fn parse(&self) -> Result<FractionFamily, CliError> {
        let f: FractionFamily = self.family.parse()?;
        Ok(match self.n0 {
            Some(n0) => f.with_n0(n0)?,
            None => f,
        })
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// single or pair.
    #[arg(long, default_value = "pair")]
    pub mode: Mode,
    /// Stratum depth cap for the local filter.
    #[arg(long)]
    pub cap: Option<u32>,
    /// Length of the window of n used to pin bad primes.
    #[arg(long)]
    pub pin_window: Option<u64>,
    /// Also tabulate the congruence criterion (rows up to this many).
    #[arg(long)]
    pub criteria: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EtaArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub prime: u64,
    #[arg(long, default_value_t = 1)]
    pub exponent: u32,
    #[arg(long, default_value = "pair")]
    pub mode: Mode,
    #[arg(long)]
    pub cap: Option<u32>,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Target rational "p/q" or integer.
    #[arg(long)]
    pub target: String,
    /// Second coordinate; selects pair mode.
    #[arg(long)]
    pub target2: Option<String>,
    /// Overrides the mode implied by the targets.
    #[arg(long)]
    pub mode: Option<Mode>,
}

impl TargetArgs {
    fn parse(&self) -> Result<Target, CliError> {
        let first: PositiveRational = self.target.parse().map_err(|e: crate::rational::RationalError| CliError::Usage(e.to_string()))?;
        let target = match &self.target2 {
            Some(s) => Target::Pair(first, s.parse().map_err(|e: crate::rational::RationalError| CliError::Usage(e.to_string()))?),
            None => Target::Single(first),
        };
        if let Some(m) = self.mode {
            if m != target.mode() {
                return Err(CliError::Usage(format!("{m} mode does not match the number of targets")));
            }
        }
        Ok(target)
    }
}

#[derive(Debug, Args)]
pub struct MemberArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub target: TargetArgs,
}

#[derive(Debug, Args)]
pub struct FindArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub family: String,
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long, default_value_t = DEFAULT_N0)]
    pub n0: i64,
    #[arg(long, default_value_t = DEFAULT_NMAX)]
    pub nmax: i64,
    #[arg(long, default_value_t = DEFAULT_PRIME_BOUND)]
    pub prime_bound: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
    pub max_terms: usize,
    #[arg(long, default_value_t = SearchOptions::default().node_budget)]
    pub node_budget: u64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Entries are drawn from [-bound, bound] (u_j from [1, bound]).
    #[arg(long, default_value_t = 20)]
    pub bound: i64,
    #[arg(long, default_value_t = 200)]
    pub max_modulus: u64,
}

#[derive(Debug, Args)]
pub struct CharactersArgs {
    #[arg(long)]
    pub modulus: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Membership(#[from] MembershipError),
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Finder(FinderError::SearchExhausted { .. }) => EXIT_EXHAUSTED,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub dual: DualGroup,
    pub structure: GroupStructure,
    pub criteria: Option<CriterionTable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaReport {
    pub family: FractionFamily,
    pub mode: Mode,
    pub prime: u64,
    pub exponent: u32,
    pub bounds: ModulusBounds,
    pub rows: Vec<EtaRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberReport {
    pub family: FractionFamily,
    pub mode: Mode,
    pub bounds: ModulusBounds,
    pub dual_order: usize,
    pub verdict: MembershipVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindReport {
    pub family: FractionFamily,
    pub mode: Mode,
    pub bounds: ModulusBounds,
    pub nmax: i64,
    pub prime_bound: u64,
    pub rows: usize,
    pub dropped: usize,
    pub certificate: Option<RepresentationCertificate>,
    pub stats: Option<SearchStats>,
    pub verified: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub seed: u64,
    pub count: usize,
    pub bound: i64,
    pub max_modulus: u64,
    pub witnesses: Vec<Lemma6Witness>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterRow {
    pub index: u64,
    pub exponents: Vec<u32>,
    pub order: u64,
    pub conductor: u64,
    pub parity: i8,
    pub primitive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharactersReport {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    pub characters: Vec<CharacterRow>,
}

fn refined_bounds(f: &FractionFamily) -> ModulusBounds {
    let c = f.constraints();
    refine_prime_support(&c, &modulus_bounds(&c))
}

fn status_text(s: PrimeStatus) -> String {
    match s {
        PrimeStatus::Pinned(z) => z.to_string(),
        PrimeStatus::Undetermined => "?".to_string(),
    }
}

fn bounds_text(b: &ModulusBounds) -> String {
    format!(
        "bounds: legacy {} | sharp {} | g1 {} | g2 {} (refined)",
        b.legacy, b.sharp, b.simultaneous_g1, b.simultaneous_g2
    )
}

fn render_analyze(r: &AnalyzeReport) -> String {
    let d = &r.dual;
    let c = d.family.constraints();
    let mut s = String::new();
    let _ = writeln!(s, "family {} for n > {}, mode {}", d.family, d.family.n0, d.mode);
    let _ = writeln!(
        s,
        "constraints: alpha {} beta {} a1 {} b1 {} A1 {} B1 {} delta {} delta1 {}",
        c.alpha, c.beta, c.a1, c.b1, c.big_a1, c.big_b1, c.delta, c.delta1
    );
    let _ = writeln!(s, "{}", bounds_text(&d.bounds));
    for n in &d.bounds.prime_support_notes {
        let _ = writeln!(s, "  {:?} prime {}^{}: {:?}", n.bound, n.prime, n.exponent, n.status);
    }
    let _ = writeln!(s, "moduli: M1 {} M2 {}", d.moduli.0, d.moduli.1);
    for l in &d.local {
        let _ = writeln!(
            s,
            "local {}^({},{}): {} strata, {} surviving pairs",
            l.prime, l.exponents.0, l.exponents.1, l.strata, l.survivors
        );
    }
    let _ = writeln!(
        s,
        "combinations {}, rejected by constancy {}, rejected by pinning {}, pin window n in ({}, {}]",
        d.combinations, d.rejected_by_constancy, d.rejected_by_pinning, d.pin_window.0, d.pin_window.1
    );
    for (i, e) in d.elements.iter().enumerate() {
        let chi2 = e.character(2);
        let constant = e.constant.map_or("vacuous".to_string(), |z| z.to_string());
        let bad: Vec<String> =
            e.bad_primes.iter().map(|b| format!("g{}({})={}", b.coordinate, b.prime, status_text(b.status))).collect();
        let _ = writeln!(
            s,
            "#{i:<3} chi1 {} [f {}]  chi2 {} [f {}]  order {}  c {}  {}",
            e.chi_g1,
            e.chi_g1.conductor(),
            chi2,
            chi2.conductor(),
            e.order(),
            constant,
            bad.join(" ")
        );
    }
    let hist: Vec<String> = r.structure.order_histogram.iter().map(|(o, n)| format!("{o}:{n}")).collect();
    let _ = writeln!(s, "element orders: {}", hist.join(" "));
    let _ = writeln!(s, "closed under multiplication: {}", r.structure.closed);
    let _ = writeln!(s, "invariant factors: {:?}", r.structure.invariant_factors);
    if let Some(t) = &r.criteria {
        let _ = writeln!(s, "criterion modulo ({}, {}); member classes:", t.moduli.0, t.moduli.1);
        let members: Vec<String> = t.members().map(|r| format!("({}, {})", r.first, r.second)).collect();
        let _ = writeln!(s, "  {}", members.join(" "));
        let forbidden: Vec<String> = t.forbidden_primes.iter().map(|(c, p)| format!("{p} in coordinate {c}")).collect();
        let _ = writeln!(s, "  forbidden: {}", if forbidden.is_empty() { "none".to_string() } else { forbidden.join(", ") });
    }
    let _ = writeln!(s, "dual group order: {}", d.order);
    s
}

fn emit<T: Serialize>(out: &mut dyn Write, json: bool, value: &T, text: impl FnOnce() -> String) -> Result<(), CliError> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    } else {
        write!(out, "{}", text())?;
    }
    Ok(())
}

fn analyze(a: &AnalyzeArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = a.family.parse()?;
    let dual = assemble_dual_with(&f, a.mode, DualOptions { stratum_cap: a.cap, pin_window: a.pin_window })?;
    let structure = group_structure(&dual);
    let criteria = match a.criteria {
        Some(rows) => Some(criterion_table(&dual, rows)?),
        None => None,
    };
    let report = AnalyzeReport { dual, structure, criteria };
    emit(out, json, &report, || render_analyze(&report))?;
    Ok(EXIT_OK)
}

fn eta(a: &EtaArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = a.family.parse()?;
    f.check_mode(a.mode)?;
    if !crate::arith::is_prime(a.prime) || a.exponent == 0 {
        return Err(CliError::Usage("--prime must be prime and --exponent positive".into()));
    }
    let rows = eta_table(&f.constraints(), a.prime, a.exponent, a.mode, a.cap);
    let report = EtaReport { family: f, mode: a.mode, prime: a.prime, exponent: a.exponent, bounds: refined_bounds(&f), rows };
    emit(out, json, &report, || {
        let mut s = String::new();
        let _ = writeln!(s, "eta for {} at {}^{}, mode {}", report.family, report.prime, report.exponent, report.mode);
        let _ = writeln!(s, "{:>5} {:>5} {:>7} {:>7} {:>8} {:>9} constant", "beta", "gamma", "chi1", "chi2", "nonzero", "all_equal");
        for r in &report.rows {
            let constant = r.constant.map_or("-".to_string(), |z| z.to_string());
            let _ = writeln!(
                s,
                "{:>5} {:>5} {:>7} {:>7} {:>8} {:>9} {}",
                r.beta, r.gamma, r.chi1_index, r.chi2_index, r.nonzero_count, r.all_equal, constant
            );
        }
        s
    })?;
    Ok(EXIT_OK)
}

fn member(a: &MemberArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = a.family.parse()?;
    let target = a.target.parse()?;
    let dual = assemble_dual_with(&f, target.mode(), DualOptions::default())?;
    let verdict = classify(&target, &dual)?;
    let code = verdict.verdict.exit_code();
    let report = MemberReport { family: f, mode: dual.mode, bounds: dual.bounds.clone(), dual_order: dual.order, verdict };
    emit(out, json, &report, || {
        let v = &report.verdict;
        let mut s = String::new();
        let _ = writeln!(s, "family {} for n > {}, mode {}", report.family, report.family.n0, report.mode);
        let _ = writeln!(s, "{}", bounds_text(&report.bounds));
        let _ = writeln!(s, "dual group order: {}", report.dual_order);
        let _ = writeln!(s, "target {}: {}", v.target, v.verdict);
        if !v.forbidden_primes.is_empty() {
            let list: Vec<String> = v.forbidden_primes.iter().map(|(c, p)| format!("{p} (coordinate {c})")).collect();
            let _ = writeln!(s, "no generator contains {}", list.join(", "));
        }
        if let Some(i) = v.failing_element {
            let e = &v.certificate[i];
            let _ = writeln!(s, "element #{i} takes the value {} (required {})", e.value.expect("failing value is known"), e.required);
        }
        if !v.undetermined_primes.is_empty() {
            let list: Vec<String> = v.undetermined_primes.iter().map(|(c, p)| format!("{p} (coordinate {c})")).collect();
            let _ = writeln!(s, "values at {} are not pinned; try `qdual find` for an explicit product", list.join(", "));
        }
        s
    })?;
    Ok(code)
}

fn find(a: &FindArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let f: FractionFamily = a.family.parse()?;
    let f = f.with_n0(a.n0)?;
    let target = a.target.parse()?;
    f.check_mode(target.mode())?;
    if a.nmax <= f.n0 || a.prime_bound < 2 {
        return Err(CliError::Usage("need --nmax above n0 and --prime-bound at least 2".into()));
    }
    let basis = build_basis(&f, target.mode(), a.nmax, a.prime_bound)?;
    let options = SearchOptions { max_terms: a.max_terms, node_budget: a.node_budget };
    let outcome = bounded_search(&basis, &target, options);
    let (certificate, stats, error, code) = match outcome {
        Ok((c, st)) => (Some(c), Some(st), None, EXIT_OK),
        Err(e @ FinderError::SearchExhausted { .. }) => (None, None, Some(e.to_string()), EXIT_EXHAUSTED),
        Err(e) => return Err(e.into()),
    };
    let verified = certificate.as_ref().is_some_and(|c| verify(c, &f, &target));
    let report = FindReport {
        family: f,
        mode: target.mode(),
        bounds: refined_bounds(&f),
        nmax: a.nmax,
        prime_bound: a.prime_bound,
        rows: basis.rows.len(),
        dropped: basis.dropped,
        certificate,
        stats,
        verified,
        error,
    };
    emit(out, json, &report, || {
        let mut s = String::new();
        let _ = writeln!(s, "family {} for n > {}, mode {}", report.family, report.family.n0, report.mode);
        let _ = writeln!(s, "{}", bounds_text(&report.bounds));
        let _ = writeln!(
            s,
            "basis: n in ({}, {}], primes <= {}: {} generators, {} dropped as unsmooth",
            report.family.n0, report.nmax, report.prime_bound, report.rows, report.dropped
        );
        match &report.certificate {
            Some(c) => {
                for (n, e) in &c.terms {
                    let _ = writeln!(s, "{n} {e:+}");
                }
                let (x, y) = certificate_product(c);
                match c.target {
                    Target::Single(_) => {
                        let _ = writeln!(s, "product: {}", x / y);
                    }
                    Target::Pair(..) => {
                        let _ = writeln!(s, "product: {x} ⊗ {y}");
                    }
                }
                let _ = writeln!(s, "terms: {}, verified: {}", c.terms.len(), report.verified);
            }
            None => {
                let _ = writeln!(s, "{}", report.error.as_deref().unwrap_or("no representation"));
            }
        }
        s
    })?;
    Ok(code)
}

fn scan(a: &ScanArgs, seed: u64, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let witnesses = lemma6_property_scan(seed, a.count, a.bound, a.max_modulus);
    let violations = witnesses.iter().filter(|w| !w.divides_six_delta || !w.local_form_holds).count();
    let report = ScanReport { seed, count: a.count, bound: a.bound, max_modulus: a.max_modulus, witnesses, violations };
    emit(out, json, &report, || {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} quadruples (seed {}, entries up to {}), prime powers D <= {}",
            report.count, report.seed, report.bound, report.max_modulus
        );
        let _ = writeln!(s, "non-principal primitive constancy witnesses: {}", report.witnesses.len());
        for w in report.witnesses.iter().filter(|w| !w.divides_six_delta || !w.local_form_holds) {
            let _ = writeln!(s, "  violation: {:?} D = {} {}", w.quadruple, w.modulus, w.character);
        }
        let _ = writeln!(s, "violations: {}", report.violations);
        s
    })?;
    Ok(if report.violations == 0 { EXIT_OK } else { EXIT_NON_MEMBER })
}

fn characters(a: &CharactersArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    if a.modulus == 0 {
        return Err(CliError::Usage("--modulus must be positive".into()));
    }
    let group = crate::arith::unit_group(a.modulus);
    let rows: Vec<CharacterRow> = enumerate_characters(a.modulus)
        .iter()
        .map(|c| CharacterRow {
            index: c.index(),
            exponents: c.exponents().to_vec(),
            order: c.order(),
            conductor: c.conductor(),
            parity: c.parity(),
            primitive: c.is_primitive(),
        })
        .collect();
    let report =
        CharactersReport { modulus: a.modulus, generators: group.generators().to_vec(), orders: group.orders().to_vec(), characters: rows };
    emit(out, json, &report, || {
        let mut s = String::new();
        let _ = writeln!(s, "modulus {}: generators {:?} of orders {:?}", report.modulus, report.generators, report.orders);
        let _ = writeln!(s, "{:>6} {:>16} {:>6} {:>9} {:>6} primitive", "index", "exponents", "order", "conductor", "parity");
        for r in &report.characters {
            let _ = writeln!(
                s,
                "{:>6} {:>16} {:>6} {:>9} {:>6} {}",
                r.index,
                format!("{:?}", r.exponents),
                r.order,
                r.conductor,
                r.parity,
                r.primitive
            );
        }
        s
    })?;
    Ok(EXIT_OK)
}

/// Run a parsed command, writing the report to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, cli.json, out),
        Command::Eta(a) => eta(a, cli.json, out),
        Command::Member(a) => member(a, cli.json, out),
        Command::Find(a) => find(a, cli.json, out),
        Command::ScanLemma6(a) => scan(a, cli.seed, cli.json, out),
        Command::Characters(a) => characters(a, cli.json, out),
    }
}

/// Parse arguments, run, and map every outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
