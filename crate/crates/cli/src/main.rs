mod diag;
mod specs;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use distcheck::chase::{run_chase_with, ChaseOptions, NodeSemantics, Outcome};
use distcheck::classifier::{fragment_report, Fragment, FragmentReport, Kind};
use distcheck::implication::{decide_implication_with, ImplicationOptions, Verdict};
use distcheck::parser::{
    parse_constraints_with, parse_instance_with, parse_query_with, render_constraints, render_facts, render_instance,
    ParseOptions,
};
use distcheck::pc::{certain_answers_with, eval_cq, naive_eval, pc_on_instance, pc_wrt_constraints, CertainAnswers};
use distcheck::schemes::{
    gen_copartition, gen_hash_partition, gen_hypercube, gen_non_skipping, gen_range_partition, CoPartitionSpec,
    HypercubeSpec,
};
use distcheck::verify::{gen_atm_instance, parse_atm};
use distcheck::{Constraint, ConstraintSet, DistributedInstance, Domain, Query};

use diag::{Failure, Status};

#[derive(Parser, Debug)]
#[command(name = "distcheck", version, about = "Reasoning about distribution constraints")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Value domain for comparisons.
    #[arg(long, global = true, default_value = "rat", value_parser = parse_domain)]
    domain: Domain,
    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print search statistics.
    #[arg(long, global = true)]
    stats: bool,
    /// Behaviour of node-identifying degds on distinct nodes.
    #[arg(long = "degd-node-semantics", global = true, value_enum, default_value_t = NodeMode::Merge)]
    node_semantics: NodeMode,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Kv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NodeMode {
    Merge,
    Fail,
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    s.parse()
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report kinds, type tags, fragments and the complexity verdict.
    Classify {
        sigma: PathBuf,
        /// Context bound b; defaults to max(alpha, 1).
        #[arg(long)]
        bound: Option<usize>,
        /// Schema arity bound; defaults to the largest arity used.
        #[arg(long)]
        alpha: Option<usize>,
    },
    /// Chase an instance with a constraint set and print the result.
    Chase {
        sigma: PathBuf,
        instance: PathBuf,
        /// Print every chase step as a comment line.
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether SIGMA implies the single constraint in TAU.
    Implies { sigma: PathBuf, tau: PathBuf },
    /// Decide parallel-correctness of a query on all models of SIGMA.
    Pc {
        query: PathBuf,
        sigma: PathBuf,
        #[arg(long)]
        strong: bool,
    },
    /// Certain answers of a query over the global facts of an instance.
    Certain { query: PathBuf, instance: PathBuf, sigma: PathBuf },
    /// Emit the constraints of a partitioning scheme.
    #[command(subcommand)]
    Scheme(Scheme),
    /// Emit the constraint pair encoding acceptance of WORD by a machine.
    Hardgen {
        machine: PathBuf,
        /// Comma-separated input symbols; empty for the empty word.
        #[arg(default_value = "")]
        word: String,
        #[arg(long)]
        sigma_out: Option<PathBuf>,
        #[arg(long)]
        tau_out: Option<PathBuf>,
    },
    /// Evaluate a query globally and naively on an instance.
    Eval { query: PathBuf, instance: PathBuf },
}

#[derive(Subcommand, Debug)]
enum Scheme {
    /// One existence rule per relation.
    Nonskip {
        /// Relations as NAME/ARITY,...
        #[arg(long, required_unless_present = "from")]
        schema: Option<String>,
        /// Take the schema of a constraint file.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Hash partitioning on key positions.
    Hash {
        #[arg(long)]
        relation: String,
        #[arg(long)]
        arity: usize,
        /// 1-based positions, comma-separated.
        #[arg(long)]
        keys: String,
    },
    /// Range partitioning through a binary range relation.
    Range {
        #[arg(long)]
        relation: String,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        key: usize,
        #[arg(long, default_value = "Range")]
        range: String,
    },
    /// Co-partitioning along a join chain.
    Copart {
        /// Chain links in order: NAME/ARITY[:PARENT=CHILD,...].
        #[arg(long = "link", required = true)]
        links: Vec<String>,
        #[arg(long)]
        root_keys: String,
    },
    /// Two-dimensional hypercube for a query.
    Hypercube {
        query: PathBuf,
        /// One per body atom, in order: DIM=POS,...
        #[arg(long = "map", required = true)]
        maps: Vec<String>,
        #[arg(long, default_value_t = 2)]
        dims: usize,
    },
}

/// Text collected for stdout; written once so output never interleaves.
struct Out {
    format: Format,
    buf: String,
}

impl Out {
    fn new(format: Format) -> Self {
        Out { format, buf: String::new() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.buf.push_str(s.as_ref());
        self.buf.push('\n');
    }

    /// A key/value pair: `key=value` in kv mode, a `#` comment otherwise.
    fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        match self.format {
            Format::Kv => writeln!(self.buf, "{key}={value}"),
            Format::Text => writeln!(self.buf, "# {}: {value}", key.replace('_', "-")),
        }
        .expect("writing to a String");
    }

    fn block(&mut self, key: &str, text: &str) {
        match self.format {
            Format::Kv => self.field(key, text.split_whitespace().collect::<Vec<_>>().join(" ")),
            Format::Text => self.buf.push_str(text),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn opts(path: &Path, domain: Option<Domain>) -> ParseOptions {
    ParseOptions { domain, ..ParseOptions::file(path.display().to_string()) }
}

fn load_constraints(path: &Path, domain: Option<Domain>) -> Result<ConstraintSet, Failure> {
    let text = read(path)?;
    parse_constraints_with(&text, &opts(path, domain)).map_err(|e| Failure::parse(&e, &text))
}

fn load_instance(path: &Path, domain: Option<Domain>) -> Result<DistributedInstance, Failure> {
    let text = read(path)?;
    let parsed = parse_instance_with(&text, &opts(path, domain)).map_err(|e| Failure::parse(&e, &text))?;
    Ok(parsed.instance)
}

fn load_query(path: &Path) -> Result<Query, Failure> {
    let text = read(path)?;
    parse_query_with(&text, &opts(path, None)).map_err(|e| Failure::parse(&e, &text))
}

fn load_tau(path: &Path, domain: Domain, sigma: &ConstraintSet) -> Result<Constraint, Failure> {
    let set = load_constraints(path, Some(domain))?;
    let [tau] = set.constraints() else {
        return Err(Failure::input(format!(
            "{}: expected exactly one constraint, found {}",
            path.display(),
            set.len()
        )));
    };
    sigma.with(tau.clone())?;
    Ok(tau.clone())
}

fn implication_opts(g: &GlobalOpts) -> ImplicationOptions {
    ImplicationOptions {
        domain: g.domain,
        jobs: g.jobs,
        node_semantics: node_semantics(g.node_semantics),
        ..ImplicationOptions::default()
    }
}

fn node_semantics(m: NodeMode) -> NodeSemantics {
    match m {
        NodeMode::Merge => NodeSemantics::Merge,
        NodeMode::Fail => NodeSemantics::Fail,
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn list<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(",")
    }
}

/// Every dtgd part in Tbd and every degd part in Ebd at the report's bound.
fn bounded_context(r: &FragmentReport) -> bool {
    r.data_full
        && r.parts.iter().all(|p| {
            let frag = match p.kind.kind {
                Kind::NodeIdentifying | Kind::ValueIdentifying => Fragment::Ebd,
                _ => Fragment::Tbd,
            };
            p.fragments.contains(&frag)
        })
}

fn classify(out: &mut Out, sigma: &ConstraintSet, bound: Option<usize>, alpha: Option<usize>) -> Status {
    let r = fragment_report(sigma, bound, alpha);
    out.field("constraints", sigma.len());
    out.field("alpha", r.alpha);
    out.field("bound", r.bound);
    out.field("max_arity", r.max_arity);
    out.field("data_full", yes(r.data_full));
    for &i in &r.not_data_full {
        let var = sigma.constraints()[i].as_tgd().and_then(|t| t.existential_data_vars().into_iter().next());
        out.field("not_data_full", format!("#{} `{}`", i + 1, var.map(|v| v.to_string()).unwrap_or_default()));
    }
    out.field("comparisons", yes(r.has_comparisons));
    out.field("bounded_context", yes(bounded_context(&r)));
    for (f, b) in &r.min_bound {
        out.field(&format!("min_bound_{}", f.name()), b.map_or("inf".to_string(), |b| b.to_string()));
    }
    for p in &r.parts {
        let id = format!("#{}.{}", p.constraint + 1, p.part + 1);
        out.field(
            "part",
            format!(
                "{id} kind={} forms={} tags={} fragments={}",
                p.kind.kind,
                list(p.kind.forms.names()),
                list(&p.tags.tags),
                list(&p.fragments)
            ),
        );
        if out.format == Format::Text {
            out.line(format!("#   {}", distcheck::parser::render_constraint(&p.rule)));
        }
    }
    out.field("verdict", r.verdict);
    Status::Positive
}

fn chase(
    out: &mut Out,
    g: &GlobalOpts,
    sigma: &ConstraintSet,
    d: &DistributedInstance,
    trace: bool,
) -> Result<Status, Failure> {
    let opts = ChaseOptions { node_semantics: node_semantics(g.node_semantics), ..ChaseOptions::default() };
    let t = run_chase_with(d, sigma, &opts)?;
    if trace {
        for s in &t.steps {
            out.line(format!("# {s}"));
        }
    }
    if g.stats {
        out.field("steps", t.steps.len());
    }
    match t.outcome {
        Outcome::Success => {
            out.field("outcome", "success");
            out.block("instance", &render_instance(t.final_instance()));
            Ok(Status::Positive)
        }
        Outcome::Failed(i) => {
            out.field("outcome", format!("failed at step {}", i + 1));
            out.block("instance", &render_instance(t.final_instance()));
            Ok(Status::Negative)
        }
    }
}

fn verdict(out: &mut Out, g: &GlobalOpts, v: &Verdict, positive: &str, negative: &str) -> Status {
    let word = if v.holds() { positive } else { negative };
    match out.format {
        Format::Kv => out.field("verdict", word.to_lowercase().replace(' ', "_")),
        Format::Text => out.line(word),
    }
    if g.stats {
        let s = v.stats();
        out.field("canonical_dbs", s.canonical_dbs);
        out.field("chase_steps", s.chase_steps);
        out.field("single_db", yes(s.single_db));
    }
    match v {
        Verdict::Holds { .. } => Status::Positive,
        Verdict::Refuted { countermodel, witness, .. } => {
            out.field("witness", witness);
            out.block("countermodel", &render_instance(countermodel));
            Status::Negative
        }
    }
}

fn certain(
    out: &mut Out,
    q: &Query,
    d: &DistributedInstance,
    sigma: &ConstraintSet,
    g: &GlobalOpts,
) -> Result<Status, Failure> {
    let (answers, stats) = certain_answers_with(q, d.global(), sigma, g.domain, distcheck::pc::STATE_BUDGET)?;
    if g.stats {
        out.field("states", stats.states);
        out.field("models", stats.models);
    }
    match answers {
        CertainAnswers::Answers(facts) => {
            out.field("answers", facts.len());
            out.block("certain", &format!("global {}\n", render_facts(&facts)));
            Ok(Status::Positive)
        }
        CertainAnswers::Inconsistent => {
            Err(Failure::fragment("no distribution of the global facts satisfies the constraints"))
        }
    }
}

fn eval(out: &mut Out, q: &Query, d: &DistributedInstance) -> Status {
    let report = pc_on_instance(q, d);
    let word = if report.is_correct() { "PARALLEL-CORRECT" } else { "NOT PARALLEL-CORRECT" };
    match out.format {
        Format::Kv => out.field("verdict", word.to_lowercase().replace(' ', "_")),
        Format::Text => out.line(word),
    }
    out.field("global", render_facts(&eval_cq(q, d.global())));
    out.field("naive", render_facts(&naive_eval(q, d)));
    out.field("missing", render_facts(&report.missing));
    if report.is_correct() {
        Status::Positive
    } else {
        Status::Negative
    }
}

fn scheme(out: &mut Out, s: Scheme) -> Result<Status, Failure> {
    let set = match s {
        Scheme::Nonskip { schema, from } => {
            let mut all = match schema {
                Some(s) => specs::schema(&s).map_err(Failure::input)?,
                None => Default::default(),
            };
            if let Some(path) = from {
                let sigma = load_constraints(&path, None)?;
                for (r, a) in sigma.schema() {
                    if all.insert(r.clone(), *a).is_some_and(|b| b != *a) {
                        return Err(Failure::input(format!("relation {r} listed with two arities")));
                    }
                }
            }
            gen_non_skipping(&all)
        }
        Scheme::Hash { relation, arity, keys } => {
            gen_hash_partition(&relation, arity, &specs::positions(&keys).map_err(Failure::input)?)?
        }
        Scheme::Range { relation, arity, key, range } => gen_range_partition(&relation, arity, key, &range)?,
        Scheme::Copart { links, root_keys } => {
            let chain = links.iter().map(|l| specs::link(l)).collect::<Result<_, _>>().map_err(Failure::input)?;
            let root_keys = specs::positions(&root_keys).map_err(Failure::input)?;
            gen_copartition(&CoPartitionSpec { chain, root_keys })?
        }
        Scheme::Hypercube { query, maps, dims } => {
            let query = load_query(&query)?;
            let mapping = maps.iter().map(|m| specs::pairs(m)).collect::<Result<_, _>>().map_err(Failure::input)?;
            gen_hypercube(&HypercubeSpec { query, dimensions: dims, mapping })?
        }
    };
    out.buf.push_str(&render_constraints(&set));
    Ok(Status::Positive)
}

fn hardgen(
    out: &mut Out,
    machine: &Path,
    word: &str,
    sigma_out: Option<PathBuf>,
    tau_out: Option<PathBuf>,
) -> Result<Status, Failure> {
    let m = parse_atm(&read(machine)?).map_err(|e| Failure::input(format!("{}: {e}", machine.display())))?;
    let symbols: Vec<&str> = word.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let w = m.word(&symbols)?;
    let (sigma, tau) = gen_atm_instance(&m, &w)?;
    let sigma_text = render_constraints(&sigma);
    let tau_text = distcheck::parser::render_constraint(&tau) + "\n";
    let write =
        |path: &Path, text: &str| fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())));
    match &sigma_out {
        Some(p) => write(p, &sigma_text)?,
        None => {
            out.line("# sigma");
            out.buf.push_str(&sigma_text);
        }
    }
    match &tau_out {
        Some(p) => write(p, &tau_text)?,
        None => {
            out.line("# tau");
            out.buf.push_str(&tau_text);
        }
    }
    Ok(Status::Positive)
}

fn run(cli: Cli, out: &mut Out) -> Result<Status, Failure> {
    let g = &cli.global;
    let domain = Some(g.domain);
    match cli.command {
        Command::Classify { sigma, bound, alpha } => Ok(classify(out, &load_constraints(&sigma, None)?, bound, alpha)),
        Command::Chase { sigma, instance, trace } => {
            let sigma = load_constraints(&sigma, domain)?;
            let d = load_instance(&instance, domain)?;
            chase(out, g, &sigma, &d, trace)
        }
        Command::Implies { sigma, tau } => {
            let sigma = load_constraints(&sigma, domain)?;
            let tau = load_tau(&tau, g.domain, &sigma)?;
            let v = decide_implication_with(&sigma, &tau, &implication_opts(g))?;
            Ok(verdict(out, g, &v, "HOLDS", "REFUTED"))
        }
        Command::Pc { query, sigma, strong } => {
            let q = load_query(&query)?;
            let sigma = load_constraints(&sigma, domain)?;
            let v = pc_wrt_constraints(&q, &sigma, &implication_opts(g), strong)?;
            let (pos, neg) = if strong {
                ("STRONGLY PARALLEL-CORRECT", "NOT STRONGLY PARALLEL-CORRECT")
            } else {
                ("PARALLEL-CORRECT", "NOT PARALLEL-CORRECT")
            };
            Ok(verdict(out, g, &v, pos, neg))
        }
        Command::Certain { query, instance, sigma } => {
            let q = load_query(&query)?;
            let d = load_instance(&instance, domain)?;
            let sigma = load_constraints(&sigma, domain)?;
            certain(out, &q, &d, &sigma, g)
        }
        Command::Scheme(s) => scheme(out, s),
        Command::Hardgen { machine, word, sigma_out, tau_out } => hardgen(out, &machine, &word, sigma_out, tau_out),
        Command::Eval { query, instance } => {
            let q = load_query(&query)?;
            let d = load_instance(&instance, domain)?;
            Ok(eval(out, &q, &d))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Input.into() } else { Status::Positive.into() };
        }
    };
    let mut out = Out::new(cli.global.format);
    let status = match run(cli, &mut out) {
        Ok(s) => s,
        Err(f) => {
            eprintln!("error: {f}");
            f.status
        }
    };
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(out.buf.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return Status::Input.into();
    }
    status.into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn domain_defaults_to_rationals() {
        let cli = Cli::try_parse_from(["distcheck", "implies", "s.dc", "t.dc"]).unwrap();
        assert_eq!(cli.global.domain, Domain::Rat);
        let cli = Cli::try_parse_from(["distcheck", "implies", "--domain", "nat", "s.dc", "t.dc"]).unwrap();
        assert_eq!(cli.global.domain, Domain::Nat);
        assert!(Cli::try_parse_from(["distcheck", "implies", "--domain", "real", "s.dc", "t.dc"]).is_err());
    }

    #[test]
    fn kv_fields_are_single_lines() {
        let mut out = Out::new(Format::Kv);
        out.block("countermodel", "global { R(1) }\nlocal 1 { R(1) }\n");
        assert_eq!(out.buf, "countermodel=global { R(1) } local 1 { R(1) }\n");
        let mut out = Out::new(Format::Text);
        out.field("chase_steps", 3);
        assert_eq!(out.buf, "# chase-steps: 3\n");
    }
}
