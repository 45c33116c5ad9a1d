//! Command-line front end: argument parsing and dispatch, separated from
//! `main` so the whole surface can be driven from tests.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use revprob::automata::{recognition_interval_dfa, simulate_pra15, Automaton, Pra15, PraC};
use revprob::constructions::{self, BooleanOp, BoostPlan, HomomorphismSpec, StripHashPlan, DEFAULT_STATE_BUDGET};
use revprob::dsmat::{classify_matrix, parse_rational, to_f64};
use revprob::markov::{self, ProbeFlavor, ProbeWords};
use revprob::prototype::{self, Unistochastic};
use revprob::regclass::{self, classify_star, classify_star_monoid_oracle, Dfa, DEFAULT_ORACLE_STATES};
use revprob::{Error, Rational, StochMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "revprob", version, about = "Probabilistic reversible automata toolkit")]
pub struct Cli {
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an automaton (or bare matrix) for double stochasticity and reversibility.
    Validate { file: PathBuf },
    /// Exact acceptance probability of one word.
    Accept {
        file: PathBuf,
        /// The input word; `ε` or the empty string for the empty word.
        word: String,
    },
    /// Exhaustive recognition interval against a regular language.
    Interval {
        file: PathBuf,
        #[arg(long)]
        regex: String,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        float: bool,
    },
    /// Build an automaton; the result is written as JSON.
    #[command(subcommand)]
    Construct(Construct),
    /// Decide whether a regular language is of type (*).
    Classify {
        #[arg(long, required_unless_present = "dfa", conflicts_with = "dfa")]
        regex: Option<String>,
        /// A DFA in JSON instead of a regex.
        #[arg(long)]
        dfa: Option<PathBuf>,
        /// Alphabet as a string of letters; defaults to the regex's letters.
        #[arg(long)]
        alphabet: Option<String>,
        /// Cross-check against the transition-monoid oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Communication classes, periods and stationary limit of a chain.
    Markov {
        /// A matrix, or an automaton whose per-symbol matrices are analyzed.
        file: PathBuf,
        #[arg(long, default_value_t = markov::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: u64,
    },
    /// Exact acceptance gaps of the type (*) word families, as CSV.
    Probe(ProbeArgs),
    /// Search for a unitary prototype of a doubly stochastic matrix.
    Prototype {
        file: PathBuf,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo runs of a 1.5-way automaton.
    Simulate15 {
        file: PathBuf,
        word: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        max_steps: u32,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum Construct {
    /// The L_n family over the first n letters.
    Ln {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=26))]
        n: u64,
    },
    /// Majority vote over independent copies.
    Boost {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        copies: u64,
        #[command(flatten)]
        interval: IntervalArgs,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: usize,
    },
    /// Move the interval to straddle 1/2.
    Normalize {
        file: PathBuf,
        #[command(flatten)]
        interval: IntervalArgs,
    },
    /// Mixture automaton for the union of two languages.
    Union { a: PathBuf, b: PathBuf },
    /// Mixture automaton for the intersection of two languages.
    Intersect { a: PathBuf, b: PathBuf },
    /// Swap accepting and non-accepting states.
    Complement { file: PathBuf },
    /// Inverse image under a homomorphism.
    Invhom {
        file: PathBuf,
        /// JSON object mapping each source letter to its image word.
        #[arg(long)]
        map: PathBuf,
    },
    /// Left quotient by a fixed word.
    Quotient {
        file: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// Remove the `$` end-marker.
    StripDollar {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
    },
    /// Remove the `#` end-marker from an automaton without `$`.
    StripHash {
        file: PathBuf,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        copies: u64,
        #[command(flatten)]
        interval: IntervalArgs,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: usize,
    },
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    /// Upper bound on acceptance of non-members.
    #[arg(long, value_parser = rational)]
    p1: Rational,
    /// Lower bound on acceptance of members.
    #[arg(long, value_parser = rational)]
    p2: Rational,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    file: PathBuf,
    #[arg(long, default_value = "")]
    omega: String,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long, default_value = "")]
    z: String,
    #[arg(long, default_value_t = markov::DEFAULT_M_MAX)]
    m_max: u64,
    #[arg(long, value_enum, default_value_t = FlavorArg::Prime)]
    flavor: FlavorArg,
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlavorArg {
    Prime,
    DoublePrime,
}

fn rational(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

/// Parses a word argument; `ε` stands for the empty word.
pub fn parse_word(text: &str) -> Vec<char> {
    if text == "ε" {
        Vec::new()
    } else {
        text.chars().collect()
    }
}

/// Why a command did not produce its output.
enum Failure {
    /// Input read fine but failed a check; the report goes to stderr.
    Invalid(String),
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e.to_string())
    }
}

type Outcome = Result<Output, Failure>;

/// Data for the output stream plus diagnostics for stderr. A non-zero
/// `status` with data still prints the data (used by `validate`).
struct Output {
    data: String,
    notes: Vec<String>,
    status: i32,
}

impl Output {
    fn data(data: impl Into<String>) -> Self {
        Self { data: data.into(), notes: Vec::new(), status: EXIT_OK }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Data goes to `out` (or `--out`), diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let text = e.render().to_string();
                    let _ = write!(err, "{text}");
                    if !text.contains("Usage:") {
                        let _ = write!(err, "\n{}\n", <Cli as clap::CommandFactory>::command().render_usage());
                    }
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok(output) => {
            for note in &output.notes {
                let _ = writeln!(err, "{note}");
            }
            if let Err(e) = emit(cli.out.as_deref(), &output.data, out) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILURE;
            }
            output.status
        }
        Err(Failure::Invalid(report)) => {
            let _ = write!(err, "{report}");
            EXIT_FAILURE
        }
        Err(Failure::Error(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn emit(path: Option<&Path>, data: &str, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, data),
        None => out.write_all(data.as_bytes()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Automaton, Failure> {
    Automaton::from_json(&read(path)?).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

/// Loads a PRA-C and refuses it unless it validates.
fn load_c(path: &Path) -> Result<PraC, Failure> {
    let a = load(path)?;
    let report = a.validate();
    if !report.is_valid() {
        return Err(Failure::Invalid(report.to_string()));
    }
    match a {
        Automaton::C(c) => Ok(c),
        _ => Err(Failure::Error(format!("{}: expected a prac automaton", path.display()))),
    }
}

fn load_15(path: &Path) -> Result<Pra15, Failure> {
    let a = load(path)?;
    let report = a.validate();
    if !report.is_valid() {
        return Err(Failure::Invalid(report.to_string()));
    }
    match a {
        Automaton::OneAndHalf(a) => Ok(a),
        _ => Err(Failure::Error(format!("{}: expected a pra15 automaton", path.display()))),
    }
}

fn load_matrix(path: &Path) -> Result<StochMatrix, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn to_usize(v: u64) -> Result<usize, Failure> {
    usize::try_from(v).map_err(|_| Failure::Error(format!("{v} does not fit in usize")))
}

fn execute(cmd: &Command) -> Outcome {
    match cmd {
        Command::Validate { file } => validate(file),
        Command::Accept { file, word } => accept(file, &parse_word(word)),
        Command::Interval { file, regex, max_len, float } => interval(file, regex, *max_len, *float),
        Command::Construct(c) => construct(c),
        Command::Classify { regex, dfa, alphabet, oracle } => {
            classify(regex.as_deref(), dfa.as_deref(), alphabet.as_deref(), *oracle)
        }
        Command::Markov { file, tol, max_iter } => markov_report(file, *tol, *max_iter),
        Command::Probe(args) => probe(args),
        Command::Prototype { file, restarts, seed } => prototype_cmd(file, *restarts, *seed),
        Command::Simulate15 { file, word, trials, max_steps, seed } => {
            let a = load_15(file)?;
            let stats = simulate_pra15(&a, &parse_word(word), *trials, *max_steps, *seed)?;
            let json = serde_json::to_string_pretty(&stats).map_err(Error::from)?;
            Ok(Output::data(json + "\n"))
        }
    }
}

fn validate(file: &Path) -> Outcome {
    let text = read(file)?;
    let report = match Automaton::from_json(&text) {
        Ok(a) => a.validate().to_string(),
        Err(auto_err) => match serde_json::from_str::<StochMatrix>(&text) {
            Ok(m) => {
                let c = classify_matrix(&m.rows())?;
                if c.kind >= revprob::MatrixKind::DoublyStochastic {
                    "valid\n".to_string()
                } else {
                    c.violations.iter().map(|v| format!("{v}\n")).collect()
                }
            }
            Err(_) => return Err(Failure::Error(format!("{}: {auto_err}", file.display()))),
        },
    };
    let status = if report == "valid\n" { EXIT_OK } else { EXIT_FAILURE };
    Ok(Output { data: report, notes: Vec::new(), status })
}

fn accept(file: &Path, word: &[char]) -> Outcome {
    match load(file)? {
        Automaton::C(a) => Ok(Output::data(format!("{}\n", a.accept_prob(word)?))),
        Automaton::Dh(a) => {
            let o = a.accept_prob(word)?;
            Ok(Output::data(format!("accept {}\nreject {}\nnonhalt {}\n", o.accept, o.reject, o.nonhalt)))
        }
        Automaton::OneAndHalf(_) => {
            Err(Failure::Error("1.5-way automata are sampled, not evaluated; use simulate15".into()))
        }
    }
}

fn interval(file: &Path, regex: &str, max_len: usize, float: bool) -> Outcome {
    let a = load_c(file)?;
    let dfa = regclass::dfa_from_regex(regex, Some(a.alphabet()))?;
    let iv = recognition_interval_dfa(&a, &dfa, max_len)?;
    let mut data = format!("{iv}\n");
    if float {
        let show = |v: &Option<Rational>| v.as_ref().map_or_else(|| "-".to_string(), |r| format!("{:.6}", to_f64(r)));
        data.push_str(&format!("({}, {})\n", show(&iv.p1), show(&iv.p2)));
    }
    let mut output = Output::data(data).note(format!("{} words up to length {max_len}", iv.words));
    if !iv.separates() {
        output = output.note("warning: the interval does not separate the language");
    }
    Ok(output)
}

fn construct(c: &Construct) -> Outcome {
    let mut notes = Vec::new();
    let built = match c {
        Construct::Ln { n } => constructions::ln_family(to_usize(*n)?)?,
        Construct::Boost { file, copies, interval, budget } => {
            let mut plan = BoostPlan::new(to_usize(*copies)?, &interval.p1, &interval.p2)?;
            plan.state_budget = *budget;
            constructions::boost(&load_c(file)?, &plan)?
        }
        Construct::Normalize { file, interval } => {
            constructions::normalize_probability(&load_c(file)?, &interval.p1, &interval.p2)?
        }
        Construct::Union { a, b } | Construct::Intersect { a, b } => {
            let op = if matches!(c, Construct::Union { .. }) { BooleanOp::Union } else { BooleanOp::Intersection };
            notes.push(
                "warning: both inputs are assumed to recognize their languages with probability above 2/3; \
                 this is not checked"
                    .to_string(),
            );
            constructions::boolean_combine(&load_c(a)?, &load_c(b)?, op)?
        }
        Construct::Complement { file } => constructions::complement(&load_c(file)?),
        Construct::Invhom { file, map } => {
            let a = load_c(file)?;
            let raw: BTreeMap<String, String> = serde_json::from_str(&read(map)?).map_err(Error::from)?;
            let mut images = BTreeMap::new();
            for (k, v) in raw {
                let mut chars = k.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(Failure::Error(format!("map keys must be single letters, got {k:?}")));
                };
                images.insert(c, parse_word(&v));
            }
            let h = HomomorphismSpec::new(images, a.alphabet().to_vec())?;
            constructions::inverse_hom(&a, &h)?
        }
        Construct::Quotient { file, word } => constructions::left_quotient(&load_c(file)?, &parse_word(word))?,
        Construct::StripDollar { file, m } => constructions::strip_dollar(&load_c(file)?, to_usize(*m)?)?,
        Construct::StripHash { file, eps, copies, interval, budget } => {
            let mut plan =
                StripHashPlan::new(interval.p1.clone(), interval.p2.clone(), eps.clone(), to_usize(*copies)?);
            plan.state_budget = *budget;
            if !plan.threshold_is_separating() {
                notes.push("warning: copy count too small for the threshold to separate".to_string());
            }
            constructions::strip_hash(&load_c(file)?, &plan)?
        }
    };
    notes.push(format!("{} states", built.size()));
    let mut output = Output::data(Automaton::C(built).to_json() + "\n");
    output.notes = notes;
    Ok(output)
}

fn classify(regex: Option<&str>, dfa: Option<&Path>, alphabet: Option<&str>, oracle: bool) -> Outcome {
    let letters: Option<Vec<char>> = alphabet.map(|s| s.chars().collect());
    let d = match (regex, dfa) {
        (Some(r), _) => regclass::dfa_from_regex(r, letters.as_deref())?,
        (None, Some(path)) => regclass::minimize(&Dfa::from_json(&read(path)?)?),
        (None, None) => return Err(Failure::Error("give --regex or --dfa".into())),
    };
    let found = classify_star(&d);
    let mut data = match &found {
        Some(w) => format!("type (*) via {}; {}\n", w.kind, w.clone().with_probe_words(&d)?),
        None => "not type (*)\n".to_string(),
    };
    if regclass::is_permutation_dfa(&d) {
        data.push_str("permutation automaton\n");
    }
    let mut output = Output::data(data).note(format!("minimal DFA has {} states", d.size()));
    if oracle {
        let check = classify_star_monoid_oracle(&d, DEFAULT_ORACLE_STATES.max(d.size()))?;
        if check.is_some() != found.is_some() {
            return Err(Failure::Error("search and monoid oracle disagree".into()));
        }
        output = output.note("monoid oracle agrees");
    }
    Ok(output)
}

fn matrix_report(m: &StochMatrix, tol: f64, max_iter: u64) -> Result<serde_json::Value, Failure> {
    let report = markov::analyze_chain(m)?;
    let stationary = if m.is_doubly_stochastic() {
        serde_json::to_value(markov::stationary_limit(m, tol, max_iter)?).map_err(Error::from)?
    } else {
        serde_json::Value::Null
    };
    Ok(serde_json::json!({
        "kind": m.kind(),
        "report": report,
        "stationary": stationary,
    }))
}

fn markov_report(file: &Path, tol: f64, max_iter: u64) -> Outcome {
    let text = read(file)?;
    let value = if let Ok(m) = serde_json::from_str::<StochMatrix>(&text) {
        matrix_report(&m, tol, max_iter)?
    } else {
        let a = load(file)?;
        let transitions = match &a {
            Automaton::C(c) => c.machine().transitions(),
            Automaton::Dh(d) => d.machine().transitions(),
            Automaton::OneAndHalf(_) => {
                return Err(Failure::Error("markov needs a matrix or a prac/pradh automaton".into()))
            }
        };
        let mut by_symbol = serde_json::Map::new();
        for (sym, m) in transitions {
            by_symbol.insert(sym.to_string(), matrix_report(m, tol, max_iter)?);
        }
        serde_json::Value::Object(by_symbol)
    };
    Ok(Output::data(serde_json::to_string_pretty(&value).map_err(Error::from)? + "\n"))
}

fn probe(args: &ProbeArgs) -> Outcome {
    let a = load_c(&args.file)?;
    let words = ProbeWords {
        omega: parse_word(&args.omega),
        x: parse_word(&args.x),
        y: parse_word(&args.y),
        z: parse_word(&args.z),
    };
    let flavor = match args.flavor {
        FlavorArg::Prime => ProbeFlavor::Prime,
        FlavorArg::DoublePrime => ProbeFlavor::DoublePrime,
    };
    let result = markov::convergence_probe(&a, &words, args.m_max, flavor, markov::DEFAULT_POWER_CAP)?;
    Ok(Output::data(result.to_csv(args.float)).note(format!("K = {}", result.k)))
}

fn prototype_cmd(file: &Path, restarts: usize, seed: u64) -> Outcome {
    let s = load_matrix(file)?;
    let found = if s.order() == 3 {
        match prototype::unistochastic_3x3(&s)? {
            Unistochastic::Yes(u) => Some(u),
            Unistochastic::No => None,
        }
    } else {
        prototype::search_prototype(&s, restarts, seed)?
    };
    Ok(match found {
        Some(u) => Output::data(format!("yes\n{}\n", u.to_json())),
        None if s.order() == 3 => Output::data("no\n"),
        None => Output::data("not found\n").note(format!("no prototype after {restarts} restarts")),
    })
}
