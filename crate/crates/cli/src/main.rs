//! `padyn`: certificates, conversions, orbits and keystreams for maps on
//! `Z_p^k`.
//!
//! Exit codes: 0 pass, 1 a property or precondition failed, 2 bad input,
//! 3 the state space exceeds the enumeration bound.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use padic_ergodic::analysis::{self, default_max_level, InducedPermutation};
use padic_ergodic::dsl::parse;
use padic_ergodic::map::{Memoized, TableMap};
use padic_ergodic::transfer::{default_theorem_level, lift, verify_theorem};
use padic_ergodic::twist::{step, ResidueCycle};
use padic_ergodic::{fixtures, CompatibleMap, Error, MapRef, PAdicVec};

#[derive(Parser)]
#[command(
    name = "padyn",
    version,
    about = "Ergodicity certificates for p-adic maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compatibility, bijectivity and transitivity ladders.
    Check {
        /// Spec file, `fixture:NAME` or `table:PATH`.
        map: String,
        #[arg(long)]
        max_level: Option<usize>,
    },
    /// Solve the twist taking MAP on Z_p^k to a univariate target and verify
    /// the transfer.
    Convert {
        map: String,
        /// Univariate map the lift must agree with modulo p^k.
        #[arg(long)]
        target: String,
        #[arg(long)]
        max_level: Option<usize>,
        /// Write the lift's tables modulo p, p^2, ..., p^kN here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List an orbit with each state's base point and cycle index.
    Orbit {
        map: String,
        /// Starting state, e.g. `2^3:001` or `2^2:01,2^2:10`; zero by default.
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        steps: usize,
        /// Residue digits used for orbit coordinates, as a total over all
        /// coordinates; defaults to the whole state.
        #[arg(long)]
        twist_k: Option<usize>,
    },
    /// Emit the low digits of each iterate and tally them over one period.
    Keystream {
        map: String,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        level: usize,
        /// Words to print; one full period by default.
        #[arg(long)]
        words: Option<u64>,
        /// Low digits per coordinate in each word.
        #[arg(long, default_value_t = 1)]
        out_digits: usize,
    },
    /// List built-in fixture names.
    Fixtures,
}

enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(Error::StateSpaceTooLarge { .. }) => 3,
            Failure::Lib(
                Error::NotTransitive(_) | Error::NotBijective { .. } | Error::Precondition { .. },
            ) => 1,
            _ => 2,
        }
    }

    fn report(&self) {
        match self {
            Failure::Lib(Error::Precondition { what, certificate }) => {
                eprintln!("error: precondition failed: {what}");
                print!("{}", certificate.render());
            }
            Failure::Lib(e) => eprintln!("error: {e}"),
            Failure::Io(e) => eprintln!("error: {e}"),
            Failure::Usage(e) => eprintln!("error: {e}"),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn load_map(source: &str) -> Result<MapRef, Failure> {
    if let Some(name) = source.strip_prefix("fixture:") {
        return Ok(fixtures::by_name(name)?);
    }
    if let Some(path) = source.strip_prefix("table:") {
        let file = File::open(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
        let tables = analysis::read_tables(BufReader::new(file))?;
        return Ok(Arc::new(TableMap::from_induced(&tables)?));
    }
    let text =
        std::fs::read_to_string(source).map_err(|e| Failure::Io(format!("{source}: {e}")))?;
    let spec = parse(&text).map_err(|e| Failure::Usage(format!("{source}:{e}")))?;
    Ok(Arc::new(spec))
}

fn parse_state(
    f: &dyn CompatibleMap,
    text: Option<&str>,
    level: usize,
) -> Result<PAdicVec, Failure> {
    let Some(text) = text else {
        return Ok(PAdicVec::zero(f.prime(), f.arity(), level)?);
    };
    let x: PAdicVec = text.parse()?;
    if x.p() != f.prime() || x.arity() != f.arity() {
        return Err(Failure::Usage(format!(
            "state {x} does not fit a map on Z_{}^{}",
            f.prime(),
            f.arity()
        )));
    }
    let x = if x.precision() < level {
        x.extend(level)?
    } else {
        x.reduce(level)?
    };
    Ok(x)
}

fn check(map: &str, max_level: Option<usize>) -> Outcome {
    let f = load_map(map)?;
    let n = max_level.unwrap_or_else(|| default_max_level(f.prime(), f.arity()));
    let result = analysis::analyze(f.as_ref(), n)?;
    print!("{}", result.render());
    Ok(result.passed())
}

fn convert(map: &str, target: &str, max_level: Option<usize>, out: Option<PathBuf>) -> Outcome {
    let f = Memoized::wrap(load_map(map)?);
    let g1 = load_map(target)?;
    let (p, k) = (f.prime(), f.arity());
    let n = max_level.unwrap_or_else(|| default_theorem_level(p, k));
    let report = verify_theorem(f.clone(), g1, n)?;
    print!("{}", report.render());
    if let Some(path) = out {
        let g = Memoized::wrap(lift(f, report.permutation.clone())?);
        let tables = (1..=k * n)
            .map(|m| InducedPermutation::build(g.as_ref(), m))
            .collect::<Result<Vec<_>, _>>()?;
        let file =
            File::create(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        analysis::write_tables(&mut w, &tables)?;
        w.flush()?;
        println!("tables: {} (levels 1..{})", path.display(), k * n);
    }
    Ok(report.passed())
}

fn orbit(
    map: &str,
    start: Option<&str>,
    level: usize,
    steps: usize,
    twist_k: Option<usize>,
) -> Outcome {
    let f = Memoized::wrap(load_map(map)?);
    let mut x = parse_state(f.as_ref(), start, level)?;
    let k = twist_k.unwrap_or(f.arity() * level);
    if level * f.arity() < k {
        return Err(Failure::Usage(format!(
            "--twist-k {k} needs at least {} digits per coordinate",
            k / f.arity()
        )));
    }
    // Coordinates need a single residue cycle; without one the orbit is
    // still listed. Along an orbit the index advances by one and the base
    // moves on when the index wraps.
    let mut coords = match ResidueCycle::new(f.as_ref(), k) {
        Ok(cycle) => {
            let j = cycle.position(&x)?;
            let base = step(f.as_ref(), &x, -(j as i64), level)?;
            Some((cycle.len(), base, j))
        }
        Err(e @ (Error::NotTransitive(_) | Error::NotBijective { .. })) => {
            println!("coordinates: unavailable ({e})");
            None
        }
        Err(e) => return Err(e.into()),
    };
    for t in 0..steps {
        let next = f.eval(&x, level)?;
        match coords.as_mut() {
            Some((len, base, j)) => {
                println!("{t} {x} base={base} j={j}");
                *j += 1;
                if *j == *len {
                    *j = 0;
                    *base = next.clone();
                }
            }
            None => println!("{t} {x}"),
        }
        x = next;
    }
    Ok(true)
}

fn symbol(x: &PAdicVec, j: usize, digits: usize) -> String {
    let text = x
        .component(j)
        .reduce(digits)
        .expect("digits <= level")
        .to_string();
    text.split_once(':')
        .map(|(_, d)| d.to_string())
        .unwrap_or(text)
}

fn keystream(
    map: &str,
    seed: Option<&str>,
    level: usize,
    words: Option<u64>,
    digits: usize,
) -> Outcome {
    let f = Memoized::wrap(load_map(map)?);
    let (p, k) = (f.prime(), f.arity());
    if digits == 0 || digits > level {
        return Err(Failure::Usage(format!(
            "--out-digits must be in 1..={level}"
        )));
    }
    let period = analysis::state_count(p, k, level)?;
    let seed = parse_state(f.as_ref(), seed, level)?;

    let mut out = BufWriter::new(io::stdout().lock());
    let mut x = seed.clone();
    for _ in 0..words.unwrap_or(period) {
        let word: Vec<String> = (0..k).map(|j| symbol(&x, j, digits)).collect();
        writeln!(out, "{}", word.join(","))?;
        x = f.eval(&x, level)?;
    }

    let alphabet = (p as u64).pow(digits as u32);
    let mut counts = vec![vec![0u64; alphabet as usize]; k];
    let mut cycle = None;
    let mut x = seed.clone();
    for t in 1..=period {
        for (j, c) in counts.iter_mut().enumerate() {
            let v = x
                .component(j)
                .reduce(digits)?
                .to_u64()
                .expect("small symbol");
            c[v as usize] += 1;
        }
        x = f.eval(&x, level)?;
        if cycle.is_none() && x == seed {
            cycle = Some(t);
        }
    }
    writeln!(out, "period: {period}")?;
    match cycle {
        Some(c) => writeln!(out, "cycle: {c}")?,
        None => writeln!(out, "cycle: seed not revisited within {period} steps")?,
    }
    let expected = period / alphabet;
    let mut balanced = true;
    for (j, c) in counts.iter().enumerate() {
        let cells: Vec<String> = c
            .iter()
            .enumerate()
            .map(|(v, n)| {
                let s = PAdicVec::from_u64s(p, digits, &[v as u64]).expect("in range");
                format!("{}={n}", symbol(&s, 0, digits))
            })
            .collect();
        writeln!(out, "counts.x{j}: {}", cells.join(" "))?;
        balanced &= c.iter().all(|&n| n == expected);
    }
    writeln!(out, "balanced: {}", if balanced { "yes" } else { "no" })?;
    out.flush()?;
    Ok(balanced)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check { map, max_level } => check(&map, max_level),
        Command::Convert {
            map,
            target,
            max_level,
            out,
        } => convert(&map, &target, max_level, out),
        Command::Orbit {
            map,
            start,
            level,
            steps,
            twist_k,
        } => orbit(&map, start.as_deref(), level, steps, twist_k),
        Command::Keystream {
            map,
            seed,
            level,
            words,
            out_digits,
        } => keystream(&map, seed.as_deref(), level, words, out_digits),
        Command::Fixtures => {
            for (name, about) in fixtures::catalog() {
                println!("{name:<30} {about}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            failure.report();
            ExitCode::from(failure.exit_code())
        }
    }
}
