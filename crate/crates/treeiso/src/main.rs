use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use treeiso::bijections::{
    apply_chain, compile_derivation, flatten_chain, invert_chain, seven_decode, seven_encode,
    BijectionChain, VEFunction,
};
use treeiso::derivations::derive_equivalence;
use treeiso::patterns::parse_ptuple;
use treeiso::presentations::{simplify, Presentation, SimplifyResult};
use treeiso::semiring::{decide_equiv, normal_form, parse_poly, Polynomial};
use treeiso::tree::{enumerate_trees, parse_tree, Tree};
use treeiso::verifier::{check_bijection_family, family_weight_check};
use treeiso::Error;

#[derive(Parser)]
#[command(name = "treeiso", version, about = "Tree isomorphisms from semiring identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normal form a + bX^2 + cX^4 of a polynomial
    Nf { poly: String },
    /// Decide equivalence of two polynomials in N[X]/(X = 1 + X^2)
    Equiv { left: String, right: String },
    /// Print an elementary-move derivation between equivalent polynomials
    Derive { left: String, right: String },
    /// Compile a derivation between two polynomials into a bijection
    Compile {
        left: String,
        right: String,
        /// Flatten the chain into a single pattern family
        #[arg(long)]
        flatten: bool,
        /// Write to a file instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply a compiled bijection (chain or family file) to a tuple
    Apply {
        file: PathBuf,
        tuple: String,
        /// Apply the inverse direction
        #[arg(long)]
        inverse: bool,
    },
    /// The seven-tuple codec
    Seven {
        #[command(subcommand)]
        command: SevenCommand,
    },
    /// Verify a pattern-family file as a bijection certificate
    Verify {
        file: PathBuf,
        /// Minimum development depth
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Emit the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Operations on algebra presentations
    Present {
        #[command(subcommand)]
        command: PresentCommand,
    },
    /// Stream all trees of a given size, one per line
    Enumerate {
        #[arg(long)]
        size: usize,
    },
}

#[derive(Subcommand)]
enum SevenCommand {
    /// Encode a seven-tuple of trees as a single tree
    Encode { trees: Vec<String> },
    /// Decode one tree into seven
    Decode { tree: String },
}

#[derive(Subcommand)]
enum PresentCommand {
    /// Simplify a presentation to a free basis or report inconsistency
    Simplify { file: PathBuf },
}

/// Exit 1: well-formed input, negative or failed outcome.
struct DomainFailure(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Domain(DomainFailure(msg))) => {
            eprintln!("{}", msg);
            ExitCode::from(1)
        }
        Err(RunError::Usage(e)) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

enum RunError {
    Domain(DomainFailure),
    Usage(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> RunError {
        RunError::Usage(e)
    }
}

impl From<treeiso::ParseError> for RunError {
    fn from(e: treeiso::ParseError) -> RunError {
        RunError::Usage(e.into())
    }
}

impl From<DomainFailure> for RunError {
    fn from(d: DomainFailure) -> RunError {
        RunError::Domain(d)
    }
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    fs::read_to_string(path)
        .map_err(|e| RunError::Usage(Error::Other(format!("{}: {}", path.display(), e))))
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Nf { poly } => {
            let p = parse_poly(&poly)?;
            let nf = normal_form(&p);
            println!("{}", Polynomial::from_normal_form(&nf));
        }
        Command::Equiv { left, right } => {
            let l = parse_poly(&left)?;
            let r = parse_poly(&right)?;
            println!("{}", decide_equiv(&l, &r));
        }
        Command::Derive { left, right } => {
            let l = parse_poly(&left)?;
            let r = parse_poly(&right)?;
            match derive_equivalence(&l, &r) {
                Some(d) => print!("{}", d.render()),
                None => {
                    println!("NotEquivalent");
                    return Err(DomainFailure(format!("{} and {} are not equivalent", l, r)).into());
                }
            }
        }
        Command::Compile { left, right, flatten, output } => {
            let l = parse_poly(&left)?;
            let r = parse_poly(&right)?;
            let d = derive_equivalence(&l, &r).ok_or_else(|| {
                DomainFailure(format!("{} and {} are not equivalent", l, r))
            })?;
            let ch = compile_derivation(&d)?;
            let text = if flatten {
                flatten_chain(&ch).render()
            } else {
                ch.render()
            };
            match output {
                Some(path) => fs::write(&path, text).map_err(|e| {
                    RunError::Usage(Error::Other(format!("{}: {}", path.display(), e)))
                })?,
                None => print!("{}", text),
            }
        }
        Command::Apply { file, tuple, inverse } => {
            let text = read(&file)?;
            let x = parse_ptuple(&tuple)?;
            let image = if text.trim_start().starts_with("chain") {
                let ch = BijectionChain::parse(&text)?;
                let ch = if inverse { invert_chain(&ch) } else { ch };
                apply_chain(&ch, &x)?
            } else {
                let f = VEFunction::parse(&text)?;
                if inverse { f.apply_inverse(&x)? } else { f.apply(&x)? }
            };
            println!("{}", image);
        }
        Command::Seven { command } => match command {
            SevenCommand::Encode { trees } => {
                if trees.len() != 7 {
                    return Err(Error::Other(format!(
                        "seven encode takes 7 trees, got {}",
                        trees.len()
                    ))
                    .into());
                }
                let ts: Vec<Tree> = trees
                    .iter()
                    .map(|s| parse_tree(s))
                    .collect::<Result<_, _>>()?;
                let ts: [Tree; 7] = ts.try_into().unwrap();
                println!("{}", seven_encode(&ts));
            }
            SevenCommand::Decode { tree } => {
                let t = parse_tree(&tree)?;
                for part in seven_decode(&t) {
                    println!("{}", part);
                }
            }
        },
        Command::Verify { file, depth, json } => {
            let f = VEFunction::parse(&read(&file)?)?;
            let mut report = check_bijection_family(&f, depth)?;
            if report.passed {
                report = family_weight_check(&f);
            }
            if json {
                println!("{}", serde_json::to_string(&report).expect("report serializes"));
            } else if report.passed {
                println!("PASS {}", report.stage);
            } else {
                println!(
                    "FAIL {}{}",
                    report.stage,
                    report
                        .counterexample
                        .as_deref()
                        .map(|c| format!(": {}", c))
                        .unwrap_or_default()
                );
            }
            if !report.passed {
                return Err(DomainFailure(format!("verification failed at {}", report.stage)).into());
            }
        }
        Command::Present { command } => match command {
            PresentCommand::Simplify { file } => {
                let p = Presentation::parse(&read(&file)?)?;
                match simplify(&p) {
                    SimplifyResult::Free { basis, elimination } => {
                        println!(
                            "Free: {}",
                            basis.iter().cloned().collect::<Vec<_>>().join(" ")
                        );
                        for (g, t) in elimination {
                            println!("{} = {}", g, t);
                        }
                    }
                    SimplifyResult::Inconsistent { witness, axiom } => {
                        println!(
                            "Inconsistent: axiom {} violated by {} = {}",
                            axiom.number(),
                            witness.0,
                            witness.1
                        );
                        return Err(DomainFailure("presentation is inconsistent".into()).into());
                    }
                }
            }
        },
        Command::Enumerate { size } => {
            for t in enumerate_trees(size) {
                println!("{}", t);
            }
        }
    }
    Ok(())
}
