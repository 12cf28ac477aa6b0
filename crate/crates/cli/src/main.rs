//! `sft`: batch front end for model verification, homology, the Gromov-Witten bootstrap,
//! grading formulas and circle satellites.

mod builtin;
mod commands;
mod laws;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{canonical, exit_code, parse_classes, GradingQuery, Outcome};

#[derive(Parser)]
#[command(name = "sft", version, about = "Exact symplectic field theory computations")]
struct Cli {
    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Also write the report (and CSV tables) into the output directory.
    #[arg(long, global = true)]
    save: bool,
    /// Directory for saved reports.
    #[arg(long, env = "SFT_OUTPUT_DIR", default_value = ".", global = true)]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check {H,H} = 0, degree homogeneity and d^2 = 0.
    Verify {
        /// circle, sphere3, lens:<l>, ellipsoid:<n>, stage:<n>, or a model file.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 6)]
        weight: u32,
    },
    /// Betti numbers of a weight-truncated slice.
    Homology {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 6)]
        weight: u32,
        /// Degree window `a..b`.
        #[arg(long)]
        degrees: Option<String>,
        /// Quotient by the odd parameter tau.
        #[arg(long)]
        tau_zero: bool,
    },
    /// Hamilton-Jacobi bootstrap of the potentials of C^n and CP^n.
    Gw {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        order: u32,
        /// Compare the plane-curve counts with the associativity recursion.
        #[arg(long)]
        oracle: bool,
    },
    /// Index, degree and parity formulas.
    Grading {
        #[command(subcommand)]
        query: GradingCmd,
    },
    /// Satellite h^(g, n+1) of the circle.
    Satellite {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        #[arg(long = "K", default_value_t = 4)]
        k_max: u32,
    },
    /// Randomized algebra-law batch.
    Laws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: u32,
    },
}

#[derive(Subcommand)]
enum GradingCmd {
    /// Virtual dimension of a moduli space of curves
    Dim {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        cz_plus: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        cz_minus: Vec<i64>,
        #[arg(long, default_value_t = 0)]
        genus: i64,
        #[arg(long, default_value_t = 0)]
        r: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        c1: i64,
        #[arg(long)]
        n: i64,
    },
    /// Degrees of p and q for one orbit
    Pq {
        #[arg(long, allow_hyphen_values = true)]
        cz: i64,
        #[arg(long)]
        n: i64,
    },
    /// Degrees in a Morse-Bott layout
    Bott {
        #[arg(long)]
        k: i64,
        #[arg(long, default_value_t = 1)]
        l: i64,
        #[arg(long, allow_hyphen_values = true)]
        c1: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        delta_deg: i64,
    },
    /// Fractional Conley-Zehnder degree
    Fractional {
        #[arg(long, allow_hyphen_values = true)]
        cz: i64,
        #[arg(long, allow_hyphen_values = true)]
        two_m: i64,
        #[arg(long)]
        l: i64,
    },
    /// Parity of an orbit and whether it is good
    Parity {
        #[arg(long)]
        n: i64,
        /// Sign of det(I - A): 1 or -1.
        #[arg(long, allow_hyphen_values = true)]
        det_sign: i8,
        #[arg(long)]
        neg_eigen_mult: Option<u32>,
        #[arg(long)]
        multiple: Option<u32>,
    },
    /// Contact homology ranks c_k of a Brieskorn sphere
    Brieskorn {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        n: i64,
        #[arg(long, default_value_t = 30)]
        k_max: i64,
    },
    /// Generator degrees from a filling's homology
    Yau {
        #[arg(long)]
        n: i64,
        /// Homology classes as `name:dim`.
        #[arg(long = "class")]
        classes: Vec<String>,
        #[arg(long, default_value_t = 4)]
        i_max: i64,
    },
}

fn dispatch(cmd: &Command) -> anyhow::Result<(&'static str, Outcome)> {
    Ok(match cmd {
        Command::Verify { model, weight } => ("verify", commands::verify(model, *weight)?),
        Command::Homology { model, weight, degrees, tau_zero } => {
            ("homology", commands::homology(model, *weight, degrees.as_deref(), *tau_zero)?)
        }
        Command::Gw { n, order, oracle } => ("gw", commands::gw(*n, *order, *oracle)?),
        Command::Satellite { g, n, k_max } => ("satellite", commands::satellite(*g, *n, *k_max)?),
        Command::Laws { seed, cases } => ("laws", laws::run(*seed, *cases)?),
        Command::Grading { query } => {
            let q = match query {
                GradingCmd::Dim { cz_plus, cz_minus, genus, r, c1, n } => {
                    GradingQuery::Dim { cz_plus: cz_plus.clone(), cz_minus: cz_minus.clone(), genus: *genus, r: *r, c1: *c1, n: *n }
                }
                GradingCmd::Pq { cz, n } => GradingQuery::Pq { cz: *cz, n: *n },
                GradingCmd::Bott { k, l, c1, delta_deg } => GradingQuery::Bott { k: *k, l: *l, c1: *c1, delta_deg: *delta_deg },
                GradingCmd::Fractional { cz, two_m, l } => GradingQuery::Fractional { cz: *cz, two_m: *two_m, l: *l },
                GradingCmd::Parity { n, det_sign, neg_eigen_mult, multiple } => {
                    GradingQuery::Parity { n: *n, det_sign: *det_sign, neg_eigen_mult: *neg_eigen_mult, multiple: *multiple }
                }
                GradingCmd::Brieskorn { p, n, k_max } => GradingQuery::Brieskorn { p: *p, n: *n, k_max: *k_max },
                GradingCmd::Yau { n, classes, i_max } => GradingQuery::Yau { n: *n, classes: parse_classes(classes)?, i_max: *i_max },
            };
            ("grading", commands::grading(q)?)
        }
    })
}

fn save(cli: &Cli, name: &str, json: &str, out: &Outcome) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cli.out_dir)?;
    std::fs::write(cli.out_dir.join(format!("{name}.json")), json)?;
    if let Some(csv) = &out.csv {
        std::fs::write(cli.out_dir.join(format!("{name}.csv")), csv)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, out) = match dispatch(&cli.command) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let json = serde_json::to_string_pretty(&canonical(out.report.clone())).expect("reports serialize") + "\n";
    match cli.format {
        Format::Json => print!("{json}"),
        Format::Text => print!("{}", out.text),
    }
    if cli.save {
        if let Err(e) = save(&cli, name, &json, &out) {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    }
    if out.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
