use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gjms_residue::flat::bn_flat_coeffs;
use gjms_residue::output::{bilinear_document, conventions, operator_document, table_document, table_latex, ENGINE_VERSION};
use gjms_residue::tensor::ibp::extract_sn_form;
use gjms_residue::verify::{Suite, Verifier};

#[derive(Parser)]
#[command(name = "gjms-residue", version, about = "Residue bilinear forms and critical operators")]
struct Cli {
    /// Worker threads for parallel sections (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Flat bilinear form B_n as a coefficient table.
    BnFlat {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Critical operator P_n with its leading coefficient.
    Pn {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        curved: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run verification checks; exits 1 if any fails.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Latex,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Traces,
    Flat,
    Curved,
    Identities,
    Numeric,
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("usage error: {}", msg);
    ExitCode::from(2)
}

fn failure(e: gjms_residue::Error) -> ExitCode {
    eprintln!("error: {}", e);
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            return usage("could not configure the thread pool");
        }
    }
    match cli.cmd {
        Cmd::BnFlat { dim, format } => bn_flat(dim, format),
        Cmd::Pn { dim, curved, format } => pn(dim, curved, format),
        Cmd::Verify { suite } => verify(suite),
    }
}

fn bn_flat(n: usize, format: Format) -> ExitCode {
    if n % 2 == 1 || !(2..=10).contains(&n) {
        return usage("--dim must be even with 2 ≤ n ≤ 10");
    }
    if n > 8 {
        eprintln!("warning: n = {} is slow", n);
    }
    let t = match bn_flat_coeffs(n) {
        Ok(t) => t,
        Err(e) => return failure(e),
    };
    match format {
        Format::Json => println!("{}", table_document(&t).to_json_string()),
        Format::Latex => match table_latex(&t, n as u32) {
            Ok(s) => println!("B_{{{}}}(f,h) = {}", n, s),
            Err(e) => return failure(e),
        },
    }
    ExitCode::SUCCESS
}

fn pn(n: usize, curved: bool, format: Format) -> ExitCode {
    let v = Verifier::new();
    let run = match (curved, n) {
        (false, 2 | 4 | 6 | 8) => v.flat(n),
        (true, 4) => v.curved(),
        _ => return usage("validated scope is flat n ∈ {2,4,6,8} and curved n = 4"),
    };
    let run = match run {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    let mut doc = operator_document(&run.p).with("bilinear", serde_json::to_value(bilinear_document(&run.b).terms).unwrap());
    let sn = extract_sn_form(&run.p);
    if let Ok(sn) = &sn {
        doc = doc.with(
            "delta_S_d",
            json!({ "leading": gjms_residue::output::q_string(&sn.leading), "S_of_dh": sn.s_of_dh.to_string(), "lower_order": sn.lot.to_string() }),
        );
    }
    match format {
        Format::Json => println!("{}", doc.to_json_string()),
        Format::Latex => {
            println!("P_{{{}}} h = {}", n, run.p.expr.to_latex());
            println!("% leading coefficient c_{{{}}} = {}", n, gjms_residue::algebra::fmt_q(&run.p.leading));
            if let Ok(sn) = &sn {
                println!("% S(dh)_{{{}}} = {}", gjms_residue::tensor::expr::label_char(sn.label), sn.s_of_dh.to_latex());
            }
        }
    }
    ExitCode::SUCCESS
}

fn verify(s: SuiteArg) -> ExitCode {
    let suite = match s {
        SuiteArg::All => Suite::All,
        SuiteArg::Traces => Suite::Traces,
        SuiteArg::Flat => Suite::Flat,
        SuiteArg::Curved => Suite::Curved,
        SuiteArg::Identities => Suite::Identities,
        SuiteArg::Numeric => Suite::Numeric,
    };
    let v = Verifier::new();
    let mut all = true;
    let mut checks = Vec::new();
    for &id in suite.checks() {
        let o = v.run(id);
        eprintln!("[{}] {:>2} {} ({:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.seconds);
        all &= o.pass;
        checks.push(o);
    }
    let report = json!({
        "kind": "verification-report",
        "pass": all,
        "checks": checks,
        "conventions": conventions(),
        "engine_version": ENGINE_VERSION,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
