use hydra_cli::manifest::SolverChoice;
use hydra_cli::{cmd_compare, cmd_export_mps, cmd_run, cmd_sample, cmd_validate, load_manifest};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
hydra - multi-horizon stochastic capacity expansion with green hydrogen rules

USAGE:
    hydra validate   --manifest <file>
    hydra sample     --manifest <file> [--out <dir>] [--seed <n>]
    hydra run        --manifest <file> [--out <dir>] [--seed <n>]
                     [--cases <A,B,...>] [--solver embedded|external-mps]
                     [--export-mps]
    hydra export-mps --manifest <file> [--out <dir>] [--cases <A,B,...>]
    hydra compare    <report_a> <report_b> [--out <file>]

Exit codes: 0 ok, 2 data error, 3 infeasible, 4 solver failure.
HYDRA_THREADS caps how many cases solve in parallel.
";

struct Args {
    manifest: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    cases: Option<Vec<String>>,
    solver: Option<String>,
    export_mps: bool,
    positional: Vec<PathBuf>,
}

fn parse_args(args: &[String]) -> Result<Args, String> {
    let mut out = Args {
        manifest: None,
        out: None,
        seed: None,
        cases: None,
        solver: None,
        export_mps: false,
        positional: Vec::new(),
    };
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--manifest" => {
                out.manifest = Some(PathBuf::from(
                    it.next().ok_or("--manifest needs a path")?,
                ))
            }
            "--out" => out.out = Some(PathBuf::from(it.next().ok_or("--out needs a path")?)),
            "--seed" => {
                out.seed = Some(
                    it.next()
                        .ok_or("--seed needs a value")?
                        .parse()
                        .map_err(|_| "--seed must be an unsigned integer")?,
                )
            }
            "--cases" => {
                out.cases = Some(
                    it.next()
                        .ok_or("--cases needs a list")?
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                )
            }
            "--solver" => out.solver = Some(it.next().ok_or("--solver needs a kind")?.clone()),
            "--export-mps" => out.export_mps = true,
            other if other.starts_with("--") => return Err(format!("unknown flag {other}")),
            other => out.positional.push(PathBuf::from(other)),
        }
    }
    Ok(out)
}

fn apply_overrides(manifest: &mut hydra_cli::RunManifest, args: &Args) -> Result<(), String> {
    if let Some(out) = &args.out {
        manifest.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        match &mut manifest.sample {
            Some(s) => s.seed = seed,
            None => return Err("--seed given but the manifest has no sample section".into()),
        }
    }
    if let Some(cases) = &args.cases {
        let defined = manifest.cases.clone();
        let mut selected = Vec::new();
        for name in cases {
            if let Some(c) = defined.iter().find(|c| &c.name == name) {
                selected.push(c.clone());
            } else if let Some(c) = hydra_core::model::CaseConfig::preset(name) {
                selected.push(c);
            } else {
                return Err(format!("unknown case {name:?}"));
            }
        }
        if selected.is_empty() {
            return Err("--cases selected nothing".into());
        }
        manifest.cases = selected;
    }
    if let Some(kind) = &args.solver {
        manifest.solver = match kind.as_str() {
            "embedded" => SolverChoice::Embedded,
            "external-mps" => SolverChoice::ExternalMps { solution_dir: None },
            other => return Err(format!("unknown solver {other:?}")),
        };
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let Some(sub) = argv.first().cloned() else {
        eprint!("{USAGE}");
        return ExitCode::from(2);
    };
    let args = match parse_args(&argv[1..]) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };

    if sub == "compare" {
        if args.positional.len() != 2 {
            eprintln!("error: compare needs two report files");
            return ExitCode::from(2);
        }
        return match cmd_compare(&args.positional[0], &args.positional[1], args.out.as_deref()) {
            Ok(msg) => {
                print!("{msg}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {}", e.message());
                ExitCode::from(e.exit_code() as u8)
            }
        };
    }

    if sub == "--help" || sub == "help" {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }

    let Some(manifest_path) = &args.manifest else {
        eprintln!("error: {sub} requires --manifest");
        return ExitCode::from(2);
    };
    let mut manifest = match load_manifest(manifest_path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = apply_overrides(&mut manifest, &args) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    let result = match sub.as_str() {
        "validate" => cmd_validate(&manifest),
        "sample" => cmd_sample(&manifest, args.out.as_deref()),
        "run" => cmd_run(&manifest, args.export_mps),
        "export-mps" => cmd_export_mps(&manifest),
        other => {
            eprintln!("error: unknown subcommand {other:?}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(msg) => {
            print!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
