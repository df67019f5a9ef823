use std::process::ExitCode;
use std::time::Instant;

use dvlab_cli::{emit_report, execute, exit_code, failure_summary, parse_args};

/// Expand `@file` arguments into the whitespace-separated words of the file.
fn expand_argfiles(args: Vec<String>) -> std::io::Result<Vec<String>> {
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        match a.strip_prefix('@') {
            Some(path) if !path.is_empty() => {
                out.extend(std::fs::read_to_string(path)?.split_whitespace().map(String::from))
            }
            _ => out.push(a),
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match expand_argfiles(std::env::args().skip(1).collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: cannot read argument file: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let report = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    log::info!("{} finished in {:.2?}", report.name, start.elapsed());
    if let Err(e) = emit_report(&report, &cfg) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for line in failure_summary(&report) {
        eprintln!("{line}");
    }
    ExitCode::from(exit_code(&report) as u8)
}
