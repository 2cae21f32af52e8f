mod args;
mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use polyprod::Error;

use args::Cli;
use report::Report;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) => 3,
        Error::Inconsistency(_) => 1,
        Error::Parse(_) | Error::Domain(_) | Error::Precondition(_) | Error::Degenerate(_) => 2,
    }
}

fn write_report(report: &Report, common: &args::Common) -> io::Result<()> {
    let mut out: Box<dyn Write> = match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    report.write(common.format, &mut out)?;
    out.flush()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = commands::common(&cli.command);
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(3);
        }
    }
    let mut report = Report::new(commands::config_echo(&cli.command));
    let result = commands::run(&cli.command, &mut report);
    let code = match &result {
        Ok(()) if report.all_passed() => 0,
        Ok(()) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e)
        }
    };
    // Usage errors produce no document; everything else flushes what it has.
    if code != 2 {
        if let Err(e) = write_report(&report, common) {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(3);
        }
    }
    ExitCode::from(code)
}
