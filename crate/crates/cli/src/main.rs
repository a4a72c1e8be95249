use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let (verbose, output) = match smk::Cli::try_parse_from(&args) {
        Ok(cli) => (cli.knobs.verbose, cli.knobs.output),
        Err(e) if e.exit_code() == 0 => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(_) => (0, None),
    };
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SMK_LOG", level)).init();

    let outcome = smk::run(args);
    if let Err(e) = smk::emit(&outcome, output.as_deref()) {
        log::error!("cannot write report: {e}");
        return ExitCode::from(smk::EXIT_ERROR as u8);
    }
    ExitCode::from(outcome.code as u8)
}
