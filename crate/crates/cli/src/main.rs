use std::io::Write;

use clap::Parser;

fn main() {
  let cli = hilbcx_cli::Cli::parse();
  let outcome = hilbcx_cli::run(&cli);
  let mut out = std::io::stdout().lock();
  // a closed pipe leaves nothing useful to report
  let _ = out.write_all(outcome.stdout.as_bytes());
  let _ = out.flush();
  std::process::exit(outcome.code);
}
