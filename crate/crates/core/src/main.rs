use std::io::{stderr, stdout};

use oriented_rr::cli::run_cli;

fn main() {
    let code = run_cli(std::env::args_os(), &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}
