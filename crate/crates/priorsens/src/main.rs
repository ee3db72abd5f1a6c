use std::io::{stderr, stdout};
use std::path::PathBuf;
use std::process::ExitCode;

use priorsens::cli::OUT_DIR_ENV;
use priorsens::{main_with, Streams};

fn main() -> ExitCode {
    let env_out = std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let (mut out, mut err) = (stdout().lock(), stderr().lock());
    let mut io = Streams {
        out: &mut out,
        err: &mut err,
    };
    ExitCode::from(main_with(std::env::args_os(), env_out, &mut io))
}
