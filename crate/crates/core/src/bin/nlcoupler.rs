use clap::Parser;
use nlcoupler::cli::{main_with_args, CliArgs, EXIT_USAGE};

fn main() {
    let code = match CliArgs::try_parse() {
        Ok(args) => main_with_args(args),
        Err(e) => {
            // clap reserves 2 for usage errors, which here means an
            // unreliable ensemble
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                0
            }
        }
    };
    std::process::exit(code);
}
