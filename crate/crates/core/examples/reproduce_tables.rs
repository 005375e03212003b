//! Drive the `reproduce` subcommand in-process: the ruin table on a short
//! grid, written as CSV plus manifest into a directory (default `out/`).
//!
//! cargo run --release --example reproduce_tables -- out/

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let args = [
        "chawkes",
        "reproduce",
        "table1",
        "--grid",
        "1,10,50",
        "--seed",
        "1",
        "--out",
        &out,
    ];
    let code = compound_hawkes::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
