//! Drive the command-line front end in-process.
//!
//! cargo run --example command_line -- dilation --preset sun

fn main() {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        args = ["mlbound", "--levels", "0:0.7071,1eV:0.7071"].map(String::from).to_vec();
    }
    let argv = std::iter::once("tunclock".to_string()).chain(args);
    let code = tunclock::cli::run(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
