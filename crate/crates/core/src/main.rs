use std::io::IsTerminal;

fn main() {
    let color = std::env::var("BRANCHSPACE_COLOR").map_or(true, |v| v != "0") && std::io::stdout().is_terminal();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = branchspace::cli::run(std::env::args_os(), &mut out, &mut err, color);
    drop(out);
    std::process::exit(code);
}
