use std::io::IsTerminal;

fn main() {
    let color = rflx_cli::color_from_env(std::io::stderr().is_terminal());
    let code = rflx_cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr(), color);
    std::process::exit(code);
}
