use std::io::Write;

fn main() {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = cbam_cli::run_cli(
        std::env::args_os(),
        std::env::var("CBAM_CONFIG").ok(),
        &mut out,
        &mut err,
    );
    let _ = out.flush();
    let _ = err.flush();
    std::process::exit(code);
}
