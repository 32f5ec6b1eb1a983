use std::panic;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let code = panic::catch_unwind(|| {
        let mut out = std::io::stdout().lock();
        let mut err = std::io::stderr().lock();
        switchbif_cli::run(args, &mut out, &mut err)
    })
    .unwrap_or(switchbif_cli::EXIT_INTERNAL);
    ExitCode::from(code as u8)
}
