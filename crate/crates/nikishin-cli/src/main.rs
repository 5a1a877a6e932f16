use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::init();
    let code = nikishin_cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
