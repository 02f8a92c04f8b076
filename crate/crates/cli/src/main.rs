use std::process::ExitCode;

fn main() -> ExitCode {
    latent_idm_cli::main_with_args(std::env::args_os())
}
