use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let result = distguess_cli::run(std::env::args_os());
    for artifact in &result.artifacts {
        if let Some(path) = &artifact.path {
            if let Err(e) = std::fs::write(path, &artifact.content) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
    }
    let _ = std::io::stdout().write_all(result.stdout.as_bytes());
    let _ = std::io::stderr().write_all(result.stderr.as_bytes());
    ExitCode::from(result.exit_code as u8)
}
