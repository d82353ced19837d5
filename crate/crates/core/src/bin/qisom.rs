use std::process::ExitCode;

fn main() -> ExitCode {
    qisom::cli::main()
}
