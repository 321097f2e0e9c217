fn main() -> std::process::ExitCode {
    lvgp::cli::run()
}
