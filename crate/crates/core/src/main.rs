fn main() -> std::process::ExitCode {
    fisim::cli::main()
}
