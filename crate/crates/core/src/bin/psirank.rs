fn main() -> std::process::ExitCode {
    psirank::cli::main()
}
