fn main() -> std::process::ExitCode {
    shadowcue::cli::main()
}
