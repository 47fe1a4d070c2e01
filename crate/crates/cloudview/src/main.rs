fn main() -> std::process::ExitCode {
    cloudview::cli::main()
}
