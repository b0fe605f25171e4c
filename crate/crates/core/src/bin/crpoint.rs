fn main() -> std::process::ExitCode {
    crpoint::cli::main()
}
