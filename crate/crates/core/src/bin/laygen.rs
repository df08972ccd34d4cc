fn main() -> std::process::ExitCode {
    laygen::genlib::cli::main()
}
