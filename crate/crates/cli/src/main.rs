use clap::Parser;

fn main() {
    // Die quietly when the consumer closes the pipe instead of panicking
    // mid-report.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = tes_cli::Cli::parse();
    std::process::exit(tes_cli::execute(cli));
}
