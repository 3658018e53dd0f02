//! `sclp` binary: parse arguments, dispatch to the library, exit.

fn main() {
    // Die quietly on a closed pipe (`sclp ... | head`) like other Unix
    // tools, instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(sclp::cli::run());
}
