//! Drives the command-line front end in-process and prints its CSV.

fn main() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let args = ["frachq", "oscillator", "--alpha", "0.5", "--t-stop", "2", "--t-count", "5"];
    let code = frachq::cli::run(args, &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    std::process::exit(code);
}
