fn main() {
    std::process::exit(hon_anomaly_cli::run(std::env::args_os()));
}
