fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    fda_codesign::cli::init_threads();
    std::process::exit(fda_codesign::cli::run(std::env::args_os()));
}
