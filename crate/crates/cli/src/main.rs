fn main() {
    platoonlab::init_thread_pool_from_env();
    let code = platoonlab_cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
