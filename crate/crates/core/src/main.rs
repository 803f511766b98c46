fn main() {
    std::process::exit(frogtree::cli::main_with_args(std::env::args_os()));
}
