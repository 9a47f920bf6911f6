fn main() {
    std::process::exit(dirspec::parse_and_dispatch(std::env::args_os()));
}
