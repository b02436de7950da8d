fn main() {
    std::process::exit(gifs_lab::cli::run(std::env::args_os()));
}
