fn main() {
    std::process::exit(frozen_planet::cli::run());
}
