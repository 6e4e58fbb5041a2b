fn main() {
    std::process::exit(vertexcalc::cli::run());
}
