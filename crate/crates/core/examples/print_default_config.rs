fn main() {
    print!("{}", homoclinic::cli::RunConfig::default().to_toml_string().unwrap());
}
