fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let code = itemset_cli::run(std::env::args_os(), &mut out, &mut stderr.lock());
    drop(out);
    std::process::exit(code);
}
