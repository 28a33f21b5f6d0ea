use clap::Parser;
use vecdyn_bench::cli::{run, write_report, Args};

fn main() {
    let args = Args::parse();
    let result = run(&args).and_then(|report| write_report(&args, &report));
    match result {
        Ok(Some(path)) => eprintln!("wrote {}", path.display()),
        Ok(None) => {}
        Err(e) => {
            eprintln!("vecdyn-bench: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
