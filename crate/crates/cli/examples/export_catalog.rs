//! Writes every catalog domain to `domains/<name>.json`.

use std::path::PathBuf;

use billiard_cli::DomainFile;
use billiard_core::catalog;

fn file_name(name: &str) -> String {
    format!("{}.json", name.to_lowercase().replace('\'', "p"))
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("domains");
    std::fs::create_dir_all(&dir).unwrap();
    let mut all = catalog::elementary();
    all.extend(catalog::test_domains());
    for cd in all {
        let d = cd.build().expect("catalog domain builds");
        let path = dir.join(file_name(cd.name));
        std::fs::write(&path, DomainFile::from_domain(&d).to_json()).unwrap();
        println!("{}", path.display());
    }
}
