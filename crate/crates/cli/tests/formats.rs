//! The JSON files under `data/` agree with the built-in corpus.

use std::path::{Path, PathBuf};

use malcev::corpus;
use malcev_tool::format::{AlgebraDoc, Input, LoopDoc};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn algebra_files_match_corpus() {
    let mut matched = 0;
    for alg in corpus::small_algebras() {
        let file = data_dir().join(format!("{}.json", alg.name().to_lowercase()));
        let doc: AlgebraDoc = Input::read(&file).unwrap().parse().unwrap();
        assert_eq!(doc, AlgebraDoc::from_algebra(&alg), "{}", file.display());
        doc.to_algebra().unwrap();
        matched += 1;
    }
    assert!(matched >= 19);
}

#[test]
fn loop_files() {
    for (file, size) in [("z2loop.json", 2), ("z4loop.json", 4), ("loop5.json", 5)] {
        let q = Input::read(&data_dir().join(file))
            .unwrap()
            .loop_table()
            .unwrap();
        assert_eq!(q.size(), size);
    }
    let doc: LoopDoc = Input::read(&data_dir().join("notaloop.json"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(doc.to_loop().is_err());
}
