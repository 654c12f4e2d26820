//! Writes the built-in algebras, a few loops and partial functions as JSON
//! documents into the directory given on the command line (default `data`).

use std::fs;
use std::path::{Path, PathBuf};

use malcev::corpus;
use malcev_tool::format::{AlgebraDoc, LoopDoc, PartialFnDoc};

fn write(dir: &Path, file: &str, json: String) {
    fs::write(dir.join(file), json + "\n").expect("write");
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    fs::create_dir_all(&dir).expect("create output directory");
    for alg in corpus::small_algebras() {
        let file = format!("{}.json", alg.name().to_lowercase());
        write(
            &dir,
            &file,
            serde_json::to_string(&AlgebraDoc::from_algebra(&alg)).unwrap(),
        );
    }
    for n in [2, 4] {
        let doc = LoopDoc {
            size: n,
            mult: corpus::cyclic_table(n),
        };
        write(
            &dir,
            &format!("z{n}loop.json"),
            serde_json::to_string(&doc).unwrap(),
        );
    }
    let nonassociative = corpus::loops_up_to_isomorphism(5)
        .into_iter()
        .find(|t| malcev::Loop::new(t).is_ok_and(|q| !q.is_associative()))
        .expect("a nonassociative loop of order 5");
    write(
        &dir,
        "loop5.json",
        serde_json::to_string(&LoopDoc {
            size: 5,
            mult: nonassociative,
        })
        .unwrap(),
    );
    let not_a_loop = LoopDoc {
        size: 2,
        mult: vec![vec![0, 1], vec![1, 1]],
    };
    write(
        &dir,
        "notaloop.json",
        serde_json::to_string(&not_a_loop).unwrap(),
    );
    // Z3 without its term, so the Mal'cev polynomial has to be searched for.
    let mut z3 = AlgebraDoc::from_algebra(&corpus::cyclic(3));
    z3.name = "Z3 bare".into();
    z3.malcev_term = None;
    write(&dir, "z3bare.json", serde_json::to_string(&z3).unwrap());
    write(
        &dir,
        "empty.json",
        serde_json::to_string(&PartialFnDoc {
            domain: vec![],
            values: vec![],
        })
        .unwrap(),
    );
    let squaring = PartialFnDoc {
        domain: vec![0, 1, 2, 3],
        values: vec![0, 1, 0, 1],
    };
    write(
        &dir,
        "squaring.json",
        serde_json::to_string(&squaring).unwrap(),
    );
}
