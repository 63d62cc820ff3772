#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

pub fn bronchi(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bronchi"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn bronchi")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn assert_ok(out: &Output) {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), stderr(out));
}

/// Complete binary tree skeleton below a trachea, `depth` bifurcation levels.
pub fn complete_binary_skeleton(depth: u32, with_diameters: bool) -> String {
    let mut nodes = vec![(0usize, [0.0, 0.0, 0.0]), (1, [0.0, 0.0, -20.0])];
    let mut edges = vec![(0usize, 1usize, 0u32)];
    let mut frontier = vec![1usize];
    for level in 1..=depth {
        let spread = 2f64.powi((depth + 1 - level) as i32);
        let mut next = Vec::new();
        for &parent in &frontier {
            let p = nodes[parent].1;
            for side in [-1.0, 1.0] {
                let id = nodes.len();
                nodes.push((id, [p[0] + side * spread, p[1], p[2] - 10.0]));
                edges.push((parent, id, level));
                next.push(id);
            }
        }
        frontier = next;
    }
    let mut text = String::new();
    for (id, p) in &nodes {
        writeln!(text, "N {id} {} {} {}", p[0], p[1], p[2]).unwrap();
    }
    for (a, b, generation) in &edges {
        if with_diameters {
            let d = 18.0 * 2f64.powf(-(*generation as f64) / 3.0);
            writeln!(text, "E {a} {b} {d:.12}").unwrap();
        } else {
            writeln!(text, "E {a} {b}").unwrap();
        }
    }
    text.push_str("R 0\n");
    text
}

pub fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Header column lookup for a CSV with a single data row.
pub fn summary_field(text: &str, name: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].to_string()
}

pub fn read_f32_raw(path: &Path) -> Vec<f32> {
    std::fs::read(path)
        .unwrap()
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}
