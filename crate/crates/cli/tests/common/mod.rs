//! Scripted good/bad invocations of the binary and their expected exit codes.

use std::path::Path;
use std::process::Command;

use kinoplan::gridmap::{save_map, Costmap, LETHAL};

pub fn kinoplan() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kinoplan"))
}

pub struct Case {
    pub name: &'static str,
    pub args: Vec<String>,
    pub expected: i32,
}

pub struct Outcome {
    pub name: &'static str,
    pub expected: i32,
    pub got: Option<i32>,
    pub stderr: String,
}

/// 10×10 m free map with a lethal block at (1..2, 1..2) and a closed box
/// around (8, 8). Returns the map file path.
pub fn write_fixture_map(dir: &Path) -> String {
    let mut map = Costmap::new(200, 200, 0.05, (0.0, 0.0)).unwrap();
    let mut fill = |x0: f64, y0: f64, x1: f64, y1: f64| {
        for j in (y0 / 0.05) as usize..(y1 / 0.05) as usize {
            for i in (x0 / 0.05) as usize..(x1 / 0.05) as usize {
                map.set_cost(i, j, LETHAL);
            }
        }
    };
    fill(1.0, 1.0, 2.0, 2.0);
    fill(7.0, 7.0, 9.0, 7.2);
    fill(7.0, 8.8, 9.0, 9.0);
    fill(7.0, 7.0, 7.2, 9.0);
    fill(8.8, 7.0, 9.0, 9.0);
    let file = dir.join("fixture.pgm");
    save_map(&map, &file).unwrap();
    file.display().to_string()
}

fn case(name: &'static str, args: &[&str], expected: i32) -> Case {
    Case {
        name,
        args: args.iter().map(|s| s.to_string()).collect(),
        expected,
    }
}

pub fn exit_code_matrix(dir: &Path) -> Vec<Case> {
    let map = write_fixture_map(dir);
    let d = |f: &str| dir.join(f).display().to_string();
    let (out, svg, cs, render_svg, render_ppm) = (d("p.csv"), d("p.svg"), d("set.cs"), d("r.svg"), d("r.ppm"));
    let (garbage, missing) = (d("garbage.csv"), d("missing.pgm"));
    std::fs::write(&garbage, "x,y\nnot,numbers\n").unwrap();
    let plan = |start: &str, goal: &str, extra: &[&str]| -> Vec<String> {
        ["plan", "--map", &map, "--start", start, "--goal", goal, "--out", &out]
            .iter()
            .chain(extra)
            .map(|s| s.to_string())
            .collect()
    };
    let mut cases = vec![
        case("help", &["--help"], 0),
        case("version", &["--version"], 0),
        case("unknown subcommand", &["fly"], 3),
        case("missing required flag", &["plan", "--map", &map], 3),
        Case {
            name: "plan hybrid",
            args: plan("4,4,0", "6,3,1.57", &["--svg", &svg]),
            expected: 0,
        },
        Case {
            name: "plan 2d",
            args: plan("4,4,0", "6,3,1.57", &["--planner", "2d"]),
            expected: 0,
        },
        Case {
            name: "plan reversing with any goal heading",
            args: plan("4,4,0", "3,4,0", &["--reverse", "--goal-mode", "any", "--smooth"]),
            expected: 0,
        },
        Case {
            name: "plan into closed box",
            args: plan("4,4,0", "8,8,0", &[]),
            expected: 2,
        },
        Case {
            name: "plan from inside obstacle",
            args: plan("1.5,1.5,0", "4,4,0", &[]),
            expected: 3,
        },
        Case {
            name: "plan goal off map",
            args: plan("4,4,0", "40,4,0", &[]),
            expected: 3,
        },
        Case {
            name: "plan malformed pose",
            args: plan("4,4", "6,3,0", &[]),
            expected: 3,
        },
        Case {
            name: "plan negative alpha",
            args: plan("4,4,0", "6,3,0", &["--alpha", "-1"]),
            expected: 3,
        },
        Case {
            name: "plan unknown planner",
            args: plan("4,4,0", "6,3,0", &["--planner", "rrt"]),
            expected: 3,
        },
        case(
            "plan missing map",
            &[
                "plan", "--map", &missing, "--start", "1,1,0", "--goal", "2,2,0", "--out", &out,
            ],
            3,
        ),
        case(
            "genlattice",
            &["genlattice", "--radius", "0.4", "--resolution", "0.05", "--out", &cs],
            0,
        ),
        case(
            "genlattice zero radius",
            &["genlattice", "--radius", "0", "--out", &cs],
            3,
        ),
    ];
    let mut lattice = plan("4,4,0", "6,3,1.57", &["--planner", "lattice", "--control-set"]);
    lattice.push(cs.clone());
    cases.push(Case {
        name: "plan lattice from file",
        args: lattice,
        expected: 0,
    });
    let mut wrong = plan("4,4,0", "6,3,1.57", &["--planner", "lattice", "--control-set"]);
    wrong.push(garbage.clone());
    cases.push(Case {
        name: "plan lattice with malformed control set",
        args: wrong,
        expected: 3,
    });
    cases.extend([
        case(
            "render svg",
            &["render", "--map", &map, "--paths", &out, "--out", &render_svg],
            0,
        ),
        case(
            "render ppm",
            &["render", "--map", &map, "--paths", &out, "--out", &render_ppm],
            0,
        ),
        case(
            "render malformed path",
            &["render", "--map", &map, "--paths", &garbage, "--out", &render_svg],
            3,
        ),
        case(
            "render unwritable output",
            &[
                "render",
                "--map",
                &map,
                "--paths",
                &out,
                "--out",
                "/nonexistent/dir/r.svg",
            ],
            3,
        ),
        case(
            "bench small",
            &[
                "bench",
                "--size",
                "12",
                "--pairs",
                "2",
                "--densities",
                "0.1",
                "--planners",
                "2d,hybrid",
                "--csv",
                &d("b.csv"),
            ],
            0,
        ),
        case("bench bad density", &["bench", "--densities", "1.5"], 3),
    ]);
    cases
}

/// Runs the cases in order; later cases read files earlier ones wrote.
pub fn run_matrix(cases: &[Case]) -> Vec<Outcome> {
    cases
        .iter()
        .map(|c| {
            let out = kinoplan().args(&c.args).output().expect("binary runs");
            Outcome {
                name: c.name,
                expected: c.expected,
                got: out.status.code(),
                stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
            }
        })
        .collect()
}
