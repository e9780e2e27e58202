//! End-to-end checks of the command-line interface, exercising the binary
//! the way a user would: assemble, run, trace, IDEA jobs, the performance
//! commands, and every exit-code path.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TEST_KEY: &str = "00010002000300040005000600070008";
const TEST_PLAIN: &str = "0000000100020003";
const TEST_CIPHER: &str = "11FBED2B01986DE5";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_idea-asip"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn assemble_run_disassemble_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("prog.asm"),
        "lwi $1,6\nlwi $2,7\nmul $3,$1,$2\nsw $3,0($0)\nhalt\n",
    )
    .unwrap();

    let out = run_in(dir.path(), &["assemble", "prog.asm", "-o", "prog.hex"]);
    assert_eq!(code(&out), 0, "{out:?}");

    let out = run_in(dir.path(), &["run", "prog.hex"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "cycles: 5\n");

    let out = run_in(dir.path(), &["disassemble", "prog.hex"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "lwi $1,0x0006\nlwi $2,0x0007\nmul $3,$1,$2\nsw $3,0x0000($0)\nhalt\n"
    );
}

#[test]
fn run_halt_only_program() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.asm"), "halt\n").unwrap();
    run_in(dir.path(), &["assemble", "empty.asm", "-o", "empty.hex"]);
    let out = run_in(dir.path(), &["run", "empty.hex"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "cycles: 1\n");
}

#[test]
fn run_with_data_image_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.asm"), "lw $1,0($0)\ninc $2,$1\nsw $2,1($0)\nhalt\n").unwrap();
    fs::write(dir.path().join("d.hex"), "00ff\n").unwrap();
    run_in(dir.path(), &["assemble", "p.asm", "-o", "p.hex"]);
    let out = run_in(
        dir.path(),
        &["run", "p.hex", "--data", "d.hex", "--trace", "t.csv"],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "cycles: 4\n");
    let trace = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "cycle,pc,raw,disassembly,reg_write,mem_write,flags,pc_next");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].contains("\"lw $1,0x0000($0)\""));
    assert!(lines[3].contains("[0001]:0000->0100"));
}

#[test]
fn trace_command_streams_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.asm"), "lwi $1,0x1234\nhalt\n").unwrap();
    run_in(dir.path(), &["assemble", "p.asm", "-o", "p.hex"]);
    let out = run_in(dir.path(), &["trace", "p.hex"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("cycle,pc,raw,"));
    assert!(text.contains("\"lwi $1,0x1234\""));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn idea_both_reproduces_published_vector() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["idea", "--key", TEST_KEY, "--in", TEST_PLAIN, "--direction", "enc", "--both"],
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(stdout(&out), format!("{TEST_CIPHER}\n"));

    let out = run_in(
        dir.path(),
        &["idea", "--key", TEST_KEY, "--in", TEST_CIPHER, "--direction", "dec", "--both"],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), format!("{TEST_PLAIN}\n"));
}

#[test]
fn idea_oracle_and_simulator_agree_on_multiple_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let input = format!("{TEST_PLAIN}{TEST_CIPHER}");
    let args_base = ["idea", "--key", TEST_KEY, "--in", &input, "--direction", "enc"];
    let oracle = run_in(dir.path(), &args_base);
    let mut sim_args = args_base.to_vec();
    sim_args.push("--on-simulator");
    let sim = run_in(dir.path(), &sim_args);
    assert_eq!(code(&oracle), 0);
    assert_eq!(code(&sim), 0);
    assert_eq!(stdout(&oracle), stdout(&sim));
    assert_eq!(stdout(&oracle).trim().len(), 32);
}

#[test]
fn keyschedule_lists_52_subkeys() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["keyschedule", "--key", TEST_KEY]);
    assert_eq!(code(&out), 0);
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 52);
    assert_eq!(lines[0], "0001");
    assert_eq!(lines[8], "0400");

    let out = run_in(dir.path(), &["keyschedule", "--key", TEST_KEY, "--invert"]);
    let inverted: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(inverted.len(), 52);
    // The first decryption subkey must be the multiplicative inverse of the
    // ninth round's K1; brute-force the inverse from the plain schedule.
    let k = u64::from_str_radix(&lines[48], 16).unwrap();
    let k = if k == 0 { 65536 } else { k };
    let inv = (0..=65535u64)
        .find(|y| {
            let y = if *y == 0 { 65536 } else { *y };
            k * y % 65537 == 1
        })
        .unwrap();
    assert_eq!(u64::from_str_radix(&inverted[0], 16).unwrap(), inv);
}

#[test]
fn bench_prints_published_throughputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["bench"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("5.578 Mbps"), "{text}");
    assert!(text.contains("5.669 Mbps"), "{text}");
}

#[test]
fn fig10_emits_affine_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["fig10", "--blocks", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "blocks,proposed_ns,previous_ns");
    assert_eq!(lines[1], "1,21906.442,11836.000");
    assert_eq!(lines.len(), 4);

    let out = run_in(dir.path(), &["fig10", "--blocks", "2", "-o", "curve.csv"]);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("curve.csv").exists());
}

#[test]
fn user_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["run", "missing.hex"],
        &["assemble", "missing.asm", "-o", "out.hex"],
        &["idea", "--key", "123", "--in", TEST_PLAIN, "--direction", "enc"],
        &["idea", "--key", TEST_KEY, "--in", "1234", "--direction", "enc"],
        &["idea", "--key", TEST_KEY, "--in", TEST_PLAIN, "--direction", "sideways"],
        &["keyschedule", "--key", "xyz"],
        &["fig10", "--blocks", "0"],
        &["no-such-command"],
    ];
    for args in cases {
        let out = run_in(dir.path(), args);
        assert_eq!(code(&out), 1, "args {args:?}: {out:?}");
    }
    // Bad assembly source also reports line numbers on stderr.
    fs::write(dir.path().join("bad.asm"), "halt\nnop\n").unwrap();
    let out = run_in(dir.path(), &["assemble", "bad.asm", "-o", "bad.hex"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn machine_fault_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("div0.asm"), "lwi $1,9\ndiv $2,$1,$0\nhalt\n").unwrap();
    run_in(dir.path(), &["assemble", "div0.asm", "-o", "div0.hex"]);
    let out = run_in(dir.path(), &["run", "div0.hex"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("division by zero"));

    let out = run_in(dir.path(), &["trace", "div0.hex"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn shipped_program_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let asm = concat!(env!("CARGO_MANIFEST_DIR"), "/../../programs/idea_encrypt.asm");
    let out = run_in(
        dir.path(),
        &["assemble", asm, "-o", "enc.hex", "--data-out", "enc.data.hex"],
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let out = run_in(dir.path(), &["run", "enc.hex", "--data", "enc.data.hex"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("cycles: "), "{out:?}");
}

#[test]
fn max_cycles_stops_nonterminating_programs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("loop.asm"), "j 0\n").unwrap();
    run_in(dir.path(), &["assemble", "loop.asm", "-o", "loop.hex"]);
    let out = run_in(dir.path(), &["run", "loop.hex", "--max-cycles", "50"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "cycles: 50\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("without halting"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["idea", "--key", TEST_KEY, "--in", TEST_PLAIN, "--direction", "enc", "--on-simulator"];
    let a = run_in(dir.path(), &args);
    let b = run_in(dir.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    let a = run_in(dir.path(), &["fig10", "--blocks", "16"]);
    let b = run_in(dir.path(), &["fig10", "--blocks", "16"]);
    assert_eq!(a.stdout, b.stdout);
}
