//! Hidden machines behind the simulated SULs, with their proposition maps.
//!
//! Each transition row carries a provenance tag:
//! - `Listing`: taken from a hand-written system actor;
//! - `Table`: forced by the semantics of the proposition map;
//! - `Synth`: chosen so the expected verdicts come out.

use std::collections::BTreeMap;

use crate::automata::MealyMachine;
use crate::cpm::{parse_cpm, Cpm};
use crate::learning::{MachineSul, MappedSul, Mapper, NonceSul};

pub const EXAMPLE_CPM: &str = include_str!("../fixtures/example.cpm");
/// Expected Rebeca text for the example.
pub const EXAMPLE_REBECA: &str = include_str!("../fixtures/example.rebeca");
pub const EMRTD_CPM: &str = include_str!("../fixtures/table1_emrtd.cpm");
/// The UDS map exactly as tabulated; see [`UDS_CPM`].
pub const UDS_TABLE_CPM: &str = include_str!("../fixtures/table2_uds.cpm");
/// The UDS map over the fixture's input names.
pub const UDS_CPM: &str = include_str!("../fixtures/uds.cpm");
pub const GENERIC_PROPERTIES: &str = include_str!("../fixtures/generic.ltl");
pub const EMRTD_PROPERTIES: &str = include_str!("../fixtures/emrtd.ltl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Listing,
    Table,
    Synth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub from: &'static str,
    pub input: &'static str,
    pub output: &'static str,
    pub to: &'static str,
    pub provenance: Provenance,
}

/// A fixture machine with its documented rows.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub rows: Vec<Row>,
    pub machine: MealyMachine,
}

fn build(name: &'static str, states: &[&'static str], inputs: &[&'static str], rows: Vec<Row>) -> Fixture {
    let mut b = MealyMachine::builder().initial(states[0]);
    for s in states {
        b = b.state(s);
    }
    for i in inputs {
        b = b.input(i);
    }
    for r in &rows {
        b = b.transition(r.from, r.input, r.output, r.to);
    }
    let machine = b.build().expect("fixture rows are complete and deterministic");
    Fixture { name, rows, machine }
}

/// One row per state, in state order.
fn ladder(
    rows: &mut Vec<Row>,
    states: &[&'static str],
    input: &'static str,
    steps: [(&'static str, usize); 6],
    provenance: Provenance,
) {
    for (k, (output, to)) in steps.into_iter().enumerate() {
        rows.push(Row { from: states[k], input, output, to: states[to], provenance });
    }
}

/// The two-state illustrative model.
pub fn example() -> Fixture {
    let rows = vec![
        Row { from: "q1", input: "sigma1", output: "omega1", to: "q2", provenance: Provenance::Listing },
        Row { from: "q2", input: "sigma1", output: "omega2", to: "q1", provenance: Provenance::Listing },
    ];
    build("example", &["q1", "q2"], &["sigma1"], rows)
}

pub fn example_cpm() -> Cpm {
    parse_cpm(EXAMPLE_CPM).expect("fixture parses")
}

pub const EMRTD_INPUTS: &[&str] = &[
    "SEL_EF_CA_CVCA",
    "SEL_DF_LDS1",
    "SEL_EF_COM",
    "SEL_EF_CS_SOD",
    "SEL_EF_ATR",
    "SEL_EF_DIR",
    "SEL_EF_DG1",
    "SEL_EF_DG2",
    "SEL_EF_DG3",
    "RD_BIN",
    "UPD_BIN",
    "SRD_BIN",
    "SUPD_BIN",
    "WS_SRD_BIN",
    "OS_SRD_BIN",
    "WS_SUPD_BIN",
    "OS_SUPD_BIN",
    "BAC",
    "SSEL_DF_LDS1",
    "SSEL_EF_COM",
    "SSEL_EF_DG1",
    "SSEL_EF_DG2",
    "SSEL_EF_DG3",
    "SSEL_EF_DG14",
    "WS_SSEL_EF_DG1",
    "OS_SSEL_EF_DG1",
];

/// Travel document with six states:
/// - `0` nothing selected, labels {};
/// - `1` LDS1 application selected, {DF, PROT};
/// - `2` as 1 after BAC, {DF, PROT, AUTH};
/// - `3` a file outside LDS1 selected, {EF};
/// - `4` a file inside LDS1 securely selected, {DF, PROT, AUTH, EF};
/// - `5` as 4 after the session broke, {DF, PROT, EF}.
///
/// Errors on file or binary commands end the secure session, which moves
/// 2 to 1 and 4 to 5. Plain selects inside LDS1 are refused, critical data
/// groups are never selectable, and keyed variants with a wrong or old key
/// always fail.
pub fn emrtd() -> Fixture {
    use Provenance::*;
    let s: &[&'static str] = &["0", "1", "2", "3", "4", "5"];
    let mut rows = Vec::new();
    // plain selects of files outside LDS1
    for input in ["SEL_EF_CA_CVCA", "SEL_EF_CS_SOD", "SEL_EF_ATR", "SEL_EF_DIR"] {
        let steps = [("9000", 3), ("6982", 1), ("6988", 1), ("9000", 3), ("6988", 5), ("6A82", 5)];
        ladder(&mut rows, s, input, steps, Synth);
    }
    ladder(&mut rows, s, "SEL_DF_LDS1", [("9000", 1); 6], Listing);
    // plain selects of files inside LDS1
    for input in ["SEL_EF_COM", "SEL_EF_DG1", "SEL_EF_DG2", "SEL_EF_DG3"] {
        let steps = [("6A82", 0), ("6982", 1), ("6988", 1), ("6A82", 3), ("6988", 5), ("6982", 5)];
        ladder(&mut rows, s, input, steps, Synth);
    }
    let steps = [("6986", 0), ("6986", 1), ("6986", 1), ("9000", 3), ("6982", 5), ("6982", 5)];
    ladder(&mut rows, s, "RD_BIN", steps, Listing);
    let steps = [("6986", 0), ("6986", 1), ("6986", 1), ("6982", 3), ("6982", 5), ("6982", 5)];
    ladder(&mut rows, s, "UPD_BIN", steps, Synth);
    let steps = [("6988", 0), ("6988", 1), ("6986", 1), ("6988", 3), ("9000", 4), ("6988", 5)];
    ladder(&mut rows, s, "SRD_BIN", steps, Synth);
    let steps = [("6988", 0), ("6988", 1), ("6986", 1), ("6988", 3), ("6982", 5), ("6988", 5)];
    ladder(&mut rows, s, "SUPD_BIN", steps, Synth);
    for input in ["WS_SRD_BIN", "OS_SRD_BIN", "WS_SUPD_BIN", "OS_SUPD_BIN", "WS_SSEL_EF_DG1", "OS_SSEL_EF_DG1"] {
        let steps = [("6988", 0), ("6988", 1), ("6988", 1), ("6988", 3), ("6988", 5), ("6988", 5)];
        ladder(&mut rows, s, input, steps, Table);
    }
    let steps = [("6985", 0), ("9000", 2), ("9000", 2), ("6985", 3), ("9000", 4), ("9000", 4)];
    ladder(&mut rows, s, "BAC", steps, Listing);
    let steps = [("6988", 0), ("6988", 1), ("9000", 1), ("6988", 3), ("9000", 1), ("6988", 5)];
    ladder(&mut rows, s, "SSEL_DF_LDS1", steps, Synth);
    let steps = [("6988", 0), ("6988", 1), ("9000", 4), ("6988", 3), ("9000", 4), ("6988", 5)];
    ladder(&mut rows, s, "SSEL_EF_DG1", steps, Listing);
    for input in ["SSEL_EF_COM", "SSEL_EF_DG14"] {
        ladder(&mut rows, s, input, steps, Synth);
    }
    // biometric groups need an authentication this document never grants
    for input in ["SSEL_EF_DG2", "SSEL_EF_DG3"] {
        let steps = [("6988", 0), ("6988", 1), ("6982", 1), ("6988", 3), ("6982", 5), ("6988", 5)];
        ladder(&mut rows, s, input, steps, Table);
    }
    build("emrtd", s, EMRTD_INPUTS, rows)
}

pub fn emrtd_cpm() -> Cpm {
    parse_cpm(EMRTD_CPM).expect("fixture parses")
}

pub const UDS_INPUTS: &[&str] = &[
    "Default",
    "Programming",
    "Extended",
    "SA",
    "SAwKey",
    "SAwWrongKey",
    "TesterPresent",
    "ReadDID",
    "ReadMemory",
    "RequestDownload",
    "CheckASWBit",
    "ClearDTC",
];

/// State of the UDS fixture that is authenticated in the extended session
/// and accepts a wrong key.
pub const UDS_WRONG_KEY_STATE: &str = "s3";

/// Diagnostic ECU with seven states:
/// - `s0` default session, {};
/// - `s1` extended session, {EXT};
/// - `s2` extended session with a seed issued, {EXT};
/// - `s3` extended session, authenticated, {EXT, AUTH};
/// - `s4` programming session, {PROG};
/// - `s5` programming session with a seed issued, {PROG};
/// - `s6` programming session, authenticated, {PROG, AUTH}.
///
/// In `s3` a wrong key is answered positively; that is the one planted flaw.
pub fn uds() -> Fixture {
    uds_variant(false)
}

/// [`uds`] with the wrong key rejected in `s3`.
pub fn uds_patched() -> Fixture {
    uds_variant(true)
}

fn uds_variant(patched: bool) -> Fixture {
    use Provenance::*;
    let s: &[&'static str] = &["s0", "s1", "s2", "s3", "s4", "s5", "s6"];
    let mut rows = Vec::new();
    let mut row = |from: usize, input, output, to: usize, provenance| {
        rows.push(Row { from: s[from], input, output, to: s[to], provenance })
    };
    for q in 0..7 {
        row(q, "Default", "5001", 0, Table);
        if q <= 3 {
            row(q, "Extended", "5003", 1, Table);
        } else {
            row(q, "Extended", "7f", q, Synth);
        }
        match q {
            0 => row(q, "Programming", "7f", 0, Synth),
            _ => row(q, "Programming", "5002", 4, Table),
        }
        match q {
            0 => row(q, "SA", "7f", 0, Synth),
            1 | 2 => row(q, "SA", "67", 2, Table),
            4 | 5 => row(q, "SA", "67", 5, Table),
            _ => row(q, "SA", "67", q, Synth),
        }
        match q {
            2 => row(q, "SAwKey", "67", 3, Table),
            5 => row(q, "SAwKey", "67", 6, Table),
            3 => row(q, "SAwKey", "7f", 1, Synth),
            6 => row(q, "SAwKey", "7f", 4, Synth),
            _ => row(q, "SAwKey", "7f", q, Synth),
        }
        match q {
            3 if !patched => row(q, "SAwWrongKey", "67", 3, Synth),
            3 | 2 => row(q, "SAwWrongKey", "7f", 1, Table),
            5 | 6 => row(q, "SAwWrongKey", "7f", 4, Table),
            _ => row(q, "SAwWrongKey", "7f", q, Table),
        }
        row(q, "TesterPresent", "7e", q, Synth);
        row(q, "ReadDID", "62", q, Synth);
        row(q, "ClearDTC", "54", q, Synth);
        let auth = q == 3 || q == 6;
        row(q, "ReadMemory", if auth { "63" } else { "7f" }, q, Synth);
        row(q, "CheckASWBit", if auth { "71" } else { "7f" }, q, Synth);
        row(q, "RequestDownload", if q == 6 { "74" } else { "7f" }, q, Synth);
    }
    build(if patched { "uds-patched" } else { "uds" }, s, UDS_INPUTS, rows)
}

pub fn uds_cpm() -> Cpm {
    parse_cpm(UDS_CPM).expect("fixture parses")
}

/// Separator between the positive response and the seed on the raw bus.
pub const SEED_SEPARATOR: &str = "_01_";

/// Maps `67_01_<seed>` responses back to `67`.
pub fn uds_mapper() -> Mapper {
    Mapper {
        inputs: BTreeMap::new(),
        nondeterministic: vec![(format!("67{SEED_SEPARATOR}*"), "67".into())],
    }
}

/// The raw ECU: every seed request answers with a fresh seed.
pub fn uds_raw_sul(f: &Fixture) -> NonceSul<MachineSul> {
    NonceSul::new(
        MachineSul::new(f.machine.clone()),
        vec![("SA".into(), "67".into(), SEED_SEPARATOR.into())],
    )
}

/// The ECU behind the seed mapper, as the learner sees it.
pub fn uds_sul(f: &Fixture) -> MappedSul<NonceSul<MachineSul>> {
    MappedSul::new(uds_raw_sul(f), uds_mapper())
}

/// Fixture lookup by name.
pub fn by_name(name: &str) -> Option<Fixture> {
    match name {
        "example" => Some(example()),
        "emrtd" => Some(emrtd()),
        "uds" => Some(uds()),
        "uds-patched" => Some(uds_patched()),
        _ => None,
    }
}

/// The proposition map belonging to a fixture.
pub fn cpm_for(name: &str) -> Option<Cpm> {
    match name {
        "example" => Some(example_cpm()),
        "emrtd" => Some(emrtd_cpm()),
        "uds" | "uds-patched" => Some(uds_cpm()),
        _ => None,
    }
}
