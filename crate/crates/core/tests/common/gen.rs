//! Seeded generators for random methods, programs and dependence graphs.

use privslice::graph::{Adg, AdgEdge, AdgNode, EdgeKind};
use privslice::ir::{MethodId, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const VARS: u32 = 5;

fn var(r: &mut ChaCha8Rng) -> String {
    format!("r{}", r.gen_range(0..VARS))
}

const EXTERNAL: &[&str] = &[
    "android.location.LocationManager.getLastKnownLocation",
    "android.telephony.TelephonyManager.getDeviceId",
    "com.google.android.gms.auth.api.signin.GoogleSignInAccount.getEmail",
    "java.security.MessageDigest.getInstance",
    "javax.crypto.Cipher.doFinal",
    "com.google.firebase.analytics.FirebaseAnalytics.logEvent",
    "android.content.SharedPreferences.Editor.putString",
    "java.lang.String.substring",
    "java.util.List.add",
    "com.example.Unknown.call",
];

/// Straight-line statement without control flow.
fn simple_stmt(r: &mut ChaCha8Rng, rich: Option<&RichCtx>) -> String {
    let top = if rich.is_some() { 11 } else { 6 };
    match r.gen_range(0..top) {
        0 => format!("{} = {}", var(r), r.gen_range(-3..10)),
        1 => format!("{} = \"{}\"", var(r), ["MD5", "x", "SHA-1", "gps"].choose(r).unwrap()),
        2 => format!("{} = {}", var(r), var(r)),
        3 => format!("{} = {} {} {}", var(r), var(r), ["+", "-", "*", "/", "concat"].choose(r).unwrap(), var(r)),
        4 => format!("{} = call com.example.Lib.f({})", var(r), var(r)),
        5 => format!("call com.example.Lib.g({}, {})", var(r), var(r)),
        6 | 7 => {
            let sig = EXTERNAL.choose(r).unwrap();
            let args = (0..r.gen_range(0..3)).map(|_| var(r)).collect::<Vec<_>>().join(", ");
            if r.gen_bool(0.7) {
                format!("{} = call {sig}({args})", var(r))
            } else {
                format!("call {sig}({args})")
            }
        }
        8 => format!("{} = vcall {}.{}({})", var(r), var(r), ["digest", "doFinal", "run"].choose(r).unwrap(), var(r)),
        9 => {
            let ctx = rich.unwrap();
            let target = ctx.methods.choose(r).unwrap();
            format!("{} = call {target}({})", var(r), var(r))
        }
        _ => {
            let ctx = rich.unwrap();
            if ctx.params > 0 && r.gen_bool(0.5) {
                format!("{} = param {}", var(r), r.gen_range(0..ctx.params))
            } else {
                format!("{} = uiread \"{}\"", var(r), ["email", "nick", "zip"].choose(r).unwrap())
            }
        }
    }
}

struct RichCtx {
    methods: Vec<String>,
    params: usize,
}

/// A method body of at most 12 statements with at most two forward branches and at
/// most one loop. Labels are not counted as statements.
fn body(r: &mut ChaCha8Rng, rich: Option<&RichCtx>) -> Vec<String> {
    let branches = r.gen_range(0..=2usize);
    let loops = r.gen_range(0..=1usize);
    let simple = r.gen_range(1..=12 - branches - loops);
    let mut labels_at: Vec<Vec<String>> = vec![Vec::new(); simple + 1];
    let mut jumps_at: Vec<Vec<String>> = vec![Vec::new(); simple + 1];
    let cond = |r: &mut ChaCha8Rng, label: &str| {
        let op = ["==", "!=", "<", "<=", ">", ">="].choose(r).unwrap();
        if r.gen_bool(0.15) {
            format!("goto {label}")
        } else {
            format!("if {} {op} {} goto {label}", var(r), r.gen_range(0..4))
        }
    };
    for b in 0..branches {
        let from = r.gen_range(0..simple);
        let to = r.gen_range(from + 1..=simple);
        let label = format!("F{b}");
        jumps_at[from].push(cond(r, &label));
        labels_at[to].push(label);
    }
    if loops == 1 {
        let head = r.gen_range(0..simple);
        let back = r.gen_range(head..=simple);
        let label = "LOOP".to_string();
        let op = ["<", "!=", "<="].choose(r).unwrap();
        jumps_at[back].push(format!("if {} {op} {} goto {label}", var(r), r.gen_range(0..4)));
        labels_at[head].push(label);
    }
    let mut out = Vec::new();
    for k in 0..=simple {
        out.extend(labels_at[k].iter().map(|l| format!("{l}:")));
        out.append(&mut jumps_at[k]);
        if k < simple {
            if rich.is_some() && r.gen_bool(0.05) {
                out.push(format!("return {}", var(r)));
            } else {
                out.push(simple_stmt(r, rich));
            }
        }
    }
    out
}

/// Program text with a single method `A.m` holding a random body.
pub fn random_method_program(seed: u64) -> String {
    let mut r = rng(seed);
    let lines = body(&mut r, None);
    format!("app \"rand{seed}\"\nclass A {{\n  method m(0) {{\n    {}\n  }}\n}}\n", lines.join("\n    "))
}

/// Several classes calling each other and dataset APIs, with a small layout.
pub fn random_program(seed: u64) -> String {
    let mut r = rng(seed);
    let classes = r.gen_range(1..=3);
    let mut methods = Vec::new();
    for c in 0..classes {
        for k in 0..r.gen_range(1..=2) {
            methods.push((format!("app.C{c}"), format!("m{k}"), r.gen_range(0..=2usize)));
        }
    }
    let ctx_methods: Vec<String> = methods.iter().map(|(c, m, _)| format!("{c}.{m}")).collect();
    let mut text = format!("app \"prog{seed}\"\n");
    text.push_str(
        "layout {\n  field id=\"email\" hint=\"E-mail\" type=\"text\"\n  field id=\"nick\" hint=\"Nickname\" type=\"text\"\n  field id=\"zip\" hint=\"ZIP\" type=\"number\"\n}\n",
    );
    for c in 0..classes {
        let cls = format!("app.C{c}");
        let ext = if c > 0 && r.gen_bool(0.4) { " extends app.C0".to_string() } else { String::new() };
        text.push_str(&format!("class {cls}{ext} {{\n"));
        for (_, m, params) in methods.iter().filter(|(owner, _, _)| *owner == cls) {
            let ctx = RichCtx { methods: ctx_methods.clone(), params: *params };
            let lines = body(&mut r, Some(&ctx));
            text.push_str(&format!("  method {m}({params}) {{\n    {}\n  }}\n", lines.join("\n    ")));
        }
        text.push_str("}\n");
    }
    text
}

/// Random graph with at most 40 nodes spread over three methods, plus seed nodes.
pub fn random_adg(seed: u64) -> (Adg, Vec<AdgNode>) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=40usize);
    let nodes: Vec<AdgNode> = (0..n)
        .map(|i| if i % 7 == 0 { AdgNode::entry(MethodId(i)) } else { AdgNode::stmt(MethodId(i % 3), i) })
        .collect();
    let m = r.gen_range(0..=2 * n);
    let edges: Vec<AdgEdge> = (0..m)
        .map(|_| {
            let kind = *EdgeKind::ALL.choose(&mut r).unwrap();
            let var = (kind != EdgeKind::Ctrl && kind != EdgeKind::Call).then(|| Var(r.gen_range(0..4)));
            AdgEdge { kind, from: *nodes.choose(&mut r).unwrap(), to: *nodes.choose(&mut r).unwrap(), var }
        })
        .collect();
    let seeds: Vec<AdgNode> = nodes.iter().copied().filter(|_| r.gen_bool(0.1)).collect();
    (Adg::from_parts(nodes, edges), seeds)
}
