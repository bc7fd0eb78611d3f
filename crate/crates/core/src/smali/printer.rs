use std::fmt::Write;

use super::{ClassDef, Literal, MethodDef, Op};

/// Canonical smali text for a class. Parsing the output yields a structurally
/// equal [`ClassDef`] (file line numbers aside).
pub fn print_class(class: &ClassDef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, ".class {}", join_flags(&class.flags, &class.name));
    if let Some(s) = &class.superclass {
        let _ = writeln!(out, ".super {s}");
    }
    if let Some(s) = &class.source_file {
        let _ = writeln!(out, ".source {}", quote(s));
    }
    for i in &class.interfaces {
        let _ = writeln!(out, ".implements {i}");
    }
    for f in &class.fields {
        let _ = write!(out, "\n.field {}", join_flags(&f.flags, &format!("{}:{}", f.name, f.ty)));
        if let Some(init) = &f.initial {
            let _ = write!(out, " = {}", literal(init));
        }
        out.push('\n');
    }
    for m in &class.methods {
        out.push('\n');
        print_method(&mut out, m);
    }
    out
}

fn print_method(out: &mut String, m: &MethodDef) {
    let _ = writeln!(out, ".method {}", join_flags(&m.flags, &format!("{}{}", m.name, m.descriptor)));
    let _ = writeln!(out, "    .registers {}", m.register_count);

    let mut by_index: Vec<Vec<&str>> = vec![Vec::new(); m.instructions.len() + 1];
    for (label, &idx) in &m.labels {
        if let Some(v) = by_index.get_mut(idx) {
            v.push(label);
        }
    }

    let mut line: Option<u32> = None;
    for (i, ins) in m.instructions.iter().enumerate() {
        if ins.java_line != line {
            if let Some(l) = ins.java_line {
                let _ = writeln!(out, "    .line {l}");
            }
            line = ins.java_line;
        }
        for l in &by_index[i] {
            let _ = writeln!(out, "    :{l}");
        }
        let _ = writeln!(out, "    {}", op_text(&ins.op, m));
    }
    for tb in &m.try_blocks {
        match &tb.exception {
            Some(e) => {
                let _ = writeln!(out, "    .catch {e} {{:{} .. :{}}} :{}", tb.start, tb.end, tb.handler);
            }
            None => {
                let _ = writeln!(out, "    .catchall {{:{} .. :{}}} :{}", tb.start, tb.end, tb.handler);
            }
        }
    }
    for (label, p) in &m.switch_payloads {
        let _ = writeln!(out, "    :{label}");
        if p.packed {
            let base = p.targets.first().map(|t| t.0).unwrap_or(0);
            let _ = writeln!(out, "    .packed-switch {}", hex(base));
            for (_, t) in &p.targets {
                let _ = writeln!(out, "        :{t}");
            }
            let _ = writeln!(out, "    .end packed-switch");
        } else {
            let _ = writeln!(out, "    .sparse-switch");
            for (k, t) in &p.targets {
                let _ = writeln!(out, "        {} -> :{t}", hex(*k));
            }
            let _ = writeln!(out, "    .end sparse-switch");
        }
    }
    for (label, values) in &m.array_payloads {
        let _ = writeln!(out, "    :{label}");
        let _ = writeln!(out, "    .array-data 8");
        for v in values {
            let _ = writeln!(out, "        {}", hex(*v));
        }
        let _ = writeln!(out, "    .end array-data");
    }
    // labels past the last instruction go after payloads so they are not
    // mistaken for payload labels on re-parse
    for l in &by_index[m.instructions.len()] {
        let _ = writeln!(out, "    :{l}");
    }
    out.push_str(".end method\n");
}

fn op_text(op: &Op, m: &MethodDef) -> String {
    let r = |r: &u16| format!("v{r}");
    let list = |rs: &[u16]| format!("{{{}}}", rs.iter().map(r).collect::<Vec<_>>().join(", "));
    match op {
        Op::Nop => "nop".into(),
        Op::Move { dst, src, wide } => format!("{} {}, {}", if *wide { "move-wide" } else { "move" }, r(dst), r(src)),
        Op::MoveResult { dst, wide } => {
            format!("{} {}", if *wide { "move-result-wide" } else { "move-result" }, r(dst))
        }
        Op::MoveException { dst } => format!("move-exception {}", r(dst)),
        Op::Return { src: None } => "return-void".into(),
        Op::Return { src: Some(s) } => format!("return {}", r(s)),
        Op::Const { dst, value, wide } => {
            format!("{} {}, {}", if *wide { "const-wide" } else { "const" }, r(dst), hex(*value))
        }
        Op::ConstString { dst, value } => format!("const-string {}, {}", r(dst), quote(value)),
        Op::ConstClass { dst, class } => format!("const-class {}, {class}", r(dst)),
        Op::CheckCast { reg, ty } => format!("check-cast {}, {ty}", r(reg)),
        Op::InstanceOf { dst, src, ty } => format!("instance-of {}, {}, {ty}", r(dst), r(src)),
        Op::ArrayLength { dst, array } => format!("array-length {}, {}", r(dst), r(array)),
        Op::NewInstance { dst, class } => format!("new-instance {}, {class}", r(dst)),
        Op::NewArray { dst, size, ty } => format!("new-array {}, {}, {ty}", r(dst), r(size)),
        Op::FilledNewArray { args, ty } => format!("filled-new-array {}, {ty}", list(args)),
        Op::FillArrayData { array, payload } => format!("fill-array-data {}, :{payload}", r(array)),
        Op::Throw { src } => format!("throw {}", r(src)),
        Op::Goto { target } => format!("goto :{target}"),
        Op::Switch { src, payload } => {
            let packed = m.switch_payloads.get(payload).is_none_or(|p| p.packed);
            let mnemonic = if packed { "packed-switch" } else { "sparse-switch" };
            format!("{mnemonic} {}, :{payload}", r(src))
        }
        Op::If { cond, a, b: Some(b), target } => format!("if-{cond} {}, {}, :{target}", r(a), r(b)),
        Op::If { cond, a, b: None, target } => format!("if-{cond} {}, :{target}", r(a)),
        Op::ArrayGet { dst, array, index } => format!("aget {}, {}, {}", r(dst), r(array), r(index)),
        Op::ArrayPut { src, array, index } => format!("aput {}, {}, {}", r(src), r(array), r(index)),
        Op::InstanceGet { dst, object, field } => format!("iget {}, {}, {field}", r(dst), r(object)),
        Op::InstancePut { src, object, field } => format!("iput {}, {}, {field}", r(src), r(object)),
        Op::StaticGet { dst, field } => format!("sget {}, {field}", r(dst)),
        Op::StaticPut { src, field } => format!("sput {}, {field}", r(src)),
        Op::Invoke { kind, args, method } => format!("{} {}, {method}", kind.mnemonic(), list(args)),
        Op::Unary { op, dst, src } => format!("{op} {}, {}", r(dst), r(src)),
        Op::Binary { op, dst, a, b } => format!("{op} {}, {}, {}", r(dst), r(a), r(b)),
        Op::BinaryLit { op, dst, src, lit } => format!("{op}/lit16 {}, {}, {}", r(dst), r(src), hex(*lit)),
        Op::Opaque { opcode, operands } if operands.is_empty() => opcode.clone(),
        Op::Opaque { opcode, operands } => format!("{opcode} {operands}"),
    }
}

fn join_flags(flags: &[String], last: &str) -> String {
    let mut parts: Vec<&str> = flags.iter().map(String::as_str).collect();
    parts.push(last);
    parts.join(" ")
}

fn hex(v: i64) -> String {
    if v < 0 {
        format!("-{:#x}", v.unsigned_abs())
    } else {
        format!("{v:#x}")
    }
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(i) => hex(*i),
        Literal::Str(s) => quote(s),
        Literal::Bool(b) => b.to_string(),
        Literal::Null => "null".into(),
        Literal::Raw(s) => s.clone(),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
